//! TOML configuration files and flag/file merging.
//!
//! ```toml
//! seed = 7
//!
//! [sweep]
//! n = 64
//! N = [512, 1024, 2048, 4096]
//! nu = 0.5
//! trials = 50
//! methods = ["null", "spectral"]
//! out = "results"
//!
//! [validate.wishart]
//! trials = 200
//! ```
//!
//! Flags override the subcommand's table, which overrides top-level keys.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;

/// `N` may be a single count or a list.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CountList {
    One(usize),
    Many(Vec<usize>),
}

impl CountList {
    pub fn into_vec(self) -> Vec<usize> {
        match self {
            CountList::One(v) => vec![v],
            CountList::Many(v) => v,
        }
    }
}

/// Keys accepted in every table.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub seed: Option<u64>,
    pub n: Option<usize>,
    #[serde(rename = "N")]
    pub big_n: Option<CountList>,
    #[serde(rename = "I_size", alias = "I-size")]
    pub i_size: Option<usize>,
    pub sigma: Option<f64>,
    pub nu: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub t: Option<f64>,
    pub c: Option<f64>,
    pub trials: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub index: Option<u64>,
    pub checks: Option<Vec<String>>,
    pub timings: Option<bool>,
    pub order: Option<Box<Section>>,
    pub energy: Option<Box<Section>>,
    pub wishart: Option<Box<Section>>,
}

impl Section {
    /// Fill every unset field of `self` from `fallback`.
    pub fn or(self, fallback: &Section) -> Section {
        Section {
            seed: self.seed.or(fallback.seed),
            n: self.n.or(fallback.n),
            big_n: self.big_n.or_else(|| fallback.big_n.clone()),
            i_size: self.i_size.or(fallback.i_size),
            sigma: self.sigma.or(fallback.sigma),
            nu: self.nu.or(fallback.nu),
            eps: self.eps.or(fallback.eps),
            delta: self.delta.or(fallback.delta),
            t: self.t.or(fallback.t),
            c: self.c.or(fallback.c),
            trials: self.trials.or(fallback.trials),
            methods: self.methods.or_else(|| fallback.methods.clone()),
            out: self.out.or_else(|| fallback.out.clone()),
            workers: self.workers.or(fallback.workers),
            index: self.index.or(fallback.index),
            checks: self.checks.or_else(|| fallback.checks.clone()),
            timings: self.timings.or(fallback.timings),
            order: self.order.or_else(|| fallback.order.clone()),
            energy: self.energy.or_else(|| fallback.energy.clone()),
            wishart: self.wishart.or_else(|| fallback.wishart.clone()),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub bound: Option<Section>,
    pub trial: Option<Section>,
    pub sweep: Option<Section>,
    pub certify: Option<Section>,
    pub validate: Option<Section>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        toml::from_str(text)
            .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", origin.display())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    /// The table for `subcommand` with top-level keys as fallback.
    pub fn section(&self, subcommand: &str) -> Section {
        let table = match subcommand {
            "bound" => self.bound.clone(),
            "trial" => self.trial.clone(),
            "sweep" => self.sweep.clone(),
            "certify" => self.certify.clone(),
            "validate" => self.validate.clone(),
            _ => None,
        };
        table.unwrap_or_default().or(&Section {
            seed: self.seed,
            workers: self.workers,
            ..Section::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_lists() {
        let cfg = ConfigFile::parse(
            r#"
seed = 9
[sweep]
n = 64
N = [512, 1024]
nu = 0.5
methods = ["null"]
[bound]
N = 4096
I_size = 512
[validate.wishart]
trials = 3
"#,
            Path::new("x.toml"),
        )
        .unwrap();
        let s = cfg.section("sweep");
        assert_eq!(s.seed, Some(9));
        assert_eq!(s.big_n.unwrap().into_vec(), vec![512, 1024]);
        assert_eq!(cfg.section("bound").big_n.unwrap().into_vec(), vec![4096]);
        assert_eq!(cfg.section("validate").wishart.unwrap().trials, Some(3));
    }

    #[test]
    fn unknown_key_reports_location() {
        let err =
            ConfigFile::parse("[sweep]\nn = 4\nbogus = 1\n", Path::new("c.toml")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn precedence() {
        let flags = Section {
            n: Some(3),
            ..Section::default()
        };
        let file = Section {
            n: Some(5),
            t: Some(0.2),
            ..Section::default()
        };
        let merged = flags.or(&file);
        assert_eq!(merged.n, Some(3));
        assert_eq!(merged.t, Some(0.2));
    }
}
