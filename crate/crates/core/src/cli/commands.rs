//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::Section;
use super::csvio::{self, fmt_f64};
use super::{CliError, Command, Status};
use crate::bounds::{
    order_stat_check, theorem_error_rhs, theorem_prob_lower, weak_energy_check, wishart_check,
    BoundParams, CheckOutcome, Dims, OrderStatConfig, WeakEnergyConfig, WishartConfig,
};
use crate::estimators::Method;
use crate::harness::{run_sweep, run_trial, BoundOverrides, ExperimentConfig, WeakSizeRule};

pub const DEFAULT_SWEEP_TRIALS: usize = 50;
pub const DEFAULT_CERTIFY_TRIALS: usize = 100;

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn missing(names: &[&str]) -> Result<(), CliError> {
    if names.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "missing required parameters: {} (pass flags or --config)",
            names.join(", ")
        )))
    }
}

pub fn dispatch(cmd: &Command, s: &Section, out: &mut dyn Write) -> Result<Status, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = s.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let mut buf: Vec<u8> = Vec::new();
    let status = pool.install(|| {
        let w: &mut dyn Write = &mut buf;
        match cmd {
            Command::Bound(_) => cmd_bound(s, w),
            Command::Trial(_) => cmd_trial(s, w),
            Command::Sweep(_) => cmd_sweep(s, w),
            Command::Certify(_) => cmd_certify(s, w),
            Command::Validate(flags) => cmd_validate(s, &flags.as_section(), w),
        }
    });
    out.write_all(&buf).map_err(io)?;
    out.flush().map_err(io)?;
    status
}

fn seed(s: &Section) -> u64 {
    s.seed.unwrap_or(0)
}

fn single_n(s: &Section) -> Result<Option<usize>, CliError> {
    match s.big_n.clone().map(|l| l.into_vec()) {
        None => Ok(None),
        Some(v) if v.len() == 1 => Ok(Some(v[0])),
        Some(v) => Err(CliError::Usage(format!(
            "expected a single N, got {} values",
            v.len()
        ))),
    }
}

fn weak_rule(s: &Section) -> Result<WeakSizeRule, CliError> {
    match (s.i_size, s.sigma, s.nu) {
        (Some(k), None, None) => Ok(WeakSizeRule::Fixed(k)),
        (None, Some(sigma), None) => Ok(WeakSizeRule::Fraction(sigma)),
        (None, None, Some(nu)) => {
            if nu > 0.0 {
                Ok(WeakSizeRule::NuFixed(nu))
            } else {
                Err(CliError::Usage(format!("nu must be positive, got {nu}")))
            }
        }
        (None, None, None) => Ok(WeakSizeRule::Fraction(0.5)),
        _ => Err(CliError::Usage(
            "give at most one of --I-size, --sigma, --nu".into(),
        )),
    }
}

fn methods(s: &Section) -> Result<Vec<Method>, CliError> {
    match &s.methods {
        None => Ok(vec![Method::Null, Method::Spectral]),
        Some(list) => list
            .iter()
            .map(|m| m.parse::<Method>().map_err(CliError::from))
            .collect(),
    }
}

fn rule_label(rule: &WeakSizeRule) -> String {
    match rule {
        WeakSizeRule::Fixed(k) => format!("I_size={k}"),
        WeakSizeRule::Fraction(s) => format!("sigma={}", fmt_f64(*s)),
        WeakSizeRule::NuFixed(nu) => format!("nu={}", fmt_f64(*nu)),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn meta(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    let mut v = vec![(
        "tool".to_string(),
        format!("phasecore {}", env!("CARGO_PKG_VERSION")),
    )];
    v.extend(pairs.iter().map(|(k, val)| (k.to_string(), val.clone())));
    v
}

/// Evaluate the error bound and, when `N` and `|I|` are known, the
/// probability terms.
pub fn cmd_bound(s: &Section, out: &mut dyn Write) -> Result<Status, CliError> {
    let big_n = single_n(s)?;
    let dims_known = big_n.is_some() && s.i_size.is_some();
    let mut absent = Vec::new();
    if s.eps.is_none() {
        absent.push("eps");
    }
    if s.delta.is_none() {
        absent.push("delta");
    }
    if s.t.is_none() {
        absent.push("t");
    }
    if s.sigma.is_none() && !dims_known {
        absent.push("sigma (or N and I-size)");
    }
    if s.nu.is_none() && !(s.n.is_some() && s.i_size.is_some()) {
        absent.push("nu (or n and I-size)");
    }
    missing(&absent)?;
    let (eps, delta, t) = (s.eps.unwrap(), s.delta.unwrap(), s.t.unwrap());
    let c = s.c.unwrap_or(1.0);

    let params = if dims_known {
        let i_size = s.i_size.unwrap();
        let n = match (s.n, s.nu) {
            (Some(n), _) => n,
            (None, Some(nu)) => (nu * i_size as f64).round() as usize,
            (None, None) => unreachable!("checked above"),
        };
        let dims = Dims {
            n,
            big_n: big_n.unwrap(),
            i_size,
        };
        let p = BoundParams::from_dims(dims, eps, delta, t, c)?;
        for (name, given, derived) in [("sigma", s.sigma, p.sigma), ("nu", s.nu, p.nu)] {
            if let Some(g) = given {
                if (g - derived).abs() > 1e-12 * derived.max(1.0) {
                    return Err(CliError::Usage(format!(
                        "--{name} = {g} disagrees with the value {derived} implied by n, N, I-size"
                    )));
                }
            }
        }
        p
    } else {
        let sigma = s.sigma.unwrap();
        let nu =
            s.nu.unwrap_or_else(|| s.n.unwrap() as f64 / s.i_size.unwrap() as f64);
        BoundParams::from_ratios(sigma, nu, eps, delta, t, c)?
    };

    let mut lines: Vec<(&str, String)> = vec![
        ("sigma", fmt_f64(params.sigma)),
        ("nu", fmt_f64(params.nu)),
        ("eps", fmt_f64(eps)),
        ("delta", fmt_f64(delta)),
        ("t", fmt_f64(t)),
        ("c", fmt_f64(c)),
    ];
    if params.dims.is_some() {
        let r = theorem_prob_lower(&params)?;
        lines.extend([
            ("err_rhs", fmt_f64(r.err_rhs)),
            ("order_term", fmt_f64(r.order_term)),
            ("count_term", fmt_f64(r.count_term)),
            ("q_term", fmt_f64(r.q_term)),
            ("prob_lower", fmt_f64(r.prob_lower)),
            ("prob_lower_clamped", fmt_f64(r.prob_lower_clamped())),
            ("small_sigma_warning", r.small_sigma_warning.to_string()),
        ]);
    } else {
        lines.extend([
            ("err_rhs", fmt_f64(theorem_error_rhs(&params)?)),
            ("order_term", "n/a (needs N and I-size)".into()),
            ("count_term", "n/a (needs N and I-size)".into()),
            ("q_term", "n/a (needs N and I-size)".into()),
            ("prob_lower", "n/a (needs N and I-size)".into()),
            ("prob_lower_clamped", "n/a (needs N and I-size)".into()),
            (
                "small_sigma_warning",
                params.small_sigma_warning().to_string(),
            ),
        ]);
    }
    for (k, v) in &lines {
        writeln!(out, "{k} = {v}").map_err(io)?;
    }
    if params.small_sigma_warning() {
        writeln!(
            out,
            "warning: sigma > 0.2; the tail term Q is an asymptotic small-sigma estimate"
        )
        .map_err(io)?;
    }
    if let Some(path) = &s.out {
        let mut w = create(path)?;
        csvio::write_metadata(&mut w, &meta(&[]))?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(lines.iter().map(|(k, _)| *k))
            .and_then(|_| c.write_record(lines.iter().map(|(_, v)| v.as_str())))
            .and_then(|_| c.flush().map_err(Into::into))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(Status::Success)
}

fn experiment(
    s: &Section,
    trials_default: usize,
    needs_list: bool,
) -> Result<ExperimentConfig, CliError> {
    let mut absent = Vec::new();
    if s.n.is_none() {
        absent.push("n");
    }
    if s.big_n.is_none() {
        absent.push("N");
    }
    missing(&absent)?;
    let big_n_list = if needs_list {
        s.big_n.clone().unwrap().into_vec()
    } else {
        vec![single_n(s)?.unwrap()]
    };
    Ok(ExperimentConfig {
        master_seed: seed(s),
        n: s.n.unwrap(),
        big_n_list,
        weak_size: weak_rule(s)?,
        methods: methods(s)?,
        trials_per_point: s.trials.unwrap_or(trials_default),
        bounds: BoundOverrides {
            eps: s.eps,
            delta: s.delta,
            t: s.t,
            c_bernstein: s.c,
        },
    })
}

fn experiment_meta(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let list = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(";")
    };
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "default".into());
    meta(&[
        ("seed", cfg.master_seed.to_string()),
        ("n", cfg.n.to_string()),
        ("N", list(&cfg.big_n_list)),
        ("weak_set", rule_label(&cfg.weak_size)),
        (
            "methods",
            cfg.methods
                .iter()
                .map(|m| m.as_str())
                .collect::<Vec<_>>()
                .join(";"),
        ),
        ("trials_per_point", cfg.trials_per_point.to_string()),
        ("eps", opt(cfg.bounds.eps)),
        ("delta", opt(cfg.bounds.delta)),
        ("t", opt(cfg.bounds.t)),
        ("c", opt(cfg.bounds.c_bernstein)),
    ])
}

/// One trial at one point, printed as trials CSV.
pub fn cmd_trial(s: &Section, out: &mut dyn Write) -> Result<Status, CliError> {
    let cfg = experiment(s, 1, false)?;
    let point = cfg.points()?[0];
    let index = s.index.unwrap_or(0);
    let records = run_trial(cfg.master_seed, &point, &cfg.methods, index);
    let mut m = experiment_meta(&cfg);
    m.push(("index".into(), index.to_string()));
    let timings = s.timings.unwrap_or(false);
    match &s.out {
        Some(path) => csvio::write_trials(create(path)?, &m, &records, timings)?,
        None => csvio::write_trials(&mut *out, &m, &records, timings)?,
    }
    Ok(if records.iter().all(|r| r.is_ok()) {
        Status::Success
    } else {
        Status::SolverFailures
    })
}

/// Full sweep; writes `trials.csv` and `summary.csv` under `--out`.
pub fn cmd_sweep(s: &Section, out: &mut dyn Write) -> Result<Status, CliError> {
    let mut absent = Vec::new();
    for (name, present) in [
        ("n", s.n.is_some()),
        ("N", s.big_n.is_some()),
        ("out", s.out.is_some()),
    ] {
        if !present {
            absent.push(name);
        }
    }
    missing(&absent)?;
    let cfg = experiment(s, DEFAULT_SWEEP_TRIALS, true)?;
    let dir = s.out.clone().unwrap();
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let result = run_sweep(&cfg)?;
    let m = experiment_meta(&cfg);
    csvio::write_trials(
        create(&dir.join("trials.csv"))?,
        &m,
        &result.records,
        s.timings.unwrap_or(false),
    )?;
    csvio::write_summary(create(&dir.join("summary.csv"))?, &m, &result.summary.rows)?;

    writeln!(
        out,
        "{:>12} {:>8} {:>7} {:>9} {:>12} {:>12} {:>12} {:>12} {:>6}",
        "sigma", "N", "I_size", "method", "median", "mean", "p90", "theorem_rhs", "failed"
    )
    .map_err(io)?;
    for r in &result.summary.rows {
        writeln!(
            out,
            "{:>12.6e} {:>8} {:>7} {:>9} {:>12.6e} {:>12.6e} {:>12.6e} {:>12} {:>6}",
            r.sigma,
            r.big_n,
            r.i_size,
            r.method.as_str(),
            r.median,
            r.mean,
            r.p90,
            r.theorem_rhs
                .map(|v| format!("{v:.6e}"))
                .unwrap_or_else(|| "n/a".into()),
            r.trials_failed
        )
        .map_err(io)?;
    }
    for &method in &cfg.methods {
        match result.summary.slope(method) {
            Some(v) => writeln!(out, "log-log slope ({method}): {}", fmt_f64(v)),
            None => writeln!(out, "log-log slope ({method}): n/a"),
        }
        .map_err(io)?;
    }
    writeln!(out, "wrote {}", dir.join("trials.csv").display()).map_err(io)?;
    writeln!(out, "wrote {}", dir.join("summary.csv").display()).map_err(io)?;
    Ok(if result.records.iter().all(|r| r.is_ok()) {
        Status::Success
    } else {
        Status::SolverFailures
    })
}

/// Evaluate the certificate on seeded null-vector trials.
pub fn cmd_certify(s: &Section, out: &mut dyn Write) -> Result<Status, CliError> {
    let mut cfg = experiment(s, DEFAULT_CERTIFY_TRIALS, false)?;
    cfg.methods = vec![Method::Null];
    let result = run_sweep(&cfg)?;
    writeln!(
        out,
        "{:>6} {:>24} {:>24} {:>6}",
        "trial", "lhs", "rhs", "holds"
    )
    .map_err(io)?;
    let mut held = 0;
    let mut failed = 0;
    for r in &result.records {
        match (r.cert_lhs, r.cert_rhs) {
            (Some(l), Some(rhs)) => {
                let ok = r.certificate_holds();
                held += usize::from(ok);
                writeln!(
                    out,
                    "{:>6} {:>24} {:>24} {:>6}",
                    r.trial_id,
                    fmt_f64(l),
                    fmt_f64(rhs),
                    ok
                )
                .map_err(io)?;
            }
            _ => {
                failed += 1;
                writeln!(
                    out,
                    "{:>6} error: {}",
                    r.trial_id,
                    r.error.as_deref().unwrap_or("unknown")
                )
                .map_err(io)?;
            }
        }
    }
    let total = result.records.len() - failed;
    writeln!(out, "certificate holds in {held}/{total} trials").map_err(io)?;
    if let Some(path) = &s.out {
        csvio::write_trials(
            create(path)?,
            &experiment_meta(&cfg),
            &result.records,
            false,
        )?;
    }
    Ok(if held < total {
        Status::ValidationFailed
    } else if failed > 0 {
        Status::SolverFailures
    } else {
        Status::Success
    })
}

/// Which Monte Carlo validators to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Check {
    Order,
    Energy,
    Wishart,
}

fn checks(s: &Section) -> Result<Vec<Check>, CliError> {
    let Some(list) = &s.checks else {
        return Ok(vec![Check::Order, Check::Energy, Check::Wishart]);
    };
    list.iter()
        .map(|c| match c.trim() {
            "order" => Ok(Check::Order),
            "energy" => Ok(Check::Energy),
            "wishart" => Ok(Check::Wishart),
            other => Err(CliError::Usage(format!(
                "unknown check '{other}' (expected order, energy or wishart)"
            ))),
        })
        .collect()
}

fn check_i_size(s: &Section, n: usize, big_n: usize, sigma_default: f64) -> usize {
    match (s.i_size, s.sigma, s.nu) {
        (Some(k), _, _) => k,
        (None, Some(sigma), _) => (sigma * big_n as f64).round() as usize,
        (None, None, Some(nu)) => (n as f64 / nu).round() as usize,
        (None, None, None) => (sigma_default * big_n as f64).round() as usize,
    }
}

fn report(out: &mut dyn Write, o: &CheckOutcome) -> Result<(), CliError> {
    writeln!(
        out,
        "{:<22} trials={:<5} freq={} bound={} slack={} {}{}",
        o.name,
        o.trials,
        fmt_f64(o.frequency),
        fmt_f64(o.bound),
        fmt_f64(o.slack),
        if o.passed { "PASS" } else { "FAIL" },
        if o.clamped {
            format!(" [bound clamped; raw {}]", fmt_f64(o.bound_raw))
        } else {
            String::new()
        }
    )
    .map_err(io)
}

/// Run the selected validators. Flags override `[validate.<check>]`, which
/// overrides `[validate]`.
pub fn cmd_validate(s: &Section, flags: &Section, out: &mut dyn Write) -> Result<Status, CliError> {
    let seed = seed(s);
    let mut outcomes: Vec<CheckOutcome> = Vec::new();
    for check in checks(s)? {
        let sub = match check {
            Check::Order => &s.order,
            Check::Energy => &s.energy,
            Check::Wishart => &s.wishart,
        };
        let base = match sub {
            Some(table) => (**table).clone().or(s),
            None => s.clone(),
        };
        let p = flags.clone().or(&base);
        let big_n = single_n(&p)?.unwrap_or(4096);
        match check {
            Check::Order => {
                let n = p.n.unwrap_or(8);
                let r = order_stat_check(&OrderStatConfig {
                    seed,
                    n,
                    big_n,
                    i_size: check_i_size(&p, n, big_n, 0.25),
                    delta: p.delta.unwrap_or(0.5),
                    eps: p.eps.unwrap_or(0.25),
                    trials: p.trials.unwrap_or(1000),
                })?;
                writeln!(out, "tau* = {}", fmt_f64(r.tau_star)).map_err(io)?;
                report(out, &r.threshold)?;
                report(out, &r.count)?;
                outcomes.extend([r.threshold, r.count]);
            }
            Check::Energy => {
                let n = p.n.unwrap_or(8);
                let r = weak_energy_check(&WeakEnergyConfig {
                    seed,
                    n,
                    big_n,
                    i_size: check_i_size(&p, n, big_n, 0.25),
                    eps: p.eps.unwrap_or(0.5),
                    delta: p.delta.unwrap_or(1.0),
                    t: p.t.unwrap_or(1.0),
                    c_bernstein: p.c.unwrap_or(1.0),
                    trials: p.trials.unwrap_or(500),
                })?;
                report(out, &r.energy_bound)?;
                report(out, &r.average_bound)?;
                writeln!(
                    out,
                    "truncated mean         sample={} closed_form={} z={}",
                    fmt_f64(r.truncated_mean),
                    fmt_f64(r.truncated_mean_expected),
                    fmt_f64(r.truncated_mean_z())
                )
                .map_err(io)?;
                outcomes.extend([r.energy_bound, r.average_bound]);
            }
            Check::Wishart => {
                let n = p.n.unwrap_or(64);
                let r = wishart_check(&WishartConfig {
                    seed,
                    n,
                    i_size: p.i_size.unwrap_or(1024),
                    t: p.t.unwrap_or(0.5),
                    trials: p.trials.unwrap_or(500),
                })?;
                writeln!(
                    out,
                    "wishart interval [{}, {}], observed [{}, {}]",
                    fmt_f64(r.lower_edge),
                    fmt_f64(r.upper_edge),
                    fmt_f64(r.min_singular),
                    fmt_f64(r.max_singular)
                )
                .map_err(io)?;
                report(out, &r.outcome)?;
                outcomes.push(r.outcome);
            }
        }
    }
    if let Some(path) = &s.out {
        let mut w = create(path)?;
        csvio::write_metadata(&mut w, &meta(&[("seed", seed.to_string())]))?;
        let mut c = csv::Writer::from_writer(w);
        let rows = std::iter::once(
            [
                "check",
                "trials",
                "successes",
                "frequency",
                "bound_raw",
                "bound",
                "clamped",
                "slack",
                "passed",
            ]
            .map(String::from),
        )
        .chain(outcomes.iter().map(|o| {
            [
                o.name.to_string(),
                o.trials.to_string(),
                o.successes.to_string(),
                fmt_f64(o.frequency),
                fmt_f64(o.bound_raw),
                fmt_f64(o.bound),
                o.clamped.to_string(),
                fmt_f64(o.slack),
                o.passed.to_string(),
            ]
        }));
        for row in rows {
            c.write_record(&row)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        c.flush().map_err(io)?;
    }
    Ok(if outcomes.iter().all(|o| o.passed) {
        Status::Success
    } else {
        Status::ValidationFailed
    })
}
