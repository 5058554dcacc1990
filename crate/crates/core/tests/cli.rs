use std::path::Path;
use std::process::{Command, Output};

fn phasecore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasecore"))
        .args(args)
        .env_remove("PHASECORE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count()
        - 1
}

#[test]
fn bound_prints_full_precision() {
    let o = phasecore(&[
        "bound", "--sigma", "0.1", "--nu", "0.5", "--eps", "0.5", "--delta", "1", "--t", "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("err_rhs")).unwrap();
    let v: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((v - 41.541935586636709).abs() <= 1e-12 * 41.541935586636709);
    assert!(text.contains("prob_lower = n/a"));
}

#[test]
fn bound_with_dimensions_prints_terms() {
    let o = phasecore(&[
        "bound", "--N", "4096", "--I-size", "512", "--n", "256", "--eps", "0.5", "--delta", "1",
        "--t", "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in [
        "order_term",
        "count_term",
        "q_term",
        "prob_lower",
        "prob_lower_clamped",
    ] {
        assert!(text.contains(&format!("{key} = ")), "{key}");
    }
    assert!(text.contains("small_sigma_warning = false"));
}

#[test]
fn bound_flags_large_sigma() {
    let o = phasecore(&[
        "bound", "--sigma", "0.3", "--nu", "0.5", "--eps", "0.5", "--delta", "1", "--t", "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("small_sigma_warning = true"));
}

#[test]
fn bound_rejects_t_at_boundary() {
    let t = format!("{}", 0.5f64.powf(-0.5) - 1.0);
    let o = phasecore(&[
        "bound", "--sigma", "0.1", "--nu", "0.5", "--eps", "0.5", "--delta", "1", "--t", &t,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("t must lie in (0, nu^(-1/2) - 1)"));
}

#[test]
fn bound_lists_missing_fields() {
    let o = phasecore(&["bound", "--sigma", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    for name in ["eps", "delta", "t", "nu"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn bound_rejects_inconsistent_sigma() {
    let o = phasecore(&[
        "bound", "--N", "4096", "--I-size", "512", "--n", "256", "--sigma", "0.2", "--eps", "0.5",
        "--delta", "1", "--t", "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(phasecore(&["--help"]).status.code(), Some(0));
    assert_eq!(phasecore(&["--version"]).status.code(), Some(0));
    assert_eq!(phasecore(&["bound", "--bogus", "1"]).status.code(), Some(1));
    assert_eq!(phasecore(&[]).status.code(), Some(1));
}

#[test]
fn sweep_writes_expected_rows_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, workers: &str| {
        let out = dir.path().join(sub);
        let o = phasecore(&[
            "sweep",
            "--n",
            "8",
            "--N",
            "64,128,256",
            "--I-size",
            "16",
            "--trials",
            "5",
            "--seed",
            "3",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("log-log slope (null)"));
        out
    };
    let a = run("a", "1");
    let b = run("b", "3");
    let c = run("c", "2");
    assert_eq!(data_rows(&a.join("trials.csv")), 5 * 3 * 2);
    assert_eq!(data_rows(&a.join("summary.csv")), 3 * 2);
    for f in ["trials.csv", "summary.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f}");
        assert_eq!(x, std::fs::read(c.join(f)).unwrap(), "{f}");
    }
    let text = std::fs::read_to_string(a.join("trials.csv")).unwrap();
    assert!(text.starts_with("# phasecore-csv v1\n# tool = phasecore "));
    assert!(text.contains("# seed = 3"));
    assert!(!text.contains("workers"));
}

#[test]
fn sweep_requires_out_and_n() {
    let o = phasecore(&["sweep", "--N", "64"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n, out"));
}

#[test]
fn sweep_unwritable_out_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let o = phasecore(&[
        "sweep",
        "--n",
        "4",
        "--N",
        "32",
        "--I-size",
        "8",
        "--trials",
        "1",
        "--out",
        file.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 5\n[bound]\nsigma = 0.1\nnu = 0.5\neps = 0.5\ndelta = 1.0\nt = 0.2\n",
    )
    .unwrap();
    let base = phasecore(&["bound", "--config", cfg.to_str().unwrap()]);
    assert_eq!(base.status.code(), Some(0), "{}", stderr(&base));
    assert!(stdout(&base).contains("t = 2.0000000000000001e-1"));
    let over = phasecore(&["bound", "--config", cfg.to_str().unwrap(), "--t", "0.1"]);
    assert!(stdout(&over).contains("err_rhs = 4.15419355866367"));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[sweep]\nn = 4\nbogus = 1\n").unwrap();
    let o = phasecore(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bogus") && err.contains("line 3"), "{err}");
}

#[test]
fn seed_from_environment() {
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_phasecore"));
        c.args(["trial", "--n", "4", "--N", "32", "--I-size", "8"]);
        match seed {
            Some(s) => c.env("PHASECORE_SEED", s),
            None => c.env_remove("PHASECORE_SEED"),
        };
        c.output().unwrap()
    };
    let a = run(Some("9"));
    let b = run(Some("9"));
    let z = run(None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, z.stdout);
    assert!(stdout(&a).contains("# seed = 9"));
    assert_eq!(run(Some("nope")).status.code(), Some(1));
}

#[test]
fn trial_emits_one_row_per_method() {
    let o = phasecore(&[
        "trial", "--n", "4", "--N", "32", "--I-size", "8", "--index", "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0,2,2,4,32,8,"));
}

#[test]
fn certify_reports_all_trials() {
    let o = phasecore(&[
        "certify", "--n", "8", "--N", "256", "--I-size", "32", "--trials", "10",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("certificate holds in 10/10 trials"));
}

#[test]
fn validate_rejects_zero_trials() {
    let o = phasecore(&["validate", "--checks", "wishart", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_flags_clamped_bound() {
    let o = phasecore(&[
        "validate", "--checks", "energy", "--c", "1e-6", "--trials", "20",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("[bound clamped; raw -"));
}

#[test]
fn validate_section_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("v.toml");
    std::fs::write(
        &cfg,
        "[validate]\ntrials = 30\n[validate.wishart]\ntrials = 12\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let o = phasecore(&["validate", "--config", path, "--checks", "wishart,order"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("trials=12"));
    assert!(text.contains("trials=30"));
    let o = phasecore(&[
        "validate", "--config", path, "--checks", "wishart", "--trials", "7",
    ]);
    assert!(stdout(&o).contains("trials=7"));
}

#[test]
fn validate_rejects_unknown_check() {
    assert_eq!(
        phasecore(&["validate", "--checks", "nope"]).status.code(),
        Some(1)
    );
}
