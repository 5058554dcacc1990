//! CSV output with `#` metadata lines.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), so values
//! survive a write/read round trip exactly.

use std::io::{BufRead, Write};

use crate::estimators::Method;
use crate::harness::{SummaryRow, TrialRecord};

use super::CliError;

pub const SCHEMA_LINE: &str = "# phasecore-csv v1";

pub const TRIAL_COLUMNS: [&str; 16] = [
    "point",
    "trial_id",
    "seed_stream",
    "n",
    "N",
    "I_size",
    "sigma",
    "nu",
    "method",
    "status",
    "err_sq",
    "rel_err",
    "align_inner",
    "cert_lhs",
    "cert_rhs",
    "iterations",
];

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "point",
    "n",
    "N",
    "I_size",
    "sigma",
    "nu",
    "method",
    "trials_ok",
    "trials_failed",
    "median_err_sq",
    "mean_err_sq",
    "p90_err_sq",
    "loglog_slope",
    "theorem_rhs",
];

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// Schema line followed by `# key = value` lines.
pub fn write_metadata<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<(), CliError> {
    writeln!(w, "{SCHEMA_LINE}").map_err(io_err)?;
    for (k, v) in meta {
        writeln!(w, "# {k} = {v}").map_err(io_err)?;
    }
    Ok(())
}

pub fn write_trials<W: Write>(
    mut w: W,
    meta: &[(String, String)],
    records: &[TrialRecord],
    timings: bool,
) -> Result<(), CliError> {
    write_metadata(&mut w, meta)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = TRIAL_COLUMNS.to_vec();
    if timings {
        header.push("wall_time_ms");
    }
    out.write_record(&header).map_err(io_err)?;
    for r in records {
        let mut row = vec![
            r.point.to_string(),
            r.trial_id.to_string(),
            r.seed_stream.to_string(),
            r.n.to_string(),
            r.big_n.to_string(),
            r.i_size.to_string(),
            fmt_f64(r.sigma),
            fmt_f64(r.nu),
            r.method.to_string(),
            match &r.error {
                None => "ok".to_string(),
                Some(tag) => format!("error:{tag}"),
            },
            fmt_opt(r.err_sq),
            fmt_opt(r.rel_err),
            fmt_opt(r.align_inner),
            fmt_opt(r.cert_lhs),
            fmt_opt(r.cert_rhs),
            r.iterations.map(|v| v.to_string()).unwrap_or_default(),
        ];
        if timings {
            row.push(fmt_f64(r.wall_time_ms));
        }
        out.write_record(&row).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn write_summary<W: Write>(
    mut w: W,
    meta: &[(String, String)],
    rows: &[SummaryRow],
) -> Result<(), CliError> {
    write_metadata(&mut w, meta)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_COLUMNS).map_err(io_err)?;
    for r in rows {
        out.write_record([
            r.point.to_string(),
            r.n.to_string(),
            r.big_n.to_string(),
            r.i_size.to_string(),
            fmt_f64(r.sigma),
            fmt_f64(r.nu),
            r.method.to_string(),
            r.trials_ok.to_string(),
            r.trials_failed.to_string(),
            fmt_f64(r.median),
            fmt_f64(r.mean),
            fmt_f64(r.p90),
            fmt_opt(r.loglog_slope),
            fmt_opt(r.theorem_rhs),
        ])
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn parse<T: std::str::FromStr>(field: &str, column: &str, line: u64) -> Result<T, CliError> {
    field.parse().map_err(|_| {
        CliError::Usage(format!(
            "line {line}: bad value '{field}' in column {column}"
        ))
    })
}

fn parse_opt<T: std::str::FromStr>(
    field: &str,
    column: &str,
    line: u64,
) -> Result<Option<T>, CliError> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse(field, column, line).map(Some)
    }
}

/// Read a trials CSV back into records. `wall_time_ms` is 0 when absent.
pub fn read_trials<R: BufRead>(r: R) -> Result<Vec<TrialRecord>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let header = rdr.headers().map_err(io_err)?.clone();
    let expected: Vec<&str> = header.iter().take(TRIAL_COLUMNS.len()).collect();
    if expected != TRIAL_COLUMNS {
        return Err(CliError::Usage(format!(
            "unexpected trials header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let timed = header.len() > TRIAL_COLUMNS.len();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(io_err)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let f = |i: usize| row.get(i).unwrap_or("");
        let status = f(9);
        let error = match status {
            "ok" => None,
            s => Some(
                s.strip_prefix("error:")
                    .ok_or_else(|| CliError::Usage(format!("line {line}: bad status '{s}'")))?
                    .to_string(),
            ),
        };
        records.push(TrialRecord {
            point: parse(f(0), "point", line)?,
            trial_id: parse(f(1), "trial_id", line)?,
            seed_stream: parse(f(2), "seed_stream", line)?,
            n: parse(f(3), "n", line)?,
            big_n: parse(f(4), "N", line)?,
            i_size: parse(f(5), "I_size", line)?,
            sigma: parse(f(6), "sigma", line)?,
            nu: parse(f(7), "nu", line)?,
            method: f(8)
                .parse::<Method>()
                .map_err(|e| CliError::Usage(format!("line {line}: {e}")))?,
            error,
            err_sq: parse_opt(f(10), "err_sq", line)?,
            rel_err: parse_opt(f(11), "rel_err", line)?,
            align_inner: parse_opt(f(12), "align_inner", line)?,
            cert_lhs: parse_opt(f(13), "cert_lhs", line)?,
            cert_rhs: parse_opt(f(14), "cert_rhs", line)?,
            iterations: parse_opt(f(15), "iterations", line)?,
            wall_time_ms: if timed {
                parse(f(16), "wall_time_ms", line)?
            } else {
                0.0
            },
        });
    }
    Ok(records)
}
