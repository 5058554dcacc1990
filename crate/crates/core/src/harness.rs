//! Seeded Monte Carlo trials and parameter sweeps.

use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::{theorem_error_rhs, BoundParams};
use crate::error::{Error, Result};
use crate::estimators::{
    certify, make_ensemble, null_vector, select_weak, spectral_vector, Method, SignalSpec,
};
use crate::linalg::RngStream;

/// How `|I|` is derived at each sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeakSizeRule {
    Fixed(usize),
    /// `|I| = round(sigma N)`.
    Fraction(f64),
    /// `|I| = round(n / nu)`.
    NuFixed(f64),
}

impl WeakSizeRule {
    pub fn weak_size(&self, n: usize, big_n: usize) -> usize {
        match *self {
            WeakSizeRule::Fixed(k) => k,
            WeakSizeRule::Fraction(sigma) => (sigma * big_n as f64).round() as usize,
            WeakSizeRule::NuFixed(nu) => (n as f64 / nu).round() as usize,
        }
    }
}

/// Optional overrides for the bound parameters reported next to a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundOverrides {
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub t: Option<f64>,
    pub c_bernstein: Option<f64>,
}

impl BoundOverrides {
    /// Parameters at one point. Without an explicit `t`, the midpoint of
    /// `(0, nu^{-1/2} - 1)` is used.
    pub fn params_at(&self, point: &SweepPoint) -> Result<BoundParams> {
        let nu = point.n as f64 / point.i_size as f64;
        let t = self.t.unwrap_or(0.5 * (nu.powf(-0.5) - 1.0));
        BoundParams::from_dims(
            crate::bounds::Dims {
                n: point.n,
                big_n: point.big_n,
                i_size: point.i_size,
            },
            self.eps.unwrap_or(0.5),
            self.delta.unwrap_or(1.0),
            t,
            self.c_bernstein.unwrap_or(1.0),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub n: usize,
    pub big_n_list: Vec<usize>,
    pub weak_size: WeakSizeRule,
    pub methods: Vec<Method>,
    pub trials_per_point: usize,
    pub bounds: BoundOverrides,
}

/// One `(n, N, |I|)` configuration of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepPoint {
    pub index: usize,
    pub n: usize,
    pub big_n: usize,
    pub i_size: usize,
}

impl SweepPoint {
    pub fn sigma(&self) -> f64 {
        self.i_size as f64 / self.big_n as f64
    }

    pub fn nu(&self) -> f64 {
        self.n as f64 / self.i_size as f64
    }
}

impl ExperimentConfig {
    /// Expand and validate the sweep points.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        if self.big_n_list.is_empty() {
            return Err(Error::InvalidParameter("sweep has no N values".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("sweep has no methods".into()));
        }
        if self.trials_per_point == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        self.big_n_list
            .iter()
            .enumerate()
            .map(|(index, &big_n)| {
                let i_size = self.weak_size.weak_size(self.n, big_n);
                if self.n == 0 || big_n < 2 * self.n || i_size <= self.n || i_size >= big_n {
                    return Err(Error::InvalidParameter(format!(
                        "point n = {}, N = {big_n}, |I| = {i_size} violates n < |I| < N, N >= 2n",
                        self.n
                    )));
                }
                Ok(SweepPoint {
                    index,
                    n: self.n,
                    big_n,
                    i_size,
                })
            })
            .collect()
    }
}

/// One row of results: a single method on a single trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub point: usize,
    pub trial_id: u64,
    pub seed_stream: u64,
    pub n: usize,
    pub big_n: usize,
    pub i_size: usize,
    pub sigma: f64,
    pub nu: f64,
    pub method: Method,
    /// `None` on success, else the error tag.
    pub error: Option<String>,
    pub err_sq: Option<f64>,
    pub rel_err: Option<f64>,
    pub align_inner: Option<f64>,
    pub cert_lhs: Option<f64>,
    pub cert_rhs: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time_ms: f64,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    /// The certificate inequality held (or does not apply).
    pub fn certificate_holds(&self) -> bool {
        match (self.cert_lhs, self.cert_rhs) {
            (Some(l), Some(r)) => l <= r * (1.0 + crate::estimators::CERTIFICATE_SLACK),
            _ => true,
        }
    }
}

fn blank_record(point: &SweepPoint, trial: u64, method: Method) -> TrialRecord {
    TrialRecord {
        point: point.index,
        trial_id: trial,
        seed_stream: trial,
        n: point.n,
        big_n: point.big_n,
        i_size: point.i_size,
        sigma: point.sigma(),
        nu: point.nu(),
        method,
        error: None,
        err_sq: None,
        rel_err: None,
        align_inner: None,
        cert_lhs: None,
        cert_rhs: None,
        iterations: None,
        wall_time_ms: 0.0,
    }
}

/// Run every requested method on the ensemble for `(master_seed, trial)`.
/// Solver failures become rows with an error tag.
pub fn run_trial(
    master_seed: u64,
    point: &SweepPoint,
    methods: &[Method],
    trial: u64,
) -> Vec<TrialRecord> {
    let start = Instant::now();
    let ensemble = make_ensemble(
        &RngStream::new(master_seed, trial),
        point.n,
        point.big_n,
        SignalSpec::RandomUnit,
    );
    let setup_ms = start.elapsed().as_secs_f64() * 1e3;

    methods
        .iter()
        .map(|&method| {
            let mut rec = blank_record(point, trial, method);
            let began = Instant::now();
            let outcome = ensemble
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|e| match method {
                    Method::Null => {
                        let split = select_weak(e, point.i_size)?;
                        let est = null_vector(e, &split)?;
                        let cert = certify(e, &split, &est)?;
                        Ok((est, Some(cert)))
                    }
                    Method::Spectral => Ok((spectral_vector(e)?, None)),
                });
            match outcome {
                Ok((est, cert)) => {
                    rec.err_sq = Some(est.err_sq);
                    rec.rel_err = Some(est.rel_err);
                    rec.align_inner = Some(est.align_inner);
                    rec.iterations = Some(est.iterations);
                    if let Some(c) = cert {
                        rec.cert_lhs = Some(c.lhs);
                        rec.cert_rhs = Some(c.rhs);
                    }
                }
                Err(err) => rec.error = Some(err.tag().to_string()),
            }
            rec.wall_time_ms = setup_ms + began.elapsed().as_secs_f64() * 1e3;
            rec
        })
        .collect()
}

/// Aggregates for one `(point, method)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub point: usize,
    pub n: usize,
    pub big_n: usize,
    pub i_size: usize,
    pub sigma: f64,
    pub nu: f64,
    pub method: Method,
    pub trials_ok: usize,
    pub trials_failed: usize,
    /// Statistics of `err_sq / ||x0||^4` over successful trials.
    pub median: f64,
    pub mean: f64,
    pub p90: f64,
    /// Least-squares slope of `ln median` against `ln sigma` for this method.
    pub loglog_slope: Option<f64>,
    /// Error bound at this point, if its parameters are admissible.
    pub theorem_rhs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SummaryRow>,
}

impl SweepSummary {
    pub fn slope(&self, method: Method) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method)
            .and_then(|r| r.loglog_slope)
    }

    /// Rows for one method, in point order.
    pub fn method_rows(&self, method: Method) -> impl Iterator<Item = &SummaryRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub points: Vec<SweepPoint>,
    pub records: Vec<TrialRecord>,
    pub summary: SweepSummary,
}

/// Run all trials of a sweep on the current rayon pool. Records come back
/// sorted by `(point, method, trial_id)`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let points = cfg.points()?;
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();

    let jobs: Vec<(SweepPoint, u64)> = points
        .iter()
        .flat_map(|p| (0..cfg.trials_per_point as u64).map(move |k| (*p, k)))
        .collect();
    let mut records: Vec<TrialRecord> = jobs
        .par_iter()
        .flat_map_iter(|(p, k)| run_trial(cfg.master_seed, p, &methods, *k))
        .collect();
    records.sort_by_key(|r| (r.point, r.method, r.trial_id));
    let summary = summarize(&points, &methods, &records, &cfg.bounds);
    Ok(SweepOutput {
        points,
        records,
        summary,
    })
}

/// Median; midpoint average for even counts. Empty input gives NaN.
pub fn median(sorted: &[f64]) -> f64 {
    quantile(sorted, 0.5)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let h = q * (len - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two
/// distinct abscissae or non-finite data.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !v.is_finite()) {
        return None;
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Aggregate records per `(point, method)` and fit the per-method slope.
pub fn summarize(
    points: &[SweepPoint],
    methods: &[Method],
    records: &[TrialRecord],
    bounds: &BoundOverrides,
) -> SweepSummary {
    let mut rows = Vec::with_capacity(points.len() * methods.len());
    for p in points {
        let theorem_rhs = bounds
            .params_at(p)
            .and_then(|bp| theorem_error_rhs(&bp))
            .ok();
        for &method in methods {
            let cell: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.point == p.index && r.method == method)
                .collect();
            let mut errs: Vec<f64> = cell.iter().filter_map(|r| r.err_sq).collect();
            errs.sort_by(f64::total_cmp);
            let ok = errs.len();
            rows.push(SummaryRow {
                point: p.index,
                n: p.n,
                big_n: p.big_n,
                i_size: p.i_size,
                sigma: p.sigma(),
                nu: p.nu(),
                method,
                trials_ok: ok,
                trials_failed: cell.len() - ok,
                median: median(&errs),
                mean: if ok == 0 {
                    f64::NAN
                } else {
                    errs.iter().sum::<f64>() / ok as f64
                },
                p90: quantile(&errs, 0.9),
                loglog_slope: None,
                theorem_rhs,
            });
        }
    }
    for &method in methods {
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.method == method && r.median > 0.0)
            .map(|r| (r.sigma.ln(), r.median.ln()))
            .unzip();
        let slope = least_squares_slope(&x, &y);
        for r in rows.iter_mut().filter(|r| r.method == method) {
            r.loglog_slope = slope;
        }
    }
    SweepSummary { rows }
}
