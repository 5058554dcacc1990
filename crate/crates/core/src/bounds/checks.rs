//! Monte Carlo checks of the concentration steps behind the error bound.
//!
//! Every check compares an empirical event frequency against a one-sided
//! theoretical lower bound. Trials run on the current rayon pool; each trial
//! owns the stream `(seed, trial index)` and results are combined in trial
//! order, so reports do not depend on the number of workers.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use super::{bernstein_tail, order_stat_tail, tau_star, truncated_energy_mean, weak_count_tail};
use crate::error::{Error, Result};
use crate::estimators::{make_ensemble, SignalSpec};
use crate::linalg::{sample_real_gaussian, RngStream};

/// Binomial standard deviations of slack allowed below a bound.
pub const BINOMIAL_SLACK_SIGMAS: f64 = 3.0;

/// Empirical frequency of one event against its theoretical lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    /// Bound as evaluated, possibly outside `[0, 1]`.
    pub bound_raw: f64,
    /// Bound clamped to `[0, 1]`.
    pub bound: f64,
    /// The raw bound was outside `[0, 1]`.
    pub clamped: bool,
    /// `3 sqrt(p (1 - p) / trials)` with `p` the clamped bound.
    pub slack: f64,
    pub passed: bool,
}

impl CheckOutcome {
    pub fn new(name: &'static str, trials: usize, successes: usize, bound_raw: f64) -> Self {
        let frequency = successes as f64 / trials as f64;
        let bound = if bound_raw.is_nan() {
            0.0
        } else {
            bound_raw.clamp(0.0, 1.0)
        };
        let slack = BINOMIAL_SLACK_SIGMAS * (bound * (1.0 - bound) / trials as f64).sqrt();
        Self {
            name,
            trials,
            successes,
            frequency,
            bound_raw,
            bound,
            clamped: bound != bound_raw,
            slack,
            passed: frequency >= bound - slack,
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

fn check_ensemble_dims(n: usize, big_n: usize, i_size: usize) -> Result<()> {
    if n == 0 || big_n < 2 * n {
        return Err(Error::Dimension(format!(
            "need n >= 1 and N >= 2n, got n = {n}, N = {big_n}"
        )));
    }
    if i_size == 0 || i_size >= big_n {
        return Err(Error::InvalidParameter(format!(
            "|I| must lie in [1, N), got {i_size} with N = {big_n}"
        )));
    }
    Ok(())
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Sorted squared magnitudes of a fresh random-signal ensemble.
fn sorted_energies(seed: u64, trial: usize, n: usize, big_n: usize) -> Result<Vec<f64>> {
    let e = make_ensemble(
        &RngStream::new(seed, trial as u64),
        n,
        big_n,
        SignalSpec::RandomUnit,
    )?;
    let mut tau: Vec<f64> = e.magnitudes().iter().map(|v| v * v).collect();
    tau.sort_by(f64::total_cmp);
    Ok(tau)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderStatConfig {
    pub seed: u64,
    pub n: usize,
    pub big_n: usize,
    pub i_size: usize,
    pub delta: f64,
    pub eps: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderStatReport {
    /// Sorted squared magnitudes of the first trial.
    pub tau_sorted: Vec<f64>,
    pub tau_star: f64,
    pub delta: f64,
    pub freq_a3: f64,
    pub freq_zz: f64,
    pub bound_a3: f64,
    pub bound_69: f64,
    /// `tau_{|I|} <= tau* + delta`.
    pub threshold: CheckOutcome,
    /// `|{i : b(i)^2 <= tau*}| >= (1 - eps)|I|`.
    pub count: CheckOutcome,
}

/// Frequencies of the order-statistic events against their Hoeffding bounds.
pub fn order_stat_check(cfg: &OrderStatConfig) -> Result<OrderStatReport> {
    check_trials(cfg.trials)?;
    check_ensemble_dims(cfg.n, cfg.big_n, cfg.i_size)?;
    check_positive("delta", cfg.delta)?;
    check_open_unit("eps", cfg.eps)?;
    let sigma = cfg.i_size as f64 / cfg.big_n as f64;
    let ts = tau_star(sigma)?;
    let need = (1.0 - cfg.eps) * cfg.i_size as f64;

    let per_trial: Vec<(bool, bool, Option<Vec<f64>>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let tau = sorted_energies(cfg.seed, k, cfg.n, cfg.big_n)?;
            let a3 = tau[cfg.i_size - 1] <= ts + cfg.delta;
            let below = tau.partition_point(|&v| v <= ts);
            let zz = below as f64 >= need;
            Ok((a3, zz, (k == 0).then_some(tau)))
        })
        .collect::<Result<_>>()?;

    let hits_a3 = per_trial.iter().filter(|r| r.0).count();
    let hits_zz = per_trial.iter().filter(|r| r.1).count();
    let tau_sorted = per_trial
        .into_iter()
        .find_map(|r| r.2)
        .expect("at least one trial");
    let threshold = CheckOutcome::new(
        "order_stat_threshold",
        cfg.trials,
        hits_a3,
        1.0 - order_stat_tail(cfg.big_n, sigma, cfg.delta),
    );
    let count = CheckOutcome::new(
        "order_stat_count",
        cfg.trials,
        hits_zz,
        1.0 - weak_count_tail(cfg.i_size, cfg.big_n, cfg.eps),
    );
    Ok(OrderStatReport {
        tau_sorted,
        tau_star: ts,
        delta: cfg.delta,
        freq_a3: threshold.frequency,
        freq_zz: count.frequency,
        bound_a3: threshold.bound_raw,
        bound_69: count.bound_raw,
        threshold,
        count,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakEnergyConfig {
    pub seed: u64,
    pub n: usize,
    pub big_n: usize,
    pub i_size: usize,
    pub eps: f64,
    pub delta: f64,
    pub t: f64,
    pub c_bernstein: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakEnergyReport {
    pub tau_star: f64,
    /// `||b_I||^2 <= |I| ((2+t)/(1-eps) sigma + eps (tau* + delta))`.
    pub energy_bound: CheckOutcome,
    /// `||b_I||^2/|I| <= ||b_hat||^2/|I_hat| + eps (tau* + delta)`.
    pub average_bound: CheckOutcome,
    /// Sample mean of `b^2 1{b^2 <= tau*}` over all `N * trials` draws.
    pub truncated_mean: f64,
    pub truncated_mean_stderr: f64,
    /// Closed form `2 - (tau* + 2) exp(-tau*/2)`.
    pub truncated_mean_expected: f64,
    pub mean_weak_energy: f64,
    pub mean_weak_count: f64,
}

impl WeakEnergyReport {
    /// Standardized deviation of the truncated mean from its closed form.
    pub fn truncated_mean_z(&self) -> f64 {
        (self.truncated_mean - self.truncated_mean_expected) / self.truncated_mean_stderr
    }
}

struct EnergyTrial {
    energy_ok: bool,
    average_ok: bool,
    weak_energy: f64,
    hat_count: usize,
    trunc_sum: f64,
    trunc_sum_sq: f64,
}

/// Weak-set energy inequalities and the truncated chi-square mean.
pub fn weak_energy_check(cfg: &WeakEnergyConfig) -> Result<WeakEnergyReport> {
    check_trials(cfg.trials)?;
    check_ensemble_dims(cfg.n, cfg.big_n, cfg.i_size)?;
    check_open_unit("eps", cfg.eps)?;
    check_positive("delta", cfg.delta)?;
    check_positive("t", cfg.t)?;
    check_positive("c", cfg.c_bernstein)?;
    let i = cfg.i_size as f64;
    let big_n = cfg.big_n as f64;
    let sigma = i / big_n;
    let ts = tau_star(sigma)?;
    let slack = cfg.eps * (ts + cfg.delta);
    let energy_limit = i * ((2.0 + cfg.t) / (1.0 - cfg.eps) * sigma + slack);

    let per_trial: Vec<EnergyTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let tau = sorted_energies(cfg.seed, k, cfg.n, cfg.big_n)?;
            let weak_energy: f64 = tau[..cfg.i_size].iter().sum();
            let hat_count = tau.partition_point(|&v| v <= ts);
            let hat: &[f64] = &tau[..hat_count];
            let hat_energy: f64 = hat.iter().sum();
            let average_ok =
                hat_count > 0 && weak_energy / i <= hat_energy / hat_count as f64 + slack;
            Ok(EnergyTrial {
                energy_ok: weak_energy <= energy_limit,
                average_ok,
                weak_energy,
                hat_count,
                trunc_sum: hat_energy,
                trunc_sum_sq: hat.iter().map(|v| v * v).sum(),
            })
        })
        .collect::<Result<_>>()?;

    let order = 2.0 * order_stat_tail(cfg.big_n, sigma, cfg.delta);
    let e2 = cfg.eps * cfg.eps * (1.0 - sigma).powi(2);
    let energy_prob = 1.0
        - order
        - 2.0 * (-2.0 * e2 * sigma * sigma * big_n).exp()
        - bernstein_tail(cfg.i_size, cfg.big_n, cfg.t, cfg.c_bernstein);
    let average_prob = 1.0 - order - 2.0 * (-2.0 * e2 * i * i / big_n).exp();

    let draws = big_n * cfg.trials as f64;
    let sum: f64 = per_trial.iter().map(|r| r.trunc_sum).sum();
    let sum_sq: f64 = per_trial.iter().map(|r| r.trunc_sum_sq).sum();
    let mean = sum / draws;
    let var = (sum_sq / draws - mean * mean).max(0.0) * draws / (draws - 1.0).max(1.0);
    let trials = cfg.trials as f64;

    Ok(WeakEnergyReport {
        tau_star: ts,
        energy_bound: CheckOutcome::new(
            "weak_energy",
            cfg.trials,
            per_trial.iter().filter(|r| r.energy_ok).count(),
            energy_prob,
        ),
        average_bound: CheckOutcome::new(
            "weak_average",
            cfg.trials,
            per_trial.iter().filter(|r| r.average_ok).count(),
            average_prob,
        ),
        truncated_mean: mean,
        truncated_mean_stderr: (var / draws).sqrt(),
        truncated_mean_expected: truncated_energy_mean(ts),
        mean_weak_energy: per_trial.iter().map(|r| r.weak_energy).sum::<f64>() / trials,
        mean_weak_count: per_trial.iter().map(|r| r.hat_count as f64).sum::<f64>() / trials,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WishartConfig {
    pub seed: u64,
    pub n: usize,
    pub i_size: usize,
    pub t: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WishartReport {
    /// `sqrt(|I|) - (1+t) sqrt(n)`; may be negative.
    pub lower_edge: f64,
    pub upper_edge: f64,
    pub min_singular: f64,
    pub max_singular: f64,
    pub outcome: CheckOutcome,
}

/// Extreme singular values of real `|I| x (n-1)` Gaussian matrices against
/// `[sqrt(|I|) - (1+t) sqrt(n), sqrt(|I|) + (1+t) sqrt(n)]`.
pub fn wishart_check(cfg: &WishartConfig) -> Result<WishartReport> {
    check_trials(cfg.trials)?;
    if cfg.n < 2 {
        return Err(Error::Dimension("wishart check needs n >= 2".into()));
    }
    if cfg.i_size <= cfg.n {
        return Err(Error::InvalidParameter(format!(
            "|I| must exceed n, got |I| = {} with n = {}",
            cfg.i_size, cfg.n
        )));
    }
    check_positive("t", cfg.t)?;
    let root_i = (cfg.i_size as f64).sqrt();
    let spread = (1.0 + cfg.t) * (cfg.n as f64).sqrt();
    let (lower, upper) = (root_i - spread, root_i + spread);

    let extremes: Vec<(f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut gen = RngStream::new(cfg.seed, k as u64).generator();
            let m = sample_real_gaussian(&mut gen, cfg.i_size, cfg.n - 1)?;
            let eig = SymmetricEigen::new(m.tr_mul(&m));
            let sv = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt());
            Ok(sv.fold((f64::INFINITY, 0.0f64), |(lo, hi), s| {
                (lo.min(s), hi.max(s))
            }))
        })
        .collect::<Result<_>>()?;

    let inside = extremes
        .iter()
        .filter(|(lo, hi)| *lo >= lower && *hi <= upper)
        .count();
    let bound = 1.0 - 2.0 * (-(cfg.n as f64) * cfg.t * cfg.t / 2.0).exp();
    Ok(WishartReport {
        lower_edge: lower,
        upper_edge: upper,
        min_singular: extremes.iter().map(|e| e.0).fold(f64::INFINITY, f64::min),
        max_singular: extremes.iter().map(|e| e.1).fold(0.0, f64::max),
        outcome: CheckOutcome::new("wishart", cfg.trials, inside, bound),
    })
}
