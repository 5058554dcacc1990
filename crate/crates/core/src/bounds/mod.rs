//! Closed-form chi-square quantities and the non-asymptotic error and
//! success-probability bounds for the null vector.
//!
//! Squared magnitudes `b(i)^2 = |a_i* x0|^2` with `||x0|| = 1` follow the
//! density `exp(-z/2)/2` under the unit-variance complex normal convention,
//! which every formula here assumes.

mod checks;

pub use checks::{
    order_stat_check, weak_energy_check, wishart_check, CheckOutcome, OrderStatConfig,
    OrderStatReport, WeakEnergyConfig, WeakEnergyReport, WishartConfig, WishartReport,
};

use std::f64::consts::E;

use crate::error::{Error, Result};

/// Above this `sigma` the Bernstein tail `Q` is outside its small-`sigma`
/// regime and results are flagged.
pub const SMALL_SIGMA_LIMIT: f64 = 0.2;

/// `F(tau) = 1 - exp(-tau/2)`.
pub fn chi2_cdf(tau: f64) -> Result<f64> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "chi-square CDF needs tau >= 0, got {tau}"
        )));
    }
    Ok(-(-tau / 2.0).exp_m1())
}

/// Threshold `tau* = -2 ln(1 - sigma)` with `F(tau*) = sigma`.
pub fn tau_star(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must lie in (0, 1), got {sigma}"
        )));
    }
    Ok(-2.0 * (-sigma).ln_1p())
}

/// `E[b^2 ; b^2 <= tau] = 2 - (tau + 2) exp(-tau/2)`.
pub fn truncated_energy_mean(tau: f64) -> f64 {
    2.0 - (tau + 2.0) * (-tau / 2.0).exp()
}

/// `exp(-N delta^2 e^{-delta} (1 - sigma)^2 / 2)`: the tail for
/// `tau_{|I|} > tau* + delta`.
pub fn order_stat_tail(big_n: usize, sigma: f64, delta: f64) -> f64 {
    (-(big_n as f64) * delta * delta * (-delta).exp() * (1.0 - sigma).powi(2) / 2.0).exp()
}

/// `exp(-2 floor(|I| eps)^2 / N)`: the tail for `|I-hat| < (1 - eps)|I|`.
pub fn weak_count_tail(i_size: usize, big_n: usize, eps: f64) -> f64 {
    let k = (i_size as f64 * eps).floor();
    (-2.0 * k * k / big_n as f64).exp()
}

/// Asymptotic Bernstein tail
/// `2 exp(-c min[e^2 t^2/16 (ln 1/sigma)^2 |I|^2/N, e t/4 |I| ln 1/sigma])`.
pub fn bernstein_tail(i_size: usize, big_n: usize, t: f64, c: f64) -> f64 {
    let i = i_size as f64;
    let sigma = i / big_n as f64;
    let l = (1.0 / sigma).ln();
    let quadratic = E * E * t * t / 16.0 * l * l * i * i / big_n as f64;
    let linear = E * t / 4.0 * i * l;
    2.0 * (-c * quadratic.min(linear)).exp()
}

/// Problem sizes behind a parameter set; needed for the probability bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub big_n: usize,
    pub i_size: usize,
}

/// Inputs of the error bound and its success probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub sigma: f64,
    pub nu: f64,
    pub eps: f64,
    pub delta: f64,
    pub t: f64,
    pub c_bernstein: f64,
    pub dims: Option<Dims>,
}

impl BoundParams {
    /// Parameters given by the aspect ratios alone; the probability bound is
    /// then unavailable.
    pub fn from_ratios(sigma: f64, nu: f64, eps: f64, delta: f64, t: f64, c: f64) -> Result<Self> {
        let p = Self {
            sigma,
            nu,
            eps,
            delta,
            t,
            c_bernstein: c,
            dims: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters from `(n, N, |I|)`; `sigma = |I|/N`, `nu = n/|I|`.
    pub fn from_dims(dims: Dims, eps: f64, delta: f64, t: f64, c: f64) -> Result<Self> {
        if dims.big_n == 0 || dims.i_size == 0 {
            return Err(Error::InvalidParameter("N and |I| must be positive".into()));
        }
        let p = Self {
            sigma: dims.i_size as f64 / dims.big_n as f64,
            nu: dims.n as f64 / dims.i_size as f64,
            eps,
            delta,
            t,
            c_bernstein: c,
            dims: Some(dims),
        };
        p.validate()?;
        Ok(p)
    }

    /// Upper end of the admissible `t` range, `nu^{-1/2} - 1`.
    pub fn t_max(&self) -> f64 {
        self.nu.powf(-0.5) - 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )))
            }
        };
        open_unit("sigma", self.sigma)?;
        open_unit("nu", self.nu)?;
        open_unit("eps", self.eps)?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        let t_max = self.t_max();
        if !(self.t > 0.0 && self.t < t_max) {
            return Err(Error::InvalidParameter(format!(
                "t must lie in (0, nu^(-1/2) - 1) = (0, {t_max}), got {}",
                self.t
            )));
        }
        if !(self.c_bernstein > 0.0 && self.c_bernstein.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "c must be positive, got {}",
                self.c_bernstein
            )));
        }
        Ok(())
    }

    /// `sigma > 0.2`: the Bernstein tail is used outside its regime.
    pub fn small_sigma_warning(&self) -> bool {
        self.sigma > SMALL_SIGMA_LIMIT
    }
}

/// Error bound (normalized by `||x0||^4`) and the probability terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundResult {
    pub err_rhs: f64,
    /// `2 exp(-N delta^2 e^{-delta} (1 - sigma)^2 / 2)`.
    pub order_term: f64,
    /// `exp(-2 floor(|I| eps)^2 / N)`.
    pub count_term: f64,
    /// Bernstein tail `Q`.
    pub q_term: f64,
    /// `1 - order_term - count_term - q_term`, unclamped.
    pub prob_lower: f64,
    pub small_sigma_warning: bool,
}

impl BoundResult {
    /// Probability for display: negative (vacuous) bounds shown as 0.
    pub fn prob_lower_clamped(&self) -> f64 {
        self.prob_lower.clamp(0.0, 1.0)
    }
}

/// `((2+t)/(1-eps) sigma + eps(-2 ln(1-sigma) + delta)) * 2 / (1 - (1+t) sqrt(nu))^2`
/// at `||x0|| = 1`.
pub fn theorem_error_rhs(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let energy = (2.0 + p.t) / (1.0 - p.eps) * p.sigma + p.eps * (tau_star(p.sigma)? + p.delta);
    let gap = 1.0 - (1.0 + p.t) * p.nu.sqrt();
    Ok(energy * 2.0 / (gap * gap))
}

/// Error bound for a signal of norm `x0_norm` (quartic scaling).
pub fn theorem_error_rhs_scaled(p: &BoundParams, x0_norm: f64) -> Result<f64> {
    Ok(theorem_error_rhs(p)? * x0_norm.powi(4))
}

/// Full bound evaluation. Needs `p.dims`.
pub fn theorem_prob_lower(p: &BoundParams) -> Result<BoundResult> {
    let err_rhs = theorem_error_rhs(p)?;
    let dims = p
        .dims
        .ok_or_else(|| Error::InvalidParameter("probability bound needs N and |I|".into()))?;
    let order_term = 2.0 * order_stat_tail(dims.big_n, p.sigma, p.delta);
    let count_term = weak_count_tail(dims.i_size, dims.big_n, p.eps);
    let q_term = bernstein_tail(dims.i_size, dims.big_n, p.t, p.c_bernstein);
    Ok(BoundResult {
        err_rhs,
        order_term,
        count_term,
        q_term,
        prob_lower: 1.0 - order_term - count_term - q_term,
        small_sigma_warning: p.small_sigma_warning(),
    })
}
