//! Measurement ensembles, weak-set selection, the null and spectral
//! estimates, the projector error metric and the error certificate.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig_largest, hermitian_eig_smallest, sample_complex_gaussian, ComplexMatrix,
    ComplexVector, RngStream,
};

/// Tolerance on `| ||x_hat|| - ||x0|| |` relative to `||x0||`.
const NORM_MATCH_TOL: f64 = 1e-8;
/// Relative slack when testing the certificate inequality.
pub const CERTIFICATE_SLACK: f64 = 1e-12;

/// One phase-retrieval instance: `A` (n x N), `x0`, `y = A* x0`, `b = |y|`.
#[derive(Clone, Debug)]
pub struct MeasurementEnsemble {
    a: ComplexMatrix,
    x0: ComplexVector,
    y: ComplexVector,
    b: Vec<f64>,
}

/// How the true signal of a fresh ensemble is chosen.
#[derive(Clone, Debug)]
pub enum SignalSpec {
    /// Uniform on the unit sphere (normalized complex Gaussian).
    RandomUnit,
    Given(ComplexVector),
}

fn check_dims(n: usize, big_n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Dimension(
            "signal dimension n must be at least 1".into(),
        ));
    }
    if big_n < 2 * n {
        return Err(Error::Dimension(format!(
            "need N >= 2n measurements, got N = {big_n} for n = {n}"
        )));
    }
    Ok(())
}

/// Sample `A` (row-major, then `x0` if random) from `rng` and measure.
pub fn make_ensemble(
    rng: &RngStream,
    n: usize,
    big_n: usize,
    signal: SignalSpec,
) -> Result<MeasurementEnsemble> {
    check_dims(n, big_n)?;
    if let SignalSpec::Given(x0) = &signal {
        if x0.len() != n {
            return Err(Error::Dimension(format!(
                "x0 has length {}, expected {n}",
                x0.len()
            )));
        }
        if x0.norm() <= 0.0 {
            return Err(Error::InvalidParameter("x0 must be nonzero".into()));
        }
    }
    let mut gen = rng.generator();
    let a = sample_complex_gaussian(&mut gen, n, big_n)?;
    let x0 = match signal {
        SignalSpec::Given(x0) => x0,
        SignalSpec::RandomUnit => {
            let g = sample_complex_gaussian(&mut gen, n, 1)?;
            g.column(0)
                .normalized()
                .ok_or_else(|| Error::Contract("sampled a zero signal".into()))?
        }
    };
    MeasurementEnsemble::from_parts(a, x0)
}

impl MeasurementEnsemble {
    /// Build an ensemble from a given sensing matrix and signal.
    pub fn from_parts(a: ComplexMatrix, x0: ComplexVector) -> Result<Self> {
        check_dims(a.rows(), a.cols())?;
        if x0.len() != a.rows() {
            return Err(Error::Dimension(format!(
                "x0 has length {}, A has {} rows",
                x0.len(),
                a.rows()
            )));
        }
        let y = a.adjoint_mul(&x0);
        let b = y.abs();
        Ok(Self { a, x0, y, b })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Number of measurements `N`.
    pub fn num_measurements(&self) -> usize {
        self.a.cols()
    }

    pub fn sensing(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn signal(&self) -> &ComplexVector {
        &self.x0
    }

    pub fn measurements(&self) -> &ComplexVector {
        &self.y
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.b
    }
}

/// Weak set `I` (smallest magnitudes) and its complement, both in ascending
/// index order (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSplit {
    pub weak: Vec<usize>,
    pub strong: Vec<usize>,
    pub sigma: f64,
}

impl IndexSplit {
    pub fn weak_len(&self) -> usize {
        self.weak.len()
    }

    /// `||b_I||^2`.
    pub fn weak_energy(&self, b: &[f64]) -> f64 {
        self.weak.iter().map(|&i| b[i] * b[i]).sum()
    }
}

/// Select the `i_size` smallest magnitudes; ties go to the lower index.
pub fn select_weak(ensemble: &MeasurementEnsemble, i_size: usize) -> Result<IndexSplit> {
    let n = ensemble.n();
    let big_n = ensemble.num_measurements();
    if i_size <= n || i_size >= big_n {
        return Err(Error::InvalidParameter(format!(
            "|I| must satisfy n < |I| < N, got |I| = {i_size} with n = {n}, N = {big_n}"
        )));
    }
    Ok(split_smallest(ensemble.magnitudes(), i_size))
}

pub(crate) fn split_smallest(b: &[f64], i_size: usize) -> IndexSplit {
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&i, &j| b[i].total_cmp(&b[j]).then(i.cmp(&j)));
    let mut weak = order[..i_size].to_vec();
    let mut strong = order[i_size..].to_vec();
    weak.sort_unstable();
    strong.sort_unstable();
    IndexSplit {
        weak,
        strong,
        sigma: i_size as f64 / b.len() as f64,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Null,
    Spectral,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Null => "null",
            Method::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "null" => Ok(Method::Null),
            "spectral" => Ok(Method::Spectral),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected null or spectral)"
            ))),
        }
    }
}

/// An estimator's output together with its error against the true signal.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub method: Method,
    /// Scaled so that `||x_hat|| = ||x0||`.
    pub x_hat: ComplexVector,
    /// `|x0* x_hat|`.
    pub align_inner: f64,
    /// `||x0 x0* - x_hat x_hat*||_F^2`.
    pub err_sq: f64,
    /// `sqrt(err_sq) / ||x0||^2`.
    pub rel_err: f64,
    pub iterations: usize,
}

fn estimate_from_direction(
    method: Method,
    x0: &ComplexVector,
    unit: &ComplexVector,
    iterations: usize,
) -> Result<Estimate> {
    let x0_norm = x0.norm();
    let x_hat = unit.scale_real(x0_norm);
    let err_sq = error_sq(x0, &x_hat)?;
    Ok(Estimate {
        method,
        align_inner: x0.inner(&x_hat).norm(),
        rel_err: err_sq.sqrt() / (x0_norm * x0_norm),
        x_hat,
        err_sq,
        iterations,
    })
}

/// `argmin ||A_I* x||` over `||x|| = ||x0||`, via the bottom eigenvector of
/// `A_I A_I*`.
pub fn null_vector(ensemble: &MeasurementEnsemble, split: &IndexSplit) -> Result<Estimate> {
    check_split(ensemble, split)?;
    let a_i = ensemble.a.select_columns(&split.weak);
    let pair = hermitian_eig_smallest(&a_i.gram())?;
    estimate_from_direction(Method::Null, &ensemble.x0, &pair.vector, pair.iterations)
}

/// `argmax ||diag(b) A* x||` over `||x|| = ||x0||`, via the top eigenvector of
/// `A diag(b^2) A*`.
pub fn spectral_vector(ensemble: &MeasurementEnsemble) -> Result<Estimate> {
    let weights: Vec<f64> = ensemble.b.iter().map(|v| v * v).collect();
    weighted_spectral_vector(ensemble, &weights)
}

/// Top eigenvector of `A diag(w) A*` for arbitrary nonnegative weights.
pub fn weighted_spectral_vector(
    ensemble: &MeasurementEnsemble,
    weights: &[f64],
) -> Result<Estimate> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter(
            "spectral weights must be finite and nonnegative".into(),
        ));
    }
    let gram = ensemble.a.weighted_gram(weights)?;
    let pair = hermitian_eig_largest(&gram)?;
    estimate_from_direction(
        Method::Spectral,
        &ensemble.x0,
        &pair.vector,
        pair.iterations,
    )
}

fn check_split(ensemble: &MeasurementEnsemble, split: &IndexSplit) -> Result<()> {
    let big_n = ensemble.num_measurements();
    if split.weak.len() + split.strong.len() != big_n
        || split.weak.iter().chain(&split.strong).any(|&i| i >= big_n)
    {
        return Err(Error::Dimension(
            "index split does not partition the ensemble's measurements".into(),
        ));
    }
    if split.weak.len() <= ensemble.n() {
        return Err(Error::InvalidParameter(format!(
            "|I| = {} must exceed n = {}",
            split.weak.len(),
            ensemble.n()
        )));
    }
    Ok(())
}

/// Phase-invariant squared projector error `2||x0||^4 - 2|x0* x_hat|^2`.
///
/// `x_hat` must have the same norm as `x0` (relative tolerance 1e-8).
pub fn error_sq(x0: &ComplexVector, x_hat: &ComplexVector) -> Result<f64> {
    if x0.len() != x_hat.len() {
        return Err(Error::Dimension(format!(
            "x0 has length {}, x_hat has length {}",
            x0.len(),
            x_hat.len()
        )));
    }
    let expected = x0.norm();
    let actual = x_hat.norm();
    if (expected - actual).abs() > NORM_MATCH_TOL * expected.max(f64::MIN_POSITIVE) {
        return Err(Error::NormMismatch { expected, actual });
    }
    let n2 = x0.norm_sqr();
    let inner = x0.inner(x_hat).norm_sqr();
    Ok((2.0 * n2 * n2 - 2.0 * inner).max(0.0))
}

/// Per-instance upper bound on the null-vector error.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// `|x0* x_null| / ||x0||^2`, in `[0, 1]`.
    pub beta: f64,
    /// Unit vector orthogonal to the (rephased) null direction.
    pub z: ComplexVector,
    /// `-sqrt(1 - beta^2) x_null + beta z`, scaled to `||x0||`.
    pub x_perp: ComplexVector,
    /// `err_sq / 4`.
    pub lhs: f64,
    /// `||x0||^4 ||b_I||^2 / ||A_I* x_perp||^2`; infinite when degenerate.
    pub rhs: f64,
}

impl Certificate {
    /// `||A_I* x_perp|| = 0`: the bound carries no information.
    pub fn is_degenerate(&self) -> bool {
        self.rhs.is_infinite()
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + CERTIFICATE_SLACK)
    }
}

/// Unit vector orthogonal to `u`, from Gram-Schmidt on `e_1`, falling back
/// to `e_2`. `None` when `n = 1`.
fn orthogonal_unit(u: &ComplexVector) -> Option<ComplexVector> {
    let n = u.len();
    (0..n.min(2)).find_map(|k| {
        let e = ComplexVector::basis(n, k);
        let r = e.sub(&u.scale(u.inner(&e)));
        (r.norm() > 1e-8).then(|| r.normalized()).flatten()
    })
}

/// Construct `beta`, `z` and `x_perp` for a null-vector estimate and evaluate
/// both sides of the error certificate.
pub fn certify(
    ensemble: &MeasurementEnsemble,
    split: &IndexSplit,
    estimate: &Estimate,
) -> Result<Certificate> {
    if estimate.method != Method::Null {
        return Err(Error::InvalidParameter(
            "certificates apply to null-vector estimates only".into(),
        ));
    }
    check_split(ensemble, split)?;
    let x0 = &ensemble.x0;
    let s = x0.norm();
    let x0u = x0.scale_real(1.0 / s);
    let u = estimate
        .x_hat
        .normalized()
        .ok_or_else(|| Error::Contract("null estimate is zero".into()))?;
    // Rephase so that x0* u is real and nonnegative.
    let c = x0u.inner(&u);
    let u = if c.norm() > 0.0 {
        u.scale(c.conj() / c.norm())
    } else {
        u
    };
    let beta = x0u.inner(&u).re.clamp(0.0, 1.0);

    let resid = x0u.sub(&u.scale_real(beta));
    let z = if resid.norm() > 1e-14 {
        resid.normalized()
    } else {
        orthogonal_unit(&u)
    };
    let lhs = estimate.err_sq / 4.0;
    let a_i = ensemble.a.select_columns(&split.weak);
    let b_i_sq = split.weak_energy(&ensemble.b);

    let Some(z) = z else {
        // n = 1: nothing is orthogonal to x0.
        return Ok(Certificate {
            beta,
            z: ComplexVector::zeros(x0.len()),
            x_perp: ComplexVector::zeros(x0.len()),
            lhs,
            rhs: f64::INFINITY,
        });
    };
    let sin = (1.0 - beta * beta).max(0.0).sqrt();
    let x_perp_unit = u.scale_real(-sin).add(&z.scale_real(beta));
    let x_perp = x_perp_unit.scale_real(s);
    let denom = a_i.adjoint_mul(&x_perp).norm_sqr();
    let rhs = if denom == 0.0 {
        f64::INFINITY
    } else {
        s.powi(4) * b_i_sq / denom
    };
    Ok(Certificate {
        beta,
        z,
        x_perp,
        lhs,
        rhs,
    })
}

/// Rotate the weak rows into the basis whose first vector is `x0 / ||x0||`
/// and drop that first coordinate: the `|I| x (n-1)` block `A'` whose
/// entries are i.i.d. complex Gaussian independently of how `I` was chosen.
pub fn weak_subcolumn_block(
    ensemble: &MeasurementEnsemble,
    split: &IndexSplit,
) -> Result<ComplexMatrix> {
    check_split(ensemble, split)?;
    let n = ensemble.n();
    if n < 2 {
        return Err(Error::Dimension("sub-column block needs n >= 2".into()));
    }
    let q = unitary_with_first_column(&ensemble.x0);
    let rotated = ensemble
        .a
        .select_columns(&split.weak)
        .as_dmatrix()
        .ad_mul(&q);
    ComplexMatrix::from_dmatrix(rotated.columns(1, n - 1).into_owned())
}

/// Unitary `Q` with `Q e_1 = x / ||x||`.
fn unitary_with_first_column(x: &ComplexVector) -> DMatrix<Complex64> {
    let n = x.len();
    let xu = x.normalized().expect("nonzero signal");
    let mut m = DMatrix::<Complex64>::zeros(n, n + 1);
    m.set_column(0, xu.as_dvector());
    for k in 0..n {
        m[(k, k + 1)] = Complex64::new(1.0, 0.0);
    }
    let mut q = m.qr().q();
    // QR leaves a unimodular factor on the first column; replace it exactly.
    q.set_column(0, xu.as_dvector());
    q
}
