//! Extreme eigenpairs of Hermitian positive semidefinite matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{rng::RngStream, sample_complex_gaussian, unit_projector_distance};
use super::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// Largest dimension for which the smallest eigenpair is taken from a full
/// dense decomposition; above it inverse iteration is used.
pub const DENSE_SMALLEST_MAX_DIM: usize = 512;

const HERMITIAN_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-10;
const RESIDUAL_STOP: f64 = 1e-12;
const RESIDUAL_ACCEPT: f64 = 1e-9;
const MAX_ITER: usize = 100_000;
const BLOCK: usize = 8;
const INVERSE_SHIFT: f64 = 1e-12;
const START_SEED: u64 = 0x5eed_b10c;

/// Eigenvalue, unit eigenvector (canonical phase) and iteration count.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: ComplexVector,
    pub iterations: usize,
}

/// How [`hermitian_eig_smallest_with`] computes the bottom eigenpair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SmallestStrategy {
    /// Dense decomposition up to [`DENSE_SMALLEST_MAX_DIM`], inverse
    /// iteration above.
    #[default]
    Auto,
    Dense,
    InverseIteration,
}

pub fn hermitian_eig_smallest(g: &ComplexMatrix) -> Result<EigenPair> {
    hermitian_eig_smallest_with(g, SmallestStrategy::Auto)
}

pub fn hermitian_eig_smallest_with(
    g: &ComplexMatrix,
    strategy: SmallestStrategy,
) -> Result<EigenPair> {
    let h = hermitian_part(g)?;
    let dense = match strategy {
        SmallestStrategy::Auto => h.nrows() <= DENSE_SMALLEST_MAX_DIM,
        SmallestStrategy::Dense => true,
        SmallestStrategy::InverseIteration => false,
    };
    if dense {
        dense_smallest(&h)
    } else {
        inverse_iteration(&h)
    }
}

/// Top eigenpair by block power iteration with Rayleigh-Ritz extraction.
pub fn hermitian_eig_largest(g: &ComplexMatrix) -> Result<EigenPair> {
    let h = hermitian_part(g)?;
    subspace_iteration(&h, |x| &h * x, Target::Largest)
}

fn hermitian_part(g: &ComplexMatrix) -> Result<DMatrix<Complex64>> {
    if g.rows() != g.cols() || g.rows() == 0 {
        return Err(Error::Dimension(format!(
            "eigensolver needs a nonempty square matrix, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    if !g.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Contract("matrix is not Hermitian".into()));
    }
    let m = g.as_dmatrix();
    Ok((m + m.adjoint()) * Complex64::new(0.5, 0.0))
}

fn frobenius(h: &DMatrix<Complex64>) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalize, fix the phase, and check the residual of the final pair.
fn finish(h: &DMatrix<Complex64>, v: DVector<Complex64>, iterations: usize) -> Result<EigenPair> {
    let vector = ComplexVector::from_dvector_unchecked(v)
        .normalized()
        .ok_or_else(|| Error::Contract("eigenvector collapsed to zero".into()))?
        .canonical_phase();
    let v = vector.as_dvector();
    let hv = h * v;
    let value = v.dotc(&hv).re;
    let residual = (hv - v * Complex64::new(value, 0.0)).norm();
    if residual > RESIDUAL_ACCEPT * frobenius(h).max(f64::MIN_POSITIVE) {
        return Err(Error::Convergence {
            iterations,
            residual,
        });
    }
    Ok(EigenPair {
        value,
        vector,
        iterations,
    })
}

fn dense_smallest(h: &DMatrix<Complex64>) -> Result<EigenPair> {
    let eig =
        SymmetricEigen::try_new(h.clone(), f64::EPSILON, 100_000).ok_or(Error::Convergence {
            iterations: 100_000,
            residual: f64::NAN,
        })?;
    let idx = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty spectrum");
    finish(h, eig.eigenvectors.column(idx).into_owned(), 0)
}

fn inverse_iteration(h: &DMatrix<Complex64>) -> Result<EigenPair> {
    let n = h.nrows();
    let scale = (h.diagonal().iter().map(|z| z.re).sum::<f64>() / n as f64).abs();
    if scale == 0.0 {
        // Zero trace on a PSD matrix means G = 0: every vector is a null vector.
        return finish(
            h,
            DVector::from_fn(n, |i, _| Complex64::new(f64::from(i == 0), 0.0)),
            0,
        );
    }
    let mut mu = INVERSE_SHIFT;
    while mu <= 1e-6 {
        let shifted = h + DMatrix::<Complex64>::identity(n, n) * Complex64::new(mu * scale, 0.0);
        if let Some(chol) = shifted.cholesky() {
            return subspace_iteration(h, |x| chol.solve(x), Target::Smallest);
        }
        mu *= 100.0;
    }
    Err(Error::Contract(
        "Gram matrix is not positive semidefinite (Cholesky failed)".into(),
    ))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Largest,
    Smallest,
}

/// Block iteration `X <- orth(apply(X))` followed by Rayleigh-Ritz on `h`.
/// Stops when the target Ritz vector's projector moves by less than
/// `PROJECTOR_TOL`, or its residual is below `RESIDUAL_STOP * ||h||_F`.
fn subspace_iteration<F>(h: &DMatrix<Complex64>, apply: F, target: Target) -> Result<EigenPair>
where
    F: Fn(&DMatrix<Complex64>) -> DMatrix<Complex64>,
{
    let n = h.nrows();
    let k = n.min(BLOCK);
    let norm = frobenius(h);
    if norm == 0.0 {
        return finish(
            h,
            DVector::from_fn(n, |i, _| Complex64::new(f64::from(i == 0), 0.0)),
            0,
        );
    }
    let start = sample_complex_gaussian(&mut RngStream::new(START_SEED, 0).generator(), n, k)?;
    let mut x = start.into_dmatrix().qr().q();
    let mut prev: Option<DVector<Complex64>> = None;
    let mut residual = f64::INFINITY;

    for it in 1..=MAX_ITER {
        let q = apply(&x).qr().q();
        let small = q.adjoint() * h * &q;
        let small = (&small + small.adjoint()) * Complex64::new(0.5, 0.0);
        let ritz =
            SymmetricEigen::try_new(small, f64::EPSILON, 10_000).ok_or(Error::Convergence {
                iterations: it,
                residual,
            })?;
        let pick = |a: &(usize, &f64), b: &(usize, &f64)| a.1.total_cmp(b.1);
        let (idx, &theta) = match target {
            Target::Largest => ritz.eigenvalues.iter().enumerate().max_by(pick),
            Target::Smallest => ritz.eigenvalues.iter().enumerate().min_by(pick),
        }
        .expect("nonempty block");
        x = &q * &ritz.eigenvectors;
        let v = x.column(idx).into_owned();
        residual = (h * &v - &v * Complex64::new(theta, 0.0)).norm();

        let settled = prev
            .as_ref()
            .is_some_and(|p| unit_projector_distance(p, &v) <= PROJECTOR_TOL);
        if settled || residual <= RESIDUAL_STOP * norm {
            return finish(h, v, it);
        }
        prev = Some(v);
    }
    Err(Error::Convergence {
        iterations: MAX_ITER,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let g = ComplexMatrix::identity(2);
        let lo = hermitian_eig_smallest(&g).unwrap();
        let hi = hermitian_eig_largest(&g).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-14);
        assert!((hi.value - 1.0).abs() < 1e-14);
        assert!((lo.vector.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_extremes() {
        let g = ComplexMatrix::from_diagonal(&[3.0, 1.0]);
        let lo = hermitian_eig_smallest(&g).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-14);
        assert!((lo.vector.get(1) - c(1.0)).norm() < 1e-12);
        let hi = hermitian_eig_largest(&g).unwrap();
        assert!((hi.value - 3.0).abs() < 1e-14);
        assert!((hi.vector.get(0) - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_iteration_on_diagonal() {
        let g = ComplexMatrix::from_diagonal(&[3.0, 1.0, 5.0, 0.5, 2.0, 9.0, 7.0, 4.0, 6.0, 8.0]);
        let lo = hermitian_eig_smallest_with(&g, SmallestStrategy::InverseIteration).unwrap();
        assert!((lo.value - 0.5).abs() < 1e-12);
        assert!((lo.vector.get(3) - c(1.0)).norm() < 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let g = ComplexMatrix::from_row_major(2, 2, vec![c(1.0), c(2.0), c(0.0), c(1.0)]).unwrap();
        assert!(matches!(
            hermitian_eig_smallest(&g),
            Err(Error::Contract(_))
        ));
        assert!(matches!(hermitian_eig_largest(&g), Err(Error::Contract(_))));
    }

    #[test]
    fn non_square_rejected() {
        let g = ComplexMatrix::from_row_major(1, 2, vec![c(1.0), c(2.0)]).unwrap();
        assert!(matches!(
            hermitian_eig_largest(&g),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn zero_matrix() {
        let g = ComplexMatrix::from_diagonal(&[0.0; 12]);
        let lo = hermitian_eig_smallest_with(&g, SmallestStrategy::InverseIteration).unwrap();
        assert_eq!(lo.value, 0.0);
        let hi = hermitian_eig_largest(&g).unwrap();
        assert_eq!(hi.value, 0.0);
    }

    #[test]
    fn canonical_phase_applied() {
        let g = ComplexMatrix::from_row_major(
            2,
            2,
            vec![
                c(2.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                c(2.0),
            ],
        )
        .unwrap();
        let hi = hermitian_eig_largest(&g).unwrap();
        let v = &hi.vector;
        let (imax, _) = v
            .entries()
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, z)| {
                if z.norm() > acc.1 {
                    (i, z.norm())
                } else {
                    acc
                }
            });
        assert!(v.get(imax).im.abs() < 1e-15 && v.get(imax).re >= 0.0);
        assert!((hi.value - 3.0).abs() < 1e-12);
    }
}
