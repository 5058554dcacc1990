//! Dense complex linear algebra and seeded sampling.

mod eig;
mod rng;

pub use eig::{
    hermitian_eig_largest, hermitian_eig_smallest, hermitian_eig_smallest_with, EigenPair,
    SmallestStrategy, DENSE_SMALLEST_MAX_DIM,
};
pub use rng::{sample_complex_gaussian, sample_real_gaussian, RngStream};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Contract("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_dmatrix_unchecked(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&v| Complex64::new(v, 0.0)));
        Self(DMatrix::from_diagonal(&d))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            out.extend(self.0.row(r).iter().copied());
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector(self.0.column(j).into_owned())
    }

    /// Sub-matrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self(self.0.select_columns(cols))
    }

    /// `A* x`.
    pub fn adjoint_mul(&self, x: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.ad_mul(&x.0))
    }

    pub fn mul_vec(&self, x: &ComplexVector) -> ComplexVector {
        ComplexVector(&self.0 * &x.0)
    }

    /// Gram matrix `A A*`.
    pub fn gram(&self) -> Self {
        Self(&self.0 * self.0.adjoint())
    }

    /// `A diag(w) A*` for real nonnegative column weights.
    pub fn weighted_gram(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "{} weights for {} columns",
                weights.len(),
                self.cols()
            )));
        }
        let mut scaled = self.0.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(weights[j], 0.0);
        }
        Ok(Self(scaled * self.0.adjoint()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||A - A*||_F <= tol * ||A||_F`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.rows() != self.cols() {
            return false;
        }
        let diff = (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff <= tol * self.frobenius_norm()
    }

    pub fn trace_re(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }
}

/// Dense complex vector. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(DVector<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Contract("vector has non-finite entries".into()));
        }
        Ok(Self(DVector::from_vec(entries)))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    /// Canonical basis vector `e_k`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub(crate) fn from_dvector_unchecked(v: DVector<Complex64>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.0[i]
    }

    pub fn entries(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Inner product `self* other` (conjugate-linear in `self`).
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &ComplexVector) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &ComplexVector) -> Self {
        Self(&self.0 - &other.0)
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale_real(1.0 / n))
    }

    /// Multiply by a global phase so the largest-magnitude entry (first one
    /// on ties) is real and nonnegative.
    pub fn canonical_phase(&self) -> Self {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (i, z) in self.0.iter().enumerate() {
            let m = z.norm();
            if m > best_mag {
                best = i;
                best_mag = m;
            }
        }
        if best_mag <= 0.0 {
            return self.clone();
        }
        let z = self.0[best];
        let mut out = self.scale(z.conj() / best_mag);
        out.0[best] = Complex64::new(best_mag, 0.0);
        out
    }

    /// Entrywise modulus.
    pub fn abs(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm()).collect()
    }
}

/// `||x x* - y y*||_F`, computed from the component of `y` orthogonal to `x`
/// for unit vectors, which stays accurate for nearly parallel inputs.
pub(crate) fn unit_projector_distance(x: &DVector<Complex64>, y: &DVector<Complex64>) -> f64 {
    let c = x.dotc(y);
    let orth = y - x * c;
    std::f64::consts::SQRT_2 * orth.norm()
}
