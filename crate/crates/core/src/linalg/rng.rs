use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Key for a reproducible random stream.
///
/// Backed by ChaCha20 keyed from `master_seed` with the stream selected by
/// `stream_id`, so distinct trials draw from disjoint counter ranges without
/// any sequential splitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!(
            "cannot sample a {rows}x{cols} matrix"
        )));
    }
    Ok(())
}

/// Fill a `rows x cols` matrix in row-major order with circularly symmetric
/// complex Gaussians whose real and imaginary parts are each N(0, 1).
pub fn sample_complex_gaussian<R: rand::Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> Result<ComplexMatrix> {
    check_dims(rows, cols)?;
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(ComplexMatrix::from_dmatrix_unchecked(m))
}

/// Real standard Gaussian matrix, filled in row-major order.
pub fn sample_real_gaussian<R: rand::Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<f64>> {
    check_dims(rows, cols)?;
    let mut m = DMatrix::<f64>::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = StandardNormal.sample(rng);
        }
    }
    Ok(m)
}
