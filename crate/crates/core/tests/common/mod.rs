#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use phasecore::linalg::{sample_complex_gaussian, ComplexMatrix, ComplexVector, RngStream};

/// Cyclic Jacobi on a real symmetric matrix. Returns ascending eigenvalues
/// and the matching eigenvector columns.
pub fn jacobi_symmetric(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = a.len();
    let mut v = vec![vec![0.0; m]; m];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..m).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..m).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// Dense oracle for a Hermitian matrix through the real embedding
/// `[[Re, -Im], [Im, Re]]`. Returns (smallest, largest) eigenpairs.
pub fn oracle_extremes(h: &DMatrix<Complex64>) -> ((f64, ComplexVector), (f64, ComplexVector)) {
    let n = h.nrows();
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            r[i][j] = z.re;
            r[i + n][j + n] = z.re;
            r[i][j + n] = -z.im;
            r[i + n][j] = z.im;
        }
    }
    let (vals, vecs) = jacobi_symmetric(r);
    let to_complex = |v: &Vec<f64>| {
        let c: Vec<Complex64> = (0..n).map(|k| Complex64::new(v[k], v[k + n])).collect();
        ComplexVector::new(c).unwrap().normalized().unwrap()
    };
    let last = 2 * n - 1;
    (
        (vals[0], to_complex(&vecs[0])),
        (vals[last], to_complex(&vecs[last])),
    )
}

/// `||x x* - y y*||_F` for unit vectors, computed entrywise.
pub fn projector_distance(x: &ComplexVector, y: &ComplexVector) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = x.get(i) * x.get(j).conj() - y.get(i) * y.get(j).conj();
            s += d.norm_sqr();
        }
    }
    s.sqrt()
}

/// `||x0 x0* - x x*||_F^2` entrywise.
pub fn frobenius_error_sq(x0: &ComplexVector, x: &ComplexVector) -> f64 {
    let n = x0.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (x0.get(i) * x0.get(j).conj() - x.get(i) * x.get(j).conj()).norm_sqr();
        }
    }
    s
}

/// Random Hermitian PSD matrix `B B*` with `B` of size n x m.
pub fn random_psd(seed: u64, stream: u64, n: usize, m: usize) -> ComplexMatrix {
    let mut g = RngStream::new(seed, stream).generator();
    sample_complex_gaussian(&mut g, n, m).unwrap().gram()
}

pub fn random_unit(seed: u64, stream: u64, n: usize) -> ComplexVector {
    let mut g = RngStream::new(seed, stream).generator();
    sample_complex_gaussian(&mut g, n, 1)
        .unwrap()
        .column(0)
        .normalized()
        .unwrap()
}
