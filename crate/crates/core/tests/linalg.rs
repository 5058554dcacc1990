mod common;

use common::{oracle_extremes, projector_distance, random_psd};
use nalgebra::DMatrix;
use num_complex::Complex64;
use phasecore::linalg::{
    hermitian_eig_largest, hermitian_eig_smallest, hermitian_eig_smallest_with, ComplexMatrix,
    SmallestStrategy,
};

#[test]
fn jacobi_oracle_on_known_matrix() {
    // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
    let h = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(2.0, 0.0),
        ],
    );
    let ((lo, _), (hi, _)) = oracle_extremes(&h);
    assert!((lo - 1.0).abs() < 1e-14);
    assert!((hi - 3.0).abs() < 1e-14);
}

#[test]
fn smallest_and_largest_match_oracle() {
    for k in 0..12u64 {
        let n = 3 + 5 * k as usize;
        let g = random_psd(11, k, n, n + 3);
        let ((lo, vlo), (hi, vhi)) = oracle_extremes(g.as_dmatrix());
        let scale = g.frobenius_norm();
        let s = hermitian_eig_smallest(&g).unwrap();
        let l = hermitian_eig_largest(&g).unwrap();
        assert!((s.value - lo).abs() <= 1e-8 * scale, "n={n}");
        assert!((l.value - hi).abs() <= 1e-8 * scale, "n={n}");
        assert!(projector_distance(&s.vector, &vlo) < 1e-8, "n={n}");
        assert!(projector_distance(&l.vector, &vhi) < 1e-8, "n={n}");
    }
}

#[test]
fn inverse_iteration_agrees_with_dense() {
    for k in 0..4u64 {
        let g = random_psd(5, k, 40, 80);
        let d = hermitian_eig_smallest_with(&g, SmallestStrategy::Dense).unwrap();
        let i = hermitian_eig_smallest_with(&g, SmallestStrategy::InverseIteration).unwrap();
        assert!((d.value - i.value).abs() <= 1e-9 * g.frobenius_norm());
        assert!(projector_distance(&d.vector, &i.vector) < 1e-8);
        assert!(i.iterations > 0);
    }
}

#[test]
fn inverse_iteration_on_singular_gram() {
    // Rank-deficient: 6 x 6 Gram of a 6 x 4 factor.
    let g = random_psd(2, 0, 6, 4);
    let e = hermitian_eig_smallest_with(&g, SmallestStrategy::InverseIteration).unwrap();
    assert!(e.value.abs() < 1e-9 * g.frobenius_norm());
    let r = g.mul_vec(&e.vector).norm();
    assert!(r < 1e-8 * g.frobenius_norm());
}

#[test]
fn eigenvectors_are_unit_and_canonical() {
    let g = random_psd(3, 1, 16, 30);
    for v in [
        hermitian_eig_smallest(&g).unwrap().vector,
        hermitian_eig_largest(&g).unwrap().vector,
    ] {
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let (idx, _) = v
            .entries()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert_eq!(v.get(idx).im, 0.0);
        assert!(v.get(idx).re > 0.0);
    }
}

#[test]
fn rejects_bad_input() {
    let rect = ComplexMatrix::from_row_major(2, 3, vec![Complex64::new(1.0, 0.0); 6]).unwrap();
    assert!(hermitian_eig_largest(&rect).is_err());
    let skew = ComplexMatrix::from_row_major(
        2,
        2,
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ],
    )
    .unwrap();
    assert!(hermitian_eig_smallest(&skew).is_err());
}
