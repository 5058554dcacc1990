use phasecore::bounds::{
    chi2_cdf, order_stat_check, tau_star, theorem_error_rhs, theorem_prob_lower,
    truncated_energy_mean, weak_energy_check, wishart_check, BoundParams, Dims, OrderStatConfig,
    WeakEnergyConfig, WishartConfig,
};
use phasecore::linalg::{sample_complex_gaussian, RngStream};

#[test]
fn cdf_inverts_threshold() {
    for sigma in [1e-6, 0.01, 0.1, 0.25, 0.5, 0.9, 0.999] {
        let v = chi2_cdf(tau_star(sigma).unwrap()).unwrap();
        assert!((v - sigma).abs() <= 1e-12 * sigma.max(1e-3));
    }
}

#[test]
fn truncated_mean_matches_direct_sampling() {
    let sigma = 0.25;
    let ts = tau_star(sigma).unwrap();
    let draws = 1_000_000;
    let mut gen = RngStream::new(77, 0).generator();
    let a = sample_complex_gaussian(&mut gen, 1, draws).unwrap();
    let vals: Vec<f64> = a
        .to_row_major()
        .iter()
        .map(|z| z.norm_sqr())
        .map(|b2| if b2 <= ts { b2 } else { 0.0 })
        .collect();
    let m = draws as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (var / m).sqrt();
    let expected = truncated_energy_mean(ts);
    assert!(
        (mean - expected).abs() < 3.0 * se,
        "{mean} vs {expected} (se {se})"
    );
}

#[test]
fn weak_energy_check_reports_truncated_mean() {
    let r = weak_energy_check(&WeakEnergyConfig {
        seed: 4,
        n: 8,
        big_n: 4096,
        i_size: 1024,
        eps: 0.5,
        delta: 1.0,
        t: 1.0,
        c_bernstein: 1.0,
        trials: 245,
    })
    .unwrap();
    assert!(
        r.truncated_mean_z().abs() < 3.0,
        "z = {}",
        r.truncated_mean_z()
    );
    assert!(r.energy_bound.passed && r.average_bound.passed);
}

#[test]
fn tiny_bernstein_constant_clamps_and_flags() {
    let cfg = WeakEnergyConfig {
        seed: 4,
        n: 8,
        big_n: 4096,
        i_size: 1024,
        eps: 0.5,
        delta: 1.0,
        t: 1.0,
        c_bernstein: 1e-6,
        trials: 20,
    };
    let r = weak_energy_check(&cfg).unwrap();
    assert!(r.energy_bound.bound_raw < 0.0);
    assert!(r.energy_bound.clamped);
    assert_eq!(r.energy_bound.bound, 0.0);

    let r = weak_energy_check(&WeakEnergyConfig {
        c_bernstein: 1e6,
        ..cfg
    })
    .unwrap();
    assert!((0.0..=1.0).contains(&r.energy_bound.bound_raw));
}

#[test]
fn order_stat_threshold_is_sorted_and_checked() {
    let r = order_stat_check(&OrderStatConfig {
        seed: 2,
        n: 8,
        big_n: 1024,
        i_size: 256,
        delta: 0.5,
        eps: 0.25,
        trials: 100,
    })
    .unwrap();
    assert!(r.tau_sorted.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(r.tau_sorted.len(), 1024);
    assert!(r.threshold.passed && r.count.passed);
}

#[test]
fn zero_trials_rejected() {
    let err = wishart_check(&WishartConfig {
        seed: 0,
        n: 8,
        i_size: 64,
        t: 0.5,
        trials: 0,
    });
    assert!(err.is_err());
}

#[test]
fn probability_terms_at_reference_point() {
    let p = BoundParams::from_dims(
        Dims {
            n: 256,
            big_n: 4096,
            i_size: 512,
        },
        0.5,
        1.0,
        0.1,
        1.0,
    )
    .unwrap();
    let r = theorem_prob_lower(&p).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(r.q_term, 0.55716895337415237) < 1e-12);
    assert!(rel(r.count_term, 1.2664165549094176e-14) < 1e-12);
    assert!(rel(r.prob_lower, 0.44283104662583497) < 1e-12);
    assert_eq!(r.err_rhs, theorem_error_rhs(&p).unwrap());
}

#[test]
fn t_outside_open_interval_rejected() {
    let t_max = 0.5f64.powf(-0.5) - 1.0;
    assert!(BoundParams::from_ratios(0.1, 0.5, 0.5, 1.0, t_max, 1.0).is_err());
    assert!(BoundParams::from_ratios(0.1, 0.5, 0.5, 1.0, 0.0, 1.0).is_err());
    assert!(BoundParams::from_ratios(0.1, 0.5, 0.5, 1.0, t_max * 0.999, 1.0).is_ok());
}
