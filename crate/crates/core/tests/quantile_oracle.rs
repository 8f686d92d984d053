//! `normal_quantile` and `little_z_max` against a quadrature-and-bisection oracle.

use dstar_core::adversary::little_z_max;
use dstar_core::numerics::normal_quantile;

/// Φ(x) = 1/2 + ∫₀ˣ φ by composite Simpson with 2·10⁴ panels.
fn cdf(x: f64) -> f64 {
    let n = 20_000;
    let h = x / n as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = phi(0.0) + phi(x);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * phi(i as f64 * h);
    }
    0.5 + acc * h / 3.0
}

fn oracle_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn quantile_matches_oracle() {
    for p in [1e-6, 1e-3, 0.01, 0.1, 0.25, 0.4, 0.5, 0.6, 0.68, 0.75, 0.9, 0.975, 0.999] {
        let want = oracle_quantile(p);
        let got = normal_quantile(p).unwrap();
        assert!((got - want).abs() < 1e-8, "p={p}: {got} vs oracle {want}");
    }
}

#[test]
fn little_z_for_25_workers_8_faulty() {
    // s = ⌊25/2 + 1⌋ − 8 = 5, so the quantile level is 20/25
    let want = oracle_quantile(0.8);
    assert!((want - 0.84162).abs() < 1e-5);
    assert!((little_z_max(25, 8).unwrap() - want).abs() < 1e-9);
}

#[test]
fn out_of_range_levels_are_rejected() {
    for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(normal_quantile(p).is_err(), "p={p}");
    }
}
