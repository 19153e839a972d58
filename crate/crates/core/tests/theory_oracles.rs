use proptest::prelude::*;
use rpnodesim::theory::{
    flip_probability, jl_min_q_classic, jl_min_q_cosine, jl_min_q_cosine_raw, jl_min_q_dot, sign_change_probability,
    student_t_sf,
};

fn t_density(x: f64, nu: f64) -> f64 {
    let ln_c = libm::lgamma((nu + 1.0) / 2.0) - libm::lgamma(nu / 2.0) - 0.5 * (nu * std::f64::consts::PI).ln();
    (ln_c - (nu + 1.0) / 2.0 * (x * x / nu).ln_1p()).exp()
}

/// Composite Simpson rule with `2m` panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / (2 * m) as f64;
    let mut s = f(a) + f(b);
    for i in 1..2 * m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn survival_matches_quadrature() {
    for &(x, q) in &[(0.3, 1u64), (1.0, 3), (1.0, 100), (2.5, 10), (-1.2, 7), (0.8, 400)] {
        let oracle = 0.5 - simpson(|t| t_density(t, q as f64), 0.0, x, 20_000);
        let got = student_t_sf(x, q).unwrap();
        assert!((got - oracle).abs() < 1e-10, "x={x} q={q}: {got} vs {oracle}");
    }
}

#[test]
fn cosine_dimension_tracks_dot_dimension() {
    // At ε = 0.01 the leading terms are 2·ln[2k(k−1)/δ]/(ε²/2) and
    // 4·ln[k(k−1)/δ]/ε²; the exact ratio stays within 10% of theirs.
    let (eps, delta) = (0.01, 0.05);
    for k in [10u64, 1000, 10_000_000] {
        let kk = (k * (k - 1)) as f64;
        let leading = (2.0 * kk / delta).ln() / (kk / delta).ln();
        let ratio = jl_min_q_cosine(eps, delta, k).unwrap() as f64 / jl_min_q_dot(eps, delta, k).unwrap() as f64;
        assert!((ratio / leading - 1.0).abs() < 0.1, "k={k}: {ratio} vs {leading}");
    }
}

#[test]
fn cosine_dimension_exceeds_classic_at_scale() {
    let raw = jl_min_q_cosine_raw(0.05, 0.05, 10_000_000).unwrap();
    let classic = jl_min_q_classic(0.05, 0.05, 10_000_000).unwrap();
    assert!((raw - 61581.56).abs() < 0.01);
    assert!((classic - 56371.08).abs() < 0.01);
}

proptest! {
    #[test]
    fn min_q_at_least_one(eps in 0.001f64..0.05, delta in 0.001f64..0.999, k in 2u64..100_000) {
        prop_assert!(jl_min_q_dot(eps, delta, k).unwrap() >= 1);
        prop_assert!(jl_min_q_cosine(eps, delta, k).unwrap() >= 1);
    }

    #[test]
    fn probabilities_bounded(c in -1.0f64..=1.0, q in 1u64..5000) {
        let f = flip_probability(c, q).unwrap().probability;
        let s = sign_change_probability(c, q).unwrap().probability;
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((0.0..=0.5).contains(&s));
    }
}
