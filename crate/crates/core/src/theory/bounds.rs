//! Tail bounds for projected dot products and cosines.
//!
//! Every bound is clamped to `[0, 1]`; `vacuous` is set when the unclamped
//! value is at least 1.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
    TwoSided,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
            Side::TwoSided => "two_sided",
        }
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Side::Upper),
            "lower" => Ok(Side::Lower),
            "two_sided" | "two-sided" | "both" => Ok(Side::TwoSided),
            _ => Err(Error::Configuration(format!(
                "unknown side `{s}` (expected upper, lower or two_sided)"
            ))),
        }
    }
}

/// Named tail-bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundSource {
    /// `exp(−t²/(2q(1+ρ²) + 2(1±ρ)t))` for the unnormalized deviation
    /// `(Qx̃, Qỹ) − qρ` of unit vectors under a standard Gaussian `Q`.
    RotationDot,
    /// `exp(−qε²/(4(1+ε)))` per side for the normalized deviation `ε`.
    RotationDotRhoFree,
    /// `exp(−qε²/8)` per side, `ε ∈ (0, 1)`.
    Kaban,
    /// `4 exp(−q(ε²−ε³)/4)`, two-sided only.
    ArriagaVempala,
    /// `(4+ε²)[1+ε²/(2(1+ε√2))]^{−q/2}` for `|cos − ρ| ≥ ε(1−ρ²)`.
    RotationCosine,
    /// `8 exp(−qε²/(4(1+ε)²))` for the cosine deviation.
    PriorCosine,
}

impl BoundSource {
    pub const ALL: [BoundSource; 6] = [
        BoundSource::RotationDot,
        BoundSource::RotationDotRhoFree,
        BoundSource::Kaban,
        BoundSource::ArriagaVempala,
        BoundSource::RotationCosine,
        BoundSource::PriorCosine,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BoundSource::RotationDot => "rotation_dot",
            BoundSource::RotationDotRhoFree => "rotation_dot_rho_free",
            BoundSource::Kaban => "kaban",
            BoundSource::ArriagaVempala => "arriaga_vempala",
            BoundSource::RotationCosine => "rotation_cosine",
            BoundSource::PriorCosine => "prior_cosine",
        }
    }
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BoundSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundSource::ALL.into_iter().find(|b| b.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = BoundSource::ALL.iter().map(|b| b.id()).collect();
            Error::Configuration(format!(
                "unknown bound source `{s}` (expected one of {})",
                ids.join(", ")
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    /// `t` for [`BoundSource::RotationDot`], `ε` otherwise.
    pub argument: f64,
    pub bound: f64,
    pub side: Side,
    pub source: BoundSource,
    pub vacuous: bool,
}

fn finish(argument: f64, raw: f64, side: Side, source: BoundSource) -> Result<TailBound> {
    if raw.is_nan() {
        return Err(Error::Numeric(format!("{source} bound evaluated to NaN")));
    }
    Ok(TailBound {
        argument,
        bound: raw.clamp(0.0, 1.0),
        side,
        source,
        vacuous: raw >= 1.0,
    })
}

fn check_q(q: u64) -> Result<f64> {
    if q < 1 {
        Err(Error::domain("q must be at least 1"))
    } else {
        Ok(q as f64)
    }
}

fn per_side(side: Side, upper: f64, lower: f64) -> f64 {
    match side {
        Side::Upper => upper,
        Side::Lower => lower,
        Side::TwoSided => upper + lower,
    }
}

/// Tail bound on the projected dot product of unit vectors with cosine
/// `rho`. `t_or_eps` is `t ≥ 0` for [`BoundSource::RotationDot`] and the
/// normalized deviation `ε > 0` for the other dot sources.
pub fn dot_tail_bound(rho: f64, t_or_eps: f64, q: u64, side: Side, source: BoundSource) -> Result<TailBound> {
    let qf = check_q(q)?;
    let x = t_or_eps;
    let raw = match source {
        BoundSource::RotationDot => {
            if !(rho.abs() <= 1.0) {
                return Err(Error::domain(format!("rho must lie in [-1, 1], got {rho}")));
            }
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::domain(format!("t must be finite and >= 0, got {x}")));
            }
            let base = 2.0 * qf * (1.0 + rho * rho);
            let up = (-x * x / (base + 2.0 * (1.0 + rho) * x)).exp();
            let lo = (-x * x / (base + 2.0 * (1.0 - rho) * x)).exp();
            per_side(side, up, lo)
        }
        BoundSource::RotationDotRhoFree => {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::domain(format!("epsilon must be finite and > 0, got {x}")));
            }
            let one = (-qf * x * x / (4.0 * (1.0 + x))).exp();
            per_side(side, one, one)
        }
        BoundSource::Kaban => {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::domain(format!("epsilon must lie in (0, 1), got {x}")));
            }
            let one = (-qf * x * x / 8.0).exp();
            per_side(side, one, one)
        }
        BoundSource::ArriagaVempala => {
            if side != Side::TwoSided {
                return Err(Error::Configuration("arriaga_vempala is a two-sided bound".into()));
            }
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::domain(format!("epsilon must lie in (0, 1), got {x}")));
            }
            4.0 * (-qf * (x * x - x * x * x) / 4.0).exp()
        }
        BoundSource::RotationCosine | BoundSource::PriorCosine => {
            return Err(Error::Configuration(format!(
                "{source} bounds the cosine; use the cosine bound functions"
            )))
        }
    };
    finish(x, raw, side, source)
}

/// `P(|cos_R − ρ| ≥ ε(1−ρ²)) ≤ (4+ε²)[1+ε²/(2(1+ε√2))]^{−q/2}` for
/// `ε ∈ (0, 0.055)`.
pub fn cosine_concentration_bound(epsilon: f64, q: u64) -> Result<TailBound> {
    let qf = check_q(q)?;
    if !(epsilon > 0.0 && epsilon < 0.055) {
        return Err(Error::domain(format!("epsilon must lie in (0, 0.055), got {epsilon}")));
    }
    let e2 = epsilon * epsilon;
    let base = (e2 / (2.0 * (1.0 + epsilon * std::f64::consts::SQRT_2))).ln_1p();
    let raw = (4.0 + e2) * (-qf / 2.0 * base).exp();
    finish(epsilon, raw, Side::TwoSided, BoundSource::RotationCosine)
}

/// `8 exp(−qε²/(4(1+ε)²))`, the earlier cosine concentration form.
pub fn cosine_prior_bound(epsilon: f64, q: u64) -> Result<TailBound> {
    let qf = check_q(q)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let raw = 8.0 * (-qf * epsilon * epsilon / (4.0 * (1.0 + epsilon).powi(2))).exp();
    finish(epsilon, raw, Side::TwoSided, BoundSource::PriorCosine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_free_frozen_value() {
        let b = dot_tail_bound(0.0, 0.2, 256, Side::Upper, BoundSource::RotationDotRhoFree).unwrap();
        assert!((b.bound - 0.1184418290138037).abs() < 1e-15);
        assert!(!b.vacuous);
    }

    #[test]
    fn rho_free_never_above_kaban() {
        for i in 1..100 {
            let eps = i as f64 / 100.0;
            for q in [1, 10, 256, 6400] {
                let ours = dot_tail_bound(0.0, eps, q, Side::Upper, BoundSource::RotationDotRhoFree).unwrap();
                let theirs = dot_tail_bound(0.0, eps, q, Side::Upper, BoundSource::Kaban).unwrap();
                assert!(ours.bound <= theirs.bound);
            }
        }
    }

    #[test]
    fn rotation_dot_at_q_epsilon_is_below_rho_free() {
        let q = 512;
        for rho in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            for eps in [0.05, 0.2, 0.6] {
                let t = q as f64 * eps;
                for side in [Side::Upper, Side::Lower] {
                    let a = dot_tail_bound(rho, t, q, side, BoundSource::RotationDot).unwrap();
                    let b = dot_tail_bound(rho, eps, q, side, BoundSource::RotationDotRhoFree).unwrap();
                    assert!(a.bound <= b.bound * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn rotation_dot_at_rho_one_is_chi_square_form() {
        // (1+ρ²) = 2 and (1+ρ) = 2: exp(−t²/(4q + 4t)).
        let (q, t) = (100u64, 30.0);
        let b = dot_tail_bound(1.0, t, q, Side::Upper, BoundSource::RotationDot).unwrap();
        assert!((b.bound - (-t * t / (4.0 * q as f64 + 4.0 * t)).exp()).abs() < 1e-15);
    }

    #[test]
    fn two_sided_and_clamping() {
        let b = dot_tail_bound(0.0, 0.01, 4, Side::TwoSided, BoundSource::Kaban).unwrap();
        assert_eq!(b.bound, 1.0);
        assert!(b.vacuous);
        assert!(dot_tail_bound(0.0, 0.1, 4, Side::Upper, BoundSource::ArriagaVempala).is_err());
        assert!(dot_tail_bound(0.0, 0.1, 4, Side::Upper, BoundSource::RotationCosine).is_err());
    }

    #[test]
    fn unknown_source_is_configuration_error() {
        assert!(matches!("nope".parse::<BoundSource>(), Err(Error::Configuration(_))));
        for s in BoundSource::ALL {
            assert_eq!(s.id().parse::<BoundSource>().unwrap(), s);
        }
    }

    #[test]
    fn cosine_bound_values() {
        let b = cosine_concentration_bound(0.05, 6400).unwrap();
        assert!((b.bound - 0.09568073560260372).abs() < 1e-12);
        let v = cosine_concentration_bound(0.05, 10).unwrap();
        assert_eq!(v.bound, 1.0);
        assert!(v.vacuous);
        assert!(cosine_concentration_bound(0.055, 10).is_err());
        assert!(cosine_concentration_bound(0.05, 7513).unwrap().bound < 0.05);
        assert!(cosine_concentration_bound(0.05, 7512).unwrap().bound > 0.05);
    }

    #[test]
    fn cosine_bound_below_prior_form() {
        for i in 1..=54 {
            let eps = i as f64 / 1000.0;
            for q in [256, 1024, 6400, 100_000] {
                let ours = cosine_concentration_bound(eps, q).unwrap().bound;
                let prior = cosine_prior_bound(eps, q).unwrap().bound;
                assert!(ours <= prior, "eps={eps} q={q}");
            }
        }
    }
}
