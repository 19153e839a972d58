//! Closed-form predictions for projected similarities.
//!
//! Asymptotic normal laws of the three estimators, minimum projection
//! dimensions, order-flip and sign-change probabilities, and tail bounds.
//! Logarithms are natural throughout.

mod bounds;
mod special;

use crate::error::{Error, Result};

pub use bounds::{cosine_concentration_bound, cosine_prior_bound, dot_tail_bound, BoundSource, Side, TailBound};
pub use special::{beta_reg, normal_sf, student_t_sf};

/// Mean and variance of an asymptotic normal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams {
    pub mean: f64,
    pub variance: f64,
}

impl NormalParams {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(Error::Numeric(format!(
                "invalid normal parameters (mean {mean}, variance {variance})"
            )));
        }
        Ok(NormalParams { mean, variance })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

fn check_q(q: u64) -> Result<f64> {
    if q < 1 {
        Err(Error::domain("q must be at least 1"))
    } else {
        Ok(q as f64)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("rho must lie in [-1, 1], got {rho}")))
    }
}

/// Law of `X_u·X_v` for vectors with squared norms `nu2`, `nv2` and dot
/// product `dot`: mean `dot`, variance `(nu2·nv2 + dot²)/q`.
pub fn dot_asymptotic(nu2: f64, nv2: f64, dot: f64, q: u64) -> Result<NormalParams> {
    let qf = check_q(q)?;
    if !(nu2 >= 0.0 && nv2 >= 0.0) {
        return Err(Error::domain("squared norms must be nonnegative"));
    }
    NormalParams::new(dot, (nu2 * nv2 + dot * dot) / qf)
}

/// Law of the `T`-family dot product from 2-hop counts and degrees.
pub fn dot_t_asymptotic(n_uu: u64, n_vv: u64, n_uv: u64, d_u: u64, d_v: u64, q: u64) -> Result<NormalParams> {
    if d_u == 0 || d_v == 0 {
        return Err(Error::domain("transition rows need nonzero degrees"));
    }
    let (du, dv) = (d_u as f64, d_v as f64);
    dot_asymptotic(
        n_uu as f64 / (du * du),
        n_vv as f64 / (dv * dv),
        n_uv as f64 / (du * dv),
        q,
    )
}

/// Law of the `A`-family dot product: mean `n_uv`, variance
/// `(n_uu n_vv + n_uv²)/q`.
pub fn dot_a_asymptotic(n_uu: u64, n_vv: u64, n_uv: u64, q: u64) -> Result<NormalParams> {
    dot_asymptotic(n_uu as f64, n_vv as f64, n_uv as f64, q)
}

/// Law of the projected cosine: mean `ρ`, variance `(1−ρ²)²/q`.
pub fn cosine_asymptotic(rho: f64, q: u64) -> Result<NormalParams> {
    let qf = check_q(q)?;
    check_rho(rho)?;
    let s = 1.0 - rho * rho;
    NormalParams::new(rho, s * s / qf)
}

/// `mean ± k_sigma·σ`.
pub fn sigma_interval(p: &NormalParams, k_sigma: f64) -> Result<(f64, f64)> {
    if !(k_sigma > 0.0) {
        return Err(Error::domain("k_sigma must be positive"));
    }
    let h = k_sigma * p.std_dev();
    Ok((p.mean - h, p.mean + h))
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")))
    }
}

fn check_k(k: u64) -> Result<f64> {
    if k < 2 {
        Err(Error::domain("k must be at least 2"))
    } else {
        Ok(k as f64)
    }
}

fn ceil_dimension(raw: f64) -> Result<u64> {
    if !raw.is_finite() || raw > u64::MAX as f64 {
        return Err(Error::Numeric(format!("minimum dimension {raw} is not representable")));
    }
    Ok((raw.ceil() as u64).max(1))
}

/// `⌈4(1+ε)/ε² · ln(k(k−1)/δ)⌉`: dimension at which all `k(k−1)/2`
/// normalized dot products are within `ε` with probability `1−δ`.
pub fn jl_min_q_dot(epsilon: f64, delta: f64, k: u64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    check_delta(delta)?;
    let kf = check_k(k)?;
    ceil_dimension(4.0 * (1.0 + epsilon) / (epsilon * epsilon) * (kf * (kf - 1.0) / delta).ln())
}

/// Unrounded cosine minimum dimension
/// `2 ln[2k(k−1)(1+ε²/4)/δ] / ln[1+ε²/(2(1+ε√2))]`.
pub fn jl_min_q_cosine_raw(epsilon: f64, delta: f64, k: u64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 0.05) {
        return Err(Error::domain(format!("epsilon must lie in (0, 0.05], got {epsilon}")));
    }
    check_delta(delta)?;
    let kf = check_k(k)?;
    let e2 = epsilon * epsilon;
    let num = 2.0 * (2.0 * kf * (kf - 1.0) * (1.0 + e2 / 4.0) / delta).ln();
    let den = (e2 / (2.0 * (1.0 + epsilon * std::f64::consts::SQRT_2))).ln_1p();
    Ok(num / den)
}

/// Ceiling of [`jl_min_q_cosine_raw`].
pub fn jl_min_q_cosine(epsilon: f64, delta: f64, k: u64) -> Result<u64> {
    ceil_dimension(jl_min_q_cosine_raw(epsilon, delta, k)?)
}

/// Classical distance-preserving dimension `4/ε² · ln(k²/δ)` (unrounded).
pub fn jl_min_q_classic(epsilon: f64, delta: f64, k: u64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    check_delta(delta)?;
    let kf = check_k(k)?;
    Ok(4.0 / (epsilon * epsilon) * (kf * kf / delta).ln())
}

/// A probability that is exactly 0 (`saturated`) at the boundary of its
/// domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    pub probability: f64,
    pub saturated: bool,
}

/// `P(𝒯_q > c√q/√(1−c²))` with `c = cos(P_w, P_u − P_v)`: chance that the
/// projection reverses `rel_wu > rel_wv`.
pub fn flip_probability(cos_w_diff: f64, q: u64) -> Result<Probability> {
    check_q(q)?;
    if cos_w_diff.is_nan() {
        return Err(Error::domain("cosine is NaN"));
    }
    if cos_w_diff.abs() >= 1.0 {
        return Ok(Probability {
            probability: if cos_w_diff > 0.0 { 0.0 } else { 1.0 },
            saturated: true,
        });
    }
    let arg = cos_w_diff * (q as f64).sqrt() / (1.0 - cos_w_diff * cos_w_diff).sqrt();
    Ok(Probability {
        probability: student_t_sf(arg, q)?,
        saturated: false,
    })
}

/// `P((Rx,Ry) and (x,y) differ in sign) = P(𝒯_q > |ρ|√q/√(1−ρ²))`.
pub fn sign_change_probability(rho: f64, q: u64) -> Result<Probability> {
    check_q(q)?;
    check_rho(rho)?;
    if rho.abs() == 1.0 {
        return Ok(Probability {
            probability: 0.0,
            saturated: true,
        });
    }
    let arg = rho.abs() * (q as f64).sqrt() / (1.0 - rho * rho).sqrt();
    Ok(Probability {
        probability: student_t_sf(arg, q)?,
        saturated: false,
    })
}
