//! Two-variable representation of a projected pair.
//!
//! For `x, y` with norms `‖x‖, ‖y‖` and cosine `ρ`, a rotation sends `Rx`
//! to a multiple of the first axis, so
//! `(Rx, Ry) ~ ‖x‖‖y‖(ρ‖N‖² + M₁‖N‖√(1−ρ²))/q` with `‖N‖² ~ χ²(q)` and
//! `M₁ ~ N(0, 1)` independent. The projected cosine has the analogous form
//! with `‖M_{2..q}‖² ~ χ²(q−1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RepresentationSampler {
    rho: f64,
    scale: f64,
    q: usize,
    chi_q: ChiSquared<f64>,
    chi_rest: Option<ChiSquared<f64>>,
    rng: ChaCha8Rng,
}

impl RepresentationSampler {
    pub fn new(rho: f64, norm_x: f64, norm_y: f64, q: usize, seed: u64) -> Result<Self> {
        if !(rho.abs() <= 1.0) {
            return Err(Error::domain(format!("rho must lie in [-1, 1], got {rho}")));
        }
        if !(norm_x > 0.0 && norm_y > 0.0) || !norm_x.is_finite() || !norm_y.is_finite() {
            return Err(Error::domain("norms must be positive and finite"));
        }
        if q < 1 {
            return Err(Error::domain("q must be at least 1"));
        }
        let chi = |k: usize| ChiSquared::new(k as f64).map_err(|e| Error::Sampling(e.to_string()));
        Ok(RepresentationSampler {
            rho,
            scale: norm_x * norm_y / q as f64,
            q,
            chi_q: chi(q)?,
            chi_rest: if q > 1 { Some(chi(q - 1)?) } else { None },
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// One draw of the projected dot product.
    pub fn sample_dot(&mut self) -> f64 {
        let n2 = self.chi_q.sample(&mut self.rng);
        let m1: f64 = self.rng.sample(StandardNormal);
        let s = (1.0 - self.rho * self.rho).max(0.0).sqrt();
        self.scale * (self.rho * n2 + m1 * n2.sqrt() * s)
    }

    /// One draw of the projected cosine.
    pub fn sample_cosine(&mut self) -> f64 {
        let n = self.chi_q.sample(&mut self.rng).sqrt();
        let m1: f64 = self.rng.sample(StandardNormal);
        let rest = self.chi_rest.map_or(0.0, |c| c.sample(&mut self.rng));
        let s2 = (1.0 - self.rho * self.rho).max(0.0);
        let head = self.rho * n + m1 * s2.sqrt();
        let denom = (head * head + s2 * rest).sqrt();
        if denom == 0.0 {
            0.0
        } else {
            head / denom
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

/// A single draw of the projected dot product under `seed`.
pub fn representation_sample(rho: f64, norm_x: f64, norm_y: f64, q: usize, seed: u64) -> Result<f64> {
    Ok(RepresentationSampler::new(rho, norm_x, norm_y, q, seed)?.sample_dot())
}
