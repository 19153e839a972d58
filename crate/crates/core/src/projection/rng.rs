//! Counter-addressed Gaussian source for the projection matrix.
//!
//! Row `i` of `Rᵀ` owns ChaCha8 stream `i` under the key derived from the
//! master seed. Columns are grouped into panels of [`PANEL_WIDTH`]; panel
//! `p` starts at word position `p << 32`, so any entry can be regenerated
//! from `(seed, i, j)` alone, whatever the panel schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const PANEL_WIDTH: usize = 64;

/// Standard-normal source for one master seed.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    base: ChaCha8Rng,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        GaussianSource {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Fills `out` with the first `out.len()` standard normals of panel
    /// `panel` in row `row`. `out.len()` must not exceed [`PANEL_WIDTH`].
    pub fn fill_panel_row(&self, row: usize, panel: usize, out: &mut [f64]) {
        debug_assert!(out.len() <= PANEL_WIDTH);
        let mut rng = self.base.clone();
        rng.set_stream(row as u64);
        rng.set_word_pos((panel as u128) << 32);
        for z in out.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
    }

    /// Fills `out` (length `q`) with row `row` of `√q · Rᵀ`.
    pub fn fill_row(&self, row: usize, out: &mut [f64]) {
        for (panel, chunk) in out.chunks_mut(PANEL_WIDTH).enumerate() {
            self.fill_panel_row(row, panel, chunk);
        }
    }

    /// Standard normal at `(row, col)`.
    pub fn standard(&self, row: usize, col: usize) -> f64 {
        let mut buf = [0.0; PANEL_WIDTH];
        let offset = col % PANEL_WIDTH;
        self.fill_panel_row(row, col / PANEL_WIDTH, &mut buf[..=offset]);
        buf[offset]
    }
}

/// Entry `(i, j)` of `Rᵀ` for dimension `q`: a standard normal scaled by
/// `1/√q`.
pub fn entry(seed: u64, i: usize, j: usize, q: usize) -> f64 {
    GaussianSource::new(seed).standard(i, j) / (q as f64).sqrt()
}

/// SplitMix64 finalizer of `(master, index)`; used for per-trial seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
