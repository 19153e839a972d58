//! Embeddings `X = p(M) Rᵀ` with `M ∈ {A, T}` and `p(x) = Σ_{j≥1} α_j x^j`.
//!
//! `Rᵀ` is never stored whole: [`embed`] walks column panels of width
//! [`PANEL_WIDTH`], regenerating each panel from the seed and applying `M`
//! repeatedly to it. `T = D⁻¹A` is applied by scaling rows on the fly; rows
//! of isolated nodes are zero.

mod io;
mod representation;
pub mod rng;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::SparseGraph;

pub use representation::{representation_sample, RepresentationSampler};
pub use rng::{derive_seed, entry, GaussianSource, PANEL_WIDTH};

/// Default cap on the bytes [`embed`] may allocate.
pub const DEFAULT_MEMORY_BUDGET: usize = 4 << 30;

/// Default row-norm threshold for [`EmbeddingMatrix::normalize_rows`].
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Adjacency matrix.
    A,
    /// Transition matrix `D⁻¹A`.
    T,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::T => "T",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    family: Family,
    coeffs: Vec<f64>,
    q: usize,
    seed: u64,
}

impl ProjectionConfig {
    /// `coeffs[j]` multiplies `M^{j+1}`.
    pub fn new(family: Family, coeffs: Vec<f64>, q: usize, seed: u64) -> Result<Self> {
        if q < 1 {
            return Err(Error::Configuration("q must be at least 1".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::Configuration("polynomial needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Configuration("coefficients must be finite".into()));
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(Error::Configuration("coefficients are all zero".into()));
        }
        Ok(ProjectionConfig {
            family,
            coeffs,
            q,
            seed,
        })
    }

    /// `p(x) = x`.
    pub fn linear(family: Family, q: usize, seed: u64) -> Result<Self> {
        Self::new(family, vec![1.0], q, seed)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_linear(&self) -> bool {
        self.coeffs == [1.0]
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ProjectionConfig { seed, ..self.clone() }
    }

    pub fn with_family(&self, family: Family) -> Self {
        ProjectionConfig { family, ..self.clone() }
    }
}

/// Dense row-major `n × q` embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n: usize,
    q: usize,
    data: Vec<f64>,
    normalized: bool,
    zero_rows: Vec<usize>,
    family: Option<Family>,
}

impl EmbeddingMatrix {
    pub fn from_data(n: usize, q: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * q {
            return Err(Error::Data(format!(
                "embedding data has {} values, expected {n}x{q}",
                data.len()
            )));
        }
        Ok(EmbeddingMatrix {
            n,
            q,
            data,
            normalized: false,
            zero_rows: Vec::new(),
            family: None,
        })
    }

    pub(crate) fn from_parts(
        n: usize,
        q: usize,
        data: Vec<f64>,
        normalized: bool,
        zero_rows: Vec<usize>,
        family: Option<Family>,
    ) -> Self {
        EmbeddingMatrix {
            n,
            q,
            data,
            normalized,
            zero_rows,
            family,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Sorted ids of rows zeroed by normalization.
    pub fn zero_rows(&self) -> &[usize] {
        &self.zero_rows
    }

    pub fn is_zero_row(&self, u: usize) -> bool {
        self.zero_rows.binary_search(&u).is_ok()
    }

    /// Matrix family the embedding was built from, when known.
    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.q..(u + 1) * self.q]
    }

    pub fn row_norm(&self, u: usize) -> f64 {
        self.row(u).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Divides every row by its norm; rows with norm below `threshold`
    /// become exactly zero and are recorded in `zero_rows`.
    pub fn normalize_rows(&self, threshold: f64) -> EmbeddingMatrix {
        let mut data = self.data.clone();
        let mut zero_rows = Vec::new();
        if self.q > 0 {
            for (u, row) in data.chunks_mut(self.q).enumerate() {
                let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm >= threshold) || norm == 0.0 {
                    row.fill(0.0);
                    zero_rows.push(u);
                } else {
                    row.iter_mut().for_each(|x| *x /= norm);
                }
            }
        }
        EmbeddingMatrix {
            n: self.n,
            q: self.q,
            data,
            normalized: true,
            zero_rows,
            family: self.family,
        }
    }

    pub(crate) fn check_row(&self, u: usize) -> Result<()> {
        if u >= self.n {
            Err(Error::Bounds {
                what: "embedding row",
                index: u,
                limit: self.n,
            })
        } else {
            Ok(())
        }
    }
}

pub fn embed(g: &SparseGraph, cfg: &ProjectionConfig) -> Result<EmbeddingMatrix> {
    embed_with_budget(g, cfg, DEFAULT_MEMORY_BUDGET)
}

/// [`embed`] with an explicit memory budget in bytes.
pub fn embed_with_budget(g: &SparseGraph, cfg: &ProjectionConfig, budget: usize) -> Result<EmbeddingMatrix> {
    let (n, q) = (g.n(), cfg.q);
    let width = PANEL_WIDTH.min(q);
    let bytes = n.checked_mul(q).and_then(|nq| nq.checked_mul(2 * 8)).and_then(|out| {
        let scratch = rayon::current_num_threads().checked_mul(3 * n * width * 8)?;
        out.checked_add(scratch)
    });
    match bytes {
        Some(b) if b <= budget => {}
        _ => {
            return Err(Error::Resource(format!(
                "embedding {n}x{q} exceeds the memory budget of {budget} bytes"
            )))
        }
    }

    let source = GaussianSource::new(cfg.seed);
    let scale = 1.0 / (q as f64).sqrt();
    let panels = q.div_ceil(PANEL_WIDTH);
    let blocks: Vec<Vec<f64>> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let w = PANEL_WIDTH.min(q - p * PANEL_WIDTH);
            embed_panel(g, cfg, &source, p, w, scale)
        })
        .collect::<Result<_>>()?;

    let mut data = vec![0.0; n * q];
    for (p, block) in blocks.iter().enumerate() {
        let col0 = p * PANEL_WIDTH;
        let w = PANEL_WIDTH.min(q - col0);
        for u in 0..n {
            data[u * q + col0..u * q + col0 + w].copy_from_slice(&block[u * w..(u + 1) * w]);
        }
    }
    Ok(EmbeddingMatrix::from_parts(
        n,
        q,
        data,
        false,
        Vec::new(),
        Some(cfg.family),
    ))
}

fn embed_panel(
    g: &SparseGraph,
    cfg: &ProjectionConfig,
    source: &GaussianSource,
    panel: usize,
    w: usize,
    scale: f64,
) -> Result<Vec<f64>> {
    let n = g.n();
    let mut cur = vec![0.0; n * w];
    for (i, row) in cur.chunks_mut(w).enumerate() {
        source.fill_panel_row(i, panel, row);
        row.iter_mut().for_each(|z| *z *= scale);
    }
    let mut next = vec![0.0; n * w];
    let mut acc = vec![0.0; n * w];
    for (j, &alpha) in cfg.coeffs.iter().enumerate() {
        apply(g, cfg.family, &cur, &mut next, w);
        std::mem::swap(&mut cur, &mut next);
        if alpha != 0.0 {
            acc.iter_mut().zip(&cur).for_each(|(a, c)| *a += alpha * c);
        }
        if acc.iter().chain(&cur).any(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite value after applying power {} of {}",
                j + 1,
                cfg.family.name()
            )));
        }
    }
    Ok(acc)
}

/// `out = M · inp` for an `n × w` row-major panel.
fn apply(g: &SparseGraph, family: Family, inp: &[f64], out: &mut [f64], w: usize) {
    for (u, dst) in out.chunks_mut(w).enumerate() {
        dst.fill(0.0);
        for (v, a) in g.neighbors(u) {
            let a = a as f64;
            let src = &inp[v * w..(v + 1) * w];
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += a * s);
        }
        if family == Family::T {
            let d = g.degree(u);
            if d > 0 {
                let inv = 1.0 / d as f64;
                dst.iter_mut().for_each(|x| *x *= inv);
            }
        }
    }
}

/// Sparse row `u` of `p(M)` as sorted `(column, value)` pairs.
pub fn materialize_row(g: &SparseGraph, family: Family, coeffs: &[f64], u: usize) -> Result<Vec<(usize, f64)>> {
    g.check_node(u)?;
    let n = g.n();
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut acc = vec![0.0; n];
    let mut support = vec![false; n];
    let mut marked = vec![false; n];
    cur[u] = 1.0;
    let mut frontier = vec![u];
    for &alpha in coeffs {
        // Row vector times M: Σ_w cur_w M_w*.
        let mut touched = Vec::new();
        for &w in &frontier {
            let cw = cur[w];
            if cw == 0.0 {
                continue;
            }
            let scale = match family {
                Family::A => cw,
                Family::T => cw / g.degree(w) as f64,
            };
            for (v, a) in g.neighbors(w) {
                if !marked[v] {
                    marked[v] = true;
                    touched.push(v);
                }
                next[v] += scale * a as f64;
            }
        }
        for &w in &frontier {
            cur[w] = 0.0;
        }
        for &v in &touched {
            marked[v] = false;
            cur[v] = next[v];
            next[v] = 0.0;
            if alpha != 0.0 {
                acc[v] += alpha * cur[v];
                support[v] = true;
            }
        }
        frontier = touched;
    }
    Ok((0..n)
        .filter(|&v| support[v] && acc[v] != 0.0)
        .map(|v| (v, acc[v]))
        .collect())
}

/// Rows `rows` of the embedding, computed from materialized rows of `p(M)`
/// and only the rows of `Rᵀ` in their support. Agrees with the matching
/// rows of [`embed`] up to summation order.
pub fn embed_rows(g: &SparseGraph, cfg: &ProjectionConfig, rows: &[usize]) -> Result<Vec<Vec<f64>>> {
    let sparse: Vec<Vec<(usize, f64)>> = rows
        .iter()
        .map(|&u| materialize_row(g, cfg.family, &cfg.coeffs, u))
        .collect::<Result<_>>()?;
    Ok(project_sparse_rows(&sparse, cfg.q, cfg.seed))
}

/// Projects explicit sparse vectors with the `Rᵀ` of `(seed, q)`.
pub fn project_sparse_rows(rows: &[Vec<(usize, f64)>], q: usize, seed: u64) -> Vec<Vec<f64>> {
    let source = GaussianSource::new(seed);
    let scale = 1.0 / (q as f64).sqrt();
    let mut support: Vec<usize> = rows.iter().flatten().map(|&(k, _)| k).collect();
    support.sort_unstable();
    support.dedup();
    let mut out = vec![vec![0.0; q]; rows.len()];
    let mut r = vec![0.0; q];
    let mut cursor = vec![0usize; rows.len()];
    for &k in &support {
        source.fill_row(k, &mut r);
        for (i, row) in rows.iter().enumerate() {
            let c = cursor[i];
            if c < row.len() && row[c].0 == k {
                let v = row[c].1 * scale;
                out[i].iter_mut().zip(&r).for_each(|(o, z)| *o += v * z);
                cursor[i] += 1;
            }
        }
    }
    out
}

pub use io::{load_embedding, read_embedding, save_embedding, write_embedding, write_embedding_csv};
