//! Compressed sparse-row storage for undirected, integer-weighted graphs.
//!
//! The adjacency matrix `A` is stored in canonical CSR form: column indices
//! strictly increasing within a row, no stored zeros, and every entry
//! `(u, v, w)` mirrored by `(v, u, w)`. Degrees are `d_u = Σ_w A_uw` and the
//! 2-hop count is `n_uv = A_u · A_v`.

mod generate;
mod matrix_market;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use generate::{generate, generate_with_limit, GeneratorKind, DEFAULT_MAX_NODES};
pub use matrix_market::{
    load_matrix_market, read_matrix_market, save_matrix_market, write_matrix_market, write_matrix_market_with_comments,
};

/// Default cap on the number of intermediate products `Σ_w |A_w|²` that
/// exact γ is allowed to perform.
pub const DEFAULT_GAMMA_BUDGET: u64 = 50_000_000;

/// How repeated `(row, col)` entries are merged on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicatePolicy {
    /// Any number of repeats collapses to weight 1.
    Binary,
    /// Repeats add their weights.
    Sum,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseGraph {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    weights: Vec<u32>,
    degrees: Vec<u64>,
}

impl SparseGraph {
    /// Builds a canonical graph from `(row, col, weight)` triplets.
    ///
    /// Zero weights are dropped. With `symmetrize`, each off-diagonal entry
    /// also contributes its mirror before duplicates are merged; without it
    /// the merged matrix must already be symmetric.
    pub fn from_entries<I>(n: usize, entries: I, policy: DuplicatePolicy, symmetrize: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        if n > u32::MAX as usize {
            return Err(Error::Resource(format!("{n} nodes exceed the u32 index space")));
        }
        let mut triplets: Vec<(u32, u32, u32)> = Vec::new();
        for (r, c, w) in entries {
            if r >= n {
                return Err(Error::Bounds {
                    what: "row",
                    index: r,
                    limit: n,
                });
            }
            if c >= n {
                return Err(Error::Bounds {
                    what: "column",
                    index: c,
                    limit: n,
                });
            }
            if w == 0 {
                continue;
            }
            triplets.push((r as u32, c as u32, w));
            if symmetrize && r != c {
                triplets.push((c as u32, r as u32, w));
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut merged: Vec<(u32, u32, u32)> = Vec::with_capacity(triplets.len());
        for (r, c, w) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => match policy {
                    DuplicatePolicy::Binary => last.2 = 1,
                    DuplicatePolicy::Sum => {
                        last.2 = last
                            .2
                            .checked_add(w)
                            .ok_or_else(|| Error::Data(format!("weight overflow at ({r}, {c})")))?
                    }
                },
                _ => merged.push((r, c, if policy == DuplicatePolicy::Binary { 1 } else { w })),
            }
        }

        let mut row_offsets = vec![0usize; n + 1];
        for &(r, _, _) in &merged {
            row_offsets[r as usize + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices: Vec<u32> = merged.iter().map(|e| e.1).collect();
        let weights: Vec<u32> = merged.iter().map(|e| e.2).collect();
        let degrees = (0..n)
            .map(|u| {
                weights[row_offsets[u]..row_offsets[u + 1]]
                    .iter()
                    .map(|&w| w as u64)
                    .sum()
            })
            .collect();

        let g = SparseGraph {
            n,
            row_offsets,
            col_indices,
            weights,
            degrees,
        };
        if !symmetrize {
            g.check_symmetric()?;
        }
        Ok(g)
    }

    /// Binary undirected graph from an edge list. Self-loops are kept.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_entries(
            n,
            edges.into_iter().map(|(u, v)| (u, v, 1)),
            DuplicatePolicy::Binary,
            true,
        )
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        SparseGraph {
            n,
            row_offsets: vec![0; n + 1],
            col_indices: Vec::new(),
            weights: Vec::new(),
            degrees: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored (directed) entries.
    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn degree(&self, u: usize) -> u64 {
        self.degrees[u]
    }

    /// Neighbor ids and weights of row `u`.
    pub fn row(&self, u: usize) -> (&[u32], &[u32]) {
        let (s, e) = (self.row_offsets[u], self.row_offsets[u + 1]);
        (&self.col_indices[s..e], &self.weights[s..e])
    }

    /// Iterates `(neighbor, weight)` pairs of row `u`.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let (cols, ws) = self.row(u);
        cols.iter().zip(ws).map(|(&c, &w)| (c as usize, w))
    }

    pub fn is_binary(&self) -> bool {
        self.weights.iter().all(|&w| w == 1)
    }

    pub fn max_weight(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Nodes with `d_u = 0`.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.n).filter(|&u| self.degrees[u] == 0).collect()
    }

    pub(crate) fn check_node(&self, u: usize) -> Result<()> {
        if u >= self.n {
            Err(Error::Bounds {
                what: "node",
                index: u,
                limit: self.n,
            })
        } else {
            Ok(())
        }
    }

    fn weight(&self, u: usize, v: usize) -> u32 {
        let (cols, ws) = self.row(u);
        match cols.binary_search(&(v as u32)) {
            Ok(i) => ws[i],
            Err(_) => 0,
        }
    }

    fn check_symmetric(&self) -> Result<()> {
        for u in 0..self.n {
            for (v, w) in self.neighbors(u) {
                if self.weight(v, u) != w {
                    return Err(Error::Asymmetric { row: u, col: v });
                }
            }
        }
        Ok(())
    }

    /// Re-checks every structural invariant. Intended for tests and for
    /// graphs assembled outside the constructors.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Data(m.to_string()));
        if self.row_offsets.len() != self.n + 1
            || self.row_offsets[0] != 0
            || self.row_offsets[self.n] != self.col_indices.len()
            || self.weights.len() != self.col_indices.len()
            || self.degrees.len() != self.n
        {
            return bad("CSR array lengths are inconsistent");
        }
        if self.row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("row offsets decrease");
        }
        for u in 0..self.n {
            let (cols, ws) = self.row(u);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad("column indices not strictly increasing");
            }
            if cols.iter().any(|&c| c as usize >= self.n) {
                return bad("column index out of range");
            }
            if ws.contains(&0) {
                return bad("stored zero weight");
            }
            if ws.iter().map(|&w| w as u64).sum::<u64>() != self.degrees[u] {
                return bad("degree does not match row sum");
            }
        }
        self.check_symmetric()
    }

    /// `n_uv = Σ_w A_uw A_vw`, by a linear merge of the two sorted rows.
    pub fn two_hop(&self, u: usize, v: usize) -> Result<u64> {
        self.check_node(u)?;
        self.check_node(v)?;
        Ok(self.two_hop_unchecked(u, v))
    }

    pub(crate) fn two_hop_unchecked(&self, u: usize, v: usize) -> u64 {
        let (cu, wu) = self.row(u);
        let (cv, wv) = self.row(v);
        let (mut i, mut j) = (0, 0);
        let mut acc = 0u64;
        while i < cu.len() && j < cv.len() {
            match cu[i].cmp(&cv[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += wu[i] as u64 * wv[j] as u64;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// `γ = max_{u,v} n_uv / d_v` with the default product budget.
    pub fn gamma(&self, mode: GammaMode) -> Result<f64> {
        self.gamma_with_budget(mode, DEFAULT_GAMMA_BUDGET)
    }

    pub fn gamma_with_budget(&self, mode: GammaMode, budget: u64) -> Result<f64> {
        if self.nnz() == 0 {
            return Err(Error::domain("gamma needs at least one edge"));
        }
        match mode {
            GammaMode::BinaryShortcut => {
                if self.is_binary() {
                    Ok(1.0)
                } else {
                    Err(Error::domain(
                        "binary shortcut requested on a weighted graph; use exact mode",
                    ))
                }
            }
            GammaMode::Exact => {
                let products: u64 = (0..self.n)
                    .map(|w| {
                        let len = (self.row_offsets[w + 1] - self.row_offsets[w]) as u64;
                        len * len
                    })
                    .sum();
                if products > budget {
                    return Err(Error::Resource(format!(
                        "exact gamma needs {products} products (budget {budget}); \
                         use the binary shortcut or supply gamma explicitly"
                    )));
                }
                Ok(self.gamma_exact())
            }
        }
    }

    fn gamma_exact(&self) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map_init(
                || (vec![0u64; self.n], Vec::<usize>::new()),
                |(acc, touched), u| {
                    for (w, a_uw) in self.neighbors(u) {
                        for (v, a_wv) in self.neighbors(w) {
                            if acc[v] == 0 {
                                touched.push(v);
                            }
                            acc[v] += a_uw as u64 * a_wv as u64;
                        }
                    }
                    let mut best = 0.0f64;
                    for &v in touched.iter() {
                        best = best.max(acc[v] as f64 / self.degrees[v] as f64);
                        acc[v] = 0;
                    }
                    touched.clear();
                    best
                },
            )
            .reduce(|| 0.0, f64::max)
    }

    /// Splits nodes into `L_c = {d ≤ c}` and `H = {d ≥ γ² c q}`.
    pub fn degree_classes(&self, cfg: &DegreeClassConfig) -> DegreeClasses {
        let threshold = cfg.high_threshold();
        let mut classes = DegreeClasses::default();
        for (u, &d) in self.degrees.iter().enumerate() {
            if d <= cfg.c {
                classes.low.push(u);
            }
            if d as f64 >= threshold {
                classes.high.push(u);
            }
        }
        classes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    /// Maximum over all pairs with `n_uv > 0`, from a sparse `A·A` expansion.
    Exact,
    /// 1.0 for binary graphs; an error otherwise.
    BinaryShortcut,
}

/// Parameters of the low/high degree classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeClassConfig {
    c: u64,
    gamma: f64,
    q: usize,
}

impl DegreeClassConfig {
    pub fn new(c: u64, gamma: f64, q: usize) -> Result<Self> {
        if c < 1 {
            return Err(Error::domain("c must be at least 1"));
        }
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::domain(format!("gamma must be finite and >= 1, got {gamma}")));
        }
        if q < 1 {
            return Err(Error::domain("q must be at least 1"));
        }
        Ok(DegreeClassConfig { c, gamma, q })
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `γ² c q`.
    pub fn high_threshold(&self) -> f64 {
        self.gamma * self.gamma * self.c as f64 * self.q as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegreeClasses {
    pub low: Vec<usize>,
    pub high: Vec<usize>,
}
