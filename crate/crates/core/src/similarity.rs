//! Exact relevance `rel_uv = P_u·P_v` and its projected estimate
//! `relᴿ_uv = X_u·X_v` for the three estimators.
//!
//! For `p(x) = x` the exact values come from 2-hop counts:
//! `DotA = n_uv`, `DotT = n_uv/(d_u d_v)` and
//! `Cosine = n_uv/√(n_uu n_vv)`, the last being the same for `A` and `T`.
//! Other polynomials use materialized rows of `p(M)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::projection::{materialize_row, EmbeddingMatrix, Family, ProjectionConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimilarityKind {
    DotA,
    DotT,
    Cosine,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 3] = [SimilarityKind::DotA, SimilarityKind::DotT, SimilarityKind::Cosine];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityKind::DotA => "dotA",
            SimilarityKind::DotT => "dotT",
            SimilarityKind::Cosine => "cosine",
        }
    }

    /// Family an embedding must come from; `None` for cosine.
    pub fn required_family(self) -> Option<Family> {
        match self {
            SimilarityKind::DotA => Some(Family::A),
            SimilarityKind::DotT => Some(Family::T),
            SimilarityKind::Cosine => None,
        }
    }

    /// Family used to build embeddings for this kind (cosine uses `A`).
    pub fn embedding_family(self) -> Family {
        self.required_family().unwrap_or(Family::A)
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dota" | "dot_a" => Ok(SimilarityKind::DotA),
            "dott" | "dot_t" => Ok(SimilarityKind::DotT),
            "cosine" | "cos" => Ok(SimilarityKind::Cosine),
            _ => Err(Error::Configuration(format!(
                "unknown similarity kind `{s}` (expected dotA, dotT or cosine)"
            ))),
        }
    }
}

/// A similarity value; `degenerate` marks a zero row or zero degree that
/// forced the value to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub value: f64,
    pub degenerate: bool,
}

impl Similarity {
    fn ok(value: f64) -> Self {
        Similarity {
            value,
            degenerate: false,
        }
    }

    fn degenerate() -> Self {
        Similarity {
            value: 0.0,
            degenerate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevancePair {
    pub u: usize,
    pub v: usize,
    pub kind: SimilarityKind,
    pub exact: f64,
    pub projected: f64,
    pub degenerate: bool,
}

/// Exact similarity for `p(x) = x`.
pub fn exact_similarity(g: &SparseGraph, kind: SimilarityKind, u: usize, v: usize) -> Result<f64> {
    g.check_node(u)?;
    g.check_node(v)?;
    let n_uv = g.two_hop_unchecked(u, v) as f64;
    match kind {
        SimilarityKind::DotA => Ok(n_uv),
        SimilarityKind::DotT => {
            let (du, dv) = (nonzero_degree(g, u)?, nonzero_degree(g, v)?);
            Ok(n_uv / (du * dv))
        }
        SimilarityKind::Cosine => {
            nonzero_degree(g, u)?;
            nonzero_degree(g, v)?;
            if u == v {
                return Ok(1.0);
            }
            let n_uu = g.two_hop_unchecked(u, u) as f64;
            let n_vv = g.two_hop_unchecked(v, v) as f64;
            Ok(n_uv / (n_uu * n_vv).sqrt())
        }
    }
}

fn nonzero_degree(g: &SparseGraph, u: usize) -> Result<f64> {
    match g.degree(u) {
        0 => Err(Error::UndefinedSimilarity { node: u }),
        d => Ok(d as f64),
    }
}

/// Exact similarity for the polynomial and family of `cfg`. Linear
/// configurations use the closed forms; others materialize rows of `p(M)`.
pub fn exact_similarity_for(
    g: &SparseGraph,
    kind: SimilarityKind,
    cfg: &ProjectionConfig,
    u: usize,
    v: usize,
) -> Result<f64> {
    check_kind_family(kind, Some(cfg.family()))?;
    if cfg.is_linear() {
        return exact_similarity(g, kind, u, v);
    }
    if kind != SimilarityKind::DotA {
        nonzero_degree(g, u)?;
        nonzero_degree(g, v)?;
    }
    let pu = materialize_row(g, cfg.family(), cfg.coeffs(), u)?;
    let pv = materialize_row(g, cfg.family(), cfg.coeffs(), v)?;
    let dot = sparse_dot(&pu, &pv);
    match kind {
        SimilarityKind::Cosine => {
            let nu = sparse_dot(&pu, &pu).sqrt();
            let nv = sparse_dot(&pv, &pv).sqrt();
            if nu == 0.0 {
                Err(Error::UndefinedSimilarity { node: u })
            } else if nv == 0.0 {
                Err(Error::UndefinedSimilarity { node: v })
            } else {
                Ok(dot / (nu * nv))
            }
        }
        _ => Ok(dot),
    }
}

pub(crate) fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn check_kind_family(kind: SimilarityKind, family: Option<Family>) -> Result<()> {
    match (kind.required_family(), family) {
        (Some(want), Some(have)) if want != have => Err(Error::Configuration(format!(
            "{kind} needs an embedding of family {}, got {}",
            want.name(),
            have.name()
        ))),
        _ => Ok(()),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine of two raw vectors; `None` when either is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (dot(a, a).sqrt(), dot(b, b).sqrt());
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
    }
}

/// Projected similarity `X_u·X_v` (or its cosine).
pub fn projected_similarity(x: &EmbeddingMatrix, kind: SimilarityKind, u: usize, v: usize) -> Result<Similarity> {
    x.check_row(u)?;
    x.check_row(v)?;
    check_kind_family(kind, x.family())?;
    let (xu, xv) = (x.row(u), x.row(v));
    match kind {
        SimilarityKind::DotA | SimilarityKind::DotT => {
            if x.is_normalized() {
                return Err(Error::Configuration(format!("{kind} needs an unnormalized embedding")));
            }
            Ok(Similarity::ok(dot(xu, xv)))
        }
        SimilarityKind::Cosine => {
            if x.is_zero_row(u) || x.is_zero_row(v) {
                return Ok(Similarity::degenerate());
            }
            if x.is_normalized() {
                if u == v {
                    return Ok(Similarity::ok(1.0));
                }
                return Ok(Similarity::ok(dot(xu, xv).clamp(-1.0, 1.0)));
            }
            match cosine(xu, xv) {
                None => Ok(Similarity::degenerate()),
                Some(_) if u == v => Ok(Similarity::ok(1.0)),
                Some(c) => Ok(Similarity::ok(c)),
            }
        }
    }
}

/// Exact and projected similarity of `w` against every candidate, for
/// `p(x) = x`. Zero-degree nodes give exact 0 with the degenerate flag.
pub fn relevance_row(
    g: &SparseGraph,
    x: &EmbeddingMatrix,
    kind: SimilarityKind,
    w: usize,
    candidates: &[usize],
) -> Result<Vec<RelevancePair>> {
    if candidates.is_empty() {
        return Err(Error::Configuration("candidate list is empty".into()));
    }
    if x.n() != g.n() {
        return Err(Error::Configuration(format!(
            "embedding has {} rows but the graph has {} nodes",
            x.n(),
            g.n()
        )));
    }
    candidates
        .iter()
        .map(|&h| {
            let projected = projected_similarity(x, kind, w, h)?;
            let (exact, undefined) = match exact_similarity(g, kind, w, h) {
                Ok(value) => (value, false),
                Err(Error::UndefinedSimilarity { .. }) => (0.0, true),
                Err(e) => return Err(e),
            };
            Ok(RelevancePair {
                u: w,
                v: h,
                kind,
                exact,
                projected: projected.value,
                degenerate: projected.degenerate || undefined,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{embed, entry, DEFAULT_ZERO_THRESHOLD};
    use proptest::prelude::*;

    fn k3() -> SparseGraph {
        SparseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn triangle_exact_values() {
        let g = k3();
        assert_eq!(exact_similarity(&g, SimilarityKind::DotA, 0, 1).unwrap(), 1.0);
        assert_eq!(exact_similarity(&g, SimilarityKind::DotT, 0, 1).unwrap(), 0.25);
        assert_eq!(exact_similarity(&g, SimilarityKind::Cosine, 0, 1).unwrap(), 0.5);
    }

    #[test]
    fn zero_degree_is_undefined() {
        let g = SparseGraph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(
            exact_similarity(&g, SimilarityKind::DotT, 0, 2),
            Err(Error::UndefinedSimilarity { node: 2 })
        ));
        assert_eq!(exact_similarity(&g, SimilarityKind::DotA, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in SimilarityKind::ALL {
            assert_eq!(kind.name().parse::<SimilarityKind>().unwrap(), kind);
        }
        assert!("dot".parse::<SimilarityKind>().is_err());
    }

    #[test]
    fn family_mismatch_rejected() {
        let g = k3();
        let x = embed(&g, &ProjectionConfig::linear(Family::A, 8, 0).unwrap()).unwrap();
        assert!(matches!(
            projected_similarity(&x, SimilarityKind::DotT, 0, 1),
            Err(Error::Configuration(_))
        ));
        assert!(projected_similarity(&x, SimilarityKind::Cosine, 0, 1).is_ok());
    }

    #[test]
    fn self_cosine_is_exactly_one() {
        let g = k3();
        let x = embed(&g, &ProjectionConfig::linear(Family::T, 8, 0).unwrap()).unwrap();
        assert_eq!(
            projected_similarity(&x, SimilarityKind::Cosine, 2, 2).unwrap().value,
            1.0
        );
        let y = x.normalize_rows(DEFAULT_ZERO_THRESHOLD);
        assert_eq!(
            projected_similarity(&y, SimilarityKind::Cosine, 2, 2).unwrap().value,
            1.0
        );
    }

    #[test]
    fn zero_row_cosine_is_degenerate() {
        let g = SparseGraph::from_edges(3, [(0, 1)]).unwrap();
        let x = embed(&g, &ProjectionConfig::linear(Family::A, 8, 0).unwrap()).unwrap();
        let s = projected_similarity(&x, SimilarityKind::Cosine, 0, 2).unwrap();
        assert_eq!(
            s,
            Similarity {
                value: 0.0,
                degenerate: true
            }
        );
    }

    #[test]
    fn projected_matches_dense_oracle() {
        let g = SparseGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let q = 20;
        let x = embed(&g, &ProjectionConfig::linear(Family::A, q, 6).unwrap()).unwrap();
        let proj = |u: usize| -> Vec<f64> {
            (0..q)
                .map(|j| g.neighbors(u).map(|(k, w)| w as f64 * entry(6, k, j, q)).sum())
                .collect()
        };
        for u in 0..5 {
            for v in 0..5 {
                let expect: f64 = proj(u).iter().zip(proj(v)).map(|(a, b)| a * b).sum();
                let got = projected_similarity(&x, SimilarityKind::DotA, u, v).unwrap().value;
                assert!((got - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn relevance_row_matches_scalar_ops() {
        let g = crate::graph::generate(crate::graph::GeneratorKind::ErdosRenyi { n: 30, p: 0.2 }, 1).unwrap();
        let x = embed(&g, &ProjectionConfig::linear(Family::A, 32, 1).unwrap()).unwrap();
        let candidates: Vec<usize> = (0..30).collect();
        for kind in [SimilarityKind::DotA, SimilarityKind::Cosine] {
            let row = relevance_row(&g, &x, kind, 4, &candidates).unwrap();
            for p in row {
                let proj = projected_similarity(&x, kind, 4, p.v).unwrap();
                assert_eq!(p.projected, proj.value);
                match exact_similarity(&g, kind, 4, p.v) {
                    Ok(e) => assert_eq!(p.exact, e),
                    Err(_) => assert!(p.degenerate && p.exact == 0.0),
                }
            }
        }
    }

    #[test]
    fn relevance_row_star_center_has_no_two_paths_to_leaves() {
        let g = SparseGraph::from_edges(6, (1..6).map(|l| (0, l))).unwrap();
        let x = embed(&g, &ProjectionConfig::linear(Family::A, 16, 0).unwrap()).unwrap();
        let row = relevance_row(&g, &x, SimilarityKind::DotA, 0, &[1, 2, 3, 4, 5]).unwrap();
        assert!(row.iter().all(|p| p.exact == 0.0));
    }

    #[test]
    fn relevance_row_single_self_candidate() {
        let g = k3();
        let x = embed(&g, &ProjectionConfig::linear(Family::A, 16, 0).unwrap()).unwrap();
        let row = relevance_row(&g, &x, SimilarityKind::Cosine, 1, &[1]).unwrap();
        assert_eq!((row[0].exact, row[0].projected), (1.0, 1.0));
    }

    #[test]
    fn polynomial_exact_uses_materialized_rows() {
        let g = k3();
        let cfg = ProjectionConfig::new(Family::A, vec![0.0, 1.0], 8, 0).unwrap();
        // A² on K₃ has rows (2,1,1) etc.: row0·row1 = 2 + 2 + 1 = 5.
        assert_eq!(exact_similarity_for(&g, SimilarityKind::DotA, &cfg, 0, 1).unwrap(), 5.0);
        let c = exact_similarity_for(&g, SimilarityKind::Cosine, &cfg, 0, 1).unwrap();
        assert!((c - 5.0 / 6.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn cosine_square_identity(edges in proptest::collection::vec((0usize..12, 0usize..12), 1..40)) {
            let g = SparseGraph::from_edges(12, edges).unwrap();
            for u in 0..12 {
                for v in 0..12 {
                    let (n_uv, n_uu, n_vv) = (
                        g.two_hop(u, v).unwrap(),
                        g.two_hop(u, u).unwrap(),
                        g.two_hop(v, v).unwrap(),
                    );
                    prop_assert_eq!(g.two_hop(v, u).unwrap(), n_uv);
                    prop_assert_eq!(exact_similarity(&g, SimilarityKind::DotA, u, v).unwrap(), n_uv as f64);
                    if g.degree(u) > 0 && g.degree(v) > 0 {
                        let c = exact_similarity(&g, SimilarityKind::Cosine, u, v).unwrap();
                        let lhs = c * c * (n_uu * n_vv) as f64;
                        prop_assert!((lhs - (n_uv * n_uv) as f64).abs() <= 1e-9 * (1 + n_uv * n_uv) as f64);
                        prop_assert!(c <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }
}
