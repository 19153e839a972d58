//! Stratified NDCG comparison of true and projected rankings.

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{Cell, ExperimentReport};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::projection::{derive_seed, embed_rows, Family, ProjectionConfig};
use crate::similarity::{cosine, SimilarityKind};

/// Candidate order: descending relevance, ties by ascending index.
fn ranking(rel: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rel.len()).collect();
    idx.sort_by(|&a, &b| rel[b].partial_cmp(&rel[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn dcg(true_rel: &[f64], order: &[usize]) -> f64 {
    order
        .iter()
        .enumerate()
        .map(|(rank0, &h)| true_rel[h] / ((rank0 + 2) as f64).log2())
        .sum()
}

/// `DCGᴿ@K / DCG@K`, both summing true relevances with discount
/// `log₂(rank+1)`; the numerator follows the approximate ranking.
/// Returns 1 when `DCG@K = 0`.
pub fn ndcg_at_k(true_rel: &[f64], approx_rel: &[f64], k: usize) -> Result<f64> {
    Ok(ndcg_parts(true_rel, approx_rel, k)?.0)
}

/// `(η, DCG, DCGᴿ)`.
fn ndcg_parts(true_rel: &[f64], approx_rel: &[f64], k: usize) -> Result<(f64, f64, f64)> {
    if true_rel.len() != approx_rel.len() {
        return Err(Error::Data(format!(
            "relevance lists differ in length ({} vs {})",
            true_rel.len(),
            approx_rel.len()
        )));
    }
    if true_rel.is_empty() {
        return Err(Error::Data("relevance lists are empty".into()));
    }
    if k < 1 || k > true_rel.len() {
        return Err(Error::Configuration(format!(
            "K must lie in 1..={}, got {k}",
            true_rel.len()
        )));
    }
    if true_rel.iter().chain(approx_rel).any(|x| x.is_nan()) {
        return Err(Error::Data("relevance contains NaN".into()));
    }
    let ideal = dcg(true_rel, &ranking(true_rel, k));
    let approx = dcg(true_rel, &ranking(approx_rel, k));
    let eta = if ideal == 0.0 { 1.0 } else { approx / ideal };
    Ok((eta, ideal, approx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdcgConfig {
    pub k: usize,
    pub q: usize,
    pub seed: u64,
    /// Sample size per stratum.
    pub m: usize,
    pub kinds: Vec<SimilarityKind>,
    /// Boundaries `(b1, b2)` splitting the degree-sorted node list into
    /// `[0, b1)`, `[b1, b2)`, `[b2, n)`; `None` means equal thirds.
    pub boundaries: Option<(usize, usize)>,
}

impl NdcgConfig {
    pub fn new(k: usize, q: usize, m: usize, kinds: Vec<SimilarityKind>, seed: u64) -> Self {
        NdcgConfig {
            k,
            q,
            seed,
            m,
            kinds,
            boundaries: None,
        }
    }

    fn validate(&self, n: usize) -> Result<[(usize, usize); 3]> {
        if self.k < 1 {
            return Err(Error::Configuration("K must be at least 1".into()));
        }
        if self.m < 1 {
            return Err(Error::Configuration("m must be at least 1".into()));
        }
        if self.q < 1 {
            return Err(Error::Configuration("q must be at least 1".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Configuration("no similarity kinds requested".into()));
        }
        if self.k > 3 * self.m - 1 {
            return Err(Error::Configuration(format!(
                "K = {} exceeds the {} candidates per node",
                self.k,
                3 * self.m - 1
            )));
        }
        let (b1, b2) = self.boundaries.unwrap_or((n / 3, 2 * (n / 3)));
        if b1 > b2 || b2 > n {
            return Err(Error::Configuration(format!(
                "stratum boundaries ({b1}, {b2}) do not partition {n} nodes"
            )));
        }
        let strata = [(0, b1), (b1, b2), (b2, n)];
        for (s, &(lo, hi)) in strata.iter().enumerate() {
            if hi - lo < self.m {
                return Err(Error::Sampling(format!(
                    "stratum {} has {} nodes, fewer than m = {}",
                    STRATUM_NAMES[s],
                    hi - lo,
                    self.m
                )));
            }
        }
        Ok(strata)
    }
}

pub const STRATUM_NAMES: [&str; 3] = ["low", "medium", "high"];

#[derive(Debug, Clone, PartialEq)]
pub struct NdcgNode {
    pub stratum: usize,
    pub node: usize,
    pub degree: u64,
    pub kind: SimilarityKind,
    pub eta: f64,
    pub dcg: f64,
    pub dcg_approx: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdcgSummary {
    pub stratum: usize,
    pub kind: SimilarityKind,
    pub count: usize,
    pub mean_eta: f64,
    pub std_eta: f64,
    pub mean_log2_degree: f64,
    pub std_log2_degree: f64,
    /// Sampled nodes of degree 0, left out of the degree statistics.
    pub isolated: usize,
}

#[derive(Debug, Clone)]
pub struct NdcgOutcome {
    pub nodes: Vec<NdcgNode>,
    pub summary: Vec<NdcgSummary>,
    pub report: ExperimentReport,
    pub summary_report: ExperimentReport,
}

impl NdcgOutcome {
    pub fn summary_for(&self, stratum: usize, kind: SimilarityKind) -> Option<&NdcgSummary> {
        self.summary.iter().find(|s| s.stratum == stratum && s.kind == kind)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Samples `m` nodes from each degree stratum and compares, for every
/// sampled node, the top-`K` ranking of the other sampled nodes under
/// exact and projected similarity. All kinds share one projection seed.
pub fn ndcg_experiment(g: &SparseGraph, cfg: &NdcgConfig) -> Result<NdcgOutcome> {
    let n = g.n();
    let strata = cfg.validate(n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&u| (g.degree(u), u));

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, u64::MAX));
    let mut sampled: Vec<(usize, usize)> = Vec::with_capacity(3 * cfg.m);
    for (s, &(lo, hi)) in strata.iter().enumerate() {
        let picks = sample(&mut rng, hi - lo, cfg.m);
        sampled.extend(picks.into_iter().map(|i| (order[lo + i], s)));
    }
    sampled.sort_unstable();
    let nodes: Vec<usize> = sampled.iter().map(|&(u, _)| u).collect();
    let size = nodes.len();

    let need_a = cfg.kinds.iter().any(|k| *k != SimilarityKind::DotT);
    let need_t = cfg.kinds.contains(&SimilarityKind::DotT);
    let xa = if need_a {
        embed_rows(g, &ProjectionConfig::linear(Family::A, cfg.q, cfg.seed)?, &nodes)?
    } else {
        Vec::new()
    };
    let xt = if need_t {
        embed_rows(g, &ProjectionConfig::linear(Family::T, cfg.q, cfg.seed)?, &nodes)?
    } else {
        Vec::new()
    };

    let self_hop: Vec<f64> = nodes.iter().map(|&u| g.two_hop_unchecked(u, u) as f64).collect();
    let degree: Vec<f64> = nodes.iter().map(|&u| g.degree(u) as f64).collect();

    let per_node: Vec<Vec<NdcgNode>> = (0..size)
        .into_par_iter()
        .map(|i| {
            let hops: Vec<f64> = (0..size)
                .map(|j| g.two_hop_unchecked(nodes[i], nodes[j]) as f64)
                .collect();
            let mut out = Vec::with_capacity(cfg.kinds.len());
            for &kind in &cfg.kinds {
                let mut exact = Vec::with_capacity(size - 1);
                let mut approx = Vec::with_capacity(size - 1);
                for j in (0..size).filter(|&j| j != i) {
                    let (e, a) = match kind {
                        SimilarityKind::DotA => (hops[j], dot(&xa[i], &xa[j])),
                        SimilarityKind::DotT => {
                            let d = degree[i] * degree[j];
                            (if d > 0.0 { hops[j] / d } else { 0.0 }, dot(&xt[i], &xt[j]))
                        }
                        SimilarityKind::Cosine => {
                            let d = (self_hop[i] * self_hop[j]).sqrt();
                            (
                                if d > 0.0 { hops[j] / d } else { 0.0 },
                                cosine(&xa[i], &xa[j]).unwrap_or(0.0),
                            )
                        }
                    };
                    exact.push(e);
                    approx.push(a);
                }
                let (eta, dcg, dcg_approx) = ndcg_parts(&exact, &approx, cfg.k)?;
                out.push(NdcgNode {
                    stratum: sampled[i].1,
                    node: nodes[i],
                    degree: g.degree(nodes[i]),
                    kind,
                    eta,
                    dcg,
                    dcg_approx,
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut results: Vec<NdcgNode> = per_node.into_iter().flatten().collect();
    results.sort_by_key(|r| (r.stratum, r.node, r.kind));

    let mut summary = Vec::new();
    for s in 0..3 {
        for &kind in &cfg.kinds {
            let group: Vec<&NdcgNode> = results.iter().filter(|r| r.stratum == s && r.kind == kind).collect();
            let etas: Vec<f64> = group.iter().map(|r| r.eta).collect();
            let logs: Vec<f64> = group
                .iter()
                .filter(|r| r.degree > 0)
                .map(|r| (r.degree as f64).log2())
                .collect();
            let (mean_eta, std_eta) = mean_std(&etas);
            let (mean_log2_degree, std_log2_degree) = mean_std(&logs);
            summary.push(NdcgSummary {
                stratum: s,
                kind,
                count: group.len(),
                mean_eta,
                std_eta,
                mean_log2_degree,
                std_log2_degree,
                isolated: group.len() - logs.len(),
            });
        }
    }

    let kinds: Vec<&str> = cfg.kinds.iter().map(|k| k.name()).collect();
    let echo = |r: &mut ExperimentReport| {
        r.meta("seed", cfg.seed)
            .meta("K", cfg.k)
            .meta("q", cfg.q)
            .meta("m", cfg.m)
            .meta("kinds", kinds.join(";"))
            .meta(
                "strata",
                format!(
                    "{}..{};{}..{};{}..{}",
                    strata[0].0, strata[0].1, strata[1].0, strata[1].1, strata[2].0, strata[2].1
                ),
            )
            .meta("nodes", n);
    };
    let mut report = ExperimentReport::new(
        "ndcg",
        &[
            "seed",
            "stratum",
            "node",
            "degree",
            "log2_degree",
            "kind",
            "K",
            "eta",
            "dcg",
            "dcg_approx",
        ],
    );
    echo(&mut report);
    for r in &results {
        report.push_row(vec![
            cfg.seed.into(),
            STRATUM_NAMES[r.stratum].into(),
            r.node.into(),
            r.degree.into(),
            if r.degree > 0 {
                Cell::Float((r.degree as f64).log2())
            } else {
                Cell::Missing
            },
            r.kind.name().into(),
            cfg.k.into(),
            r.eta.into(),
            r.dcg.into(),
            r.dcg_approx.into(),
        ])?;
    }
    let mut summary_report = ExperimentReport::new(
        "ndcg_summary",
        &[
            "seed",
            "stratum",
            "kind",
            "K",
            "count",
            "mean_eta",
            "std_eta",
            "mean_log2_degree",
            "std_log2_degree",
            "isolated",
        ],
    );
    echo(&mut summary_report);
    for s in &summary {
        summary_report.push_row(vec![
            cfg.seed.into(),
            STRATUM_NAMES[s.stratum].into(),
            s.kind.name().into(),
            cfg.k.into(),
            s.count.into(),
            s.mean_eta.into(),
            s.std_eta.into(),
            s.mean_log2_degree.into(),
            s.std_log2_degree.into(),
            s.isolated.into(),
        ])?;
    }
    Ok(NdcgOutcome {
        nodes: results,
        summary,
        report,
        summary_report,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
