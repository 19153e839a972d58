use rayon::prelude::*;

use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::projection::{derive_seed, materialize_row, project_sparse_rows};
use crate::similarity::{cosine, exact_similarity, sparse_dot, SimilarityKind};
use crate::theory::flip_probability;

#[derive(Debug, Clone, PartialEq)]
pub struct FlipConfig {
    pub kind: SimilarityKind,
    pub q: usize,
    pub trials: usize,
    pub seed: u64,
}

impl FlipConfig {
    pub fn new(kind: SimilarityKind, q: usize, trials: usize, seed: u64) -> Self {
        FlipConfig { kind, q, trials, seed }
    }
}

#[derive(Debug, Clone)]
pub struct FlipOutcome {
    /// Candidate with the larger exact relevance to `w`.
    pub u: usize,
    pub v: usize,
    /// The caller's `u` and `v` were exchanged to put the larger first.
    pub swapped: bool,
    pub exact_u: f64,
    pub exact_v: f64,
    /// `cos(P_w, P_u − P_v)`; dot kinds only.
    pub cos_w_diff: Option<f64>,
    /// Predicted flip probability; `None` where no closed form applies.
    pub predicted: Option<f64>,
    pub flips: usize,
    pub trials: usize,
    pub rate: f64,
    /// Binomial standard error `√(p(1−p)/n)` of `rate`.
    pub std_error: f64,
    pub report: ExperimentReport,
}

/// Counts how often the projection reverses the exact order of `rel(w, u)`
/// and `rel(w, v)`. A trial flips when the projected relevance of the
/// exactly larger candidate is strictly smaller.
pub fn flip_rate(g: &SparseGraph, w: usize, u: usize, v: usize, cfg: &FlipConfig) -> Result<FlipOutcome> {
    if cfg.q < 1 {
        return Err(Error::Configuration("q must be at least 1".into()));
    }
    if cfg.trials < 1 {
        return Err(Error::Configuration("trials must be at least 1".into()));
    }
    let kind = cfg.kind;
    let ru = exact_similarity(g, kind, w, u)?;
    let rv = exact_similarity(g, kind, w, v)?;
    if ru == rv {
        return Err(Error::DegenerateOrder { value: ru });
    }
    let swapped = ru < rv;
    let (u, v, ru, rv) = if swapped { (v, u, rv, ru) } else { (u, v, ru, rv) };

    let family = kind.embedding_family();
    let rows: Vec<Vec<(usize, f64)>> = [w, u, v]
        .iter()
        .map(|&x| materialize_row(g, family, &[1.0], x))
        .collect::<Result<_>>()?;

    let (cos_w_diff, predicted) = match kind {
        SimilarityKind::Cosine => (None, (w == u || w == v).then_some(0.0)),
        _ => {
            let diff = sub(&rows[1], &rows[2]);
            let num = sparse_dot(&rows[0], &diff);
            let den = (sparse_dot(&rows[0], &rows[0]) * sparse_dot(&diff, &diff)).sqrt();
            let c = (num / den).clamp(-1.0, 1.0);
            (Some(c), Some(flip_probability(c, cfg.q as u64)?.probability))
        }
    };

    let pairs: Vec<(f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let x = project_sparse_rows(&rows, cfg.q, derive_seed(cfg.seed, t as u64));
            match kind {
                SimilarityKind::Cosine => (
                    if w == u {
                        1.0
                    } else {
                        cosine(&x[0], &x[1]).unwrap_or(0.0)
                    },
                    if w == v {
                        1.0
                    } else {
                        cosine(&x[0], &x[2]).unwrap_or(0.0)
                    },
                ),
                _ => (dot(&x[0], &x[1]), dot(&x[0], &x[2])),
            }
        })
        .collect();
    let flips = pairs.iter().filter(|(a, b)| a < b).count();
    let n = cfg.trials as f64;
    let rate = flips as f64 / n;
    let std_error = (rate * (1.0 - rate) / n).sqrt();

    let mut report = ExperimentReport::new(
        "flip",
        &["seed", "trial", "trial_seed", "projected_u", "projected_v", "flipped"],
    );
    report
        .meta("seed", cfg.seed)
        .meta("kind", kind)
        .meta("w", w)
        .meta("u", u)
        .meta("v", v)
        .meta("swapped", swapped)
        .meta("q", cfg.q)
        .meta("trials", cfg.trials)
        .meta("exact_u", format!("{ru:.16e}"))
        .meta("exact_v", format!("{rv:.16e}"))
        .meta("cos_w_diff", cos_w_diff.map_or("NA".into(), |c| format!("{c:.16e}")))
        .meta("predicted", predicted.map_or("NA".into(), |p| format!("{p:.16e}")))
        .meta("flips", flips)
        .meta("rate", format!("{rate:.16e}"))
        .meta("std_error", format!("{std_error:.16e}"));
    for (t, &(a, b)) in pairs.iter().enumerate() {
        report.push_row(vec![
            cfg.seed.into(),
            t.into(),
            derive_seed(cfg.seed, t as u64).into(),
            a.into(),
            b.into(),
            (a < b).into(),
        ])?;
    }
    Ok(FlipOutcome {
        u,
        v,
        swapped,
        exact_u: ru,
        exact_v: rv,
        cos_w_diff,
        predicted,
        flips,
        trials: cfg.trials,
        rate,
        std_error,
        report,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[(usize, f64)], b: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, -b[j].1));
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 - b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind};

    #[test]
    fn sparse_difference() {
        let d = sub(&[(0, 1.0), (2, 3.0)], &[(1, 2.0), (2, 1.0)]);
        assert_eq!(d, vec![(0, 1.0), (1, -2.0), (2, 2.0)]);
    }

    #[test]
    fn gadget_dot_t_orders_and_swaps() {
        let g = generate(GeneratorKind::FlipGadget { d_u: 64, d_v: 2 }, 0).unwrap();
        let cfg = FlipConfig::new(SimilarityKind::DotT, 64, 2000, 5);
        let out = flip_rate(&g, 1, 0, 1, &cfg).unwrap();
        assert!(out.swapped);
        assert_eq!(out.u, 1);
        let p = out.predicted.unwrap();
        assert!((out.rate - p).abs() < 4.0 * (p * (1.0 - p) / 2000.0).sqrt() + 1e-3);
    }

    #[test]
    fn equal_relevance_is_degenerate() {
        let g = SparseGraph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let cfg = FlipConfig::new(SimilarityKind::DotA, 8, 10, 1);
        assert!(matches!(
            flip_rate(&g, 0, 1, 2, &cfg),
            Err(Error::DegenerateOrder { .. })
        ));
    }

    #[test]
    fn cosine_prediction_only_for_self_reference() {
        let g = SparseGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let cfg = FlipConfig::new(SimilarityKind::Cosine, 16, 50, 2);
        let out = flip_rate(&g, 0, 0, 3, &cfg).unwrap();
        assert_eq!(out.predicted, Some(0.0));
        assert_eq!(out.flips, 0);
        let out = flip_rate(&g, 0, 2, 3, &cfg).unwrap();
        assert_eq!(out.predicted, None);
    }
}
