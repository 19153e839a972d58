use rayon::prelude::*;

use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::projection::{derive_seed, materialize_row, project_sparse_rows, Family};
use crate::similarity::{cosine, sparse_dot};
use crate::theory::{jl_min_q_cosine, jl_min_q_dot};

/// Slack on the cosine check, absorbing rounding for pairs with `|ρ| = 1`.
pub const COSINE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JlBound {
    /// `|X_i·X_j − P_i·P_j| < ε‖P_i‖‖P_j‖` on transition rows.
    Dot,
    /// `|cos(X_i, X_j) − ρ_ij| ≤ ε(1 − ρ_ij²)` on adjacency rows.
    Cosine,
}

impl JlBound {
    pub fn name(self) -> &'static str {
        match self {
            JlBound::Dot => "dot",
            JlBound::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for JlBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(JlBound::Dot),
            "cosine" | "cos" => Ok(JlBound::Cosine),
            _ => Err(Error::Configuration(format!(
                "unknown JL bound `{s}` (expected dot or cosine)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JlConfig {
    pub bound: JlBound,
    pub epsilon: f64,
    pub delta: f64,
    pub draws: usize,
    pub seed: u64,
}

impl JlConfig {
    pub fn new(bound: JlBound, epsilon: f64, delta: f64, draws: usize, seed: u64) -> Self {
        JlConfig {
            bound,
            epsilon,
            delta,
            draws,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JlOutcome {
    pub q: usize,
    /// Number of vectors.
    pub k: usize,
    pub violated: Vec<bool>,
    pub violating_draws: usize,
    pub fraction: f64,
    pub report: ExperimentReport,
}

/// Violation study over the rows of the non-isolated nodes of `g`:
/// transition rows for the dot bound, adjacency rows for the cosine bound.
pub fn jl_violation_study(g: &SparseGraph, cfg: &JlConfig) -> Result<JlOutcome> {
    let family = match cfg.bound {
        JlBound::Dot => Family::T,
        JlBound::Cosine => Family::A,
    };
    let nodes: Vec<usize> = (0..g.n()).filter(|&u| g.degree(u) > 0).collect();
    let rows: Vec<Vec<(usize, f64)>> = nodes
        .iter()
        .map(|&u| materialize_row(g, family, &[1.0], u))
        .collect::<Result<_>>()?;
    let mut out = study(&rows, cfg)?;
    out.report.meta("nodes", g.n()).meta("family", family.name());
    Ok(out)
}

/// Violation study over an explicit set of dense vectors.
pub fn jl_violation_study_vectors(vectors: &[Vec<f64>], cfg: &JlConfig) -> Result<JlOutcome> {
    let rows: Vec<Vec<(usize, f64)>> = vectors
        .iter()
        .map(|v| {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Data("vector has a non-finite entry".into()));
            }
            Ok(v.iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, &x)| (i, x))
                .collect())
        })
        .collect::<Result<_>>()?;
    study(&rows, cfg)
}

fn study(rows: &[Vec<(usize, f64)>], cfg: &JlConfig) -> Result<JlOutcome> {
    let k = rows.len();
    if k < 2 {
        return Err(Error::Configuration(format!("need at least 2 vectors, got {k}")));
    }
    if cfg.draws < 1 {
        return Err(Error::Configuration("draws must be at least 1".into()));
    }
    if let Some(i) = rows.iter().position(|r| r.is_empty()) {
        return Err(Error::Data(format!("vector {i} is zero")));
    }
    let q = match cfg.bound {
        JlBound::Dot => jl_min_q_dot(cfg.epsilon, cfg.delta, k as u64)?,
        JlBound::Cosine => jl_min_q_cosine(cfg.epsilon, cfg.delta, k as u64)?,
    };
    let q = usize::try_from(q).map_err(|_| Error::Resource(format!("q = {q} does not fit in memory")))?;

    let norms: Vec<f64> = rows.iter().map(|r| sparse_dot(r, r).sqrt()).collect();
    let mut exact = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let d = sparse_dot(&rows[i], &rows[j]);
            exact[i * k + j] = match cfg.bound {
                JlBound::Dot => d,
                JlBound::Cosine => (d / (norms[i] * norms[j])).clamp(-1.0, 1.0),
            };
        }
    }

    let eps = cfg.epsilon;
    let per_draw: Vec<(usize, f64)> = (0..cfg.draws)
        .into_par_iter()
        .map(|t| {
            let x = project_sparse_rows(rows, q, derive_seed(cfg.seed, t as u64));
            let mut bad = 0;
            let mut worst = 0.0f64;
            for i in 0..k {
                for j in i + 1..k {
                    let e = exact[i * k + j];
                    let (violates, ratio) = match cfg.bound {
                        JlBound::Dot => {
                            let dev = (dot(&x[i], &x[j]) - e).abs();
                            let tol = eps * norms[i] * norms[j];
                            (dev >= tol, dev / (norms[i] * norms[j]))
                        }
                        JlBound::Cosine => match cosine(&x[i], &x[j]) {
                            None => (true, f64::INFINITY),
                            Some(c) => {
                                let dev = (c - e).abs();
                                let width = 1.0 - e * e;
                                (
                                    dev > eps * width + COSINE_SLACK,
                                    if width > 0.0 { dev / width } else { 0.0 },
                                )
                            }
                        },
                    };
                    bad += usize::from(violates);
                    worst = worst.max(ratio);
                }
            }
            (bad, worst)
        })
        .collect();

    let violated: Vec<bool> = per_draw.iter().map(|&(b, _)| b > 0).collect();
    let violating_draws = violated.iter().filter(|&&v| v).count();
    let fraction = violating_draws as f64 / cfg.draws as f64;

    let mut report = ExperimentReport::new(
        "jl",
        &[
            "seed",
            "draw",
            "draw_seed",
            "violating_pairs",
            "max_scaled_deviation",
            "violated",
        ],
    );
    report
        .meta("seed", cfg.seed)
        .meta("bound", cfg.bound.name())
        .meta("epsilon", cfg.epsilon)
        .meta("delta", cfg.delta)
        .meta("q", q)
        .meta("k", k)
        .meta("draws", cfg.draws)
        .meta("violating_draws", violating_draws)
        .meta("fraction", format!("{fraction:.16e}"));
    for (t, &(bad, worst)) in per_draw.iter().enumerate() {
        report.push_row(vec![
            cfg.seed.into(),
            t.into(),
            derive_seed(cfg.seed, t as u64).into(),
            bad.into(),
            worst.into(),
            (bad > 0).into(),
        ])?;
    }
    Ok(JlOutcome {
        q,
        k,
        violated,
        violating_draws,
        fraction,
        report,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicated_pair_never_violates_cosine() {
        let v = vec![vec![1.0, 2.0, 0.0, -1.0], vec![1.0, 2.0, 0.0, -1.0]];
        let cfg = JlConfig::new(JlBound::Cosine, 0.05, 0.5, 5, 11);
        let out = jl_violation_study_vectors(&v, &cfg).unwrap();
        assert_eq!(out.q, 3566);
        assert_eq!(out.violating_draws, 0);
    }

    #[test]
    fn q_follows_min_q_formula() {
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let cfg = JlConfig::new(JlBound::Dot, 0.5, 0.5, 10, 1);
        let out = jl_violation_study_vectors(&v, &cfg).unwrap();
        assert_eq!(out.q, 34);
        assert_eq!(out.violated.len(), 10);
    }

    #[test]
    fn domain_and_shape_errors() {
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let bad_eps = JlConfig::new(JlBound::Cosine, 0.06, 0.1, 10, 1);
        assert!(matches!(
            jl_violation_study_vectors(&v, &bad_eps),
            Err(Error::Domain(_))
        ));
        let ok = JlConfig::new(JlBound::Dot, 0.5, 0.5, 10, 1);
        assert!(jl_violation_study_vectors(&v[..1], &ok).is_err());
        assert!(jl_violation_study_vectors(&[vec![1.0], vec![0.0]], &ok).is_err());
    }
}
