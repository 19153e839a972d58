use rayon::prelude::*;

use super::report::ExperimentReport;
use super::stats::{ks_statistic, mean_variance, normal_cdf};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::projection::{derive_seed, materialize_row, project_sparse_rows};
use crate::similarity::{cosine, sparse_dot, SimilarityKind};
use crate::theory::{cosine_asymptotic, dot_asymptotic, NormalParams};

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub kind: SimilarityKind,
    pub q: usize,
    pub trials: usize,
    pub seed: u64,
    /// Polynomial coefficients, `coeffs[j]` multiplying `M^{j+1}`.
    pub coeffs: Vec<f64>,
}

pub const MIN_TRIALS: usize = 100;

impl MonteCarloConfig {
    pub fn new(kind: SimilarityKind, q: usize, trials: usize, seed: u64) -> Self {
        MonteCarloConfig {
            kind,
            q,
            trials,
            seed,
            coeffs: vec![1.0],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.q < 1 {
            return Err(Error::Configuration("q must be at least 1".into()));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::Configuration(format!(
                "need at least {MIN_TRIALS} trials, got {}",
                self.trials
            )));
        }
        if self.coeffs.is_empty() || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Configuration("coefficients must be finite and nonempty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MonteCarloOutcome {
    pub exact: f64,
    pub theory: NormalParams,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// KS distance of the standardized samples from `N(0, 1)`; `None` when
    /// the predicted variance is zero.
    pub ks: Option<f64>,
    /// Trials whose projected cosine was undefined (zero row).
    pub degenerate: usize,
    pub report: ExperimentReport,
}

/// Repeats the projection of the pair `(u, v)` with independent seeds and
/// compares the empirical law of the estimator with its normal prediction.
pub fn monte_carlo_similarity(
    g: &SparseGraph,
    u: usize,
    v: usize,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloOutcome> {
    cfg.validate()?;
    g.check_node(u)?;
    g.check_node(v)?;
    let kind = cfg.kind;
    if kind != SimilarityKind::DotA {
        for w in [u, v] {
            if g.degree(w) == 0 {
                return Err(Error::UndefinedSimilarity { node: w });
            }
        }
    }
    let family = kind.embedding_family();
    let pu = materialize_row(g, family, &cfg.coeffs, u)?;
    let pv = materialize_row(g, family, &cfg.coeffs, v)?;
    let (nu2, nv2, dot) = (sparse_dot(&pu, &pu), sparse_dot(&pv, &pv), sparse_dot(&pu, &pv));
    let q = cfg.q as u64;
    let (exact, theory) = match kind {
        SimilarityKind::Cosine => {
            if nu2 == 0.0 {
                return Err(Error::UndefinedSimilarity { node: u });
            }
            if nv2 == 0.0 {
                return Err(Error::UndefinedSimilarity { node: v });
            }
            let rho = if u == v {
                1.0
            } else {
                (dot / (nu2 * nv2).sqrt()).clamp(-1.0, 1.0)
            };
            (rho, cosine_asymptotic(rho, q)?)
        }
        _ => (dot, dot_asymptotic(nu2, nv2, dot, q)?),
    };

    let rows = [pu, pv];
    let draws: Vec<Option<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let x = project_sparse_rows(&rows, cfg.q, derive_seed(cfg.seed, t as u64));
            match kind {
                SimilarityKind::Cosine if u == v => Some(1.0),
                SimilarityKind::Cosine => cosine(&x[0], &x[1]),
                _ => Some(x[0].iter().zip(&x[1]).map(|(a, b)| a * b).sum()),
            }
        })
        .collect();
    let samples: Vec<f64> = draws.iter().flatten().copied().collect();
    let degenerate = draws.len() - samples.len();
    let (mean, variance) = mean_variance(&samples);
    let ks = if theory.variance > 0.0 && !samples.is_empty() {
        let (mu, sd) = (theory.mean, theory.std_dev());
        let z: Vec<f64> = samples.iter().map(|x| (x - mu) / sd).collect();
        Some(ks_statistic(&z, normal_cdf)?)
    } else {
        None
    };

    let mut report = ExperimentReport::new("mc", &["seed", "trial", "trial_seed", "value"]);
    report
        .meta("seed", cfg.seed)
        .meta("kind", kind)
        .meta("u", u)
        .meta("v", v)
        .meta("q", cfg.q)
        .meta("trials", cfg.trials)
        .meta("exact", format!("{exact:.16e}"))
        .meta("theory_mean", format!("{:.16e}", theory.mean))
        .meta("theory_variance", format!("{:.16e}", theory.variance))
        .meta("empirical_mean", format!("{mean:.16e}"))
        .meta("empirical_variance", format!("{variance:.16e}"))
        .meta("ks", ks.map_or("NA".to_string(), |d| format!("{d:.16e}")))
        .meta("degenerate", degenerate);
    for (t, d) in draws.iter().enumerate() {
        report.push_row(vec![
            cfg.seed.into(),
            t.into(),
            derive_seed(cfg.seed, t as u64).into(),
            (*d).into(),
        ])?;
    }
    Ok(MonteCarloOutcome {
        exact,
        theory,
        samples,
        mean,
        variance,
        ks,
        degenerate,
        report,
    })
}
