//! Monte-Carlo, flip-rate, JL-violation and NDCG experiments.
//!
//! Every experiment is a pure function of its inputs and master seed.
//! Trial `t` uses the projection seed `derive_seed(seed, t)`, so results do
//! not depend on the number of worker threads.

mod flip;
mod jl;
mod monte_carlo;
mod ndcg;
mod report;
mod stats;

pub use flip::{flip_rate, FlipConfig, FlipOutcome};
pub use jl::{jl_violation_study, jl_violation_study_vectors, JlBound, JlConfig, JlOutcome, COSINE_SLACK};
pub use monte_carlo::{monte_carlo_similarity, MonteCarloConfig, MonteCarloOutcome, MIN_TRIALS};
pub use ndcg::{ndcg_at_k, ndcg_experiment, NdcgConfig, NdcgNode, NdcgOutcome, NdcgSummary, STRATUM_NAMES};
pub use report::{Cell, ExperimentReport};
pub use stats::{ks_statistic, ks_two_sample, mean_variance, normal_cdf};
