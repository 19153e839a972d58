#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Gaussian random projections of sparse graph matrices.
//!
//! Node embeddings are rows of `X = p(M) Rᵀ` where `M` is the adjacency
//! matrix `A` or the transition matrix `T = D⁻¹A` and `R` is a `q × n`
//! matrix of i.i.d. `N(0, 1/q)` entries. The crate computes those embeddings,
//! the exact similarities they approximate, closed-form predictions for the
//! approximation error, and Monte-Carlo / NDCG experiments that check the
//! predictions.
//!
//! Modules:
//! - [`graph`]: CSR storage, Matrix Market I/O, generators, 2-hop counts.
//! - [`projection`]: seeded projection matrix, embeddings, rotation sampler.
//! - [`similarity`]: exact and projected dot/cosine relevance.
//! - [`theory`]: asymptotic laws, JL dimensions, flip probabilities, tail bounds.
//! - [`experiments`]: Monte-Carlo, flip-rate, JL-violation and NDCG studies.

pub mod error;
pub mod experiments;
pub mod graph;
pub mod projection;
pub mod similarity;
pub mod theory;

pub use error::{Error, Result};
pub use graph::SparseGraph;
pub use projection::{EmbeddingMatrix, Family, ProjectionConfig};
pub use similarity::SimilarityKind;
