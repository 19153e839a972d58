use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;

use super::{DuplicatePolicy, SparseGraph};
use crate::error::{Error, Result};

/// Node-count ceiling used by [`generate`].
pub const DEFAULT_MAX_NODES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// Configuration-model pairing of degrees drawn from `P(d) ∝ d^-exponent`
    /// on `1..=n-1`.
    PowerLaw { n: usize, exponent: f64 },
    /// `G(n, p)` via geometric skipping over node pairs.
    ErdosRenyi { n: usize, p: f64 },
    /// Hub `0` with `d_u` private leaves and node `1` with `d_v` private
    /// leaves; `0` and `1` share no neighbor and are not adjacent.
    FlipGadget { d_u: usize, d_v: usize },
}

impl GeneratorKind {
    pub fn node_count(&self) -> usize {
        match *self {
            GeneratorKind::PowerLaw { n, .. } | GeneratorKind::ErdosRenyi { n, .. } => n,
            GeneratorKind::FlipGadget { d_u, d_v } => d_u.saturating_add(d_v).saturating_add(2),
        }
    }
}

pub fn generate(kind: GeneratorKind, seed: u64) -> Result<SparseGraph> {
    generate_with_limit(kind, seed, DEFAULT_MAX_NODES)
}

pub fn generate_with_limit(kind: GeneratorKind, seed: u64, max_nodes: usize) -> Result<SparseGraph> {
    let n = kind.node_count();
    if n > max_nodes {
        return Err(Error::Resource(format!(
            "generator needs {n} nodes, limit is {max_nodes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        GeneratorKind::PowerLaw { n, exponent } => power_law(n, exponent, &mut rng),
        GeneratorKind::ErdosRenyi { n, p } => erdos_renyi(n, p, &mut rng),
        GeneratorKind::FlipGadget { d_u, d_v } => flip_gadget(d_u, d_v),
    }
}

/// Degree sequence for the power-law generator. An odd stub total is made
/// even by incrementing the degree of one uniformly chosen node.
pub(crate) fn power_law_degrees<R: Rng>(n: usize, exponent: f64, rng: &mut R) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::domain("power-law generator needs n >= 2"));
    }
    if !(exponent > 1.0) || !exponent.is_finite() {
        return Err(Error::domain(format!(
            "exponent must be finite and > 1, got {exponent}"
        )));
    }
    let weights = (1..n).map(|d| (d as f64).powf(-exponent));
    let dist = WeightedIndex::new(weights).map_err(|e| Error::Sampling(e.to_string()))?;
    let mut degrees: Vec<usize> = (0..n).map(|_| dist.sample(rng) + 1).collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let i = rng.random_range(0..n);
        degrees[i] += 1;
    }
    Ok(degrees)
}

fn power_law<R: Rng>(n: usize, exponent: f64, rng: &mut R) -> Result<SparseGraph> {
    let degrees = power_law_degrees(n, exponent, rng)?;
    let mut stubs: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(u, &d)| std::iter::repeat_n(u, d))
        .collect();
    stubs.shuffle(rng);
    let edges = stubs
        .chunks_exact(2)
        .filter(|pair| pair[0] != pair[1])
        .map(|pair| (pair[0], pair[1], 1));
    SparseGraph::from_entries(n, edges, DuplicatePolicy::Binary, true)
}

fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<SparseGraph> {
    if n < 1 {
        return Err(Error::domain("Erdos-Renyi generator needs n >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    let skip = Geometric::new(p).map_err(|e| Error::Sampling(e.to_string()))?;
    let mut edges = Vec::new();
    // Walk the strict lower triangle row by row, `w` counting from -1.
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        w = w
            .saturating_add(1)
            .saturating_add(skip.sample(rng).min(i64::MAX as u64) as i64);
        while v < n && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((v, w as usize, 1));
        }
    }
    SparseGraph::from_entries(n, edges, DuplicatePolicy::Binary, true)
}

fn flip_gadget(d_u: usize, d_v: usize) -> Result<SparseGraph> {
    if d_u < 1 || d_v < 1 {
        return Err(Error::domain("flip gadget needs d_u >= 1 and d_v >= 1"));
    }
    let n = d_u + d_v + 2;
    let hub = (2..2 + d_u).map(|leaf| (0, leaf, 1));
    let other = (2 + d_u..n).map(|leaf| (1, leaf, 1));
    SparseGraph::from_entries(n, hub.chain(other), DuplicatePolicy::Binary, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_gadget_structure() {
        let g = generate(GeneratorKind::FlipGadget { d_u: 8, d_v: 2 }, 0).unwrap();
        assert_eq!(g.n(), 12);
        assert_eq!(g.degree(0), 8);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.two_hop(0, 1).unwrap(), 0);
        assert!(g.row(0).0.iter().all(|&c| c != 1));
    }

    #[test]
    fn flip_gadget_respects_node_limit() {
        let err = generate_with_limit(GeneratorKind::FlipGadget { d_u: 8, d_v: 2 }, 0, 11);
        assert!(matches!(err, Err(Error::Resource(_))));
    }

    #[test]
    fn erdos_renyi_deterministic() {
        let kind = GeneratorKind::ErdosRenyi { n: 100, p: 0.1 };
        let a = generate(kind, 7).unwrap();
        let b = generate(kind, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(kind, 8).unwrap());
    }

    #[test]
    fn erdos_renyi_edge_count_plausible() {
        let g = generate(GeneratorKind::ErdosRenyi { n: 400, p: 0.05 }, 3).unwrap();
        let edges = g.nnz() as f64 / 2.0;
        let mean: f64 = 0.05 * 400.0 * 399.0 / 2.0;
        let sd = (mean * 0.95).sqrt();
        assert!((edges - mean).abs() < 5.0 * sd, "{edges} vs {mean}");
        assert!(g.neighbors(0).all(|(v, _)| v != 0) || g.degree(0) == 0);
    }

    #[test]
    fn erdos_renyi_has_no_self_loops() {
        let g = generate(GeneratorKind::ErdosRenyi { n: 60, p: 0.3 }, 11).unwrap();
        for u in 0..g.n() {
            assert!(g.neighbors(u).all(|(v, _)| v != u));
        }
    }

    #[test]
    fn power_law_is_simple_and_valid() {
        let g = generate(GeneratorKind::PowerLaw { n: 2000, exponent: 2.5 }, 5).unwrap();
        g.validate().unwrap();
        assert!(g.is_binary());
        for u in 0..g.n() {
            assert!(g.neighbors(u).all(|(v, _)| v != u));
        }
    }

    #[test]
    fn power_law_degree_total_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let d = power_law_degrees(101, 2.1, &mut rng).unwrap();
            assert_eq!(d.iter().sum::<usize>() % 2, 0);
            assert!(d.iter().all(|&x| (1..=101).contains(&x)));
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(generate(GeneratorKind::PowerLaw { n: 10, exponent: 1.0 }, 0).is_err());
        assert!(generate(GeneratorKind::ErdosRenyi { n: 10, p: 1.0 }, 0).is_err());
        assert!(generate(GeneratorKind::ErdosRenyi { n: 10, p: 0.0 }, 0).is_err());
        assert!(generate(GeneratorKind::FlipGadget { d_u: 0, d_v: 1 }, 0).is_err());
    }
}
