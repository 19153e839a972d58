use rpnodesim::experiments::{
    flip_rate, jl_violation_study_vectors, monte_carlo_similarity, ndcg_at_k, ndcg_experiment, FlipConfig, JlBound,
    JlConfig, MonteCarloConfig, NdcgConfig,
};
use rpnodesim::graph::{generate, GeneratorKind};
use rpnodesim::{Error, SimilarityKind, SparseGraph};

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn k3() -> SparseGraph {
    SparseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let g = generate(GeneratorKind::PowerLaw { n: 900, exponent: 2.5 }, 12).unwrap();
    let ndcg = NdcgConfig::new(5, 64, 40, SimilarityKind::ALL.to_vec(), 3);
    let mc = MonteCarloConfig::new(SimilarityKind::Cosine, 64, 300, 4);
    let run = || {
        (
            ndcg_experiment(&g, &ndcg).unwrap().report.to_csv_string(),
            monte_carlo_similarity(&k3(), 0, 2, &mc).unwrap().report.to_csv_string(),
        )
    };
    let one = with_threads(1, run);
    let four = with_threads(4, run);
    assert_eq!(one, four);
}

#[test]
fn dot_a_variance_on_triangle() {
    // n_uu = n_vv = 2 and n_uv = 1: variance (4 + 1)/q.
    let cfg = MonteCarloConfig::new(SimilarityKind::DotA, 1024, 10_000, 21);
    let out = monte_carlo_similarity(&k3(), 0, 1, &cfg).unwrap();
    assert_eq!(out.theory.variance, 5.0 / 1024.0);
    assert!((out.variance / out.theory.variance - 1.0).abs() < 0.1);
    assert!((out.mean - 1.0).abs() < 4.0 * (out.variance / 10_000.0).sqrt());
}

#[test]
fn unit_cosine_pair_has_zero_variance() {
    // Nodes 1 and 2 share the single neighbour 0.
    let g = SparseGraph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
    let cfg = MonteCarloConfig::new(SimilarityKind::Cosine, 32, 200, 5);
    let out = monte_carlo_similarity(&g, 1, 2, &cfg).unwrap();
    assert_eq!(out.exact, 1.0);
    assert_eq!(out.theory.variance, 0.0);
    assert!(out.variance < 1e-24);
    assert_eq!(out.ks, None);
}

#[test]
fn flip_rate_matches_prediction_for_equal_norm_pair() {
    // P_w = e_a, P_u = e_a + e_b, P_v = e_c + e_d: rel_wu = 1, rel_wv = 0
    // and cos(P_w, P_u − P_v) = 1/2.
    let (a, b, c, d, w, u, v) = (0, 1, 2, 3, 4, 5, 6);
    let g = SparseGraph::from_edges(7, [(w, a), (u, a), (u, b), (v, c), (v, d)]).unwrap();
    for q in [2usize, 4, 8] {
        let trials = 20_000;
        let out = flip_rate(
            &g,
            w,
            u,
            v,
            &FlipConfig::new(SimilarityKind::DotA, q, trials, 40 + q as u64),
        )
        .unwrap();
        assert_eq!(out.cos_w_diff, Some(0.5));
        let p = out.predicted.unwrap();
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((out.rate - p).abs() <= 3.0 * se, "q={q}: {} vs {p}", out.rate);
    }
}

#[test]
fn gadget_never_flips_under_cosine() {
    let g = generate(GeneratorKind::FlipGadget { d_u: 128, d_v: 2 }, 0).unwrap();
    // Leaf 2 is adjacent to hub 0 only, so rel(0, 0) = 1 > rel(0, 2) = 0.
    let out = flip_rate(&g, 0, 0, 2, &FlipConfig::new(SimilarityKind::Cosine, 64, 2000, 6)).unwrap();
    assert_eq!(out.flips, 0);
    assert_eq!(out.predicted, Some(0.0));
}

#[test]
fn matching_top_k_gives_one() {
    let t = [0.9, 0.1, 0.5, 0.3, 0.0];
    // Same top-3 set and order, different tail.
    let a = [10.0, 0.0, 8.0, 7.0, 6.9];
    assert_eq!(ndcg_at_k(&t, &a, 3).unwrap(), 1.0);
    let swapped = [8.0, 0.0, 10.0, 7.0, 6.9];
    assert!(ndcg_at_k(&t, &swapped, 3).unwrap() < 1.0);
}

#[test]
fn thirty_node_cosine_study() {
    let vectors: Vec<Vec<f64>> = (0..30)
        .map(|i| {
            (0..12)
                .map(|j| (((i * 31 + j * 17) % 11) as f64 - 5.0).max(0.0))
                .collect()
        })
        .filter(|v: &Vec<f64>| v.iter().any(|&x| x != 0.0))
        .collect();
    let out = jl_violation_study_vectors(&vectors, &JlConfig::new(JlBound::Cosine, 0.05, 0.1, 20, 8)).unwrap();
    assert!(out.fraction <= 0.1);
}

#[test]
fn undersized_strata_fail() {
    let g = generate(GeneratorKind::ErdosRenyi { n: 20, p: 0.3 }, 1).unwrap();
    let cfg = NdcgConfig::new(1, 8, 7, vec![SimilarityKind::DotA], 1);
    assert!(matches!(ndcg_experiment(&g, &cfg), Err(Error::Sampling(_))));
}
