use rpnodesim::experiments::ks_two_sample;
use rpnodesim::graph::{generate, GeneratorKind};
use rpnodesim::projection::{
    embed, entry, load_embedding, materialize_row, project_sparse_rows, save_embedding, EmbeddingMatrix,
    RepresentationSampler, DEFAULT_ZERO_THRESHOLD,
};
use rpnodesim::{Family, ProjectionConfig, SparseGraph};

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn embedding_is_identical_across_thread_counts() {
    let g = generate(GeneratorKind::PowerLaw { n: 2000, exponent: 2.3 }, 5).unwrap();
    let cfg = ProjectionConfig::new(Family::T, vec![0.5, 1.0, 0.25], 200, 99).unwrap();
    let one = with_threads(1, || embed(&g, &cfg).unwrap());
    for threads in [2, 3, 8] {
        let many = with_threads(threads, || embed(&g, &cfg).unwrap());
        assert_eq!(one.data(), many.data(), "{threads} threads");
    }
}

#[test]
fn polynomial_is_sum_of_powers() {
    let g = generate(GeneratorKind::ErdosRenyi { n: 80, p: 0.08 }, 2).unwrap();
    let (q, seed) = (96, 17);
    let (a1, a2) = (0.7, -1.3);
    for family in [Family::A, Family::T] {
        let both = embed(&g, &ProjectionConfig::new(family, vec![a1, a2], q, seed).unwrap()).unwrap();
        let first = embed(&g, &ProjectionConfig::new(family, vec![1.0], q, seed).unwrap()).unwrap();
        let second = embed(&g, &ProjectionConfig::new(family, vec![0.0, 1.0], q, seed).unwrap()).unwrap();
        for ((x, y), z) in both.data().iter().zip(first.data()).zip(second.data()) {
            assert!((x - (a1 * y + a2 * z)).abs() <= 1e-9);
        }
    }
}

#[test]
#[allow(clippy::needless_range_loop)]
fn embedding_matches_dense_oracle() {
    let g = generate(GeneratorKind::ErdosRenyi { n: 30, p: 0.2 }, 4).unwrap();
    let (n, q, seed) = (30, 20, 5);
    let r: Vec<Vec<f64>> = (0..n).map(|i| (0..q).map(|j| entry(seed, i, j, q)).collect()).collect();
    let x = embed(&g, &ProjectionConfig::new(Family::A, vec![0.0, 1.0], q, seed).unwrap()).unwrap();
    for u in 0..n {
        let row = materialize_row(&g, Family::A, &[0.0, 1.0], u).unwrap();
        for j in 0..q {
            let want: f64 = row.iter().map(|&(k, a)| a * r[k][j]).sum();
            assert!((x.row(u)[j] - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn rows_have_projection_variance() {
    // A unit vector e_0 projects to row 0 of Rᵀ: entries N(0, 1/q).
    let (q, trials) = (64, 2000);
    let rows = vec![vec![(0usize, 1.0)]];
    let mut values = Vec::with_capacity(q * trials);
    for s in 0..trials as u64 {
        values.extend(project_sparse_rows(&rows, q, s).remove(0));
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    assert!(mean.abs() < 4.0 / m.sqrt());
    assert!((var * q as f64 - 1.0).abs() < 0.05);
}

#[test]
fn projection_agrees_with_representation_sampler() {
    let (rho, nx, ny, q, trials) = (0.3f64, 2.0, 0.5, 32, 10_000);
    let s = (1.0 - rho * rho).sqrt();
    let rows = vec![vec![(0usize, nx)], vec![(0usize, ny * rho), (1, ny * s)]];
    let direct: Vec<f64> = (0..trials as u64)
        .map(|t| {
            let x = project_sparse_rows(&rows, q, t);
            x[0].iter().zip(&x[1]).map(|(a, b)| a * b).sum()
        })
        .collect();
    let mut sampler = RepresentationSampler::new(rho, nx, ny, q, 1234).unwrap();
    let rotated: Vec<f64> = (0..trials).map(|_| sampler.sample_dot()).collect();
    let d = ks_two_sample(&direct, &rotated).unwrap();
    // 1% critical value for two samples of equal size n: 1.628·√(2/n).
    assert!(d < 1.628 * (2.0 / trials as f64).sqrt(), "KS {d}");
}

#[test]
fn embedding_file_round_trip() {
    let g = generate(GeneratorKind::ErdosRenyi { n: 50, p: 0.05 }, 3).unwrap();
    let x = embed(&g, &ProjectionConfig::linear(Family::A, 16, 1).unwrap()).unwrap();
    let x = x.normalize_rows(DEFAULT_ZERO_THRESHOLD);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.rpne");
    save_embedding(&x, &path).unwrap();
    let back: EmbeddingMatrix = load_embedding(&path).unwrap();
    assert_eq!(back.data(), x.data());
    assert_eq!(back.zero_rows(), x.zero_rows());
    assert!(back.is_normalized());
}

#[test]
fn isolated_rows_are_zero_for_both_families() {
    let g = SparseGraph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
    for family in [Family::A, Family::T] {
        let x = embed(&g, &ProjectionConfig::linear(family, 8, 2).unwrap()).unwrap();
        assert!(x.row(3).iter().all(|&v| v == 0.0));
    }
}
