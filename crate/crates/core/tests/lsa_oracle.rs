mod common;

use nalgebra::DMatrix;
use phishmatch::corpus::{CampaignManifest, Document, Role, StopWords};
use phishmatch::lsa::{self, truncated_svd_rows, GroupMode, Solver, SvdOptions};
use phishmatch::vectorizer::{self, SparseVector};
use proptest::prelude::*;

fn rows_of(a: &common::Dense) -> Vec<SparseVector> {
    a.iter()
        .map(|r| SparseVector::from_pairs(r.iter().copied().enumerate().filter(|p| p.1 != 0.0)))
        .collect()
}

fn matrix() -> impl Strategy<Value = common::Dense> {
    (1usize..=20, 1usize..=20).prop_flat_map(|(m, n)| {
        prop::collection::vec(
            prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => -2.0f64..2.0], n),
            m,
        )
    })
}

fn to_dense(a: &common::Dense) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), a[0].len(), |i, j| a[i][j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_solver_matches_jacobi(a in matrix(), pick in 0usize..20) {
        let n = a[0].len();
        let k = 1 + pick % a.len().min(n);
        let f = truncated_svd_rows(&rows_of(&a), n, k, &SvdOptions::default()).unwrap();
        let oracle = common::jacobi_svd(&a);
        for j in 0..k {
            prop_assert!((f.singular_values[j] - oracle.sigma[j]).abs() <= 1e-8);
        }
        for w in f.singular_values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        let eye = DMatrix::<f64>::identity(k, k);
        prop_assert!((f.u.transpose() * &f.u - &eye).amax() <= 1e-8);
        prop_assert!((f.v.transpose() * &f.v - &eye).amax() <= 1e-8);
        let residual = (to_dense(&a) - f.reconstruct()).norm();
        let tail = oracle.sigma[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
        prop_assert!((residual - tail).abs() <= 1e-8);
    }

    #[test]
    fn largest_entry_of_each_term_vector_is_nonnegative(a in matrix()) {
        let n = a[0].len();
        let k = a.len().min(n);
        let f = truncated_svd_rows(&rows_of(&a), n, k, &SvdOptions::default()).unwrap();
        for col in f.v.column_iter() {
            let best = col.iter().copied().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            prop_assert!(best >= 0.0);
        }
    }
}

#[test]
fn eight_by_six_example() {
    let a: common::Dense = (0..8)
        .map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0).collect())
        .collect();
    let f = truncated_svd_rows(&rows_of(&a), 6, 3, &SvdOptions::default()).unwrap();
    let oracle = common::jacobi_svd(&a);
    for j in 0..3 {
        assert!((f.singular_values[j] - oracle.sigma[j]).abs() <= 1e-8);
    }
}

/// Sparse nonnegative matrix with a decaying spectrum, large enough that
/// the automatic choice is the randomized solver.
fn large_sparse() -> common::Dense {
    let (m, n) = (230, 210);
    (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let h = (i * 2654435761usize + j * 40503) % 1000;
                    if h < 120 {
                        (1.0 + (h % 7) as f64) / (1.0 + (j / 20) as f64).powi(2)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn randomized_solver_matches_jacobi() {
    let a = large_sparse();
    let rows = rows_of(&a);
    let k = 10;
    let f = truncated_svd_rows(&rows, 210, k, &SvdOptions::with_seed(4)).unwrap();
    assert_eq!(f.solver, Solver::Randomized);
    let oracle = common::jacobi_svd(&a);
    for j in 0..k {
        let rel = (f.singular_values[j] - oracle.sigma[j]).abs() / oracle.sigma[0];
        assert!(
            rel <= 1e-8,
            "sigma_{j}: {} vs {}",
            f.singular_values[j],
            oracle.sigma[j]
        );
    }
    let eye = DMatrix::<f64>::identity(k, k);
    assert!((f.u.transpose() * &f.u - &eye).amax() <= 1e-8);
    assert!((f.v.transpose() * &f.v - &eye).amax() <= 1e-8);
    let again = truncated_svd_rows(&rows, 210, k, &SvdOptions::with_seed(4)).unwrap();
    assert_eq!(f, again);
}

fn small_corpus(seed: u64) -> (CampaignManifest, vectorizer::TfIdfMatrix) {
    let words = [
        "radar", "optics", "laser", "fusion", "grid", "neural", "compiler", "storage", "beam", "plasma",
    ];
    let mut docs = Vec::new();
    for i in 0..12u64 {
        let text: Vec<&str> = (0..8)
            .map(|j| words[((seed + 1) * (i + 3) * (j + 5) % words.len() as u64) as usize])
            .collect();
        let role = if i < 5 { Role::Adversary } else { Role::Target };
        docs.push(Document::new(format!("d{i}"), role, text.join(" ")));
    }
    let m = CampaignManifest::new(docs, vec![]).unwrap();
    let x = vectorizer::fit_transform(&m.ngram_streams(2, &StopWords::builtin()).unwrap()).unwrap();
    (m, x)
}

#[test]
fn coordinates_are_rows_times_term_vectors() {
    for seed in 0..10 {
        let (m, x) = small_corpus(seed);
        let k = lsa::default_rank(x.n_docs(), x.n_terms());
        let model = lsa::truncated_svd(&x, k, &SvdOptions::with_seed(seed)).unwrap();
        let dense = lsa::svd::densify(x.rows(), x.n_terms());
        let projected = &dense * &model.term_weights;
        assert!((projected - &model.doc_coords).amax() <= 1e-6);
        for (i, row) in x.rows().iter().enumerate() {
            assert!(model.doc_coords.row(i).norm() <= row.norm_sq().sqrt() + 1e-8);
        }
        let points = lsa::project(&model, &m, (0, 0)).unwrap();
        assert!(points.iter().all(|p| p.x == p.y));
    }
}

#[test]
fn whole_population_group_is_not_offset() {
    let (_, x) = small_corpus(2);
    let docs: Vec<Document> = (0..12)
        .map(|i| {
            Document::new(
                format!("d{i}"),
                if i == 0 { Role::Target } else { Role::Adversary },
                "x",
            )
        })
        .collect();
    let edges = (1..12)
        .map(|i| phishmatch::corpus::Edge::new(format!("d{i}"), "d0", 1))
        .collect();
    let m = CampaignManifest::new(docs, edges).unwrap();
    let model = lsa::truncated_svd(&x, 3, &SvdOptions::default()).unwrap();
    let stats = lsa::group_cluster_stats(&model, &m, 1, GroupMode::PhishersOfTarget, 12).unwrap();
    assert_eq!(stats.len(), 1);
    assert_eq!(stats[0].group_median, stats[0].population_median);
    assert!(!stats[0].offset_significant);
}
