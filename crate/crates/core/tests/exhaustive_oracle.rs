mod common;

use rand::Rng;

use robust_er::estimate::{exhaustive_estimate, Trace};
use robust_er::graph::{sample_er, AdjacencyMatrix, GraphParams};
use robust_er::rng::RandomStream;

fn chosen_mask(a: &AdjacencyMatrix) -> (u64, f64) {
    let r = exhaustive_estimate(a).unwrap();
    match r.trace {
        Some(Trace::Exhaustive(t)) => (t.best.to_mask(), r.estimate),
        _ => panic!("missing exhaustive trace"),
    }
}

#[test]
fn jacobi_oracle_sanity() {
    let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
    assert!((common::jacobi_norm(m) - 3.0).abs() < 1e-12);
    let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    assert!((common::jacobi_norm(m) - 1.0).abs() < 1e-12);
}

#[test]
fn matches_independent_enumeration() {
    let mut rng = RandomStream::from_seed(12);
    for case in 0..40 {
        let n = rng.random_range(2..=9);
        let p = rng.random_range(0.0..1.0);
        let a = sample_er(&GraphParams::new(n, p), &mut rng).unwrap();
        assert_eq!(chosen_mask(&a), common::brute_exhaustive(&a), "case {case}");
    }
}

#[test]
fn single_edge_on_four_nodes() {
    let a = AdjacencyMatrix::from_edges(4, [(0, 1)]).unwrap();
    assert_eq!(chosen_mask(&a), common::brute_exhaustive(&a));
}

#[test]
fn complete_graph_estimate() {
    let a = AdjacencyMatrix::complete(6);
    let (mask, est) = chosen_mask(&a);
    let (omask, oest) = common::brute_exhaustive(&a);
    assert_eq!(mask, omask);
    let k = mask.count_ones() as f64;
    assert_eq!(est, oest);
    assert!((est - (k - 1.0) / k).abs() < 1e-15);
}
