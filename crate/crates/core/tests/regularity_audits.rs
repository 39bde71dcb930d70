use rand::seq::SliceRandom;
use rand::Rng;

use robust_er::graph::{sample_er, AdjacencyMatrix, GraphParams, NodeSet};
use robust_er::linalg::spectral_norm_exact;
use robust_er::regularity::{
    admissible_sizes, block_sum, chernoff_audit, chernoff_bound, check_regularity, coarse_estimate_audit,
    concentration_audit, consequence_checks, kappa, RateConstants,
};
use robust_er::rng::RandomStream;
use robust_er::Error;

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

fn er(n: usize, p: f64, rng: &mut RandomStream) -> AdjacencyMatrix {
    sample_er(&GraphParams::new(n, p), rng).unwrap()
}

fn subsets(n: usize) -> impl Iterator<Item = NodeSet> {
    (0u64..(1 << n)).map(move |m| NodeSet::from_mask(n, m))
}

#[test]
fn kappa_numeric_example() {
    let k = RateConstants::new(1.0, 6.0).unwrap();
    let (a, p, n) = (0.1f64, 0.25f64, 400.0f64);
    let l = (10.0 * std::f64::consts::E).ln();
    let first = a * (p / n * l).sqrt();
    let second = a / n * l;
    let third = (p * n.ln()).sqrt() / n;
    let oracle = 6.0 * first.max(second).max(third);
    assert!((kappa(0.1, 0.25, 400, &k).unwrap() - oracle).abs() < 1e-15);
    assert!(matches!(kappa(0.0, 0.5, 10, &k), Err(Error::Domain(_))));
    assert!(matches!(kappa(-0.1, 0.5, 10, &k), Err(Error::Domain(_))));
}

#[test]
fn kappa_is_continuous_and_flat_on_third_branch() {
    let k = RateConstants::new(1.0, 2.0).unwrap();
    let h = 1e-5;
    for n in [10usize, 100, 1000] {
        for p in [0.0, 0.05, 0.5, 1.0] {
            let third = (p * (n as f64).ln()).sqrt() / n as f64;
            let mut alpha = 1e-3;
            while alpha + h <= 1.0 {
                let x = kappa(alpha, p, n, &k).unwrap();
                let y = kappa(alpha + h, p, n, &k).unwrap();
                assert!((x - y).abs() <= 10.0 * h * k.c_kappa, "n={n} p={p} alpha={alpha}");
                let nf = n as f64;
                let others = |al: f64| {
                    let l = (std::f64::consts::E / al).ln();
                    (al * (p / nf * l).sqrt()).max(al / nf * l)
                };
                if third > others(alpha) && third > others(alpha + h) {
                    assert_eq!(x, y);
                    assert!((x - k.c_kappa * third).abs() < 1e-15);
                }
                alpha += 97.0 * h;
            }
        }
    }
}

#[test]
fn verdicts_survive_relabeling() {
    let mut rng = RandomStream::from_seed(31);
    let k = RateConstants::default();
    for _ in 0..20 {
        let n = rng.random_range(6..=12);
        let a = er(n, rng.random_range(0.1..0.9), &mut rng);
        let f = NodeSet::from_indices(n, (0..n).filter(|_| rng.random_bool(0.8)));
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let b = AdjacencyMatrix::from_edges(n, a.edges().map(|(i, j)| (perm[i], perm[j]))).unwrap();
        let g = NodeSet::from_indices(n, f.iter().map(|i| perm[i]));
        let (p, a1, a2) = (0.5, 0.25, 0.2);
        let r = check_regularity(&a, &f, p, a1, a2, &k).unwrap();
        let s = check_regularity(&b, &g, p, a1, a2, &k).unwrap();
        for c in 0..3 {
            assert_eq!(r.conditions[c].holds, s.conditions[c].holds);
            assert!((r.conditions[c].lhs - s.conditions[c].lhs).abs() < 1e-9);
        }
    }
}

fn dense_centered(a: &AdjacencyMatrix, s: &NodeSet, p: f64) -> DMatrix<f64> {
    let idx = s.to_vec();
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
        f64::from(u8::from(a.has_edge(idx[i], idx[j]))) - p
    })
}

#[test]
fn condition_two_at_f_dominates_subsets() {
    let mut rng = RandomStream::from_seed(32);
    for _ in 0..10 {
        let n = 10;
        let p = rng.random_range(0.1..0.9);
        let a = er(n, p, &mut rng);
        let f = NodeSet::from_indices(n, (0..n).filter(|_| rng.random_bool(0.8)));
        let r = check_regularity(&a, &f, p, 0.5, 0.2, &RateConstants::default()).unwrap();
        let full = r.conditions[1].lhs;
        for s in subsets(n).filter(|s| !s.is_empty() && s.is_subset(&f)) {
            assert!(spectral_norm_exact(&dense_centered(&a, &s, p)).unwrap() <= full + 1e-9);
        }
    }
}

#[test]
fn empty_good_set_holds_vacuously() {
    let a = er(8, 0.5, &mut RandomStream::from_seed(33));
    let r = check_regularity(&a, &NodeSet::empty(8), 0.5, 1.0, 0.2, &RateConstants::default()).unwrap();
    assert!(r.holds());
    assert_eq!(r.conditions[2].lhs, 0.0);
}

#[test]
fn complete_graph_block_sums_by_enumeration() {
    let n = 8;
    let a = AdjacencyMatrix::complete(n);
    let all = NodeSet::full(n);
    for alpha2 in [0.1, 0.25, 0.5] {
        let sizes = admissible_sizes(n, alpha2, n);
        let mut oracle = 0.0f64;
        for s in subsets(n).filter(|s| sizes.contains(&s.len())) {
            for t in subsets(n).filter(|t| sizes.contains(&t.len())) {
                let mut sum = 0.0;
                for i in s.iter() {
                    for j in t.iter() {
                        sum += f64::from(u8::from(a.has_edge(i, j))) - 1.0;
                    }
                }
                assert_eq!(sum, -(s.intersection(&t).len() as f64));
                assert_eq!(block_sum(&a, 1.0, &s, &t), sum);
                oracle = oracle.max(sum.abs());
            }
        }
        let r = check_regularity(&a, &all, 1.0, 0.0, alpha2, &RateConstants::default()).unwrap();
        assert_eq!(r.conditions[2].lhs, oracle);
        assert_eq!(oracle, n as f64);
        let w = r.conditions[2].witness.as_ref().unwrap();
        assert_eq!(block_sum(&a, 1.0, &w.f_prime, &w.f_double).abs(), w.lhs);
    }
}

#[test]
fn witnesses_reproduce_on_recheck() {
    let mut rng = RandomStream::from_seed(34);
    let tight = RateConstants::new(0.01, 0.01).unwrap();
    for _ in 0..10 {
        let a = er(11, 0.4, &mut rng);
        let r = check_regularity(&a, &NodeSet::full(11), 0.4, 0.0, 0.2, &tight).unwrap();
        assert!(!r.conditions[2].holds);
        let w = r.conditions[2].witness.as_ref().unwrap();
        assert!(w.margin() < 0.0);
        assert!((block_sum(&a, 0.4, &w.f_prime, &w.f_double).abs() - w.lhs).abs() < 1e-9);
    }
}

#[test]
fn uncorrupted_small_graphs_are_regular() {
    let mut rng = RandomStream::from_seed(35);
    let k = RateConstants::default();
    let trials = 200;
    let held = (0..trials)
        .filter(|_| {
            let a = er(12, 0.5, &mut rng);
            [0.1, 0.25, 0.5]
                .iter()
                .all(|&a2| check_regularity(&a, &NodeSet::full(12), 0.5, 0.0, a2, &k).unwrap().holds())
        })
        .count();
    assert!(held as f64 >= 0.95 * trials as f64, "{held}/{trials}");
}

#[test]
fn consequences_follow_from_regularity() {
    let mut rng = RandomStream::from_seed(36);
    let k = RateConstants::default();
    let mut premises = 0;
    for _ in 0..500 {
        let a = er(10, 0.5, &mut rng);
        let r = consequence_checks(&a, &NodeSet::full(10), 0.5, 0.2, &k).unwrap();
        assert_eq!(r.sets, 1023);
        if r.premise {
            premises += 1;
            assert!(r.norm_ok && r.density_ok, "{r:?}");
        }
    }
    assert!(premises > 0);
}

#[test]
fn consequences_on_empty_graph() {
    let a = AdjacencyMatrix::empty(8);
    let r = consequence_checks(&a, &NodeSet::full(8), 0.0, 0.2, &RateConstants::default()).unwrap();
    assert!(r.premise && r.norm_ok && r.density_ok);
    assert_eq!(r.worst_density_ratio, 0.0);
}

#[test]
fn coarse_estimate_holds_under_regularity() {
    let mut rng = RandomStream::from_seed(37);
    let k = RateConstants::default();
    for _ in 0..100 {
        let a = er(10, 0.5, &mut rng);
        if check_regularity(&a, &NodeSet::full(10), 0.5, 0.0, 0.2, &k).unwrap().holds() {
            let audit = coarse_estimate_audit(&a, 0.5, 0.0, &k).unwrap();
            assert_eq!(audit.sets, 638);
            assert_eq!(audit.violations, 0, "{audit:?}");
        }
    }
}

#[test]
fn concentration_bound_at_small_n() {
    let stream = RandomStream::from_seed(38);
    let alphas = [0.0, 0.1, 0.25, 0.5];
    let rows = concentration_audit(12, 0.5, &alphas, 200, &stream).unwrap();
    assert_eq!(rows.len(), 800);
    let violations = rows.iter().filter(|r| !r.holds).count();
    assert!(violations as f64 <= 0.05 * rows.len() as f64);
    assert!(rows.iter().all(|r| !r.sampled));

    let zero = concentration_audit(12, 0.0, &alphas, 20, &stream).unwrap();
    assert!(zero.iter().all(|r| r.holds && r.lhs == 0.0));
}

/// `Pr[|X - tp| >= lambda]` for `X ~ Bin(t, p)`, summed in log space.
fn exact_two_sided_tail(t: usize, p: f64, lambda: f64) -> f64 {
    let tf = t as f64;
    (0..=t)
        .filter(|&x| (x as f64 - tf * p).abs() >= lambda)
        .map(|x| {
            let xf = x as f64;
            (ln_gamma(tf + 1.0) - ln_gamma(xf + 1.0) - ln_gamma(tf - xf + 1.0) + xf * p.ln() + (tf - xf) * (1.0 - p).ln())
                .exp()
        })
        .sum()
}

#[test]
fn chernoff_against_exact_binomial_tail() {
    let (t, p) = (1000, 0.3);
    let lambdas = [5.0, 10.0, 20.0, 30.0, 40.0, 60.0];
    let samples = 20_000;
    let rows = chernoff_audit(t, p, &lambdas, samples, &mut RandomStream::from_seed(39)).unwrap();
    for row in rows {
        let exact = exact_two_sided_tail(t, p, row.lambda);
        assert!(exact <= chernoff_bound(t, p, row.lambda));
        assert_eq!(row.bound, chernoff_bound(t, p, row.lambda));
        let se = (exact * (1.0 - exact) / samples as f64).sqrt();
        assert!((row.empirical - exact).abs() <= 5.0 * se + 1e-4, "{row:?} vs {exact}");
    }
}

#[test]
fn defaults_match_committed_calibration() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../calibration/constants.json");
    let art: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let k = RateConstants::default();
    assert_eq!(art["constants"]["c_eta"].as_f64().unwrap(), k.c_eta);
    assert_eq!(art["constants"]["c_kappa"].as_f64().unwrap(), k.c_kappa);
    assert_eq!(art["config"]["seed"].as_u64().unwrap(), 20240601);
}
