use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

use robust_er::lowerbound::{
    binomial_pmf, construct_coupling, histogram, indistinguishable_pair, operating_point, roos_tv_bound,
    tv_distance, two_sample_chi_square, Pmf,
};
use robust_er::rng::RandomStream;
use robust_er::Error;

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn choose(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn rational_binomial(n: u64, p: &BigRational) -> Vec<BigRational> {
    let q = BigRational::one() - p;
    (0..=n)
        .map(|k| {
            let mut term = BigRational::from_integer(choose(n, k));
            for _ in 0..k {
                term *= p;
            }
            for _ in 0..(n - k) {
                term *= &q;
            }
            term
        })
        .collect()
}

#[test]
fn binomial_matches_exact_rationals() {
    let exact = rational_binomial(20, &ratio(3, 10));
    let pmf = binomial_pmf(20, 0.3).unwrap();
    assert!((pmf.mass()[6] - exact[6].to_f64().unwrap()).abs() < 1e-14);
    for (got, want) in pmf.mass().iter().zip(&exact) {
        assert!((got - want.to_f64().unwrap()).abs() < 1e-14);
    }
}

#[test]
fn binomial_edge_cases() {
    assert_eq!(binomial_pmf(1, 0.5).unwrap().mass(), &[0.5, 0.5]);
    assert_eq!(binomial_pmf(7, 0.0).unwrap(), Pmf::point_mass(8, 0));
    assert_eq!(binomial_pmf(7, 1.0).unwrap(), Pmf::point_mass(8, 7));
    assert!(matches!(binomial_pmf(5, 1.5), Err(Error::Parameter(_))));
    for (n, p) in [(100_000, 0.37), (100_000, 0.001), (54_321, 0.5)] {
        assert!((binomial_pmf(n, p).unwrap().total() - 1.0).abs() < 1e-12);
    }
}

fn log_space_binomial(n: usize, p: f64) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let kf = k as f64;
            (ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0) + kf * p.ln() + (nf - kf) * (1.0 - p).ln())
                .exp()
        })
        .collect()
}

#[test]
fn tv_matches_direct_summation() {
    let a = log_space_binomial(99, 0.3);
    let b = log_space_binomial(99, 0.31);
    let oracle = 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    let got = tv_distance(&binomial_pmf(99, 0.3).unwrap(), &binomial_pmf(99, 0.31).unwrap()).unwrap();
    assert!((got - oracle).abs() < 1e-12);
}

#[test]
fn tv_trivial_cases() {
    let a = binomial_pmf(10, 0.4).unwrap();
    assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
    assert_eq!(tv_distance(&Pmf::point_mass(5, 0), &Pmf::point_mass(5, 4)).unwrap(), 1.0);
    assert!(matches!(tv_distance(&a, &Pmf::point_mass(3, 0)), Err(Error::Domain(_))));
}

#[test]
fn roos_dominates_exact_tv_and_tv_is_monotone() {
    let mut points = 0;
    for n_prime in [5usize, 20, 60, 150, 400] {
        for p in [0.02, 0.1, 0.25, 0.4, 0.5, 0.6, 0.8, 0.95] {
            let base = binomial_pmf(n_prime, p).unwrap();
            let mut last = 0.0;
            for step in 0..30 {
                let x = step as f64 * 0.002;
                if p + x > 1.0 {
                    break;
                }
                let tv = tv_distance(&base, &binomial_pmf(n_prime, p + x).unwrap()).unwrap();
                let bound = roos_tv_bound(n_prime, p, x).unwrap();
                assert!(tv <= bound.best + 1e-12, "n'={n_prime} p={p} x={x}: {tv} > {}", bound.best);
                assert!(tv + 1e-12 >= last);
                last = tv;
                points += 1;
            }
        }
    }
    assert!(points >= 1000);
}

#[test]
fn coupling_three_point_exact() {
    let d1 = rational_binomial(2, &ratio(1, 5));
    let d2 = rational_binomial(2, &ratio(2, 5));
    let eps = ratio(1, 2);
    let half = ratio(1, 2);
    let tv = d1.iter().zip(&d2).fold(BigRational::zero(), |acc, (a, b)| {
        let d = a - b;
        acc + if d < BigRational::zero() { -d } else { d }
    }) * &half;
    let one = BigRational::one();
    let m = (&one - &eps) * &tv / &eps;
    let scale = (&one - &eps) / &eps;
    let pos = |a: &BigRational, b: &BigRational| {
        let d = a - b;
        if d > BigRational::zero() { d } else { BigRational::zero() }
    };
    let p1: Vec<BigRational> = (0..3).map(|k| &scale * pos(&d2[k], &d1[k]) + (&one - &m) * &d1[k]).collect();
    let p2: Vec<BigRational> = (0..3).map(|k| &scale * pos(&d1[k], &d2[k]) + (&one - &m) * &d1[k]).collect();
    for k in 0..3 {
        let lhs = (&one - &eps) * &d1[k] + &eps * &p1[k];
        let rhs = (&one - &eps) * &d2[k] + &eps * &p2[k];
        assert_eq!(lhs, rhs);
    }
    let c = construct_coupling(3, 0.2, 0.4, 0.5).unwrap();
    for k in 0..3 {
        assert!((c.dist1.mass()[k] - p1[k].to_f64().unwrap()).abs() < 1e-15);
        assert!((c.dist2.mass()[k] - p2[k].to_f64().unwrap()).abs() < 1e-15);
    }
    assert!(c.identity_error() <= 1e-15);
}

#[test]
fn coupling_invariants_on_operating_points() {
    for n in [10usize, 60, 250] {
        for p1 in [0.05, 0.2, 0.5] {
            for gamma in [0.02, 0.1, 0.4] {
                let p2 = operating_point(n, p1, gamma);
                let c = construct_coupling(n, p1, p2, 0.15 * gamma).unwrap();
                for d in [&c.dist1, &c.dist2] {
                    assert!(d.mass().iter().all(|&x| x >= 0.0));
                    assert!((d.total() - 1.0).abs() <= 1e-12);
                }
                assert!(c.identity_error() <= 1e-12);
            }
        }
    }
}

#[test]
fn infeasible_coupling_is_reported() {
    match construct_coupling(100, 0.1, 0.3, 0.05) {
        Err(Error::Infeasible { tv, epsilon }) => assert!(tv > epsilon),
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn mixtures_match_empirical_out_degrees() {
    // Pooled out-degrees of each side against its own mixture law.
    let rng = RandomStream::from_seed(17);
    let (n, p1, gamma) = (60, 0.3, 0.3);
    let mut first = Vec::new();
    let mut second = Vec::new();
    let mut coupling = None;
    for g in 0..60 {
        let pair = indistinguishable_pair(n, p1, gamma, &mut rng.split_index("pair", g)).unwrap();
        first.extend(pair.first.out_degrees());
        second.extend(pair.second.out_degrees());
        coupling = Some(pair.coupling);
    }
    let c = coupling.unwrap();
    let expected_mean: f64 = c.mixture1().iter().enumerate().map(|(k, m)| k as f64 * m).sum();
    for side in [&first, &second] {
        let mean = side.iter().sum::<usize>() as f64 / side.len() as f64;
        assert!((mean - expected_mean).abs() < 0.3, "{mean} vs {expected_mean}");
    }
    let report = two_sample_chi_square(&histogram(first, n), &histogram(second, n)).unwrap();
    assert!(report.p_value > 1e-4);
}

#[test]
fn pair_requires_small_p1() {
    assert!(indistinguishable_pair(50, 0.6, 0.1, &mut RandomStream::from_seed(1)).is_err());
}

#[test]
fn pair_sides_pass_two_sample_test_at_full_size() {
    let rng = RandomStream::from_seed(18);
    let (n, p1, gamma) = (200, 0.3, 0.2);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for g in 0..50 {
        let pair = indistinguishable_pair(n, p1, gamma, &mut rng.split_index("pair", g)).unwrap();
        first.extend(pair.first.out_degrees());
        second.extend(pair.second.out_degrees());
    }
    assert_eq!(first.len(), 10_000);
    let report = two_sample_chi_square(&histogram(first, n), &histogram(second, n)).unwrap();
    assert!(!report.rejects_at(0.01), "{report:?}");
}
