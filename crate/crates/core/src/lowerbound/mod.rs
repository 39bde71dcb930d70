//! Lower-bound machinery: binomial total-variation bounds, the degree
//! coupling that makes two corrupted directed processes identical in law,
//! and a sampling demonstration with a two-sample chi-square test.

mod pmf;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub use pmf::{binomial_pmf, tv_distance, Pmf, PmfSampler, PMF_TOLERANCE};

use crate::adversaries::{degree_rewiring_adversary, CorruptionRecord};
use crate::error::{check_probability, Error, Result};
use crate::graph::{sample_directed_er, DirectedAdjacencyMatrix, GraphParams};
use crate::rng::RandomStream;

/// Upper bounds on `d_TV(Bin(n', p), Bin(n', p + x))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvBound {
    pub tau: f64,
    /// `sqrt(e/2) tau / (1 - tau)^2`, infinite once `tau >= 1`.
    pub roos: f64,
    /// `n' x`.
    pub trivial: f64,
    pub best: f64,
}

pub fn roos_tv_bound(n_prime: usize, p: f64, x: f64) -> Result<TvBound> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter(format!(
            "Roos bound needs 0 < p < 1, got {p}"
        )));
    }
    let x = x.abs();
    let tau = x * ((n_prime as f64 + 2.0) / (2.0 * p * (1.0 - p))).sqrt();
    let roos = if tau < 1.0 {
        (std::f64::consts::E / 2.0).sqrt() * tau / (1.0 - tau).powi(2)
    } else {
        f64::INFINITY
    };
    let trivial = n_prime as f64 * x;
    Ok(TvBound {
        tau,
        roos,
        trivial,
        best: roos.min(trivial),
    })
}

/// `p1 + 0.1 max(gamma sqrt(p1/n), gamma/n)`.
pub fn operating_point(n: usize, p1: f64, gamma: f64) -> f64 {
    let n = n as f64;
    p1 + 0.1 * (gamma * (p1 / n).sqrt()).max(gamma / n)
}

/// Degree laws `P1, P2` with
/// `(1-eps) Bin(n-1, p1) + eps P1 = (1-eps) Bin(n-1, p2) + eps P2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeCoupling {
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
    pub epsilon: f64,
    pub tv: f64,
    pub dist1: Pmf,
    pub dist2: Pmf,
}

impl DegreeCoupling {
    fn mixture(&self, p: f64, dist: &Pmf) -> Vec<f64> {
        let base = binomial_pmf(self.n - 1, p).expect("validated probability");
        base.mass()
            .iter()
            .zip(dist.mass())
            .map(|(b, d)| (1.0 - self.epsilon) * b + self.epsilon * d)
            .collect()
    }

    /// Out-degree law of a node under the first corrupted process.
    pub fn mixture1(&self) -> Vec<f64> {
        self.mixture(self.p1, &self.dist1)
    }

    pub fn mixture2(&self) -> Vec<f64> {
        self.mixture(self.p2, &self.dist2)
    }

    /// `max_k |mixture1[k] - mixture2[k]|`.
    pub fn identity_error(&self) -> f64 {
        self.mixture1()
            .iter()
            .zip(self.mixture2())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Positive-part construction with remainder `R = Bin(n-1, p1)`:
/// `P1 = (1-eps)(D2-D1)+/eps + (1-m) R`, `P2 = (1-eps)(D1-D2)+/eps + (1-m) R`,
/// `m = (1-eps) TV(D1, D2) / eps`.
pub fn construct_coupling(n: usize, p1: f64, p2: f64, epsilon: f64) -> Result<DegreeCoupling> {
    if n < 2 {
        return Err(Error::Parameter("coupling needs n >= 2".into()));
    }
    check_probability(p1, "p1")?;
    check_probability(p2, "p2")?;
    if !(epsilon.is_finite() && (0.0..1.0).contains(&epsilon)) {
        return Err(Error::Parameter(format!(
            "mixture weight must lie in [0, 1), got {epsilon}"
        )));
    }
    let d1 = binomial_pmf(n - 1, p1)?;
    let d2 = binomial_pmf(n - 1, p2)?;
    let tv = tv_distance(&d1, &d2)?;
    if epsilon == 0.0 {
        if tv > 0.0 {
            return Err(Error::Infeasible { tv, epsilon });
        }
        return Ok(DegreeCoupling {
            n,
            p1,
            p2,
            epsilon,
            tv,
            dist1: d1.clone(),
            dist2: d1,
        });
    }
    if tv > epsilon {
        return Err(Error::Infeasible { tv, epsilon });
    }
    let m = (1.0 - epsilon) * tv / epsilon;
    let scale = (1.0 - epsilon) / epsilon;
    let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for (x, y) in d1.mass().iter().zip(d2.mass()) {
        let r = (1.0 - m) * x;
        a.push(scale * (y - x).max(0.0) + r);
        b.push(scale * (x - y).max(0.0) + r);
    }
    Ok(DegreeCoupling {
        n,
        p1,
        p2,
        epsilon,
        tv,
        dist1: Pmf::new(a)?,
        dist2: Pmf::new(b)?,
    })
}

/// One draw from each corrupted process.
#[derive(Clone, Debug)]
pub struct IndistinguishablePair {
    pub first: DirectedAdjacencyMatrix,
    pub second: DirectedAdjacencyMatrix,
    pub first_record: CorruptionRecord,
    pub second_record: CorruptionRecord,
    pub coupling: DegreeCoupling,
}

/// Samples `DG(n, p1)` corrupted with `P1` and `DG(n, p2)` corrupted with
/// `P2`, where `p2` is the [`operating_point`] and the mixture weight is
/// `0.15 gamma`. With `gamma = 0` both sides are plain `DG(n, p1)`.
pub fn indistinguishable_pair(
    n: usize,
    p1: f64,
    gamma: f64,
    rng: &mut RandomStream,
) -> Result<IndistinguishablePair> {
    if p1 > 0.5 {
        return Err(Error::Parameter(format!("p1 must be at most 0.5, got {p1}")));
    }
    let p2 = operating_point(n, p1, gamma);
    let coupling = construct_coupling(n, p1, p2, 0.15 * gamma)?;
    let side = |tag: &str, p: f64, dist: &Pmf| -> Result<_> {
        let base = rng.split(tag);
        let dg = sample_directed_er(&GraphParams::new(n, p), &mut base.split("gen"))?;
        degree_rewiring_adversary(&dg, gamma, dist, &mut base.split("adv"))
    };
    let first = side("first", p1, &coupling.dist1)?;
    let second = side("second", p2, &coupling.dist2)?;
    Ok(IndistinguishablePair {
        first: first.graph,
        second: second.graph,
        first_record: first.record,
        second_record: second.record,
        coupling,
    })
}

/// Result of a two-sample chi-square homogeneity test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub bins: usize,
}

impl ChiSquareReport {
    pub fn rejects_at(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

/// Smallest pooled count per bin; adjacent sparse bins are merged.
pub const MIN_POOLED_COUNT: u64 = 10;

/// Two-sample chi-square test on histograms over the same ordered bins.
/// Statistic `sum (k1 a - k2 b)^2 / (a + b)` with `k1 = sqrt(Nb/Na)`,
/// `k2 = sqrt(Na/Nb)`.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> Result<ChiSquareReport> {
    if a.len() != b.len() {
        return Err(Error::Domain("histograms have different bin counts".into()));
    }
    let mut merged: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        acc = (acc.0 + x, acc.1 + y);
        if acc.0 + acc.1 >= MIN_POOLED_COUNT {
            merged.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    let na: u64 = merged.iter().map(|m| m.0).sum();
    let nb: u64 = merged.iter().map(|m| m.1).sum();
    if na == 0 || nb == 0 || merged.len() < 2 {
        return Ok(ChiSquareReport {
            statistic: 0.0,
            df: merged.len().saturating_sub(1),
            p_value: 1.0,
            bins: merged.len(),
        });
    }
    let k1 = (nb as f64 / na as f64).sqrt();
    let k2 = (na as f64 / nb as f64).sqrt();
    let statistic: f64 = merged
        .iter()
        .map(|&(x, y)| {
            let d = k1 * x as f64 - k2 * y as f64;
            d * d / (x + y) as f64
        })
        .sum();
    let df = merged.len() - 1;
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    Ok(ChiSquareReport {
        statistic,
        df,
        p_value: dist.sf(statistic),
        bins: merged.len(),
    })
}

/// Histogram of values in `0..bins`.
pub fn histogram(values: impl IntoIterator<Item = usize>, bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for v in values {
        h[v] += 1;
    }
    h
}
