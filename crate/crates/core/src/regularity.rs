//! Rate functions and (alpha1, alpha2, p)-regularity audits.
//!
//! A node set `F` is regular when
//! 1. `|F^c| <= alpha1 n`,
//! 2. `||(A - p)_{F' x F'}|| <= n eta(p, n)` for every `F' ⊆ F`,
//! 3. `|sum_{F' x F''} (A - p)| <= n^2 kappa(alpha2, p, n)` for every
//!    `F', F'' ⊆ F` whose sizes lie in `[0, alpha2 n] ∪ [(1 - alpha2) n, n]`.
//!
//! Condition 2 only needs `F' = F`: a principal submatrix never has a larger
//! norm. Condition 3 is exact for `n <= 14`. For larger graphs it is
//! searched: for a fixed `F'` the best `F''` of every admissible size comes
//! from sorting column sums, and the search alternates best responses from
//! random starts. A searched maximum is a lower bound on the true one.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::graph::{AdjacencyMatrix, GraphParams, NodeSet};
use crate::linalg::{centered_norm, spectral_norm_exact, CenteredOperator, EXACT_CAP};
use crate::rng::RandomStream;

/// The constants `c` of `eta` and `c1` of `kappa`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub c_eta: f64,
    pub c_kappa: f64,
}

/// Defaults produced by `calibrate_constants` with the committed seed; see
/// `calibration/constants.json`.
pub const CALIBRATED: RateConstants = RateConstants {
    c_eta: 3.0,
    c_kappa: 3.5,
};

impl Default for RateConstants {
    fn default() -> Self {
        CALIBRATED
    }
}

impl RateConstants {
    pub fn new(c_eta: f64, c_kappa: f64) -> Result<Self> {
        if !(c_eta > 0.0 && c_kappa > 0.0 && c_eta.is_finite() && c_kappa.is_finite()) {
            return Err(Error::Parameter(format!(
                "rate constants must be positive, got c = {c_eta}, c1 = {c_kappa}"
            )));
        }
        Ok(Self { c_eta, c_kappa })
    }
}

/// `c max(sqrt(p(1-p)/n), sqrt(ln n)/n)`.
pub fn eta(p: f64, n: usize, k: &RateConstants) -> f64 {
    let n = n as f64;
    k.c_eta * (p * (1.0 - p) / n).sqrt().max(n.ln().sqrt() / n)
}

/// `c1 max(alpha sqrt(p/n ln(e/alpha)), alpha/n ln(e/alpha), sqrt(p ln n)/n)`.
pub fn kappa(alpha: f64, p: f64, n: usize, k: &RateConstants) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("kappa needs alpha in (0, 1], got {alpha}")));
    }
    let n = n as f64;
    let l = (std::f64::consts::E / alpha).ln();
    let terms = [
        alpha * (p / n * l).sqrt(),
        alpha / n * l,
        (p * n.ln()).sqrt() / n,
    ];
    Ok(k.c_kappa * terms.into_iter().fold(0.0, f64::max))
}

/// Constants of the trimming guarantee `|p_{S^f} - p| <= c2 alpha1 eta + c3 kappa(13 alpha1)`,
/// as they fall out of the proof chain.
pub const TRIM_C2: f64 = 2940.0;
pub const TRIM_C3: f64 = 20.0;

pub fn trim_band(alpha1: f64, p: f64, n: usize, k: &RateConstants) -> Result<f64> {
    Ok(TRIM_C2 * alpha1 * eta(p, n, k) + TRIM_C3 * kappa((13.0 * alpha1).min(1.0), p, n, k)?)
}

/// `6 max(16 alpha n sqrt(p n ln(e/alpha)), 60 alpha n ln(e/alpha), 5 n sqrt(p ln(e n)))`,
/// the simultaneous bound on centered block sums of a `G(n, p)` sample.
pub fn block_sum_bound(alpha: f64, p: f64, n: usize) -> f64 {
    let nf = n as f64;
    let (a, b) = if alpha > 0.0 {
        let l = (std::f64::consts::E / alpha).ln();
        (16.0 * alpha * nf * (p * nf * l).sqrt(), 60.0 * alpha * nf * l)
    } else {
        (0.0, 0.0)
    };
    let c = 5.0 * nf * (p * (std::f64::consts::E * nf).ln()).sqrt();
    6.0 * a.max(b).max(c)
}

/// `2 exp(-min(lambda^2 / (3 t p), lambda / 3))`.
pub fn chernoff_bound(t: usize, p: f64, lambda: f64) -> f64 {
    let tp = t as f64 * p;
    let quad = if tp > 0.0 { lambda * lambda / (3.0 * tp) } else { f64::INFINITY };
    2.0 * (-(quad.min(lambda / 3.0))).exp()
}

/// Sizes in `[0, floor(alpha n)] ∪ [ceil((1-alpha) n), n]` that are at most `limit`.
pub fn admissible_sizes(n: usize, alpha: f64, limit: usize) -> Vec<usize> {
    let small = ((alpha * n as f64) + 1e-9).floor() as usize;
    let large = (((1.0 - alpha) * n as f64) - 1e-9).ceil().max(0.0) as usize;
    (0..=limit.min(n))
        .filter(|&s| s <= small || s >= large)
        .collect()
}

/// `sum_{i in S, j in T} (A_ij - p)`, diagonal entries counted as `-p`.
pub fn block_sum(a: &AdjacencyMatrix, p: f64, s: &NodeSet, t: &NodeSet) -> f64 {
    let edges: usize = s.iter().map(|i| a.degree_in_unchecked(i, t)).sum();
    edges as f64 - p * (s.len() * t.len()) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub f_prime: NodeSet,
    pub f_double: NodeSet,
    pub lhs: f64,
    pub bound: f64,
}

impl Witness {
    pub fn margin(&self) -> f64 {
        self.bound - self.lhs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub holds: bool,
    pub lhs: f64,
    pub bound: f64,
    /// The extremal sets found (for condition 1, `F` itself).
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub conditions: [ConditionResult; 3],
    /// Condition 3 was searched rather than enumerated.
    pub sampled: bool,
}

impl RegularityReport {
    pub fn holds(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// How condition 3 (and block-sum audits) look for the worst pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    Exact,
    /// Alternating best responses from this many random starts.
    Sampled { starts: usize },
}

/// Enumeration is used up to this many nodes.
pub const EXACT_LIMIT: usize = 14;
pub const DEFAULT_STARTS: usize = 256;

impl SearchMode {
    pub fn for_size(n: usize) -> Self {
        if n <= EXACT_LIMIT {
            Self::Exact
        } else {
            Self::Sampled {
                starts: DEFAULT_STARTS,
            }
        }
    }
}

/// Best `T ⊆ pool` of an admissible size for a fixed `S`: returns
/// `(|sum|, T)` maximizing `|sum_{S x T} (A - p)|`.
fn best_response(
    a: &AdjacencyMatrix,
    p: f64,
    s: &NodeSet,
    pool: &[usize],
    sizes: &[usize],
) -> (f64, NodeSet) {
    let shift = p * s.len() as f64;
    let mut cols: Vec<(f64, usize)> = pool
        .iter()
        .map(|&j| (a.degree_in_unchecked(j, s) as f64 - shift, j))
        .collect();
    cols.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let m = cols.len();
    let mut top = vec![0.0; m + 1];
    let mut bottom = vec![0.0; m + 1];
    for k in 0..m {
        top[k + 1] = top[k] + cols[k].0;
        bottom[k + 1] = bottom[k] + cols[m - 1 - k].0;
    }
    let mut best = (f64::NEG_INFINITY, 0usize, true);
    for &k in sizes {
        if k > m {
            continue;
        }
        if top[k].abs() > best.0 {
            best = (top[k].abs(), k, true);
        }
        if bottom[k].abs() > best.0 {
            best = (bottom[k].abs(), k, false);
        }
    }
    let (value, k, from_top) = best;
    let n = a.n();
    let t = if from_top {
        NodeSet::from_indices(n, cols[..k].iter().map(|c| c.1))
    } else {
        NodeSet::from_indices(n, cols[m - k..].iter().map(|c| c.1))
    };
    (value.max(0.0), t)
}

/// `max |sum_{S x T} (A - p)|` over `S, T ⊆ pool` with sizes in `sizes`.
pub fn max_block_sum(
    a: &AdjacencyMatrix,
    p: f64,
    pool: &NodeSet,
    sizes: &[usize],
    mode: SearchMode,
    rng: &mut RandomStream,
) -> Result<(f64, NodeSet, NodeSet)> {
    let n = a.n();
    let members = pool.to_vec();
    let empty = NodeSet::empty(n);
    let mut best = (0.0, empty.clone(), empty);
    if sizes.is_empty() {
        return Ok(best);
    }
    match mode {
        SearchMode::Exact => {
            let m = members.len();
            if m > 20 {
                return Err(Error::TooLarge {
                    what: "exact block-sum enumeration",
                    size: m,
                    cap: 20,
                });
            }
            for mask in 0u64..(1u64 << m) {
                if !sizes.contains(&(mask.count_ones() as usize)) {
                    continue;
                }
                let s = NodeSet::from_indices(n, (0..m).filter(|b| mask >> b & 1 == 1).map(|b| members[b]));
                let (v, t) = best_response(a, p, &s, &members, sizes);
                if v > best.0 {
                    best = (v, s, t);
                }
            }
        }
        SearchMode::Sampled { starts } => {
            let usable: Vec<usize> = sizes.iter().copied().filter(|&k| k <= members.len()).collect();
            if usable.is_empty() {
                return Ok(best);
            }
            for _ in 0..starts {
                let k = usable[rng.random_range(0..usable.len())];
                let picked = index::sample(rng, members.len(), k);
                let mut s = NodeSet::from_indices(n, picked.into_iter().map(|b| members[b]));
                let mut last = f64::NEG_INFINITY;
                for _ in 0..6 {
                    let (v, t) = best_response(a, p, &s, &members, sizes);
                    if v > best.0 {
                        best = (v, s.clone(), t.clone());
                    }
                    if v <= last {
                        break;
                    }
                    last = v;
                    // The matrix is symmetric, so the best S for a fixed T
                    // is the same computation with the roles swapped.
                    s = best_response(a, p, &t, &members, sizes).1;
                }
            }
        }
    }
    Ok(best)
}

fn stream_for(a: &AdjacencyMatrix, tag: &str) -> RandomStream {
    let rows = a.n().min(4);
    let mut words = vec![a.n() as u64, a.edge_count()];
    for i in 0..rows {
        words.extend_from_slice(a.row(i));
    }
    RandomStream::derive(crate::rng::mix_words(&words), &[], tag)
}

/// Checks the three conditions; exact for `n <= 14`, searched otherwise.
pub fn check_regularity(
    a: &AdjacencyMatrix,
    f: &NodeSet,
    p: f64,
    alpha1: f64,
    alpha2: f64,
    k: &RateConstants,
) -> Result<RegularityReport> {
    let mode = SearchMode::for_size(a.n());
    check_regularity_with(a, f, p, alpha1, alpha2, k, mode, &mut stream_for(a, "regularity"))
}

#[allow(clippy::too_many_arguments)]
pub fn check_regularity_with(
    a: &AdjacencyMatrix,
    f: &NodeSet,
    p: f64,
    alpha1: f64,
    alpha2: f64,
    k: &RateConstants,
    mode: SearchMode,
    rng: &mut RandomStream,
) -> Result<RegularityReport> {
    check_probability(p, "p")?;
    a.check_set(f)?;
    let n = a.n();
    let nf = n as f64;

    let bad = (n - f.len()) as f64;
    let c1 = ConditionResult {
        holds: bad <= alpha1 * nf + 1e-9,
        lhs: bad,
        bound: alpha1 * nf,
        witness: None,
    };

    let norm = if f.is_empty() { 0.0 } else { centered_norm(a, f, p)? };
    let bound2 = nf * eta(p, n, k);
    let c2 = ConditionResult {
        holds: norm <= bound2,
        lhs: norm,
        bound: bound2,
        witness: Some(Witness {
            f_prime: f.clone(),
            f_double: f.clone(),
            lhs: norm,
            bound: bound2,
        }),
    };

    let sizes = admissible_sizes(n, alpha2, f.len());
    let (sum, s, t) = max_block_sum(a, p, f, &sizes, mode, rng)?;
    let bound3 = if alpha2 > 0.0 {
        nf * nf * kappa(alpha2, p, n, k)?
    } else {
        // kappa's last branch does not depend on alpha.
        nf * nf * k.c_kappa * (p * nf.ln()).sqrt() / nf
    };
    let c3 = ConditionResult {
        holds: sum <= bound3,
        lhs: sum,
        bound: bound3,
        witness: Some(Witness {
            f_prime: s,
            f_double: t,
            lhs: sum,
            bound: bound3,
        }),
    };
    Ok(RegularityReport {
        conditions: [c1, c2, c3],
        sampled: matches!(mode, SearchMode::Sampled { .. }),
    })
}

/// Outcome of the derived-inequality audit over all `F' ⊆ F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsequenceReport {
    /// Regularity held (with `alpha1 = |F^c|/n`), so the inequalities must.
    pub premise: bool,
    /// `||(A - p_{F'})_{F' x F'}|| <= 2 n eta` for all nonempty `F'`.
    pub norm_ok: bool,
    /// `|p_{F'} - p| <= 4 kappa(alpha2)` for all `F'` with `|F'| >= (1 - alpha2) n`.
    pub density_ok: bool,
    /// Largest observed `lhs / bound` for each inequality.
    pub worst_norm_ratio: f64,
    pub worst_density_ratio: f64,
    pub sets: usize,
}

fn subsets_of(f: &NodeSet) -> impl Iterator<Item = NodeSet> + '_ {
    let members = f.to_vec();
    let n = f.universe();
    (1u64..(1u64 << members.len())).map(move |mask| {
        NodeSet::from_indices(
            n,
            (0..members.len()).filter(|b| mask >> b & 1 == 1).map(|b| members[b]),
        )
    })
}

fn require_small(n: usize) -> Result<()> {
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge {
            what: "subset enumeration",
            size: n,
            cap: EXACT_LIMIT,
        });
    }
    Ok(())
}

pub fn consequence_checks(
    a: &AdjacencyMatrix,
    f: &NodeSet,
    p: f64,
    alpha2: f64,
    k: &RateConstants,
) -> Result<ConsequenceReport> {
    let n = a.n();
    require_small(n)?;
    let alpha1 = (n - f.len()) as f64 / n as f64;
    let premise = check_regularity(a, f, p, alpha1, alpha2, k)?.holds();
    let nf = n as f64;
    let norm_bound = 2.0 * nf * eta(p, n, k);
    let dens_bound = 4.0 * if alpha2 > 0.0 {
        kappa(alpha2, p, n, k)?
    } else {
        k.c_kappa * (p * nf.ln()).sqrt() / nf
    };
    let large = (((1.0 - alpha2) * nf) - 1e-9).ceil() as usize;
    let (mut worst_norm, mut worst_dens, mut sets) = (0.0f64, 0.0f64, 0);
    for s in subsets_of(f) {
        sets += 1;
        let norm = spectral_norm_exact(&CenteredOperator::at_density(a, &s).to_dense())?;
        worst_norm = worst_norm.max(ratio(norm, norm_bound));
        if s.len() >= large {
            let dev = (a.empirical_density(&s)? - p).abs();
            worst_dens = worst_dens.max(ratio(dev, dens_bound));
        }
    }
    Ok(ConsequenceReport {
        premise,
        norm_ok: worst_norm <= 1.0,
        density_ok: worst_dens <= 1.0,
        worst_norm_ratio: worst_norm,
        worst_density_ratio: worst_dens,
        sets,
    })
}

fn ratio(lhs: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        lhs / bound
    } else if lhs > 1e-12 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Audit of the coarse estimate `|p_S - p| <= (||(A - p_S)_{SxS}|| + n eta) / ((1/2 - alpha1) n)`
/// over every `S` with `|S| >= n/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseAudit {
    pub sets: usize,
    pub violations: usize,
    pub worst_ratio: f64,
}

pub fn coarse_estimate_audit(a: &AdjacencyMatrix, p: f64, alpha1: f64, k: &RateConstants) -> Result<CoarseAudit> {
    let n = a.n();
    require_small(n)?;
    if !(0.0..0.5).contains(&alpha1) {
        return Err(Error::Parameter(format!("alpha1 must lie in [0, 1/2), got {alpha1}")));
    }
    let nf = n as f64;
    let ne = nf * eta(p, n, k);
    let (mut sets, mut violations, mut worst) = (0, 0, 0.0f64);
    for s in subsets_of(&NodeSet::full(n)) {
        if 2 * s.len() < n {
            continue;
        }
        sets += 1;
        let norm = spectral_norm_exact(&CenteredOperator::at_density(a, &s).to_dense())?;
        let bound = (norm + ne) / ((0.5 - alpha1) * nf);
        let r = ratio((a.empirical_density(&s)? - p).abs(), bound);
        worst = worst.max(r);
        if r > 1.0 + 1e-12 {
            violations += 1;
        }
    }
    Ok(CoarseAudit {
        sets,
        violations,
        worst_ratio: worst,
    })
}

/// One row of the block-sum concentration audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub trial: usize,
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
    pub sampled: bool,
}

/// For each trial, samples `G(n, p)` and compares the largest centered
/// block sum over size class `C_alpha` with [`block_sum_bound`].
pub fn concentration_audit(
    n: usize,
    p: f64,
    alpha_grid: &[f64],
    trials: usize,
    rng: &RandomStream,
) -> Result<Vec<ConcentrationRow>> {
    let mode = SearchMode::for_size(n);
    let mut rows = Vec::with_capacity(alpha_grid.len() * trials);
    for trial in 0..trials {
        let base = rng.split_index("trial", trial as u64);
        let a = crate::graph::sample_er(&GraphParams::new(n, p), &mut base.split("gen"))?;
        let all = NodeSet::full(n);
        for (ai, &alpha) in alpha_grid.iter().enumerate() {
            if !(0.0..=0.5).contains(&alpha) {
                return Err(Error::Parameter(format!("alpha must lie in [0, 1/2], got {alpha}")));
            }
            let sizes = admissible_sizes(n, alpha, n);
            let mut search = base.split_index("search", ai as u64);
            let (lhs, _, _) = max_block_sum(&a, p, &all, &sizes, mode, &mut search)?;
            let bound = block_sum_bound(alpha, p, n);
            rows.push(ConcentrationRow {
                n,
                p,
                alpha,
                trial,
                lhs,
                bound,
                holds: lhs <= bound,
                sampled: mode != SearchMode::Exact,
            });
        }
    }
    Ok(rows)
}

/// Empirical two-sided tail of `Bin(t, p)` against the Chernoff bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernoffRow {
    pub lambda: f64,
    pub empirical: f64,
    pub bound: f64,
}

pub fn chernoff_audit(
    t: usize,
    p: f64,
    lambdas: &[f64],
    samples: usize,
    rng: &mut RandomStream,
) -> Result<Vec<ChernoffRow>> {
    check_probability(p, "p")?;
    let draws: Vec<f64> = (0..samples)
        .map(|_| {
            let x = (0..t).filter(|_| rng.random_bool(p)).count();
            (x as f64 - t as f64 * p).abs()
        })
        .collect();
    Ok(lambdas
        .iter()
        .map(|&lambda| ChernoffRow {
            lambda,
            empirical: draws.iter().filter(|&&d| d >= lambda).count() as f64 / samples.max(1) as f64,
            bound: chernoff_bound(t, p, lambda),
        })
        .collect())
}

/// `||A - p + p I|| / sqrt(n p (1-p) + ln n)`: the ratio the constant `c`
/// must dominate for the full-graph spectral condition.
pub fn spectral_concentration_ratio(a: &AdjacencyMatrix, p: f64) -> Result<f64> {
    let n = a.n();
    let all = NodeSet::full(n);
    if n > EXACT_CAP {
        return Err(Error::TooLarge {
            what: "dense spectral norm",
            size: n,
            cap: EXACT_CAP,
        });
    }
    let mut m = CenteredOperator::new(a, &all, p).to_dense();
    for i in 0..n {
        m[(i, i)] += p;
    }
    let nf = n as f64;
    Ok(spectral_norm_exact(&m)? / (nf * p * (1.0 - p) + nf.ln()).sqrt())
}
