use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{EstimatorReport, Trace};
use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, NodeSet};
use crate::linalg::{top_compact, top_compact_exact, CenteredOperator, EigenOptions};
use crate::rng::RandomStream;

/// Settings of the spectral filter and the trimming step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Corruption-budget parameter, `1/n <= alpha1 <= 1/60`.
    pub alpha1: f64,
    /// Outer repeats; `None` means `ceil(2 log2 n)`.
    pub repeats: Option<usize>,
    pub eig_tol: f64,
    /// Sets of at most this size use the dense eigensolver.
    pub exact_below: usize,
    /// Random starts in the first round of each repeat; later rounds warm
    /// start from the previous eigenvector.
    pub first_restarts: usize,
    strict: bool,
}

/// Slack on the `alpha1` range so that `1/60` computed in floating point
/// is accepted.
const ALPHA_SLACK: f64 = 1e-12;

impl SpectralConfig {
    /// A config that is checked against `[1/n, 1/60]` when used.
    pub fn new(alpha1: f64) -> Self {
        Self {
            alpha1,
            repeats: None,
            eig_tol: 0.01,
            exact_below: 64,
            first_restarts: 2,
            strict: true,
        }
    }

    /// Skips the `[1/n, 1/60]` range check; for tiny oracle instances where
    /// `9 alpha1 n` must still be at least one.
    pub fn new_unchecked(alpha1: f64) -> Self {
        Self {
            strict: false,
            ..Self::new(alpha1)
        }
    }

    pub fn with_repeats(mut self, repeats: usize) -> Self {
        self.repeats = Some(repeats);
        self
    }

    pub fn repeats_for(&self, n: usize) -> usize {
        self.repeats
            .unwrap_or_else(|| (2.0 * (n.max(2) as f64).log2()).ceil() as usize)
            .max(1)
    }

    /// `floor(9 alpha1 n)`.
    pub fn rounds(&self, n: usize) -> usize {
        ((9.0 * self.alpha1 * n as f64) + 1e-9).floor() as usize
    }

    /// `floor(3 alpha1 n)`.
    pub fn trim_count(&self, n: usize) -> usize {
        trim_count(self.alpha1, n)
    }

    /// Validates the config for an `n`-node graph and returns it with the
    /// range check enabled.
    pub fn checked(mut self, n: usize) -> Result<Self> {
        self.strict = true;
        self.validate(n)?;
        Ok(self)
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha1.is_finite() && self.alpha1 > 0.0) {
            return Err(Error::Parameter(format!(
                "alpha1 must be positive, got {}",
                self.alpha1
            )));
        }
        if self.strict {
            let lo = 1.0 / n as f64;
            if self.alpha1 < lo - ALPHA_SLACK || self.alpha1 > 1.0 / 60.0 + ALPHA_SLACK {
                return Err(Error::Parameter(format!(
                    "alpha1 = {} outside [1/n, 1/60] for n = {n}",
                    self.alpha1
                )));
            }
        }
        if self.rounds(n) >= n {
            return Err(Error::Parameter(format!(
                "{} deletion rounds would empty an {n}-node graph",
                self.rounds(n)
            )));
        }
        if !(self.eig_tol > 0.0 && self.eig_tol <= 0.01) {
            return Err(Error::Parameter(format!(
                "eig_tol must lie in (0, 0.01], got {}",
                self.eig_tol
            )));
        }
        Ok(())
    }
}

fn trim_count(alpha1: f64, n: usize) -> usize {
    ((3.0 * alpha1 * n as f64) + 1e-9).floor() as usize
}

/// One candidate set of the filter: the set after `round` deletions in
/// repeat `repeat`, with its centered spectral norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub repeat: usize,
    pub round: usize,
    pub size: usize,
    pub norm: f64,
    pub quality: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralTrace {
    pub n: usize,
    pub candidates: Vec<Candidate>,
    /// Deleted nodes in order, one list per repeat.
    pub deletions: Vec<Vec<usize>>,
    /// Index into `candidates` of the chosen set.
    pub chosen: usize,
    pub s_star: NodeSet,
    pub matvecs: usize,
}

impl SpectralTrace {
    /// Rebuilds the node set of a candidate from the deletion log.
    pub fn candidate_set(&self, index: usize) -> NodeSet {
        let c = &self.candidates[index];
        let mut s = NodeSet::full(self.n);
        for &i in &self.deletions[c.repeat][..c.round] {
            s.remove(i);
        }
        s
    }

    pub fn s_star_norm(&self) -> f64 {
        self.candidates[self.chosen].norm
    }
}

fn density(a: &AdjacencyMatrix, members: &[usize], s: &NodeSet) -> f64 {
    let m = members.len() as f64;
    a.edge_mass_in(s) as f64 / (m * m)
}

/// Spectral filtering: from `S = [n]`, repeatedly take a near-top
/// eigenvector `v` of `(A - p_S)_{S x S}`, delete one node drawn with
/// probability `v_i^2`, and keep the candidate of smallest centered norm.
/// The whole procedure is repeated and the overall minimum returned (the
/// first one on exact ties).
pub fn spectral_candidates(
    a: &AdjacencyMatrix,
    cfg: &SpectralConfig,
    rng: &mut RandomStream,
) -> Result<(NodeSet, SpectralTrace)> {
    let n = a.n();
    cfg.validate(n)?;
    let rounds = cfg.rounds(n);
    let repeats = cfg.repeats_for(n);
    let mut candidates: Vec<Candidate> = Vec::with_capacity(repeats * (rounds + 1));
    let mut deletions = Vec::with_capacity(repeats);
    let mut chosen = 0;
    let mut matvecs = 0;
    let later = EigenOptions {
        tol: cfg.eig_tol,
        restarts: 1,
        ..EigenOptions::default()
    };
    let first = EigenOptions {
        restarts: cfg.first_restarts.max(1),
        ..later
    };

    for r in 0..repeats {
        let mut stream = rng.split_index("repeat", r as u64);
        let mut s = NodeSet::full(n);
        let mut members: Vec<usize> = (0..n).collect();
        let mut warm: Option<Vec<f64>> = None;
        let mut deleted = Vec::with_capacity(rounds);
        for t in 0..=rounds {
            let shift = density(a, &members, &s);
            let mut op = CenteredOperator::from_members(a, members.clone(), shift);
            let eig = if members.len() <= cfg.exact_below {
                top_compact_exact(&op)
            } else {
                let opts = if warm.is_some() { &later } else { &first };
                top_compact(&mut op, opts, &mut stream, warm.as_deref())
            };
            matvecs += eig.matvecs;
            let cand = Candidate {
                repeat: r,
                round: t,
                size: members.len(),
                norm: eig.value.abs(),
                quality: eig.quality,
                converged: eig.converged,
            };
            if candidates.is_empty() || cand.norm < candidates[chosen].norm {
                chosen = candidates.len();
            }
            candidates.push(cand);
            if t == rounds {
                break;
            }
            let weights: Vec<f64> = eig.vector.iter().map(|v| v * v).collect();
            let pick = match WeightedIndex::new(&weights) {
                Ok(w) => w.sample(&mut stream),
                // A zero vector cannot happen for a unit eigenvector; fall
                // back to the first member rather than abort.
                Err(_) => 0,
            };
            let node = members.remove(pick);
            s.remove(node);
            deleted.push(node);
            let mut v = eig.vector;
            v.remove(pick);
            warm = Some(v);
        }
        deletions.push(deleted);
    }
    let mut trace = SpectralTrace {
        n,
        candidates,
        deletions,
        chosen,
        s_star: NodeSet::empty(n),
        matvecs,
    };
    trace.s_star = trace.candidate_set(chosen);
    Ok((trace.s_star.clone(), trace))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimScore {
    pub node: usize,
    /// `|p_{S*} - p_{S*}^{(i)}|`.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimTrace {
    pub s_star: NodeSet,
    pub s_final: NodeSet,
    pub p_s_star: f64,
    /// Removed nodes with their scores, highest score first.
    pub removed: Vec<TrimScore>,
}

/// Trimming: score each `i` in `S*` by `|p_{S*} - deg_{S*}(i)/|S*||`, drop the
/// `floor(3 alpha1 n)` highest scores (ties by ascending index) and return
/// `p_{S^f}` for the remaining set `S^f`.
pub fn trim(a: &AdjacencyMatrix, alpha1: f64, s_star: &NodeSet) -> Result<EstimatorReport> {
    a.check_set(s_star)?;
    if !(alpha1.is_finite() && alpha1 >= 0.0) {
        return Err(Error::Parameter(format!("alpha1 must be nonnegative, got {alpha1}")));
    }
    let n = a.n();
    let k = trim_count(alpha1, n);
    let m = s_star.len();
    if m <= k {
        return Err(Error::Domain(format!(
            "cannot trim {k} nodes from a set of {m}"
        )));
    }
    let total = a.edge_mass_in(s_star) as i128;
    let size = m as i128;
    // Integer key |T - d_i |S*||, i.e. the score scaled by |S*|^2.
    let mut keyed: Vec<(i128, usize)> = s_star
        .iter()
        .map(|i| {
            let d = a.degree_in_unchecked(i, s_star) as i128;
            ((total - d * size).abs(), i)
        })
        .collect();
    keyed.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    let denom = (m * m) as f64;
    let removed: Vec<TrimScore> = keyed[..k]
        .iter()
        .map(|&(key, node)| TrimScore {
            node,
            score: key as f64 / denom,
        })
        .collect();
    let mut s_final = s_star.clone();
    for r in &removed {
        s_final.remove(r.node);
    }
    let value = a.empirical_density(&s_final)?;
    let trace = TrimTrace {
        s_star: s_star.clone(),
        s_final,
        p_s_star: total as f64 / denom,
        removed,
    };
    Ok(EstimatorReport::new("trim", value, Some(Trace::Trim(trace))))
}

/// Spectral filtering followed by trimming, with `alpha1` checked against
/// `[1/n, 1/60]`.
pub fn robust_estimate(a: &AdjacencyMatrix, alpha1: f64, rng: &mut RandomStream) -> Result<EstimatorReport> {
    robust_estimate_with(a, &SpectralConfig::new(alpha1), rng)
}

pub fn robust_estimate_with(
    a: &AdjacencyMatrix,
    cfg: &SpectralConfig,
    rng: &mut RandomStream,
) -> Result<EstimatorReport> {
    let (s_star, spectral) = spectral_candidates(a, cfg, &mut rng.split("spectral"))?;
    let trimmed = trim(a, cfg.alpha1, &s_star)?;
    let trim_trace = match trimmed.trace {
        Some(Trace::Trim(trim)) => trim,
        _ => unreachable!("trim always records its trace"),
    };
    Ok(EstimatorReport::new(
        "spectral",
        trimmed.unclamped,
        Some(Trace::Robust {
            spectral,
            trim: trim_trace,
        }),
    ))
}

/// Runs the pipeline on `A`; if the unclamped result exceeds 1/2, runs it on
/// the complement graph and reports `1 - q*` instead.
pub fn robust_estimate_symmetric(a: &AdjacencyMatrix, gamma: f64, rng: &mut RandomStream) -> Result<EstimatorReport> {
    robust_estimate_symmetric_with(a, &SpectralConfig::new(gamma), rng)
}

pub fn robust_estimate_symmetric_with(
    a: &AdjacencyMatrix,
    cfg: &SpectralConfig,
    rng: &mut RandomStream,
) -> Result<EstimatorReport> {
    let primal = robust_estimate_with(a, cfg, &mut rng.split("primal"))?;
    if primal.unclamped <= 0.5 {
        return Ok(EstimatorReport::new(
            "spectral-sym",
            primal.unclamped,
            Some(Trace::Symmetric {
                primal: Box::new(primal),
                complement: None,
                used_complement: false,
            }),
        ));
    }
    let comp = robust_estimate_with(&a.complement(), cfg, &mut rng.split("complement"))?;
    Ok(EstimatorReport::new(
        "spectral-sym",
        1.0 - comp.unclamped,
        Some(Trace::Symmetric {
            primal: Box::new(primal),
            complement: Some(Box::new(comp)),
            used_complement: true,
        }),
    ))
}
