//! Estimators of the edge probability `p`.
//!
//! | name           | function                         |
//! |----------------|----------------------------------|
//! | `mean`         | [`mean_estimator`]               |
//! | `median`       | [`median_estimator`]             |
//! | `prune-mean`   | [`prune_then`] with [`Inner::Mean`]   |
//! | `prune-median` | [`prune_then`] with [`Inner::Median`] |
//! | `spectral`     | [`robust_estimate`]              |
//! | `spectral-sym` | [`robust_estimate_symmetric`]    |
//! | `exhaustive`   | [`exhaustive_estimate`]          |

mod exhaustive;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use exhaustive::{exhaustive_estimate, ExhaustiveTrace, EXHAUSTIVE_CAP, NORM_TIE_TOLERANCE};
pub use spectral::{
    robust_estimate, robust_estimate_symmetric, robust_estimate_symmetric_with, robust_estimate_with,
    spectral_candidates, trim, Candidate, SpectralConfig, SpectralTrace, TrimScore, TrimTrace,
};

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, NodeSet};
use crate::rng::RandomStream;

/// An estimate with per-stage diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    /// Clamped to `[0, 1]`.
    pub estimate: f64,
    /// Value before clamping.
    pub unclamped: f64,
    pub method: String,
    pub trace: Option<Trace>,
}

impl EstimatorReport {
    fn new(method: &str, value: f64, trace: Option<Trace>) -> Self {
        Self {
            estimate: value.clamp(0.0, 1.0),
            unclamped: value,
            method: method.to_string(),
            trace,
        }
    }

    pub fn error(&self, p: f64) -> f64 {
        (self.estimate - p).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Trace {
    Prune {
        removed_high: Vec<usize>,
        removed_low: Vec<usize>,
        inner: Box<EstimatorReport>,
    },
    Trim(TrimTrace),
    Robust {
        spectral: SpectralTrace,
        trim: TrimTrace,
    },
    Symmetric {
        primal: Box<EstimatorReport>,
        /// Present only when the complement branch was needed.
        complement: Option<Box<EstimatorReport>>,
        used_complement: bool,
    },
    Exhaustive(ExhaustiveTrace),
}

fn require_two_nodes(a: &AdjacencyMatrix) -> Result<usize> {
    let n = a.n();
    if n < 2 {
        return Err(Error::Domain(format!("estimator needs n >= 2, got {n}")));
    }
    Ok(n)
}

/// Edge count over `C(n, 2)`.
pub fn mean_estimator(a: &AdjacencyMatrix) -> Result<EstimatorReport> {
    let n = require_two_nodes(a)? as f64;
    let value = a.edge_count() as f64 / (n * (n - 1.0) / 2.0);
    Ok(EstimatorReport::new("mean", value, None))
}

/// Lower median of the degrees over `n - 1`.
pub fn median_estimator(a: &AdjacencyMatrix) -> Result<EstimatorReport> {
    let n = require_two_nodes(a)?;
    let mut d = a.degrees();
    let mid = (n - 1) / 2;
    let (_, m, _) = d.select_nth_unstable(mid);
    Ok(EstimatorReport::new("median", *m as f64 / (n - 1) as f64, None))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inner {
    Mean,
    Median,
}

/// Removes the `floor(c gamma n)` highest-degree nodes, then the
/// `floor(c gamma n)` lowest-degree nodes among the rest (ties by ascending
/// index), and applies `inner` to the induced subgraph.
pub fn prune_then(a: &AdjacencyMatrix, gamma: f64, c: f64, inner: Inner) -> Result<EstimatorReport> {
    let n = require_two_nodes(a)?;
    if !(gamma.is_finite() && gamma >= 0.0 && c.is_finite() && c >= 0.0) {
        return Err(Error::Parameter(format!(
            "gamma and c must be nonnegative, got gamma = {gamma}, c = {c}"
        )));
    }
    if 2.0 * c * gamma >= 0.5 {
        return Err(Error::Parameter(format!(
            "pruning needs 2 c gamma < 0.5, got {}",
            2.0 * c * gamma
        )));
    }
    let k = ((c * gamma * n as f64) + 1e-9).floor() as usize;
    let deg = a.degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| deg[j].cmp(&deg[i]).then(i.cmp(&j)));
    let removed_high: Vec<usize> = order[..k.min(n)].to_vec();
    let mut rest: Vec<usize> = order[k.min(n)..].to_vec();
    rest.sort_by(|&i, &j| deg[i].cmp(&deg[j]).then(i.cmp(&j)));
    let removed_low: Vec<usize> = rest[..k.min(rest.len())].to_vec();
    let kept = NodeSet::from_indices(n, rest[k.min(rest.len())..].iter().copied());
    if kept.len() < 2 {
        return Err(Error::Domain(format!(
            "only {} node(s) remain after pruning",
            kept.len()
        )));
    }
    let sub = a.induced(&kept)?;
    let (name, report) = match inner {
        Inner::Mean => ("prune-mean", mean_estimator(&sub)?),
        Inner::Median => ("prune-median", median_estimator(&sub)?),
    };
    Ok(EstimatorReport::new(
        name,
        report.unclamped,
        Some(Trace::Prune {
            removed_high,
            removed_low,
            inner: Box::new(report),
        }),
    ))
}

/// Estimators addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Estimator {
    Mean,
    Median,
    PruneMean { c: f64 },
    PruneMedian { c: f64 },
    Spectral,
    SpectralSym,
    Exhaustive,
}

/// Knobs shared by the spectral estimators when run by name.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    /// Outer repeats of the spectral filter; `None` uses the default.
    pub repeats: Option<usize>,
    pub eig_tol: f64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            repeats: None,
            eig_tol: 0.01,
        }
    }
}

/// `alpha1 = max(min(gamma, 1/60), 1/n)`: the corruption budget handed to
/// the spectral filter when it is run at a given `gamma`.
pub fn alpha1_for(n: usize, gamma: f64) -> f64 {
    gamma.min(1.0 / 60.0).max(1.0 / n as f64)
}

impl Estimator {
    pub const NAMES: [&'static str; 7] = [
        "mean",
        "median",
        "prune-mean",
        "prune-median",
        "spectral",
        "spectral-sym",
        "exhaustive",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::Median => "median",
            Self::PruneMean { .. } => "prune-mean",
            Self::PruneMedian { .. } => "prune-median",
            Self::Spectral => "spectral",
            Self::SpectralSym => "spectral-sym",
            Self::Exhaustive => "exhaustive",
        }
    }

    pub fn spectral_config(&self, n: usize, gamma: f64, settings: &EstimatorSettings) -> SpectralConfig {
        let mut cfg = SpectralConfig::new_unchecked(alpha1_for(n, gamma));
        cfg.repeats = settings.repeats;
        cfg.eig_tol = settings.eig_tol;
        cfg
    }

    /// Runs the estimator on a (possibly corrupted) graph.
    pub fn run(
        &self,
        a: &AdjacencyMatrix,
        gamma: f64,
        settings: &EstimatorSettings,
        rng: &mut RandomStream,
    ) -> Result<EstimatorReport> {
        match *self {
            Self::Mean => mean_estimator(a),
            Self::Median => median_estimator(a),
            Self::PruneMean { c } => prune_then(a, gamma, c, Inner::Mean),
            Self::PruneMedian { c } => prune_then(a, gamma, c, Inner::Median),
            Self::Spectral => {
                let cfg = self.spectral_config(a.n(), gamma, settings).checked(a.n())?;
                robust_estimate_with(a, &cfg, rng)
            }
            Self::SpectralSym => {
                let cfg = self.spectral_config(a.n(), gamma, settings).checked(a.n())?;
                robust_estimate_symmetric_with(a, &cfg, rng)
            }
            Self::Exhaustive => exhaustive_estimate(a),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    /// Parses an estimator name; the prune estimators accept an optional
    /// `:c` suffix (default `c = 1`).
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let c = match arg {
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad pruning constant {v:?}")))?,
            None => 1.0,
        };
        let est = match name {
            "mean" => Self::Mean,
            "median" => Self::Median,
            "prune-mean" => return Ok(Self::PruneMean { c }),
            "prune-median" => return Ok(Self::PruneMedian { c }),
            "spectral" => Self::Spectral,
            "spectral-sym" => Self::SpectralSym,
            "exhaustive" => Self::Exhaustive,
            _ => {
                return Err(Error::Unknown {
                    kind: "estimator".into(),
                    name: s.into(),
                })
            }
        };
        if arg.is_some() {
            return Err(Error::Parameter(format!("estimator {name} takes no argument")));
        }
        Ok(est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_examples() {
        assert_eq!(mean_estimator(&AdjacencyMatrix::complete(4)).unwrap().estimate, 1.0);
        let one = AdjacencyMatrix::from_edges(3, [(0, 1)]).unwrap();
        assert!((mean_estimator(&one).unwrap().estimate - 1.0 / 3.0).abs() < 1e-15);
        assert!(mean_estimator(&AdjacencyMatrix::empty(1)).is_err());
    }

    #[test]
    fn median_examples() {
        let path = AdjacencyMatrix::from_edges(3, [(0, 1)]).unwrap();
        // Degrees [1, 1, 0]: lower median 1, over n - 1 = 2.
        assert_eq!(median_estimator(&path).unwrap().estimate, 0.5);
        assert_eq!(median_estimator(&AdjacencyMatrix::complete(5)).unwrap().estimate, 1.0);
        // Even n takes the lower middle order statistic: degrees [0,1,1,2].
        let g = AdjacencyMatrix::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(median_estimator(&g).unwrap().estimate, 1.0 / 3.0);
    }

    #[test]
    fn prune_ties_and_identity() {
        let g = AdjacencyMatrix::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let plain = mean_estimator(&g).unwrap();
        assert_eq!(prune_then(&g, 0.0, 1.0, Inner::Mean).unwrap().estimate, plain.estimate);
        let r = prune_then(&g, 1.0 / 6.0, 1.0, Inner::Mean).unwrap();
        match r.trace {
            Some(Trace::Prune { removed_high, removed_low, .. }) => {
                assert_eq!(removed_high, vec![1]);
                assert_eq!(removed_low, vec![0]);
            }
            _ => panic!("missing prune trace"),
        }
        assert!(prune_then(&g, 0.3, 1.0, Inner::Mean).is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in Estimator::NAMES {
            assert_eq!(name.parse::<Estimator>().unwrap().name(), name);
        }
        assert_eq!(
            "prune-mean:2".parse::<Estimator>().unwrap(),
            Estimator::PruneMean { c: 2.0 }
        );
        assert!("mean:2".parse::<Estimator>().is_err());
        assert!("nope".parse::<Estimator>().is_err());
    }
}
