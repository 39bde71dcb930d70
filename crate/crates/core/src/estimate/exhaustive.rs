use serde::{Deserialize, Serialize};

use super::{EstimatorReport, Trace};
use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, NodeSet};
use crate::linalg::{spectral_norm_exact, CenteredOperator};

/// Largest `n` the exhaustive estimator accepts.
pub const EXHAUSTIVE_CAP: usize = 16;

/// Norms within this distance of the minimum count as tied.
pub const NORM_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveTrace {
    pub best: NodeSet,
    pub norm: f64,
    pub sets_checked: usize,
}

/// Over all `S` with `|S| >= ceil(n/2)`, picks the set minimizing
/// `||(A - p_S)_{S x S}||` and returns `p_S`. Ties (within
/// [`NORM_TIE_TOLERANCE`] of the minimum) go to the largest `|S|`, then to the
/// smallest bitmask.
pub fn exhaustive_estimate(a: &AdjacencyMatrix) -> Result<EstimatorReport> {
    let n = a.n();
    if n > EXHAUSTIVE_CAP {
        return Err(Error::TooLarge {
            what: "exhaustive subset search (2^n sets)".into(),
            size: n,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let min_size = n.div_ceil(2) as u32;
    let mut scored: Vec<(u64, f64)> = Vec::new();
    for mask in 1u64..(1u64 << n) {
        if mask.count_ones() < min_size {
            continue;
        }
        let s = NodeSet::from_mask(n, mask);
        let op = CenteredOperator::at_density(a, &s);
        scored.push((mask, spectral_norm_exact(&op.to_dense())?));
    }
    let min = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let (mask, norm) = scored
        .iter()
        .filter(|s| s.1 <= min + NORM_TIE_TOLERANCE)
        .min_by(|x, y| {
            y.0.count_ones()
                .cmp(&x.0.count_ones())
                .then(x.0.cmp(&y.0))
        })
        .copied()
        .expect("at least the full set is scored");
    let best = NodeSet::from_mask(n, mask);
    let value = a.empirical_density(&best)?;
    Ok(EstimatorReport::new(
        "exhaustive",
        value,
        Some(Trace::Exhaustive(ExhaustiveTrace {
            best,
            norm,
            sets_checked: scored.len(),
        })),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_picks_everything() {
        let r = exhaustive_estimate(&AdjacencyMatrix::empty(6)).unwrap();
        assert_eq!(r.estimate, 0.0);
        match r.trace {
            Some(Trace::Exhaustive(t)) => assert_eq!(t.best.len(), 6),
            _ => panic!("missing trace"),
        }
    }

    #[test]
    fn refuses_large_graphs() {
        assert!(matches!(
            exhaustive_estimate(&AdjacencyMatrix::empty(17)),
            Err(Error::TooLarge { .. })
        ));
    }
}
