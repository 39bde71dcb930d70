use serde::{Deserialize, Serialize};

use super::TrialResult;
use crate::regularity::CALIBRATED;

/// Default constant of the error band; the calibrated spectral constant.
pub const DEFAULT_BAND_C: f64 = CALIBRATED.c_eta;

/// Lower-interpolation quantile: the element at index `floor(q (m - 1))` of
/// the sorted sample. Sorts `xs` in place.
pub fn quantile_lower(xs: &mut [f64], q: f64) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let idx = ((q.clamp(0.0, 1.0) * (xs.len() - 1) as f64) + 1e-9).floor() as usize;
    Some(xs[idx])
}

/// `C (sqrt(p(1-p) ln n)/n + gamma sqrt(p(1-p) ln(1/gamma))/sqrt(n) + gamma ln n/n)`.
pub fn theorem_band(n: usize, p: f64, gamma: f64, c: f64) -> f64 {
    let nf = n as f64;
    let v = p * (1.0 - p);
    let ln_n = nf.ln();
    let mut band = (v * ln_n).sqrt() / nf;
    if gamma > 0.0 {
        band += gamma * (v * (1.0 / gamma).ln()).sqrt() / nf.sqrt() + gamma * ln_n / nf;
    }
    c * band
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    pub adversary: String,
    pub estimator: String,
    pub trials: usize,
    pub errors: usize,
    pub median: f64,
    pub mean: f64,
    pub p95: f64,
    pub max: f64,
    /// Fraction of successful trials inside [`theorem_band`].
    pub band_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

/// Aggregates per `(n, p, gamma, adversary, estimator)` in first-seen order.
/// Groups without a successful row are omitted with a warning.
pub fn summarize(results: &[TrialResult], band_c: f64) -> Summary {
    let mut keys: Vec<(usize, u64, u64, &str, &str)> = Vec::new();
    for r in results {
        let k = (r.n, r.p.to_bits(), r.gamma.to_bits(), r.adversary.as_str(), r.estimator.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (n, pb, gb, adversary, estimator) in keys {
        let (p, gamma) = (f64::from_bits(pb), f64::from_bits(gb));
        let group: Vec<&TrialResult> = results
            .iter()
            .filter(|r| {
                r.n == n && r.p.to_bits() == pb && r.gamma.to_bits() == gb && r.adversary == adversary && r.estimator == estimator
            })
            .collect();
        let mut errs: Vec<f64> = group.iter().filter_map(|r| r.abs_error).collect();
        let failed = group.len() - errs.len();
        if errs.is_empty() {
            warnings.push(format!(
                "n={n} p={p} gamma={gamma} {adversary}/{estimator}: no successful trials, omitted"
            ));
            continue;
        }
        let band = theorem_band(n, p, gamma, band_c);
        let inside = errs.iter().filter(|&&e| e <= band).count();
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let m = errs.len();
        rows.push(SummaryRow {
            n,
            p,
            gamma,
            adversary: adversary.to_string(),
            estimator: estimator.to_string(),
            trials: group.len(),
            errors: failed,
            median: quantile_lower(&mut errs, 0.5).unwrap(),
            mean,
            p95: quantile_lower(&mut errs, 0.95).unwrap(),
            max: errs[m - 1],
            band_rate: inside as f64 / m as f64,
        });
    }
    Summary { rows, warnings }
}
