use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::rng::RandomStream;

/// A probability mass function over `{0, ..., len - 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    mass: Vec<f64>,
}

pub const PMF_TOLERANCE: f64 = 1e-12;

impl Pmf {
    /// Validates nonnegativity and unit total mass (within `1e-12`).
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::Parameter("pmf needs at least one support point".into()));
        }
        if let Some(k) = mass.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Parameter(format!(
                "pmf entry {k} is {} (must be finite and nonnegative)",
                mass[k]
            )));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::Parameter(format!(
                "pmf sums to {total}, not 1 within {PMF_TOLERANCE:e}"
            )));
        }
        Ok(Self { mass })
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        assert!(at < len, "point mass outside support");
        let mut mass = vec![0.0; len];
        mass[at] = 1.0;
        Self { mass }
    }

    pub fn support_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.mass.iter().enumerate().map(|(k, m)| k as f64 * m).sum()
    }

    /// Reusable sampler.
    pub fn sampler(&self) -> PmfSampler {
        PmfSampler {
            index: WeightedIndex::new(&self.mass).expect("validated pmf has positive mass"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PmfSampler {
    index: WeightedIndex<f64>,
}

impl PmfSampler {
    pub fn sample(&self, rng: &mut RandomStream) -> usize {
        self.index.sample(rng)
    }
}

/// Exact `Bin(n, p)` pmf over `{0, ..., n}`.
///
/// Built by the ratio recurrence `f(k+1)/f(k) = (n-k)/(k+1) * p/(1-p)`,
/// walking outward from the mode (so terms only shrink and underflow is
/// harmless), then normalized.
pub fn binomial_pmf(n: usize, p: f64) -> Result<Pmf> {
    check_probability(p, "binomial p")?;
    if p == 0.0 {
        return Ok(Pmf::point_mass(n + 1, 0));
    }
    if p == 1.0 {
        return Ok(Pmf::point_mass(n + 1, n));
    }
    let mode = (((n + 1) as f64) * p).floor().min(n as f64) as usize;
    let odds = p / (1.0 - p);
    let mut mass = vec![0.0; n + 1];
    mass[mode] = 1.0;
    for k in mode..n {
        mass[k + 1] = mass[k] * ((n - k) as f64 / (k + 1) as f64) * odds;
    }
    for k in (1..=mode).rev() {
        mass[k - 1] = mass[k] * (k as f64 / (n - k + 1) as f64) / odds;
    }
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    Ok(Pmf { mass })
}

/// `0.5 * sum |a_k - b_k|`.
pub fn tv_distance(a: &Pmf, b: &Pmf) -> Result<f64> {
    if a.support_size() != b.support_size() {
        return Err(Error::Domain(format!(
            "support sizes differ: {} vs {}",
            a.support_size(),
            b.support_size()
        )));
    }
    Ok(0.5 * a.mass.iter().zip(&b.mass).map(|(x, y)| (x - y).abs()).sum::<f64>())
}
