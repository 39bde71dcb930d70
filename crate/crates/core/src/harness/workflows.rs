use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowerbound::{
    binomial_pmf, histogram, indistinguishable_pair, operating_point, two_sample_chi_square, ChiSquareReport,
    DegreeCoupling,
};
use crate::regularity::ConcentrationRow;
use crate::rng::RandomStream;

#[derive(Serialize)]
struct AuditRow {
    n: usize,
    p: f64,
    alpha: f64,
    trial: usize,
    lhs: f64,
    bound: f64,
    holds: bool,
}

/// Writes concentration-audit rows as `n,p,alpha,trial,lhs,bound,holds`.
pub fn write_audit_csv<W: Write>(rows: &[ConcentrationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(AuditRow {
            n: r.n,
            p: r.p,
            alpha: r.alpha,
            trial: r.trial,
            lhs: r.lhs,
            bound: r.bound,
            holds: r.holds,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbDemoConfig {
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    pub runs: usize,
    /// Out-degrees pooled per side in each run.
    pub samples_per_side: usize,
    pub significance: f64,
    pub seed: u64,
}

impl Default for LbDemoConfig {
    fn default() -> Self {
        Self {
            n: 200,
            p: 0.3,
            gamma: 0.2,
            runs: 100,
            samples_per_side: 10_000,
            significance: 0.01,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbDemoReport {
    pub config: LbDemoConfig,
    pub p2: f64,
    pub coupling: DegreeCoupling,
    pub tests: Vec<ChiSquareReport>,
    /// Fraction of runs in which the test did not reject.
    pub non_reject_rate: f64,
}

impl LbDemoReport {
    /// Writes `k, bin1, bin2, dist1, dist2, mixture1, mixture2`.
    pub fn write_pmfs_csv<W: Write>(&self, out: W) -> Result<()> {
        let c = &self.coupling;
        let b1 = binomial_pmf(c.n - 1, c.p1)?;
        let b2 = binomial_pmf(c.n - 1, c.p2)?;
        let (m1, m2) = (c.mixture1(), c.mixture2());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "bin1", "bin2", "dist1", "dist2", "mixture1", "mixture2"])?;
        for k in 0..c.n {
            w.write_record(&[
                k.to_string(),
                b1.mass()[k].to_string(),
                b2.mass()[k].to_string(),
                c.dist1.mass()[k].to_string(),
                c.dist2.mass()[k].to_string(),
                m1[k].to_string(),
                m2[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Repeatedly samples both corrupted directed processes, pools out-degrees
/// on each side and runs a two-sample chi-square test.
pub fn lb_demo(cfg: &LbDemoConfig) -> Result<LbDemoReport> {
    if cfg.runs == 0 || cfg.samples_per_side == 0 || cfg.n < 2 {
        return Err(Error::Parameter("lb-demo needs runs, samples and n >= 2".into()));
    }
    let graphs = cfg.samples_per_side.div_ceil(cfg.n);
    let mut tests = Vec::with_capacity(cfg.runs);
    let mut coupling = None;
    for run in 0..cfg.runs {
        let base = RandomStream::derive(cfg.seed, &[run as u64], "lb-demo");
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for g in 0..graphs {
            let pair = indistinguishable_pair(cfg.n, cfg.p, cfg.gamma, &mut base.split_index("pair", g as u64))?;
            first.extend(pair.first.out_degrees());
            second.extend(pair.second.out_degrees());
            coupling.get_or_insert(pair.coupling);
        }
        first.truncate(cfg.samples_per_side);
        second.truncate(cfg.samples_per_side);
        tests.push(two_sample_chi_square(
            &histogram(first, cfg.n),
            &histogram(second, cfg.n),
        )?);
    }
    let kept = tests.iter().filter(|t| !t.rejects_at(cfg.significance)).count();
    Ok(LbDemoReport {
        config: cfg.clone(),
        p2: operating_point(cfg.n, cfg.p, cfg.gamma),
        coupling: coupling.expect("at least one run"),
        non_reject_rate: kept as f64 / cfg.runs as f64,
        tests,
    })
}
