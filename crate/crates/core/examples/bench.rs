//! A small parameter sweep written as CSV, with a per-group summary.
//!
//! cargo run --release --example bench > bench.csv

use robust_er::adversaries::Strategy;
use robust_er::estimate::{Estimator, EstimatorSettings};
use robust_er::harness::{run_experiment, summarize, write_results_csv, ExperimentConfig, DEFAULT_BAND_C};

fn main() -> robust_er::Result<()> {
    let grid = ExperimentConfig::product(&[300, 600], &[0.1, 0.5], &[0.05, 0.1]);
    let estimators = vec![Estimator::Mean, Estimator::PruneMean { c: 1.0 }, Estimator::SpectralSym];
    let mut cfg = ExperimentConfig::new(grid, Strategy::FiveSet { c: 1.0 }, estimators, 5, 2024);
    cfg.settings = EstimatorSettings {
        repeats: Some(1),
        ..EstimatorSettings::default()
    };
    let rows = run_experiment(&cfg)?;
    write_results_csv(&rows, std::io::stdout().lock())?;

    let summary = summarize(&rows, DEFAULT_BAND_C);
    for r in &summary.rows {
        eprintln!(
            "n={:4} p={:.1} gamma={:.2} {:>13}: median {:.5} p95 {:.5} in band {:.2}",
            r.n, r.p, r.gamma, r.estimator, r.median, r.p95, r.band_rate
        );
    }
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
