//! Runs every estimator on one five-set corrupted graph.
//!
//! cargo run --release --example estimators

use robust_er::adversaries::five_set_adversary;
use robust_er::estimate::{Estimator, EstimatorSettings};
use robust_er::graph::{sample_er, GraphParams};
use robust_er::rng::RandomStream;

fn main() -> robust_er::Result<()> {
    let (n, p, gamma) = (1000, 0.5, 0.1);
    let mut rng = RandomStream::from_seed(3);
    let g = sample_er(&GraphParams::new(n, p), &mut rng)?;
    let a = five_set_adversary(&g, gamma, 1.0, &mut rng)?.graph;

    let settings = EstimatorSettings {
        repeats: Some(2),
        ..EstimatorSettings::default()
    };
    for name in ["mean", "median", "prune-mean", "prune-median", "spectral", "spectral-sym"] {
        let est: Estimator = name.parse()?;
        let r = est.run(&a, gamma, &settings, &mut rng.split(name))?;
        println!("{name:>13}: estimate {:.5}, error {:.5}", r.estimate, r.error(p));
    }
    Ok(())
}
