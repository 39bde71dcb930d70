//! Applies each corruption strategy to the same graph and shows how far the
//! plain mean estimate moves.
//!
//! cargo run --example adversaries

use robust_er::adversaries::{preserves_good_block, Strategy};
use robust_er::estimate::mean_estimator;
use robust_er::graph::{directed_to_undirected, sample_directed_er, sample_er, GraphParams};
use robust_er::rng::RandomStream;

fn main() -> robust_er::Result<()> {
    let (n, p, gamma) = (400, 0.3, 0.1);
    let base = RandomStream::from_seed(7);
    let g = sample_er(&GraphParams::new(n, p), &mut base.split("gen"))?;
    println!("clean mean estimate {:.4}", mean_estimator(&g)?.estimate);

    for name in ["fill", "empty", "coin", "five-set"] {
        let strategy: Strategy = name.parse()?;
        let out = strategy.apply(&g, p, gamma, &mut base.split(name))?;
        println!(
            "{name:>9}: |B| = {:3}, mean {:.4}, good block untouched = {}",
            out.record.corrupted.len(),
            mean_estimator(&out.graph)?.estimate,
            preserves_good_block(&g, &out.graph, &out.record.corrupted),
        );
    }

    // Degree rewiring works on directed graphs; the result is symmetrized.
    let dg = sample_directed_er(&GraphParams::new(n, p), &mut base.split("directed"))?;
    let out = Strategy::DegreeRewire.apply_directed(&dg, p, gamma, &mut base.split("rewire"))?;
    let g = directed_to_undirected(&out.graph);
    println!(
        "degree-rewire: |B| = {}, over budget = {}, mean {:.4}",
        out.record.corrupted.len(),
        out.record.over_budget,
        mean_estimator(&g)?.estimate
    );
    Ok(())
}
