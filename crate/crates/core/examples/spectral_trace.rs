//! Follows the spectral filter on a graph with a planted dense block and
//! prints the candidate trace.
//!
//! cargo run --release --example spectral_trace

use robust_er::adversaries::{fill_or_empty_adversary, FillMode};
use robust_er::estimate::{spectral_candidates, trim, SpectralConfig, Trace};
use robust_er::graph::{sample_er, GraphParams};
use robust_er::rng::RandomStream;

fn main() -> robust_er::Result<()> {
    let (n, p) = (600, 0.2);
    let mut rng = RandomStream::from_seed(11);
    let g = sample_er(&GraphParams::new(n, p), &mut rng)?;
    let out = fill_or_empty_adversary(&g, 0.01, FillMode::Fill, &mut rng)?;
    let bad = &out.record.corrupted;

    let cfg = SpectralConfig::new(1.0 / 60.0).with_repeats(2);
    let (s_star, trace) = spectral_candidates(&out.graph, &cfg, &mut rng)?;
    println!("{} candidates, {} matvecs", trace.candidates.len(), trace.matvecs);
    for c in trace.candidates.iter().step_by(10) {
        println!("repeat {} round {:3}: |S| = {}, norm {:.3}", c.repeat, c.round, c.size, c.norm);
    }
    let chosen = &trace.candidates[trace.chosen];
    println!(
        "chosen repeat {} round {} with norm {:.3}; {} of {} corrupted nodes removed",
        chosen.repeat,
        chosen.round,
        chosen.norm,
        bad.difference(&s_star).len(),
        bad.len()
    );

    let report = trim(&out.graph, cfg.alpha1, &s_star)?;
    if let Some(Trace::Trim(t)) = &report.trace {
        println!("trimmed {} nodes, p_S* {:.5} -> estimate {:.5} (p = {p})", t.removed.len(), t.p_s_star, report.estimate);
    }
    Ok(())
}
