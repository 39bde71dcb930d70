//! Checks the regularity conditions on small graphs and runs the block-sum
//! concentration audit.
//!
//! cargo run --release --example regularity_audit

use robust_er::graph::{sample_er, GraphParams, NodeSet};
use robust_er::regularity::{
    check_regularity, coarse_estimate_audit, concentration_audit, consequence_checks, eta, kappa, RateConstants,
};
use robust_er::rng::RandomStream;

fn main() -> robust_er::Result<()> {
    let k = RateConstants::default();
    let (n, p) = (12, 0.5);
    println!("c = {}, c1 = {}", k.c_eta, k.c_kappa);
    println!("eta = {:.4}, kappa(0.25) = {:.4}", eta(p, n, &k), kappa(0.25, p, n, &k)?);

    let mut rng = RandomStream::from_seed(5);
    let a = sample_er(&GraphParams::new(n, p), &mut rng)?;
    let f = NodeSet::full(n);
    let report = check_regularity(&a, &f, p, 0.0, 0.25, &k)?;
    for (i, c) in report.conditions.iter().enumerate() {
        println!("condition {}: {:.3} <= {:.3} ? {}", i + 1, c.lhs, c.bound, c.holds);
    }
    let cons = consequence_checks(&a, &f, p, 0.25, &k)?;
    println!(
        "consequences over {} subsets: norm ratio {:.3}, density ratio {:.3}",
        cons.sets, cons.worst_norm_ratio, cons.worst_density_ratio
    );
    let coarse = coarse_estimate_audit(&a, p, 0.0, &k)?;
    println!("coarse estimate: {} violations over {} sets", coarse.violations, coarse.sets);

    let rows = concentration_audit(n, p, &[0.0, 0.1, 0.25, 0.5], 50, &RandomStream::from_seed(6))?;
    let held = rows.iter().filter(|r| r.holds).count();
    println!("concentration bound held in {held}/{} (alpha, trial) cells", rows.len());
    Ok(())
}
