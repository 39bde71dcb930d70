//! Builds the degree coupling behind the lower bound and runs a short
//! indistinguishability demo.
//!
//! cargo run --release --example lower_bound

use robust_er::harness::{lb_demo, LbDemoConfig};
use robust_er::lowerbound::{binomial_pmf, construct_coupling, operating_point, roos_tv_bound, tv_distance};

fn main() -> robust_er::Result<()> {
    let (n, p1, gamma) = (200, 0.3, 0.2);
    let p2 = operating_point(n, p1, gamma);
    let tv = tv_distance(&binomial_pmf(n - 1, p1)?, &binomial_pmf(n - 1, p2)?)?;
    let roos = roos_tv_bound(n - 1, p1, p2 - p1)?;
    println!("p1 = {p1}, p2 = {p2:.5}: TV {tv:.4}, Roos bound {:.4}", roos.best);

    let c = construct_coupling(n, p1, p2, 0.15 * gamma)?;
    println!("mixture identity error {:.2e}", c.identity_error());

    let cfg = LbDemoConfig {
        runs: 20,
        samples_per_side: 4000,
        ..LbDemoConfig::default()
    };
    let report = lb_demo(&cfg)?;
    println!(
        "chi-square test kept the null in {:.0}% of {} runs",
        100.0 * report.non_reject_rate,
        report.tests.len()
    );
    Ok(())
}
