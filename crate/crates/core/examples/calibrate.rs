//! A reduced run of the constant calibration sweep. The full sweep is
//! `rer calibrate --seed 20240601`.
//!
//! cargo run --release --example calibrate

use robust_er::harness::{calibrate_constants, CalibrationConfig};

fn main() -> robust_er::Result<()> {
    let cfg = CalibrationConfig {
        ns: vec![100, 200],
        ps: vec![0.05, 0.5],
        trials: 40,
        ..CalibrationConfig::default()
    };
    let art = calibrate_constants(&cfg)?;
    println!("c = {}, c1 = {}", art.constants.c_eta, art.constants.c_kappa);
    for pt in &art.points {
        println!(
            "n={:4} p={:.2}: median needs c {:.3}, c1 {:.3}; pass rate {:.3}",
            pt.n, pt.p, pt.median_c_eta, pt.median_c_kappa, pt.pass_rate
        );
    }
    Ok(())
}
