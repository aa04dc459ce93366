//! Random shapes near the disk at omega near 1/4 converge to disks or ellipses.
//!
//! Usage: `rigidity_scan [trials] [delta] [seed]`

use vstate::solver::rigidity_scan;
use vstate::{ScanConfig, SolveConfig};

fn main() -> vstate::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize| args.get(i).and_then(|s| s.parse::<f64>().ok());
    let scan = ScanConfig {
        trials: arg(0).map_or(24, |v| v as usize),
        delta: arg(1).unwrap_or(0.01),
        seed: arg(2).map_or(7, |v| v as u64),
        ..ScanConfig::default()
    };
    let r = rigidity_scan(&scan, &SolveConfig::default())?;
    for t in &r.trials {
        println!(
            "{:>4} omega {:.6} |D delta disk| {:.2e} -> {:?} ({} its, residual {:.1e})",
            t.index, t.omega, t.initial_sym_diff, t.converged_to, t.iterations, t.residual
        );
    }
    println!(
        "disk {} ellipse {} other {} inconclusive {}",
        r.disk, r.ellipse, r.other, r.inconclusive
    );
    Ok(())
}
