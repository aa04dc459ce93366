//! Linearization about the disk: multipliers, kernel and bifurcation points.

use vstate::linearization::bifurcation_omega;
use vstate::{DiskLinearization, QuadratureConfig};

fn main() -> vstate::Result<()> {
    let modes = 16;
    let lin = DiskLinearization::new(modes, QuadratureConfig::for_modes(modes))?;
    let s = lin.spectrum(0.25)?;
    println!("omega = 1/4");
    for (k, mu) in s.multipliers.iter().enumerate().take(8) {
        println!("  mu_{:<2} = {mu:+.10}", k + 1);
    }
    println!("kernel: {:?}", s.kernel_modes);

    let fit = lin.pattern_fit(8)?;
    println!("fit mu_k ~ s (1 - k/2): s = {:.10}, relative residual {:.2e}", fit.scale, fit.relative_residual);

    for m in 2..=6 {
        let root = lin.multiplier_root(m)?;
        println!("m = {m}: root {root:.12}, (m-1)/(2m) = {:.12}", bifurcation_omega(m)?);
    }
    for k in 1..=4 {
        println!("d mu_{k} / d omega = {:+.8}", lin.omega_cross_derivative(0.25, k)?);
    }
    Ok(())
}
