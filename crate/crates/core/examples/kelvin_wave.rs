//! A 3-fold Kelvin wave near omega = 1/3.

use vstate::geometry::fold_symmetry;
use vstate::solver::amplitude_constrained_solve;
use vstate::SolveConfig;

fn main() -> vstate::Result<()> {
    let modes = 48;
    let rec = amplitude_constrained_solve(3, 0.05, 1.0 / 3.0, modes, &SolveConfig::even())?;
    println!("omega = {:.12}, residual {:.2e}, {}", rec.omega, rec.residual, rec.classification);
    for (k, a) in rec.boundary.cos_coeffs().iter().enumerate().take(12) {
        println!("  a_{:<2} = {a:+.3e}", k + 1);
    }
    println!("fold symmetry: {:?}", fold_symmetry(&rec.boundary, 1e-8));
    Ok(())
}
