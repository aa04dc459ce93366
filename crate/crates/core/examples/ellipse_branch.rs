//! Continue the 2-fold branch from omega = 1/4 and compare with exact ellipses.

use vstate::geometry::ellipse_with_mode2;
use vstate::solver::continue_branch;
use vstate::SolveConfig;

fn main() -> vstate::Result<()> {
    let modes = 32;
    let cfg = SolveConfig::even();
    let branch = continue_branch(2, 12, 0.01, modes, &cfg)?;
    print!("{}", branch.to_csv());

    for c in [0.02, 0.05, 0.1] {
        let rec = branch.point_at_amplitude(c, &cfg)?;
        let (exact, _) = ellipse_with_mode2(c, modes)?;
        let err = rec
            .boundary
            .cos_coeffs()
            .iter()
            .zip(exact.cos_coeffs())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        println!("c = {c}: omega {:.12}, coefficient error {err:.2e}, {}", rec.omega, rec.classification);
    }
    Ok(())
}
