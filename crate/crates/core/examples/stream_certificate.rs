//! The relative stream function of a V-state is constant on its boundary.

use vstate::cli::verify_patch;
use vstate::geometry::kirchhoff_omega;
use vstate::solver::newton_solve;
use vstate::{FourierBoundary, PatchState, SolveConfig, StreamField};

fn main() -> vstate::Result<()> {
    let a = 1.15;
    let guess = PatchState::new(FourierBoundary::from_ellipse(a, 1.0 / a, 32)?, kirchhoff_omega(a, 1.0 / a))?;
    let p = newton_solve(&guess, &SolveConfig::default())?.state;
    let report = verify_patch(&p)?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    // same certificate on a shape that is not a V-state
    let off = PatchState::new(FourierBoundary::new(1.0, vec![0.0, 0.05, 0.02], vec![0.0; 3])?, 0.25)?;
    let psi = StreamField::with_default_nodes(&off)?;
    println!("non-solution flatness {:.3e}", psi.boundary_flatness()?);
    Ok(())
}
