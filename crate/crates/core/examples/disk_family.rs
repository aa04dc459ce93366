//! The disk is a V-state for every angular velocity.

use vstate::{ContourOperator, PatchState, QuadratureConfig, StreamField};

fn main() -> vstate::Result<()> {
    let modes = 64;
    let op = ContourOperator::new(modes, QuadratureConfig::for_modes(modes))?;
    println!("{:>6} {:>12} {:>12} {:>12}", "omega", "residual", "lap_in", "lap_out");
    for omega in [0.0, 0.1, 0.25, 0.4, 0.49] {
        let disk = PatchState::disk(omega, modes);
        let r = op.residual(&disk)?;
        let psi = StreamField::with_default_nodes(&disk)?;
        let inside = psi.discrete_laplacian([0.3, 0.1], 1e-3)?;
        let outside = psi.discrete_laplacian([1.5, -0.7], 1e-3)?;
        println!("{omega:>6.2} {:>12.3e} {inside:>12.6} {outside:>12.6}", r.sup_norm);
    }
    Ok(())
}
