//! Kirchhoff ellipses: residual self-convergence and a Newton polish.

use vstate::geometry::kirchhoff_omega;
use vstate::solver::newton_solve;
use vstate::{ContourOperator, FourierBoundary, PatchState, QuadratureConfig, SingularRule, SolveConfig};

fn main() -> vstate::Result<()> {
    let (a, b) = (1.2, 1.0 / 1.2);
    let omega = kirchhoff_omega(a, b);
    println!("a = {a}, b = {b:.6}, omega = {omega:.12}");

    println!("{:>5} {:>6} {:>14} {:>14}", "N", "M", "log weights", "trapezoid");
    for n in [8, 16, 32, 64, 128] {
        let (e, _) = FourierBoundary::ellipse_projection(a, b, n)?;
        let p = PatchState::new(e.normalize_mean(), omega)?;
        let q = QuadratureConfig::for_modes(n);
        let spectral = ContourOperator::new(n, q)?.residual(&p)?.sup_norm;
        let trapezoid = ContourOperator::new(n, q.with_rule(SingularRule::LimitValue))?
            .residual(&p)?
            .sup_norm;
        println!("{n:>5} {:>6} {spectral:>14.3e} {trapezoid:>14.3e}", q.nodes);
    }

    let a = 1.1;
    let start = PatchState::new(FourierBoundary::from_ellipse(a, 1.0 / a, 32)?, kirchhoff_omega(a, 1.0 / a))?;
    let out = newton_solve(&start, &SolveConfig::default())?;
    println!("newton from a = 1.1: {} iterations, history {:?}", out.iterations, out.residual_history);
    Ok(())
}
