//! Size estimates along the ellipse family and the Steiner bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vstate::cli::report_patch;
use vstate::geometry::{ellipse_with_mode2, kirchhoff_omega};
use vstate::stream::steiner_integral;
use vstate::{FourierBoundary, PatchState};

fn main() -> vstate::Result<()> {
    println!("{:>6} {:>10} {:>10} {:>10}", "c", "delta", "C_radial", "C_grad");
    for c in [0.01, 0.02, 0.05, 0.1] {
        let (b, q) = ellipse_with_mode2(c, 32)?;
        let p = PatchState::new(b, kirchhoff_omega(q, 1.0))?;
        let r = report_patch(&p, 1e-8)?;
        let [cr, _] = r.radial_constants.unwrap_or([0.0; 2]);
        println!(
            "{c:>6} {:>10.3e} {cr:>10.4} {:>10.4}",
            r.shape.sym_diff_to_unit_disk,
            r.gradient_constant.unwrap_or(0.0)
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let cos = (1..=8).map(|k| rng.gen_range(-0.1..0.1) / k as f64).collect();
        let sin = (1..=8).map(|k| rng.gen_range(-0.1..0.1) / k as f64).collect();
        let b = FourierBoundary::new(1.0, cos, sin)?;
        let x = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        worst = worst.max(steiner_integral(&b, x)?.ratio);
    }
    println!("largest Steiner ratio {worst:.6} (bound 2 sqrt(pi) = {:.6})", 2.0 * std::f64::consts::PI.sqrt());
    Ok(())
}
