//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vstate::cli::report_patch;
use vstate::contour::{eval_contour_residual, QuadratureConfig};
use vstate::geometry::{center_of_vorticity, ellipse_with_mode2, kirchhoff_omega, radial_bounds};
use vstate::linearization::{DiskLinearization, KernelMode};
use vstate::solver::{
    amplitude_constrained_solve, continue_branch, newton_solve, rigidity_scan, Branch, ScanOutcome,
};
use vstate::stream::{steiner_integral, StreamField};
use vstate::{Classification, FourierBoundary, PatchState, ScanConfig, SolveConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Writes past the test harness capture so the lines land in the log.
fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn kirchhoff(a: f64, modes: usize) -> PatchState {
    let b = FourierBoundary::ellipse_projection(a, 1.0 / a, modes).unwrap().0.normalize_mean();
    PatchState::new(b, kirchhoff_omega(a, 1.0 / a)).unwrap()
}

fn sup_residual(p: &PatchState) -> f64 {
    eval_contour_residual(p, &QuadratureConfig::for_modes(p.boundary.modes())).unwrap().sup_norm
}

fn leakage(b: &FourierBoundary, m: usize) -> f64 {
    (1..=b.modes())
        .filter(|k| k % m != 0)
        .map(|k| {
            let (a, s) = b.mode(k);
            a.abs().max(s.abs())
        })
        .fold(0.0, f64::max)
}

fn coefficient_error(a: &FourierBoundary, b: &FourierBoundary) -> f64 {
    let n = a.modes().max(b.modes());
    let (a, b) = (a.with_modes(n), b.with_modes(n));
    a.cos_coeffs()
        .iter()
        .zip(b.cos_coeffs())
        .chain(a.sin_coeffs().iter().zip(b.sin_coeffs()))
        .map(|(x, y)| (x - y).abs())
        .fold((a.mean_radius() - b.mean_radius()).abs(), f64::max)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

/// Solutions shared by several criteria.
struct Solutions {
    ellipse: PatchState,
    mode2: Branch,
    mode2_points: Vec<(f64, PatchState, Classification)>,
    mode3: Branch,
}

fn solutions() -> Solutions {
    let cfg = SolveConfig::even();
    let mode2 = continue_branch(2, 12, 0.01, 32, &cfg).unwrap();
    let mode2_points = [0.02, 0.05, 0.1]
        .into_iter()
        .map(|c| {
            let r = mode2.point_at_amplitude(c, &cfg).unwrap();
            (c, r.state(), r.classification)
        })
        .collect();
    Solutions {
        ellipse: kirchhoff(1.2, 128),
        mode2,
        mode2_points,
        mode3: continue_branch(3, 3, 0.01, 48, &cfg).unwrap(),
    }
}

fn criterion_1() -> Outcome {
    let (worst, t) = timed(|| {
        [0.0, 0.1, 0.25, 0.4, 0.49]
            .into_iter()
            .map(|w| sup_residual(&PatchState::disk(w, 64)))
            .fold(0.0, f64::max)
    });
    outcome(worst < 1e-10 && t < Duration::from_secs(1), format!("max residual {worst:.2e}, {t:.2?}"))
}

fn criterion_2() -> Outcome {
    let ((mu2, gap, scale, kernel), t) = timed(|| {
        let lin = DiskLinearization::new(32, QuadratureConfig::for_modes(32)).unwrap();
        let s = lin.spectrum(0.25).unwrap();
        let scale = lin.pattern_fit(8).unwrap().scale;
        let gap = (1..=32)
            .filter(|&k| k != 2)
            .map(|k| s.multipliers[k - 1].abs())
            .fold(f64::INFINITY, f64::min);
        (s.multipliers[1], gap, scale, s.kernel_modes)
    });
    let expected = vec![KernelMode::OmegaDirection, KernelMode::Cos(2), KernelMode::Sin(2)];
    outcome(
        mu2.abs() < 1e-8 && gap > 0.01 * scale.abs() && kernel == expected && t < Duration::from_secs(10),
        format!("|mu_2| {:.2e}, min other {gap:.3e}, scale {scale:.6}, kernel {kernel:?}, {t:.2?}", mu2.abs()),
    )
}

fn criterion_3() -> Outcome {
    let lin = DiskLinearization::new(16, QuadratureConfig::for_modes(16)).unwrap();
    let fit = lin.pattern_fit(8).unwrap();
    let slope_err = (1..=8)
        .map(|k| {
            let slope = (lin.multiplier(0.3, k).unwrap() - lin.multiplier(0.2, k).unwrap()) / 0.1;
            (slope + k as f64).abs()
        })
        .fold(0.0, f64::max);
    let cross = lin.omega_cross_derivative(0.25, 2).unwrap();
    outcome(
        fit.relative_residual < 1e-5 && slope_err < 1e-5 && (cross + 2.0).abs() < 1e-6,
        format!(
            "fit residual {:.2e}, slope error {slope_err:.2e}, cross term {cross:.9}",
            fit.relative_residual
        ),
    )
}

fn criterion_4() -> Outcome {
    let lin = DiskLinearization::new(16, QuadratureConfig::for_modes(16)).unwrap();
    let err = (2..=6)
        .map(|m| (lin.multiplier_root(m).unwrap() - (m - 1) as f64 / (2 * m) as f64).abs())
        .fold(0.0, f64::max);
    outcome(err < 1e-8, format!("max root error {err:.2e}"))
}

fn criterion_5(s: &Solutions) -> Outcome {
    let at128 = sup_residual(&s.ellipse);
    let seq: Vec<f64> = [8, 16, 32, 64, 128].into_iter().map(|n| sup_residual(&kirchhoff(1.2, n))).collect();
    let mut ok = at128 < 1e-6;
    for w in seq.windows(2) {
        if w[0] > 1e-12 {
            ok &= w[0] / w[1] >= 10.0;
        } else {
            ok &= w[1] < 1e-12;
        }
    }
    let seq: Vec<String> = seq.iter().map(|r| format!("{r:.1e}")).collect();
    outcome(ok, format!("N=128 residual {at128:.2e}, N=8..128: {}", seq.join(" ")))
}

fn criterion_6(s: &Solutions) -> Outcome {
    let mut ok = true;
    let mut errs = Vec::new();
    for (c, p, class) in &s.mode2_points {
        let (exact, _) = ellipse_with_mode2(*c, p.boundary.modes()).unwrap();
        let e = coefficient_error(&p.boundary, &exact);
        ok &= e < 1e-6 && *class == Classification::Ellipse;
        errs.push(format!("c={c}: {e:.1e}"));
    }
    let onset = s.mode3.records.get(1).map(|r| r.omega).unwrap_or(f64::NAN);
    let leak = s.mode3.records.iter().map(|r| leakage(&r.boundary, 3)).fold(0.0, f64::max);
    ok &= (onset - 1.0 / 3.0).abs() < 1e-4 && leak < 1e-8;
    outcome(ok, format!("{}; m=3 onset {onset:.6}, leakage {leak:.1e}", errs.join(", ")))
}

fn criterion_7() -> (Outcome, Vec<f64>) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let scan = ScanConfig { delta: 0.01, trials: 200, seed: 7, ..ScanConfig::default() };
    let (report, t) = timed(|| pool.install(|| rigidity_scan(&scan, &SolveConfig::default()).unwrap()));
    let centers = report
        .trials
        .iter()
        .filter(|t| t.converged_to != ScanOutcome::Inconclusive)
        .map(|t| t.center_offset)
        .collect();
    let ok = report.other == 0
        && (report.inconclusive as f64) < 0.05 * scan.trials as f64
        && t < Duration::from_secs(300);
    (
        outcome(
            ok,
            format!(
                "disk {} ellipse {} other {} inconclusive {}, {t:.1?}",
                report.disk, report.ellipse, report.other, report.inconclusive
            ),
        ),
        centers,
    )
}

fn laplacian_error(f: &StreamField, x: [f64; 2], h: f64, expect: f64) -> f64 {
    (f.discrete_laplacian(x, h).unwrap() - expect).abs()
}

fn criterion_8(s: &Solutions) -> Outcome {
    let mut states = vec![s.ellipse.clone()];
    states.extend(s.mode2_points.iter().map(|(_, p, _)| p.clone()));
    states.extend(s.mode3.records.iter().skip(1).map(|r| r.state()));
    let (mut flat, mut slope, mut lap) = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for p in &states {
        let f = StreamField::with_default_nodes(p).unwrap();
        flat = flat.max(f.boundary_flatness().unwrap());
        slope = slope.max(f.contour_slope_defect().unwrap());
        let rb = radial_bounds(&p.boundary);
        let inside = [[0.0, 0.0], [0.3 * rb.min, -0.2 * rb.min], [-0.5 * rb.min, 0.1]];
        let outside = [[1.5 * rb.max, 0.0], [0.0, -1.6 * rb.max], [-1.2 * rb.max, 1.2 * rb.max]];
        for h in [2e-3, 1e-3] {
            for x in inside {
                let e = laplacian_error(&f, x, h, 1.0 - 2.0 * p.omega);
                lap = lap.max(e / (h * h));
            }
            for x in outside {
                let e = laplacian_error(&f, x, h, -2.0 * p.omega);
                lap = lap.max(e / (h * h));
            }
        }
        ok &= flat < 1e-6 && slope < 1e-5;
    }
    ok &= lap < 10.0;
    outcome(
        ok,
        format!("{} states: flatness {flat:.1e}, slope defect {slope:.1e}, Laplacian error/h^2 {lap:.2e}", states.len()),
    )
}

fn criterion_9(s: &Solutions) -> Outcome {
    let tol = SolveConfig::even().classify_tol();
    let (mut radial, mut grad) = (0.0f64, 0.0f64);
    for r in s.mode2.records.iter().skip(1) {
        let rep = report_patch(&r.state(), tol).unwrap();
        let [up, down] = rep.radial_constants.unwrap();
        radial = radial.max(up).max(down);
        grad = grad.max(rep.gradient_constant.unwrap());
    }
    let bound = 2.0 * PI.sqrt() + 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut steiner = 0.0f64;
    for _ in 0..100 {
        let cos: Vec<f64> = (1..=6).map(|k| rng.gen_range(-0.15..0.15) / (k * k) as f64).collect();
        let sin: Vec<f64> = (1..=6).map(|k| rng.gen_range(-0.15..0.15) / (k * k) as f64).collect();
        let b = FourierBoundary::new(rng.gen_range(0.5..2.0), cos, sin).unwrap();
        let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        steiner = steiner.max(steiner_integral(&b, x).unwrap().ratio);
    }
    outcome(
        radial.is_finite() && grad.is_finite() && radial <= 10.0 && grad <= 10.0 && steiner <= bound,
        format!("radial constant {radial:.4}, gradient constant {grad:.4}, worst Steiner ratio {steiner:.6} <= {bound:.6}"),
    )
}

fn criterion_10(s: &Solutions, scan_centers: &[f64]) -> Outcome {
    let cfg = SolveConfig::default();
    let mut centers: Vec<f64> = scan_centers.to_vec();
    let solved = [
        newton_solve(&kirchhoff(1.1, 32), &cfg).unwrap().state,
        amplitude_constrained_solve(2, 0.05, 0.25, 32, &SolveConfig::even()).unwrap().state(),
        amplitude_constrained_solve(3, 0.05, 1.0 / 3.0, 48, &SolveConfig { newton_tol: 1e-9, ..SolveConfig::even() })
            .unwrap()
            .state(),
    ];
    let branch_states = s.mode2.records.iter().chain(&s.mode3.records).map(|r| r.state());
    let point_states = s.mode2_points.iter().map(|(_, p, _)| p.clone());
    for p in solved.into_iter().chain(branch_states).chain(point_states) {
        let c = center_of_vorticity(&p.boundary);
        centers.push(c[0].hypot(c[1]));
    }
    let worst = centers.iter().copied().fold(0.0, f64::max);
    outcome(worst < 1e-8, format!("{} solutions, max |center| {worst:.1e}", centers.len()))
}

#[test]
fn acceptance_criteria() {
    let s = solutions();
    let (c7, centers) = criterion_7();
    let results = [
        ("1 disk-family identity", criterion_1()),
        ("2 kernel at 1/4", criterion_2()),
        ("3 multiplier pattern", criterion_3()),
        ("4 bifurcation points", criterion_4()),
        ("5 Kirchhoff oracle", criterion_5(&s)),
        ("6 branch fidelity", criterion_6(&s)),
        ("7 rigidity scan", c7),
        ("8 stream-function certificates", criterion_8(&s)),
        ("9 quantitative estimates", criterion_9(&s)),
        ("10 center of vorticity", criterion_10(&s, &centers)),
    ];
    for (name, o) in &results {
        emit(&format!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail));
    }
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}
