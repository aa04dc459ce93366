//! V-state solvers: Newton at fixed `Omega`, amplitude-constrained solves
//! (`Omega` traded for the projection on `cos m theta`), pseudo-arclength
//! continuation of the `m`-fold branches, and the randomized rigidity scan
//! near `Omega = 1/4`.
//!
//! Neutral directions are removed by construction: the mean radius is fixed
//! to 1, rotations are pinned by zeroing the sine part of one mode, and
//! `Omega` is either held fixed or determined by the amplitude constraint.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{FourierBoundary, PatchState};
use crate::contour::{ContourOperator, QuadratureConfig};
use crate::error::{DivergenceReport, Result, VStateError};
use crate::geometry::{self, Classification};
use crate::linearization::bifurcation_omega;

/// Largest amplitude accepted by [`amplitude_constrained_solve`].
pub const MAX_AMPLITUDE: f64 = 0.3;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// All sine and cosine modes.
    Full,
    /// Cosine modes only (boundaries symmetric about the x axis).
    EvenCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Target for the residual sup-norm on the collocation grid.
    pub newton_tol: f64,
    pub max_iters: usize,
    pub symmetry: Symmetry,
    /// Pin the sine part of the dominant mode (or of `pinned_mode`).
    pub fix_rotation: bool,
    pub pinned_mode: Option<usize>,
    /// Initial step fraction of each Newton update, in `(0, 1]`.
    pub damping: f64,
    /// Quadrature override; defaults to [`QuadratureConfig::for_modes`].
    pub quadrature: Option<QuadratureConfig>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_iters: 12,
            symmetry: Symmetry::Full,
            fix_rotation: true,
            pinned_mode: None,
            damping: 1.0,
            quadrature: None,
        }
    }
}

impl SolveConfig {
    pub fn even() -> Self {
        Self {
            symmetry: Symmetry::EvenCosine,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(VStateError::InvalidArgument(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(VStateError::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(VStateError::InvalidArgument(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }

    pub fn quadrature_for(&self, modes: usize) -> QuadratureConfig {
        self.quadrature.unwrap_or_else(|| QuadratureConfig::for_modes(modes))
    }

    /// Classification tolerance tied to the solve tolerance.
    pub fn classify_tol(&self) -> f64 {
        100.0 * self.newton_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Cos(usize),
    Sin(usize),
}

/// Map between unknown vectors and patch states.
struct Layout {
    slots: Vec<Slot>,
    omega_free: bool,
    even: bool,
}

impl Layout {
    fn new(modes: usize, symmetry: Symmetry, skip: &[Slot], omega_free: bool) -> Self {
        let mut slots: Vec<Slot> = (1..=modes).map(Slot::Cos).collect();
        if symmetry == Symmetry::Full {
            slots.extend((1..=modes).map(Slot::Sin));
        }
        slots.retain(|s| !skip.contains(s));
        Self {
            slots,
            omega_free,
            even: symmetry == Symmetry::EvenCosine,
        }
    }

    fn pack(&self, p: &PatchState) -> DVector<f64> {
        let b = &p.boundary;
        let mut v: Vec<f64> = self
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Cos(k) => b.mode(k).0,
                Slot::Sin(k) => b.mode(k).1,
            })
            .collect();
        if self.omega_free {
            v.push(p.omega);
        }
        DVector::from_vec(v)
    }

    fn unpack(&self, u: &DVector<f64>, template: &PatchState) -> Result<PatchState> {
        let mut cos = template.boundary.cos_coeffs().to_vec();
        let mut sin = template.boundary.sin_coeffs().to_vec();
        for (s, v) in self.slots.iter().zip(u.iter()) {
            match *s {
                Slot::Cos(k) => cos[k - 1] = *v,
                Slot::Sin(k) => sin[k - 1] = *v,
            }
        }
        let omega = if self.omega_free {
            u[self.slots.len()]
        } else {
            template.omega
        };
        PatchState::new(FourierBoundary::new(1.0, cos, sin)?, omega)
    }

    /// Residual coefficient rows and the grid sup-norm.
    fn residual(&self, op: &ContourOperator, p: &PatchState) -> Result<(Vec<f64>, f64)> {
        if self.even {
            let r = op.residual_even(p)?;
            Ok((r.sine_coeffs, r.sup_norm))
        } else {
            let r = op.residual(p)?;
            let rows = r.sine_coeffs.iter().chain(&r.cosine_coeffs).copied().collect();
            Ok((rows, r.sup_norm))
        }
    }
}

/// Extra pseudo-arclength equation `tangent . (u - anchor) = ds`.
struct Arclength<'a> {
    tangent: &'a DVector<f64>,
    anchor: &'a DVector<f64>,
    ds: f64,
}

impl Arclength<'_> {
    fn value(&self, u: &DVector<f64>) -> f64 {
        self.tangent.dot(&(u - self.anchor)) - self.ds
    }
}

struct NewtonRun {
    state: PatchState,
    unknowns: DVector<f64>,
    iterations: usize,
    residual_history: Vec<f64>,
}

fn newton_core(
    op: &ContourOperator,
    layout: &Layout,
    template: &PatchState,
    cfg: &SolveConfig,
    arclength: Option<&Arclength>,
) -> Result<NewtonRun> {
    let h = op.config().fd_step;
    let mut u = layout.pack(template);
    let mut state = template.clone();
    let full_rows = |state: &PatchState, u: &DVector<f64>| -> Result<(Vec<f64>, f64)> {
        let (mut rows, sup) = layout.residual(op, state)?;
        let mut sup_all = sup;
        if let Some(a) = arclength {
            let g = a.value(u);
            rows.push(g);
            sup_all = sup_all.max(g.abs());
        }
        Ok((rows, sup_all))
    };
    let (mut rows, mut sup) = full_rows(&state, &u)?;
    let mut history = vec![sup];
    let diverged = |reason: String, history: &[f64]| {
        VStateError::Divergence(DivergenceReport {
            reason,
            residual_history: history.to_vec(),
        })
    };
    for iter in 0..cfg.max_iters {
        if sup <= cfg.newton_tol {
            return Ok(NewtonRun {
                state,
                unknowns: u,
                iterations: iter,
                residual_history: history,
            });
        }
        let n = u.len();
        let columns = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut col = Vec::new();
                for s in [h, -h] {
                    let mut v = u.clone();
                    v[j] += s;
                    let p = layout.unpack(&v, template)?;
                    col.push(full_rows(&p, &v)?.0);
                }
                Ok(col[0]
                    .iter()
                    .zip(&col[1])
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let jac = DMatrix::from_fn(rows.len(), n, |i, j| columns[j][i]);
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smax > 0.0) || smin < RANK_TOL * smax {
            return Err(VStateError::RankDeficient {
                condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
            });
        }
        let rhs = -DVector::from_vec(rows.clone());
        let step = svd
            .solve(&rhs, RANK_TOL * smax)
            .map_err(|e| diverged(format!("linear solve failed: {e}"), &history))?;
        let norm = |r: &[f64]| r.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let current = norm(&rows);
        let mut alpha = cfg.damping;
        let mut accepted = None;
        for _ in 0..12 {
            let trial = &u + &step * alpha;
            if let Ok(p) = layout.unpack(&trial, template) {
                if let Ok((r, s)) = full_rows(&p, &trial) {
                    if norm(&r) < current || s <= cfg.newton_tol {
                        accepted = Some((trial, p, r, s));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((nu, np, nr, ns)) = accepted else {
            return Err(diverged(
                format!("line search failed at iteration {}", iter + 1),
                &history,
            ));
        };
        u = nu;
        state = np;
        rows = nr;
        sup = ns;
        history.push(sup);
    }
    if sup <= cfg.newton_tol {
        return Ok(NewtonRun {
            state,
            unknowns: u,
            iterations: cfg.max_iters,
            residual_history: history,
        });
    }
    Err(diverged(
        format!("residual {sup:.3e} above tolerance after {} iterations", cfg.max_iters),
        &history,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub state: PatchState,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// `r_{n+1} / r_n^2` for consecutive iterates.
    pub quadratic_constants: Vec<f64>,
}

impl SolveOutcome {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }
}

fn quadratic_constants(history: &[f64]) -> Vec<f64> {
    history
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / (w[0] * w[0]))
        .collect()
}

/// Mode whose sine part is pinned: `pinned_mode` or the most energetic mode `k >= 2`.
fn rotation_mode(b: &FourierBoundary, cfg: &SolveConfig) -> usize {
    cfg.pinned_mode.unwrap_or_else(|| {
        (2..=b.modes())
            .max_by(|&i, &j| {
                let (a1, b1) = b.mode(i);
                let (a2, b2) = b.mode(j);
                (a1 * a1 + b1 * b1).total_cmp(&(a2 * a2 + b2 * b2)).then(j.cmp(&i))
            })
            .unwrap_or(2)
    })
}

/// Rotates `b` so that `sin m theta` has zero coefficient and `cos m theta` a
/// non-negative one.
fn pin_rotation(b: &FourierBoundary, m: usize) -> FourierBoundary {
    let (a, s) = b.mode(m);
    if m == 0 || m > b.modes() || (a == 0.0 && s == 0.0) {
        return b.clone();
    }
    let r = b.rotate(-s.atan2(a) / m as f64);
    let mut sin = r.sin_coeffs().to_vec();
    sin[m - 1] = 0.0;
    FourierBoundary::new(r.mean_radius(), r.cos_coeffs().to_vec(), sin).unwrap_or(r)
}

/// Newton iteration at fixed `Omega`.
pub fn newton_solve(initial: &PatchState, cfg: &SolveConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let modes = initial.boundary.modes();
    let op = ContourOperator::new(modes, cfg.quadrature_for(modes))?;
    let mut boundary = initial.boundary.normalize_mean();
    let mut skip = Vec::new();
    match cfg.symmetry {
        Symmetry::EvenCosine => {
            if boundary.sin_coeffs().iter().any(|&b| b != 0.0) {
                return Err(VStateError::Precondition(
                    "even_cosine solves need an initial boundary without sine modes".into(),
                ));
            }
        }
        Symmetry::Full if cfg.fix_rotation => {
            let m = rotation_mode(&boundary, cfg);
            boundary = pin_rotation(&boundary, m);
            skip.push(Slot::Sin(m));
        }
        Symmetry::Full => {}
    }
    let layout = Layout::new(modes, cfg.symmetry, &skip, false);
    let template = PatchState::new(boundary, initial.omega)?;
    let run = newton_core(&op, &layout, &template, cfg, None)?;
    Ok(SolveOutcome {
        quadratic_constants: quadratic_constants(&run.residual_history),
        state: run.state,
        iterations: run.iterations,
        residual_history: run.residual_history,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub omega: f64,
    /// Coefficient of `cos m theta`.
    pub amplitude: f64,
    pub boundary: FourierBoundary,
    pub residual: f64,
    pub classification: Classification,
    pub classification_residual: f64,
    pub arclength: f64,
}

impl BranchRecord {
    pub fn state(&self) -> PatchState {
        PatchState {
            boundary: self.boundary.clone(),
            omega: self.omega,
        }
    }
}

/// Classification on the normalized, rotation-aligned boundary; boundaries
/// that fail the centering precondition count as `Other`.
pub fn classify_state(b: &FourierBoundary, tol: f64) -> (Classification, f64) {
    let aligned = geometry::align_rotation(b);
    match geometry::classify(&aligned, tol) {
        Ok(c) => c,
        Err(_) => (
            Classification::Other,
            geometry::fit_ellipse(&aligned).map(|f| f.1).unwrap_or(f64::INFINITY),
        ),
    }
}

fn record(p: &PatchState, m: usize, residual: f64, arclength: f64, cfg: &SolveConfig) -> BranchRecord {
    let (classification, classification_residual) = classify_state(&p.boundary, cfg.classify_tol());
    BranchRecord {
        omega: p.omega,
        amplitude: p.boundary.mode(m).0,
        boundary: p.boundary.clone(),
        residual,
        classification,
        classification_residual,
        arclength,
    }
}

/// Solves for `Omega` and every coefficient except `cos m theta`, which is
/// pinned to `c` (the `sin m theta` part is pinned to zero).
pub fn amplitude_constrained_solve(
    m: usize,
    c: f64,
    omega_guess: f64,
    modes: usize,
    cfg: &SolveConfig,
) -> Result<BranchRecord> {
    amplitude_constrained_solve_from(&PatchState::disk(omega_guess, modes), m, c, cfg)
}

/// [`amplitude_constrained_solve`] from an explicit initial state; its
/// `cos m theta` and `sin m theta` coefficients are overwritten.
pub fn amplitude_constrained_solve_from(
    initial: &PatchState,
    m: usize,
    c: f64,
    cfg: &SolveConfig,
) -> Result<BranchRecord> {
    cfg.validate()?;
    let modes = initial.boundary.modes();
    if m < 2 || m > modes {
        return Err(VStateError::InvalidArgument(format!(
            "amplitude mode {m} must lie in 2..={modes}"
        )));
    }
    if !(c.abs() <= MAX_AMPLITUDE) {
        return Err(VStateError::InvalidArgument(format!(
            "amplitude {c} exceeds the resolvable range |c| <= {MAX_AMPLITUDE}"
        )));
    }
    let op = ContourOperator::new(modes, cfg.quadrature_for(modes))?;
    if c == 0.0 {
        let disk = PatchState::disk(initial.omega, modes);
        let r = op.residual(&disk)?.sup_norm;
        return Ok(record(&disk, m, r, 0.0, cfg));
    }
    let mut cos = initial.boundary.cos_coeffs().to_vec();
    let mut sin = initial.boundary.sin_coeffs().to_vec();
    cos[m - 1] = c;
    sin[m - 1] = 0.0;
    if cfg.symmetry == Symmetry::EvenCosine {
        sin.iter_mut().for_each(|s| *s = 0.0);
    }
    let template = PatchState::new(FourierBoundary::new(1.0, cos, sin)?, initial.omega)?;
    let layout = Layout::new(modes, cfg.symmetry, &[Slot::Cos(m), Slot::Sin(m)], true);
    let run = newton_core(&op, &layout, &template, cfg, None)?;
    check_resolved(&run.state.boundary)?;
    Ok(record(&run.state, m, *run.residual_history.last().unwrap_or(&0.0), 0.0, cfg))
}

/// Rejects solutions whose top quarter of modes carries visible energy.
fn check_resolved(b: &FourierBoundary) -> Result<()> {
    let n = b.modes();
    let tail = (n - n / 4 + 1..=n)
        .map(|k| {
            let (a, s) = b.mode(k);
            a.abs().max(s.abs())
        })
        .fold(0.0, f64::max);
    if tail > 1e-8 {
        return Err(VStateError::Divergence(DivergenceReport {
            reason: format!("solution not resolved with {n} modes (tail coefficient {tail:.2e})"),
            residual_history: vec![],
        }));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Completed,
    /// Step size fell below the minimum; the branch holds the points found so far.
    StepTooSmall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub mode: usize,
    pub records: Vec<BranchRecord>,
    pub status: BranchStatus,
}

impl Branch {
    /// CSV with columns `step, arclength, omega, amplitude, residual, classification`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,arclength,omega,amplitude,residual,classification\n");
        for (i, r) in self.records.iter().enumerate() {
            s.push_str(&format!(
                "{i},{:.17e},{:.17e},{:.17e},{:.6e},{}\n",
                r.arclength, r.omega, r.amplitude, r.residual, r.classification
            ));
        }
        s
    }

    /// Record closest in amplitude to `c`.
    pub fn nearest(&self, c: f64) -> Option<&BranchRecord> {
        self.records
            .iter()
            .min_by(|a, b| (a.amplitude - c).abs().total_cmp(&(b.amplitude - c).abs()))
    }

    /// Branch point with `cos m theta` coefficient exactly `c`, solved from the
    /// nearest record.
    pub fn point_at_amplitude(&self, c: f64, cfg: &SolveConfig) -> Result<BranchRecord> {
        let near = self
            .nearest(c)
            .ok_or_else(|| VStateError::InvalidArgument("empty branch".into()))?;
        let even = SolveConfig {
            symmetry: Symmetry::EvenCosine,
            ..*cfg
        };
        amplitude_constrained_solve_from(&near.state(), self.mode, c, &even)
    }
}

/// Pseudo-arclength continuation of the `m`-fold branch in the even-cosine
/// subspace, starting at the bifurcation point `(m - 1) / (2m)`.
///
/// The first record is the disk at the bifurcation point; the next two are
/// amplitude-constrained solves at `cos m theta` amplitudes `ds` and `2 ds`.
/// Later steps use a secant predictor and a Newton corrector on the system
/// bordered by the arclength equation. `steps` counts records after the first.
pub fn continue_branch(m: usize, steps: usize, ds: f64, modes: usize, cfg: &SolveConfig) -> Result<Branch> {
    cfg.validate()?;
    if !(ds > 0.0) {
        return Err(VStateError::InvalidArgument(format!("ds must be positive, got {ds}")));
    }
    let omega_m = bifurcation_omega(m)?;
    let cfg = SolveConfig {
        symmetry: Symmetry::EvenCosine,
        ..*cfg
    };
    let op = ContourOperator::new(modes, cfg.quadrature_for(modes))?;
    let layout = Layout::new(modes, Symmetry::EvenCosine, &[], true);
    let mut records = vec![record(&PatchState::disk(omega_m, modes), m, 0.0, 0.0, &cfg)];
    let mut points: Vec<DVector<f64>> = vec![layout.pack(&records[0].state())];
    let mut arclength = 0.0;
    for i in 1..=steps.min(2) {
        let prev = records.last().expect("non-empty").state();
        let rec = amplitude_constrained_solve_from(&prev, m, i as f64 * ds, &cfg)?;
        let u = layout.pack(&rec.state());
        arclength += (&u - points.last().expect("non-empty")).norm();
        points.push(u);
        records.push(BranchRecord { arclength, ..rec });
    }
    let ds_min = ds / 64.0;
    let mut h = ds;
    let mut status = BranchStatus::Completed;
    while records.len() < steps + 1 {
        let n = points.len();
        let chord = &points[n - 1] - &points[n - 2];
        let tangent = &chord / chord.norm();
        let anchor = points[n - 1].clone();
        let predicted = &anchor + &tangent * h;
        let template = layout.unpack(&predicted, &records[n - 1].state());
        let attempt = template.and_then(|t| {
            let arc = Arclength {
                tangent: &tangent,
                anchor: &anchor,
                ds: h,
            };
            newton_core(&op, &layout, &t, &cfg, Some(&arc))
        });
        match attempt {
            Ok(run) if run.iterations <= 8 => {
                arclength += (&run.unknowns - &anchor).norm();
                let r = op.residual_even(&run.state)?.sup_norm;
                points.push(run.unknowns);
                records.push(record(&run.state, m, r, arclength, &cfg));
                h = (h * 1.5).min(ds);
            }
            _ => {
                h *= 0.5;
                if h < ds_min {
                    status = BranchStatus::StepTooSmall;
                    break;
                }
            }
        }
    }
    Ok(Branch {
        mode: m,
        records,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Half-width of the `Omega` window and bound on `|D Δ unit disk|`.
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub omega_center: f64,
    pub modes: usize,
    /// Mode whose sine part pins the rotation.
    pub pinned_mode: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            trials: 200,
            seed: 7,
            omega_center: 0.25,
            modes: 16,
            pinned_mode: 2,
        }
    }
}

/// Largest admissible scan `delta`.
pub const MAX_SCAN_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOutcome {
    Disk,
    Ellipse,
    Other,
    /// Newton did not converge; not a counterexample.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub index: usize,
    pub omega: f64,
    pub initial_sym_diff: f64,
    pub converged_to: ScanOutcome,
    pub residual: f64,
    pub sym_diff: f64,
    pub classification_residual: f64,
    pub center_offset: f64,
    pub fold_symmetry: Option<usize>,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub disk: usize,
    pub ellipse: usize,
    pub other: usize,
    pub inconclusive: usize,
    /// Indices of trials classified `other`.
    pub flagged: Vec<usize>,
    pub trials: Vec<TrialOutcome>,
}

impl ScanReport {
    pub fn converged(&self) -> usize {
        self.disk + self.ellipse + self.other
    }
}

/// Random perturbation with Gaussian coefficients decaying like `k^-3`,
/// scaled so that `|D Δ unit disk|` equals `target`.
fn random_boundary(rng: &mut ChaCha8Rng, modes: usize, target: f64) -> Result<FourierBoundary> {
    if target == 0.0 {
        return Ok(FourierBoundary::unit_disk(modes));
    }
    let mut cos = Vec::with_capacity(modes);
    let mut sin = Vec::with_capacity(modes);
    for k in 1..=modes {
        let w = (k as f64).powi(-3);
        cos.push(w * rng.sample::<f64, _>(StandardNormal));
        sin.push(w * rng.sample::<f64, _>(StandardNormal));
    }
    let scaled = |s: f64| {
        FourierBoundary::new(
            1.0,
            cos.iter().map(|a| a * s).collect(),
            sin.iter().map(|b| b * s).collect(),
        )
    };
    // the symmetric difference is close to linear in the scale
    let mut s = target / geometry::sym_diff_to_unit_disk(&scaled(1e-3)?) * 1e-3;
    for _ in 0..3 {
        let d = geometry::sym_diff_to_unit_disk(&scaled(s)?);
        s *= target / d;
    }
    scaled(s * (1.0 - 1e-6))
}

fn run_trial(index: usize, scan: &ScanConfig, cfg: &SolveConfig) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(scan.seed);
    rng.set_stream(index as u64);
    let omega = scan.omega_center + scan.delta * (2.0 * rng.gen::<f64>() - 1.0);
    let target = scan.delta * rng.gen_range(0.1..=1.0);
    let b = random_boundary(&mut rng, scan.modes, target)?;
    let initial_sym_diff = geometry::sym_diff_to_unit_disk(&b);
    let solve = SolveConfig {
        symmetry: Symmetry::Full,
        fix_rotation: true,
        pinned_mode: Some(scan.pinned_mode),
        ..*cfg
    };
    let mut out = TrialOutcome {
        index,
        omega,
        initial_sym_diff,
        converged_to: ScanOutcome::Inconclusive,
        residual: f64::NAN,
        sym_diff: f64::NAN,
        classification_residual: f64::NAN,
        center_offset: f64::NAN,
        fold_symmetry: None,
        iterations: 0,
        failure: None,
    };
    match newton_solve(&PatchState::new(b, omega)?, &solve) {
        Ok(sol) => {
            let bnd = &sol.state.boundary;
            let tol = solve.classify_tol();
            let (class, res) = classify_state(bnd, tol);
            let c = geometry::center_of_vorticity(bnd);
            out.converged_to = match class {
                Classification::Disk => ScanOutcome::Disk,
                Classification::Ellipse => ScanOutcome::Ellipse,
                Classification::Other => ScanOutcome::Other,
            };
            out.residual = sol.residual();
            out.sym_diff = geometry::sym_diff_to_unit_disk(bnd);
            out.classification_residual = res;
            out.center_offset = c[0].hypot(c[1]);
            out.fold_symmetry = geometry::fold_symmetry(bnd, tol);
            out.iterations = sol.iterations;
        }
        Err(e) => {
            out.failure = Some(e.to_string());
        }
    }
    Ok(out)
}

/// Randomized search for V-states near the disk with `|Omega - center| <= delta`
/// and `|D Δ unit disk| <= delta`. Trials run in parallel with per-trial
/// random streams derived from `(seed, index)`.
pub fn rigidity_scan(scan: &ScanConfig, cfg: &SolveConfig) -> Result<ScanReport> {
    cfg.validate()?;
    if !(0.0..=MAX_SCAN_DELTA).contains(&scan.delta) {
        return Err(VStateError::InvalidArgument(format!(
            "scan delta must lie in [0, {MAX_SCAN_DELTA}], got {}",
            scan.delta
        )));
    }
    if scan.pinned_mode < 2 || scan.pinned_mode > scan.modes {
        return Err(VStateError::InvalidArgument(format!(
            "pinned mode {} outside 2..={}",
            scan.pinned_mode, scan.modes
        )));
    }
    let trials = (0..scan.trials)
        .into_par_iter()
        .map(|i| run_trial(i, scan, cfg))
        .collect::<Result<Vec<_>>>()?;
    let count = |o: ScanOutcome| trials.iter().filter(|t| t.converged_to == o).count();
    Ok(ScanReport {
        config: *scan,
        disk: count(ScanOutcome::Disk),
        ellipse: count(ScanOutcome::Ellipse),
        other: count(ScanOutcome::Other),
        inconclusive: count(ScanOutcome::Inconclusive),
        flagged: trials
            .iter()
            .filter(|t| t.converged_to == ScanOutcome::Other)
            .map(|t| t.index)
            .collect(),
        trials,
    })
}

/// Angle grid helper for plot output: `(theta, R(theta))` pairs.
pub fn boundary_samples(b: &FourierBoundary, points: usize) -> Vec<(f64, f64)> {
    (0..points)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / points as f64;
            (t, b.eval_radius(t))
        })
        .collect()
}
