//! Command-line front end. Every command writes its artifact (JSON or CSV)
//! and a [`RunManifest`] next to it.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical non-convergence.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary::{FourierBoundary, PatchState, DEFAULT_MODES};
use crate::contour::{ContourOperator, QuadratureConfig};
use crate::error::{Result, VStateError};
use crate::geometry::{self, ShapeReport};
use crate::linearization::{DiskLinearization, KernelMode};
use crate::solver::{self, ScanConfig, SolveConfig, Symmetry};
use crate::stream::{GradientDeviation, StreamField};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vstate", version, about = "Rotating vortex patches: solve, continue, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Newton solve at fixed angular velocity.
    Solve(SolveArgs),
    /// Continue an m-fold branch from its bifurcation point.
    Continue(ContinueArgs),
    /// Linearized multipliers of the disk.
    Spectrum(SpectrumArgs),
    /// Residual and stream-function certificates of a patch.
    Verify(VerifyArgs),
    /// Shape measures and size estimates of a patch.
    Report(ReportArgs),
    /// Randomized rigidity scan near a bifurcation point.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryArg {
    Full,
    EvenCosine,
}

impl From<SymmetryArg> for Symmetry {
    fn from(s: SymmetryArg) -> Self {
        match s {
            SymmetryArg::Full => Symmetry::Full,
            SymmetryArg::EvenCosine => Symmetry::EvenCosine,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// CSV with boundary samples (and branch curves) for plotting.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub omega: f64,
    /// `disk`, `ellipse:a,b` or a patch JSON file.
    #[arg(long, default_value = "disk")]
    pub init: String,
    /// Perturbation added to the initial boundary, e.g. `cos2:0.05` or `sin3:0.01`.
    #[arg(long, allow_hyphen_values = true)]
    pub perturb: Vec<String>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 12)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = SymmetryArg::Full)]
    pub symmetry: SymmetryArg,
    #[arg(long, default_value_t = 1.0)]
    pub damping: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ContinueArgs {
    /// Symmetry index m of the branch.
    #[arg(long, short)]
    pub m: usize,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub ds: f64,
    #[arg(long, default_value_t = 32)]
    pub modes: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub omega: f64,
    #[arg(long, default_value_t = 16)]
    pub modes: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value_t = geometry::DEFAULT_CLASSIFY_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.25)]
    pub omega_center: f64,
    #[arg(long, default_value_t = 16)]
    pub modes: usize,
    #[arg(long, default_value_t = 2)]
    pub pinned_mode: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residual_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn digest(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path)?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Path of the manifest that accompanies `output`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Accumulates what a command read, wrote and measured.
struct Run {
    manifest: RunManifest,
    out: Option<PathBuf>,
}

impl Run {
    fn new<P: Serialize>(command: &str, params: &P, seed: Option<u64>, out: &OutputArgs) -> Self {
        let now = Utc::now();
        Self {
            manifest: RunManifest {
                command: command.into(),
                parameters: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
                seed,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                started_at: now,
                finished_at: now,
                inputs: vec![],
                outputs: vec![],
                status: "ok".into(),
                residual: None,
                residual_history: vec![],
                error: None,
            },
            out: out.output.clone(),
        }
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.inputs.push(digest(path)?);
        Ok(())
    }

    fn write_file(&mut self, path: &Path, text: &str) -> Result<()> {
        fs::write(path, text)?;
        self.manifest.outputs.push(digest(path)?);
        Ok(())
    }

    /// Main artifact: the output file, or stdout.
    fn emit(&mut self, text: &str) -> Result<()> {
        match self.out.clone() {
            Some(p) => self.write_file(&p, text),
            None => {
                let mut o = std::io::stdout().lock();
                o.write_all(text.as_bytes())?;
                if !text.ends_with('\n') {
                    o.write_all(b"\n")?;
                }
                Ok(())
            }
        }
    }

    fn finish(mut self, err: Option<&VStateError>) -> i32 {
        self.manifest.finished_at = Utc::now();
        let code = match err {
            None => EXIT_OK,
            Some(e) => {
                if let VStateError::Divergence(r) = e {
                    if self.manifest.residual_history.is_empty() {
                        self.manifest.residual_history = r.residual_history.clone();
                    }
                }
                self.manifest.error = Some(e.to_string());
                let code = exit_code(e);
                self.manifest.status = if code == EXIT_DIVERGED { "diverged" } else { "error" }.into();
                code
            }
        };
        let text = serde_json::to_string_pretty(&self.manifest).unwrap_or_default();
        match &self.out {
            Some(p) => {
                if let Err(e) = fs::write(manifest_path(p), text) {
                    eprintln!("vstate: cannot write manifest: {e}");
                    return code.max(EXIT_INPUT);
                }
            }
            None => eprintln!("{text}"),
        }
        code
    }
}

pub fn exit_code(e: &VStateError) -> i32 {
    match e {
        VStateError::Divergence(_) | VStateError::RankDeficient { .. } | VStateError::SingularGeometry { .. } => {
            EXIT_DIVERGED
        }
        _ => EXIT_INPUT,
    }
}

fn parse_perturbation(spec: &str) -> Result<(bool, usize, f64)> {
    let bad = || VStateError::InvalidArgument(format!("perturbation `{spec}` is not of the form cosK:A or sinK:A"));
    let (mode, amp) = spec.split_once(':').ok_or_else(bad)?;
    let (is_cos, k) = if let Some(k) = mode.strip_prefix("cos") {
        (true, k)
    } else if let Some(k) = mode.strip_prefix("sin") {
        (false, k)
    } else {
        return Err(bad());
    };
    let k: usize = k.parse().map_err(|_| bad())?;
    let a: f64 = amp.parse().map_err(|_| bad())?;
    if k == 0 {
        return Err(bad());
    }
    Ok((is_cos, k, a))
}

fn initial_state(args: &SolveArgs, run: &mut Run) -> Result<PatchState> {
    let modes = args.modes.unwrap_or(DEFAULT_MODES);
    let mut state = if args.init == "disk" {
        PatchState::disk(args.omega, modes)
    } else if let Some(ab) = args.init.strip_prefix("ellipse:") {
        let parsed: Vec<f64> = ab
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| VStateError::InvalidArgument(format!("cannot parse ellipse axes `{ab}`")))?;
        let [a, b] = parsed[..] else {
            return Err(VStateError::InvalidArgument(format!("ellipse needs two axes, got `{ab}`")));
        };
        PatchState::new(FourierBoundary::from_ellipse(a, b, modes)?, args.omega)?
    } else {
        let path = Path::new(&args.init);
        run.input(path)?;
        let p = PatchState::read(path)?;
        let b = match args.modes {
            Some(n) => p.boundary.with_modes(n),
            None => p.boundary,
        };
        PatchState::new(b, args.omega)?
    };
    if !args.perturb.is_empty() {
        let b = &state.boundary;
        let mut cos = b.cos_coeffs().to_vec();
        let mut sin = b.sin_coeffs().to_vec();
        let lam = b.mean_radius();
        for spec in &args.perturb {
            let (is_cos, k, a) = parse_perturbation(spec)?;
            if k > cos.len() {
                return Err(VStateError::InvalidArgument(format!(
                    "perturbation mode {k} exceeds the {} resolved modes",
                    cos.len()
                )));
            }
            let slot = if is_cos { &mut cos[k - 1] } else { &mut sin[k - 1] };
            *slot += a;
        }
        state = PatchState::new(FourierBoundary::new(lam, cos, sin)?, state.omega)?;
    }
    Ok(state)
}

fn boundary_csv(b: &FourierBoundary, points: usize) -> String {
    let mut s = String::from("theta,radius,x,y\n");
    for (t, r) in solver::boundary_samples(b, points) {
        s.push_str(&format!("{t:.17e},{r:.17e},{:.17e},{:.17e}\n", r * t.cos(), r * t.sin()));
    }
    s
}

const PLOT_POINTS: usize = 512;

fn cmd_solve(args: &SolveArgs) -> i32 {
    let mut run = Run::new("solve", args, None, &args.out);
    let res = (|| {
        let init = initial_state(args, &mut run)?;
        let cfg = SolveConfig {
            newton_tol: args.tol,
            max_iters: args.max_iters,
            symmetry: args.symmetry.into(),
            damping: args.damping,
            ..SolveConfig::default()
        };
        let out = solver::newton_solve(&init, &cfg)?;
        run.manifest.residual = Some(out.residual());
        run.manifest.residual_history = out.residual_history.clone();
        run.emit(&out.state.to_json()?)?;
        if let Some(p) = &args.out.plot_data {
            run.write_file(p, &boundary_csv(&out.state.boundary, PLOT_POINTS))?;
        }
        Ok(())
    })();
    report(run, res)
}

fn cmd_continue(args: &ContinueArgs) -> i32 {
    let mut run = Run::new("continue", args, None, &args.out);
    let res = (|| {
        let cfg = SolveConfig {
            newton_tol: args.tol,
            ..SolveConfig::even()
        };
        let branch = solver::continue_branch(args.m, args.steps, args.ds, args.modes, &cfg)?;
        run.manifest.residual = branch.records.iter().map(|r| r.residual).reduce(f64::max);
        run.manifest.status = serde_json::to_value(branch.status)?
            .as_str()
            .unwrap_or("ok")
            .to_string();
        run.emit(&branch.to_csv())?;
        if let Some(p) = &args.out.plot_data {
            let mut s = String::from("step,theta,radius,x,y\n");
            for (i, r) in branch.records.iter().enumerate() {
                for (t, rad) in solver::boundary_samples(&r.boundary, PLOT_POINTS) {
                    s.push_str(&format!("{i},{t:.17e},{rad:.17e},{:.17e},{:.17e}\n", rad * t.cos(), rad * t.sin()));
                }
            }
            run.write_file(p, &s)?;
        }
        Ok(())
    })();
    report(run, res)
}

fn cmd_spectrum(args: &SpectrumArgs) -> i32 {
    let mut run = Run::new("spectrum", args, None, &args.out);
    let res = (|| {
        let lin = DiskLinearization::new(args.modes, QuadratureConfig::for_modes(args.modes))?;
        let s = lin.spectrum(args.omega)?;
        let mut csv = String::from("k,mu,mu_sine,kernel\n");
        for k in 1..=args.modes {
            let in_kernel = s.kernel_modes.contains(&KernelMode::Cos(k));
            csv.push_str(&format!(
                "{k},{:.17e},{:.17e},{in_kernel}\n",
                s.multipliers[k - 1],
                s.sine_multipliers[k - 1]
            ));
        }
        run.emit(&csv)?;
        if let Some(p) = &args.out.plot_data {
            run.write_file(p, &serde_json::to_string_pretty(&s)?)?;
        }
        Ok(())
    })();
    report(run, res)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub omega: f64,
    pub modes: usize,
    pub residual: f64,
    pub boundary_flatness: f64,
    pub contour_slope_defect: f64,
    pub center: [f64; 2],
    pub laplacian_inside: f64,
    pub laplacian_outside: f64,
}

pub fn verify_patch(p: &PatchState) -> Result<VerifyReport> {
    let p = PatchState::new(p.boundary.normalize_mean(), p.omega)?;
    let modes = p.boundary.modes();
    let residual = ContourOperator::new(modes, QuadratureConfig::for_modes(modes))?
        .residual(&p)?
        .sup_norm;
    let field = StreamField::with_default_nodes(&p)?;
    let rmin = geometry::radial_bounds(&p.boundary).min;
    Ok(VerifyReport {
        omega: p.omega,
        modes,
        residual,
        boundary_flatness: field.boundary_flatness()?,
        contour_slope_defect: field.contour_slope_defect()?,
        center: geometry::center_of_vorticity(&p.boundary),
        laplacian_inside: field.discrete_laplacian([0.5 * rmin, 0.0], 1e-3)?,
        laplacian_outside: field.discrete_laplacian([0.0, 3.0], 1e-3)?,
    })
}

fn cmd_verify(args: &VerifyArgs) -> i32 {
    let mut run = Run::new("verify", args, None, &args.out);
    let res = (|| {
        run.input(&args.input)?;
        let p = PatchState::read(&args.input)?;
        let r = verify_patch(&p)?;
        run.manifest.residual = Some(r.residual);
        run.emit(&serde_json::to_string_pretty(&r)?)?;
        if let Some(path) = &args.out.plot_data {
            run.write_file(path, &boundary_csv(&p.boundary, PLOT_POINTS))?;
        }
        Ok(())
    })();
    report(run, res)
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchReport {
    pub omega: f64,
    pub shape: ShapeReport,
    pub fold_symmetry: Option<usize>,
    pub gradient_deviation: GradientDeviation,
    /// `(radial_max - 1) / sqrt(delta)` and `(1 - radial_min) / sqrt(delta)`.
    pub radial_constants: Option<[f64; 2]>,
    /// `gradient_deviation / sqrt(delta)`.
    pub gradient_constant: Option<f64>,
}

pub fn report_patch(p: &PatchState, tol: f64) -> Result<PatchReport> {
    let b = p.boundary.normalize_mean();
    let shape = geometry::shape_report(&b, tol)?;
    let p = PatchState::new(b, p.omega)?;
    let gd = crate::stream::gradient_deviation(&p)?;
    let delta = shape.sym_diff_to_unit_disk;
    let sq = delta.sqrt();
    Ok(PatchReport {
        omega: p.omega,
        fold_symmetry: geometry::fold_symmetry(&p.boundary, tol),
        radial_constants: (delta > 0.0).then(|| [(shape.radial_max - 1.0) / sq, (1.0 - shape.radial_min) / sq]),
        gradient_constant: (delta > 0.0).then(|| gd.max() / sq),
        gradient_deviation: gd,
        shape,
    })
}

fn cmd_report(args: &ReportArgs) -> i32 {
    let mut run = Run::new("report", args, None, &args.out);
    let res = (|| {
        run.input(&args.input)?;
        let p = PatchState::read(&args.input)?;
        let r = report_patch(&p, args.tol)?;
        run.emit(&serde_json::to_string_pretty(&r)?)?;
        if let Some(path) = &args.out.plot_data {
            run.write_file(path, &boundary_csv(&p.boundary, PLOT_POINTS))?;
        }
        Ok(())
    })();
    report(run, res)
}

fn cmd_scan(args: &ScanArgs) -> i32 {
    let mut run = Run::new("scan", args, Some(args.seed), &args.out);
    let res = (|| {
        let scan = ScanConfig {
            delta: args.delta,
            trials: args.trials,
            seed: args.seed,
            omega_center: args.omega_center,
            modes: args.modes,
            pinned_mode: args.pinned_mode,
        };
        let cfg = SolveConfig {
            newton_tol: args.tol,
            ..SolveConfig::default()
        };
        let r = solver::rigidity_scan(&scan, &cfg)?;
        run.emit(&serde_json::to_string_pretty(&r)?)?;
        if let Some(path) = &args.out.plot_data {
            let mut s = String::from("index,omega,initial_sym_diff,converged_to,residual,sym_diff\n");
            for t in &r.trials {
                s.push_str(&format!(
                    "{},{:.17e},{:.17e},{},{:.6e},{:.17e}\n",
                    t.index,
                    t.omega,
                    t.initial_sym_diff,
                    serde_json::to_value(t.converged_to)?.as_str().unwrap_or(""),
                    t.residual,
                    t.sym_diff
                ));
            }
            run.write_file(path, &s)?;
        }
        Ok(())
    })();
    report(run, res)
}

fn report(run: Run, res: Result<()>) -> i32 {
    if let Err(e) = &res {
        eprintln!("vstate: {e}");
        if let VStateError::Divergence(r) = e {
            eprintln!("residual history: {:?}", r.residual_history);
        }
    }
    run.finish(res.as_ref().err())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Continue(a) => cmd_continue(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
        Command::Scan(a) => cmd_scan(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_specs() {
        assert_eq!(parse_perturbation("cos2:0.3").unwrap(), (true, 2, 0.3));
        assert_eq!(parse_perturbation("sin5:-1e-3").unwrap(), (false, 5, -1e-3));
        assert!(parse_perturbation("cos0:1").is_err());
        assert!(parse_perturbation("tan2:1").is_err());
        assert!(parse_perturbation("cos2").is_err());
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/p.json")), PathBuf::from("out/p.json.manifest.json"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["vstate", "solve"]), EXIT_INPUT);
        assert_eq!(run(["vstate", "frobnicate"]), EXIT_INPUT);
        assert_eq!(run(["vstate", "--help"]), EXIT_OK);
    }
}
