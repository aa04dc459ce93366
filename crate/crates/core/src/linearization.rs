//! Linearization of the contour functional: multipliers at the disk, the
//! `Omega`-cross derivative, bifurcation points and finite-difference
//! Jacobians at arbitrary states.
//!
//! At the disk the linearization is diagonal in Fourier modes: `cos k theta`
//! is mapped to `mu_k(Omega) sin k theta` and `sin k theta` to
//! `-mu_k(Omega) cos k theta`. `mu_k` is affine in `Omega` with slope `-k`,
//! and its root is the bifurcation point of the `k`-fold branch.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{FourierBoundary, PatchState};
use crate::contour::{ContourOperator, QuadratureConfig, ResidualField};
use crate::error::{Result, VStateError};

/// Unscaled kernel-detection threshold.
pub const ZERO_TOLERANCE: f64 = 1e-8;

/// `(m - 1) / (2m)`, the angular velocity at which `m`-fold V-states branch
/// off the disk.
pub fn bifurcation_omega(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(VStateError::InvalidArgument(format!(
            "bifurcation mode must be at least 2, got {m}"
        )));
    }
    Ok((m as f64 - 1.0) / (2.0 * m as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum KernelMode {
    OmegaDirection,
    Cos(usize),
    Sin(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub omega: f64,
    /// `mu_k` from the action on `cos k theta`, `k = 1..N`.
    pub multipliers: Vec<f64>,
    /// Same quantity measured from the action on `sin k theta`.
    pub sine_multipliers: Vec<f64>,
    pub kernel_modes: Vec<KernelMode>,
    pub zero_tolerance: f64,
}

/// Least-squares fit `mu_k(1/4) ~ scale (1 - k/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternFit {
    pub scale: f64,
    /// `|mu - scale (1 - k/2)|_2 / |mu|_2`.
    pub relative_residual: f64,
}

/// Dense Jacobian of the residual coefficients with respect to the boundary
/// coefficients and `Omega`.
///
/// Columns: `a_1..a_N, b_1..b_N, Omega`. Rows: sine coefficients `1..N`
/// followed by cosine coefficients `1..N`.
#[derive(Debug, Clone)]
pub struct JacobianMatrix {
    pub matrix: DMatrix<f64>,
    pub base_point: PatchState,
    pub step: f64,
}

impl JacobianMatrix {
    /// The `2N x 2N` block acting on boundary coefficients.
    pub fn boundary_block(&self) -> DMatrix<f64> {
        let n = self.base_point.boundary.modes();
        self.matrix.columns(0, 2 * n).into_owned()
    }

    pub fn omega_column(&self) -> Vec<f64> {
        let n = self.base_point.boundary.modes();
        self.matrix.column(2 * n).iter().copied().collect()
    }
}

/// Residual coefficients stacked as `[sine_1..N, cosine_1..N]`.
pub fn stacked_coefficients(r: &ResidualField) -> Vec<f64> {
    r.sine_coeffs.iter().chain(&r.cosine_coeffs).copied().collect()
}

/// Finite-difference linearization of the functional about the unit disk.
pub struct DiskLinearization {
    op: ContourOperator,
    step: f64,
}

impl DiskLinearization {
    pub fn new(modes: usize, config: QuadratureConfig) -> Result<Self> {
        let step = config.fd_step;
        if !(1e-8..=1e-4).contains(&step) {
            return Err(VStateError::InvalidArgument(format!(
                "finite-difference step must lie in [1e-8, 1e-4], got {step}"
            )));
        }
        Ok(Self {
            op: ContourOperator::new(modes, config)?,
            step,
        })
    }

    pub fn modes(&self) -> usize {
        self.op.modes()
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.modes() {
            return Err(VStateError::InvalidArgument(format!(
                "mode {k} outside 1..={}",
                self.modes()
            )));
        }
        Ok(())
    }

    fn perturbed(&self, k: usize, amplitude: f64, sine: bool) -> FourierBoundary {
        let n = self.modes();
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        if sine {
            sin[k - 1] = amplitude;
        } else {
            cos[k - 1] = amplitude;
        }
        FourierBoundary::new(1.0, cos, sin).expect("small perturbation of the disk")
    }

    fn residual(&self, omega: f64, b: FourierBoundary) -> Result<ResidualField> {
        self.op.residual(&PatchState { boundary: b, omega })
    }

    /// `mu_k(Omega)`: sine-`k` coefficient of the central difference of
    /// `F(Omega, h cos k theta)` in `h`.
    pub fn multiplier(&self, omega: f64, k: usize) -> Result<f64> {
        self.check_mode(k)?;
        let h = self.step;
        let plus = self.residual(omega, self.perturbed(k, h, false))?;
        let minus = self.residual(omega, self.perturbed(k, -h, false))?;
        Ok((plus.sine_coeffs[k - 1] - minus.sine_coeffs[k - 1]) / (2.0 * h))
    }

    /// `mu_k(Omega)` measured on `sin k theta`, which maps to `-mu_k cos k theta`.
    pub fn sine_multiplier(&self, omega: f64, k: usize) -> Result<f64> {
        self.check_mode(k)?;
        let h = self.step;
        let plus = self.residual(omega, self.perturbed(k, h, true))?;
        let minus = self.residual(omega, self.perturbed(k, -h, true))?;
        Ok(-(plus.cosine_coeffs[k - 1] - minus.cosine_coeffs[k - 1]) / (2.0 * h))
    }

    /// Sine-`k` coefficient of the mixed second difference of `F` in
    /// `(Omega, amplitude of cos k theta)` at the disk; analytically `-k`.
    pub fn omega_cross_derivative(&self, omega: f64, k: usize) -> Result<f64> {
        self.check_mode(k)?;
        let h = self.step;
        let dw = 1e-3;
        let mut acc = 0.0;
        for (sw, sh) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let r = self.residual(omega + sw * dw, self.perturbed(k, sh * h, false))?;
            acc += sw * sh * r.sine_coeffs[k - 1];
        }
        Ok(acc / (4.0 * h * dw))
    }

    /// Root of `mu_m(Omega)` by secant iteration.
    pub fn multiplier_root(&self, m: usize) -> Result<f64> {
        let (mut w0, mut w1) = (0.2, 0.3);
        let mut f0 = self.multiplier(w0, m)?;
        let mut f1 = self.multiplier(w1, m)?;
        for _ in 0..20 {
            if f1 == f0 {
                break;
            }
            let w2 = w1 - f1 * (w1 - w0) / (f1 - f0);
            w0 = w1;
            f0 = f1;
            w1 = w2;
            f1 = self.multiplier(w1, m)?;
            if (w1 - w0).abs() < 1e-15 {
                break;
            }
        }
        Ok(w1)
    }

    /// Fit of `mu_k(1/4)`, `k = 1..=kmax`, against `1 - k/2`.
    pub fn pattern_fit(&self, kmax: usize) -> Result<PatternFit> {
        let mu = (1..=kmax)
            .map(|k| self.multiplier(0.25, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(fit_pattern(&mu))
    }

    /// Multipliers for every mode and the kernel of the full-space
    /// linearization at `Omega`. The zero tolerance is [`ZERO_TOLERANCE`]
    /// times the fitted scale of the multiplier pattern.
    pub fn spectrum(&self, omega: f64) -> Result<SpectrumReport> {
        let n = self.modes();
        let fit = self.pattern_fit(n.min(8))?;
        let zero_tolerance = ZERO_TOLERANCE * fit.scale.abs();
        let pairs = (1..=n)
            .into_par_iter()
            .map(|k| Ok((self.multiplier(omega, k)?, self.sine_multiplier(omega, k)?)))
            .collect::<Result<Vec<_>>>()?;
        let (multipliers, sine_multipliers): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let mut kernel_modes = vec![KernelMode::OmegaDirection];
        for k in 1..=n {
            if multipliers[k - 1].abs() <= zero_tolerance {
                kernel_modes.push(KernelMode::Cos(k));
            }
            if sine_multipliers[k - 1].abs() <= zero_tolerance {
                kernel_modes.push(KernelMode::Sin(k));
            }
        }
        Ok(SpectrumReport {
            omega,
            multipliers,
            sine_multipliers,
            kernel_modes,
            zero_tolerance,
        })
    }
}

/// Least-squares scale `c` in `mu_k ~ c (1 - k/2)` for `mu = [mu_1, mu_2, ...]`.
pub fn fit_pattern(mu: &[f64]) -> PatternFit {
    let basis: Vec<f64> = (1..=mu.len()).map(|k| 1.0 - k as f64 / 2.0).collect();
    let scale = mu.iter().zip(&basis).map(|(m, b)| m * b).sum::<f64>()
        / basis.iter().map(|b| b * b).sum::<f64>();
    let res = mu
        .iter()
        .zip(&basis)
        .map(|(m, b)| (m - scale * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm = mu.iter().map(|m| m * m).sum::<f64>().sqrt();
    PatternFit {
        scale,
        relative_residual: if norm > 0.0 { res / norm } else { 0.0 },
    }
}

/// `mu_k(Omega)` with a fresh operator; see [`DiskLinearization::multiplier`].
pub fn disk_multiplier_numeric(omega: f64, k: usize, modes: usize, h: f64) -> Result<f64> {
    let q = QuadratureConfig {
        fd_step: h,
        ..QuadratureConfig::for_modes(modes)
    };
    DiskLinearization::new(modes, q)?.multiplier(omega, k)
}

/// Mixed `(Omega, cos k theta)` derivative at the disk.
pub fn omega_cross_derivative(k: usize, modes: usize) -> Result<f64> {
    DiskLinearization::new(modes, QuadratureConfig::for_modes(modes))?.omega_cross_derivative(0.25, k)
}

/// Central-difference Jacobian of the residual coefficients at `p`.
pub fn jacobian(p: &PatchState, q: &QuadratureConfig, h: f64) -> Result<JacobianMatrix> {
    let n = p.boundary.modes();
    let op = ContourOperator::new(n, *q)?;
    let eval = |dir: usize, s: f64| -> Result<Vec<f64>> {
        let mut cos = p.boundary.cos_coeffs().to_vec();
        let mut sin = p.boundary.sin_coeffs().to_vec();
        let mut omega = p.omega;
        match dir {
            d if d < n => cos[d] += s,
            d if d < 2 * n => sin[d - n] += s,
            _ => omega += s,
        }
        let b = FourierBoundary::new(p.boundary.mean_radius(), cos, sin)?;
        Ok(stacked_coefficients(&op.residual(&PatchState { boundary: b, omega })?))
    };
    let columns = (0..=2 * n)
        .into_par_iter()
        .map(|j| {
            let plus = eval(j, h)?;
            let minus = eval(j, -h)?;
            Ok(plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = DMatrix::from_fn(2 * n, 2 * n + 1, |i, j| columns[j][i]);
    Ok(JacobianMatrix {
        matrix,
        base_point: p.clone(),
        step: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bifurcation_omega_values() {
        assert_eq!(bifurcation_omega(2).unwrap(), 0.25);
        assert!((bifurcation_omega(3).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!(bifurcation_omega(1).is_err());
        assert!(bifurcation_omega(0).is_err());
    }

    #[test]
    fn fit_of_exact_pattern() {
        let mu: Vec<f64> = (1..=8).map(|k| -0.5 * (1.0 - k as f64 / 2.0)).collect();
        let fit = fit_pattern(&mu);
        assert!((fit.scale + 0.5).abs() < 1e-15);
        assert!(fit.relative_residual < 1e-15);
    }

    #[test]
    fn step_outside_range_rejected() {
        let q = QuadratureConfig {
            fd_step: 1e-2,
            ..QuadratureConfig::for_modes(4)
        };
        assert!(DiskLinearization::new(4, q).is_err());
    }

    #[test]
    fn mode_two_is_critical_at_quarter() {
        let lin = DiskLinearization::new(8, QuadratureConfig::for_modes(8)).unwrap();
        assert!(lin.multiplier(0.25, 2).unwrap().abs() < 1e-8);
        assert!(lin.multiplier(0.25, 1).unwrap().abs() >= 0.05);
        assert!(lin.multiplier(0.25, 9).is_err());
    }
}
