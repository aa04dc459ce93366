//! The contour functional
//!
//! ```text
//! F(Omega, V)(x) = Omega (1 + V(x)) V'(x) - F1(V)(x) - F2(V)(x) - F3(V)(x)
//! ```
//!
//! whose zeros with mean radius 1 are the V-states. Each `Fi` is a periodic
//! integral in `y` against `ln((V(x)-V(y))^2 + 4(1+V(x))(1+V(y)) sin^2((x-y)/2))`.
//! The logarithm is split as `ln(4 sin^2((x-y)/2)) + ln(K(x,y))` with
//!
//! ```text
//! K(x,y) = (1+V(x))(1+V(y)) + (V(x)-V(y))^2 / (4 sin^2((x-y)/2)),   K(x,x) = (1+V(x))^2 + V'(x)^2
//! ```
//!
//! so that the `ln K` part is smooth and integrated by the trapezoid rule,
//! while the `ln(4 sin^2)` part is handled by [`SingularRule`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{FourierBoundary, PatchState};
use crate::error::{Result, VStateError};
use crate::spectral;

/// Tolerance on `|mean_radius - 1|` accepted by the functional.
pub const MEAN_RADIUS_TOL: f64 = 1e-12;

/// Quadrature applied to the `ln(4 sin^2((x-y)/2))` factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularRule {
    /// Plain trapezoid rule; the integrand vanishes on the diagonal and the
    /// node `y = x` takes that limit value. Converges like `h^3`.
    LimitValue,
    /// Trapezoid rule with log-sine product weights, exact for trigonometric
    /// polynomials of degree below `M/2`.
    LogWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Inner-integral node count `M`; residuals are collocated on the same grid.
    pub nodes: usize,
    pub singular_rule: SingularRule,
    /// Finite-difference step used by Jacobians built on this configuration.
    pub fd_step: f64,
}

impl QuadratureConfig {
    /// `M = 8 (2N + 1)` with log-sine weights.
    pub fn for_modes(modes: usize) -> Self {
        Self {
            nodes: 8 * (2 * modes + 1),
            singular_rule: SingularRule::LogWeights,
            fd_step: 1e-6,
        }
    }

    /// Smallest admissible configuration, `M = 4 (2N + 1)`.
    pub fn minimal(modes: usize) -> Self {
        Self {
            nodes: 4 * (2 * modes + 1),
            ..Self::for_modes(modes)
        }
    }

    pub fn with_nodes(self, nodes: usize) -> Self {
        Self { nodes, ..self }
    }

    pub fn with_rule(self, singular_rule: SingularRule) -> Self {
        Self {
            singular_rule,
            ..self
        }
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        let needed = 4 * (2 * modes + 1);
        if self.nodes < needed {
            return Err(VStateError::InvalidArgument(format!(
                "quadrature needs at least {needed} nodes for {modes} modes, got {}",
                self.nodes
            )));
        }
        if !(self.fd_step > 0.0) {
            return Err(VStateError::InvalidArgument(format!(
                "fd_step must be positive, got {}",
                self.fd_step
            )));
        }
        Ok(())
    }
}

/// `F(Omega, V)` sampled on the collocation grid, with its trigonometric content.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub grid_values: Vec<f64>,
    pub sine_coeffs: Vec<f64>,
    pub cosine_coeffs: Vec<f64>,
    pub sup_norm: f64,
}

impl ResidualField {
    fn from_grid(grid_values: Vec<f64>, modes: usize) -> Result<Self> {
        let c = spectral::analyze(&grid_values, modes)?;
        let sup_norm = grid_values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        Ok(Self {
            grid_values,
            sine_coeffs: c.sin,
            cosine_coeffs: c.cos,
            sup_norm,
        })
    }

    /// Collocation angles of [`grid_values`](Self::grid_values).
    pub fn angles(&self) -> Vec<f64> {
        spectral::grid(self.grid_values.len(), 0.0)
    }
}

/// Per-node tables of the difference kernel, indexed by `d = (i - j) mod M`.
struct KernelTables {
    sin: Vec<f64>,
    cos: Vec<f64>,
    four_sin2: Vec<f64>,
    /// Weights multiplying the integrand's `ln(4 sin^2)` factor.
    singular: Vec<f64>,
}

impl KernelTables {
    fn build(m: usize, rule: SingularRule) -> Self {
        let h = 2.0 * PI / m as f64;
        let s = spectral::grid(m, 0.0);
        let four_sin2: Vec<f64> = s.iter().map(|t| 4.0 * (0.5 * t).sin().powi(2)).collect();
        let singular = match rule {
            SingularRule::LimitValue => four_sin2
                .iter()
                .enumerate()
                .map(|(d, q)| if d == 0 { 0.0 } else { h * q.ln() })
                .collect(),
            SingularRule::LogWeights => spectral::log_sine_weights(m),
        };
        Self {
            sin: s.iter().map(|t| t.sin()).collect(),
            cos: s.iter().map(|t| t.cos()).collect(),
            four_sin2,
            singular,
        }
    }

    fn shared(m: usize, rule: SingularRule) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, SingularRule), Arc<KernelTables>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry((m, rule))
            .or_insert_with(|| Arc::new(Self::build(m, rule)))
            .clone()
    }

    /// `4 pi [F1, F2, F3]` at grid node `i`, from samples of `R = 1 + V` and `V'`.
    fn integrals(&self, i: usize, r: &[f64], dv: &[f64]) -> Result<[f64; 3]> {
        let m = r.len();
        let h = 2.0 * PI / m as f64;
        let (ri, vpi) = (r[i], dv[i]);
        let mut acc = [0.0; 3];
        for j in 0..m {
            if j == i {
                // every integrand carries a factor vanishing on the diagonal
                continue;
            }
            let d = if i >= j { i - j } else { i + m - j };
            let diff = ri - r[j];
            let rr = ri * r[j];
            let k = rr + diff * diff / self.four_sin2[d];
            if !(k > 0.0 && k.is_finite()) {
                let y = 2.0 * PI * j as f64 / m as f64;
                return Err(VStateError::SingularGeometry {
                    x: 2.0 * PI * i as f64 / m as f64,
                    y,
                    value: k * self.four_sin2[d],
                });
            }
            let w = h * k.ln() + self.singular[d];
            acc[0] += self.sin[d] * (rr + vpi * dv[j]) * w;
            acc[1] += self.cos[d] * ri * (dv[j] - vpi) * w;
            acc[2] += self.cos[d] * vpi * diff * w;
        }
        Ok(acc)
    }
}

/// The contour functional on a fixed collocation grid, with cached kernel tables.
pub struct ContourOperator {
    modes: usize,
    config: QuadratureConfig,
    tables: Arc<KernelTables>,
}

impl ContourOperator {
    pub fn new(modes: usize, config: QuadratureConfig) -> Result<Self> {
        config.validate(modes)?;
        Ok(Self {
            modes,
            config,
            tables: KernelTables::shared(config.nodes, config.singular_rule),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    fn samples(&self, b: &FourierBoundary) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = self.config.nodes;
        let r = spectral::synthesize(1.0, b.cos_coeffs(), b.sin_coeffs(), m)?;
        let dv = spectral::synthesize_derivative(b.cos_coeffs(), b.sin_coeffs(), m)?;
        Ok((r, dv))
    }

    fn check(&self, b: &FourierBoundary) -> Result<()> {
        if (b.mean_radius() - 1.0).abs() > MEAN_RADIUS_TOL {
            return Err(VStateError::Precondition(format!(
                "the contour functional needs mean radius 1, got {}; normalize first",
                b.mean_radius()
            )));
        }
        if b.modes() > self.modes {
            return Err(VStateError::InvalidArgument(format!(
                "boundary has {} modes but the operator resolves {}",
                b.modes(),
                self.modes
            )));
        }
        Ok(())
    }

    /// `F(Omega, V)` on the grid `x_i = 2 pi i / M`.
    pub fn residual(&self, p: &PatchState) -> Result<ResidualField> {
        self.check(&p.boundary)?;
        let (r, dv) = self.samples(&p.boundary)?;
        let values = (0..r.len())
            .into_par_iter()
            .map(|i| self.value_at(i, p.omega, &r, &dv))
            .collect::<Result<Vec<_>>>()?;
        ResidualField::from_grid(values, self.modes)
    }

    /// Residual of a boundary with only cosine modes. `F` maps even `V` to
    /// odd functions, so only half of the grid is evaluated.
    pub fn residual_even(&self, p: &PatchState) -> Result<ResidualField> {
        self.check(&p.boundary)?;
        if p.boundary.sin_coeffs().iter().any(|&b| b != 0.0) {
            return Err(VStateError::Precondition(
                "residual_even needs a boundary without sine modes".into(),
            ));
        }
        let (r, dv) = self.samples(&p.boundary)?;
        let m = r.len();
        let half = (1..(m + 1) / 2)
            .into_par_iter()
            .map(|i| self.value_at(i, p.omega, &r, &dv))
            .collect::<Result<Vec<_>>>()?;
        let mut values = vec![0.0; m];
        for (k, v) in half.into_iter().enumerate() {
            values[k + 1] = v;
            values[m - k - 1] = -v;
        }
        ResidualField::from_grid(values, self.modes)
    }

    fn value_at(&self, i: usize, omega: f64, r: &[f64], dv: &[f64]) -> Result<f64> {
        let [f1, f2, f3] = self.tables.integrals(i, r, dv)?;
        Ok(omega * r[i] * dv[i] - (f1 + f2 + f3) / (4.0 * PI))
    }

    /// `[F1, F2, F3](V)(x)` at an arbitrary angle, using the node set
    /// `x + 2 pi j / M` so the diagonal falls on a node.
    pub fn components_at(&self, b: &FourierBoundary, x: f64) -> Result<[f64; 3]> {
        self.check(b)?;
        let (r, dv) = self.samples(&b.rotate(-x))?;
        let acc = self.tables.integrals(0, &r, &dv)?;
        Ok(acc.map(|v| v / (4.0 * PI)))
    }
}

fn operator_for(b: &FourierBoundary, q: &QuadratureConfig) -> Result<ContourOperator> {
    ContourOperator::new(b.modes(), *q)
}

pub fn eval_f1(b: &FourierBoundary, x: f64, q: &QuadratureConfig) -> Result<f64> {
    Ok(operator_for(b, q)?.components_at(b, x)?[0])
}

pub fn eval_f2(b: &FourierBoundary, x: f64, q: &QuadratureConfig) -> Result<f64> {
    Ok(operator_for(b, q)?.components_at(b, x)?[1])
}

pub fn eval_f3(b: &FourierBoundary, x: f64, q: &QuadratureConfig) -> Result<f64> {
    Ok(operator_for(b, q)?.components_at(b, x)?[2])
}

pub fn eval_contour_residual(p: &PatchState, q: &QuadratureConfig) -> Result<ResidualField> {
    operator_for(&p.boundary, q)?.residual(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_mode(modes: usize, k: usize, c: f64) -> FourierBoundary {
        let mut cos = vec![0.0; modes];
        cos[k - 1] = c;
        FourierBoundary::new(1.0, cos, vec![0.0; modes]).unwrap()
    }

    #[test]
    fn disk_is_a_zero_of_every_component() {
        let disk = FourierBoundary::unit_disk(4);
        let q = QuadratureConfig::for_modes(4).with_nodes(512);
        for x in [0.0, 0.3, 2.0] {
            assert!(eval_f1(&disk, x, &q).unwrap().abs() < 1e-12);
            assert_eq!(eval_f2(&disk, x, &q).unwrap(), 0.0);
            assert_eq!(eval_f3(&disk, x, &q).unwrap(), 0.0);
        }
        let r = eval_contour_residual(&PatchState::disk(0.3, 4), &q).unwrap();
        assert!(r.sup_norm < 1e-12);
    }

    #[test]
    fn f3_vanishes_on_symmetry_axis() {
        let b = cos_mode(8, 2, 0.05);
        let q = QuadratureConfig::for_modes(8);
        assert_eq!(eval_f3(&b, 0.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn components_on_grid_match_full_residual() {
        let b = cos_mode(8, 2, 0.05).rotate(0.2);
        let q = QuadratureConfig::for_modes(8);
        let p = PatchState::new(b.clone(), 0.27).unwrap();
        let r = eval_contour_residual(&p, &q).unwrap();
        let i = 17;
        let x = r.angles()[i];
        let [f1, f2, f3] = ContourOperator::new(8, q).unwrap().components_at(&b, x).unwrap();
        let direct = 0.27 * b.eval_radius(x) * b.eval_radius_derivative(x) - f1 - f2 - f3;
        assert!((direct - r.grid_values[i]).abs() < 1e-13);
    }

    #[test]
    fn even_shortcut_matches_full_evaluation() {
        let mut b = cos_mode(8, 2, 0.08);
        b = FourierBoundary::new(1.0, {
            let mut c = b.cos_coeffs().to_vec();
            c[3] = -0.01;
            c
        }, vec![0.0; 8])
        .unwrap();
        let p = PatchState::new(b, 0.24).unwrap();
        let op = ContourOperator::new(8, QuadratureConfig::for_modes(8)).unwrap();
        let full = op.residual(&p).unwrap();
        let half = op.residual_even(&p).unwrap();
        for (a, b) in full.grid_values.iter().zip(&half.grid_values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_unnormalized_boundary() {
        let b = FourierBoundary::disk(2.0, 4).unwrap();
        let p = PatchState::new(b, 0.3).unwrap();
        assert!(matches!(
            eval_contour_residual(&p, &QuadratureConfig::for_modes(4)),
            Err(VStateError::Precondition(_))
        ));
    }

    #[test]
    fn rejects_too_few_nodes() {
        let q = QuadratureConfig::for_modes(8).with_nodes(40);
        assert!(eval_contour_residual(&PatchState::disk(0.3, 8), &q).is_err());
    }
}
