//! Star-shaped patch boundaries `R(theta) = lambda (1 + V(theta))` stored as
//! truncated Fourier series of the zero-mean perturbation `V`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VStateError};
use crate::spectral;

/// Default truncation order.
pub const DEFAULT_MODES: usize = 64;

/// Sup-norm tolerance for the Fourier projection of an exact ellipse.
pub const ELLIPSE_PROJECTION_TOL: f64 = 1e-10;

/// Oversampling factor of the positivity check `min(1 + V) > 0`.
const POSITIVITY_OVERSAMPLING: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierBoundary {
    mean_radius: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierBoundary {
    /// Builds a boundary from the mean radius and the dimensionless
    /// coefficients `a_1..a_N` (cosine) and `b_1..b_N` (sine).
    pub fn new(mean_radius: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if !(mean_radius.is_finite() && mean_radius > 0.0) {
            return Err(VStateError::InvalidBoundary(format!(
                "mean_radius must be positive and finite, got {mean_radius}"
            )));
        }
        if cos.len() != sin.len() {
            return Err(VStateError::InvalidBoundary(format!(
                "cos has {} coefficients but sin has {}",
                cos.len(),
                sin.len()
            )));
        }
        if let Some(i) = cos.iter().position(|v| !v.is_finite()) {
            return Err(VStateError::InvalidBoundary(format!("cos[{i}] is not finite")));
        }
        if let Some(i) = sin.iter().position(|v| !v.is_finite()) {
            return Err(VStateError::InvalidBoundary(format!("sin[{i}] is not finite")));
        }
        let b = Self {
            mean_radius,
            cos,
            sin,
        };
        let min = b.min_relative_radius();
        if min <= 0.0 {
            return Err(VStateError::InvalidBoundary(format!(
                "1 + V reaches {min:.3e}; the boundary is not star-shaped about the origin"
            )));
        }
        Ok(b)
    }

    /// Disk of the given radius with `modes` (zero) coefficients.
    pub fn disk(radius: f64, modes: usize) -> Result<Self> {
        Self::new(radius, vec![0.0; modes], vec![0.0; modes])
    }

    /// Unit disk, the Rankine vortex.
    pub fn unit_disk(modes: usize) -> Self {
        Self {
            mean_radius: 1.0,
            cos: vec![0.0; modes],
            sin: vec![0.0; modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.cos.len()
    }

    pub fn mean_radius(&self) -> f64 {
        self.mean_radius
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// `(a_k, b_k)` for `k >= 1`; zero beyond the truncation order.
    pub fn mode(&self, k: usize) -> (f64, f64) {
        if k == 0 || k > self.modes() {
            (0.0, 0.0)
        } else {
            (self.cos[k - 1], self.sin[k - 1])
        }
    }

    /// `V(theta)`.
    pub fn perturbation(&self, theta: f64) -> f64 {
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(i, (a, b))| {
                let (s, c) = ((i + 1) as f64 * theta).sin_cos();
                a * c + b * s
            })
            .sum()
    }

    /// `V'(theta)`.
    pub fn perturbation_derivative(&self, theta: f64) -> f64 {
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(i, (a, b))| {
                let k = (i + 1) as f64;
                let (s, c) = (k * theta).sin_cos();
                k * (b * c - a * s)
            })
            .sum()
    }

    pub fn eval_radius(&self, theta: f64) -> f64 {
        self.mean_radius * (1.0 + self.perturbation(theta))
    }

    pub fn eval_radius_derivative(&self, theta: f64) -> f64 {
        self.mean_radius * self.perturbation_derivative(theta)
    }

    /// Point of the boundary at polar angle `theta`.
    pub fn point(&self, theta: f64) -> [f64; 2] {
        let r = self.eval_radius(theta);
        [r * theta.cos(), r * theta.sin()]
    }

    /// Boundary of the set rotated counterclockwise by `phi`.
    pub fn rotate(&self, phi: f64) -> Self {
        let mut cos = Vec::with_capacity(self.modes());
        let mut sin = Vec::with_capacity(self.modes());
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let (s, c) = ((i + 1) as f64 * phi).sin_cos();
            cos.push(a * c - b * s);
            sin.push(a * s + b * c);
        }
        Self {
            mean_radius: self.mean_radius,
            cos,
            sin,
        }
    }

    /// Dilates the set so that the mean radius is 1. The dimensionless
    /// coefficients are unchanged since `V` is measured relative to the mean.
    pub fn normalize_mean(&self) -> Self {
        Self {
            mean_radius: 1.0,
            ..self.clone()
        }
    }

    /// Same set, coefficient storage truncated or zero-padded to `modes`.
    pub fn with_modes(&self, modes: usize) -> Self {
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        cos.resize(modes, 0.0);
        sin.resize(modes, 0.0);
        Self {
            mean_radius: self.mean_radius,
            cos,
            sin,
        }
    }

    /// Radius samples `R(theta_j)` on an `m`-point uniform grid.
    pub fn coeffs_to_grid(&self, m: usize) -> Result<Vec<f64>> {
        let v = spectral::synthesize(1.0, &self.cos, &self.sin, m)?;
        Ok(v.into_iter().map(|x| self.mean_radius * x).collect())
    }

    /// Inverse of [`coeffs_to_grid`](Self::coeffs_to_grid): the mean of the
    /// samples becomes the mean radius.
    pub fn grid_to_coeffs(values: &[f64], modes: usize) -> Result<Self> {
        let c = spectral::analyze(values, modes)?;
        if !(c.mean > 0.0) {
            return Err(VStateError::InvalidBoundary(format!(
                "grid samples have non-positive mean {}",
                c.mean
            )));
        }
        let cos = c.cos.iter().map(|a| a / c.mean).collect();
        let sin = c.sin.iter().map(|b| b / c.mean).collect();
        Self::new(c.mean, cos, sin)
    }

    /// Fourier projection of the ellipse with semi-axes `a_semi` (along x) and
    /// `b_semi` (along y), failing when `modes` cannot resolve it to
    /// [`ELLIPSE_PROJECTION_TOL`].
    pub fn from_ellipse(a_semi: f64, b_semi: f64, modes: usize) -> Result<Self> {
        let (b, err) = Self::ellipse_projection(a_semi, b_semi, modes)?;
        if err > ELLIPSE_PROJECTION_TOL {
            return Err(VStateError::Projection {
                error: err,
                tolerance: ELLIPSE_PROJECTION_TOL,
                modes,
            });
        }
        Ok(b)
    }

    /// Fourier projection of an ellipse together with its sup-norm
    /// projection error, without a tolerance check.
    pub fn ellipse_projection(a_semi: f64, b_semi: f64, modes: usize) -> Result<(Self, f64)> {
        if !(a_semi > 0.0 && b_semi > 0.0 && a_semi.is_finite() && b_semi.is_finite()) {
            return Err(VStateError::InvalidArgument(format!(
                "ellipse semi-axes must be positive, got ({a_semi}, {b_semi})"
            )));
        }
        let radius = |t: f64| {
            let (s, c) = t.sin_cos();
            a_semi * b_semi / (b_semi * b_semi * c * c + a_semi * a_semi * s * s).sqrt()
        };
        let m = (32 * modes).next_power_of_two().max(4096);
        let samples: Vec<f64> = spectral::grid(m, 0.0).into_iter().map(radius).collect();
        let c = spectral::analyze(&samples, modes)?;
        let lambda = c.mean;
        // even and pi-periodic: only even cosine modes survive
        let cos = c
            .cos
            .iter()
            .enumerate()
            .map(|(i, a)| if (i + 1) % 2 == 0 { a / lambda } else { 0.0 })
            .collect();
        let b = Self::new(lambda, cos, vec![0.0; modes])?;
        let half = PI / m as f64;
        let err = spectral::grid(m, half)
            .into_iter()
            .map(|t| (b.eval_radius(t) - radius(t)).abs())
            .fold(0.0, f64::max);
        Ok((b, err))
    }

    /// `min_theta (1 + V(theta))` over a `16 N`-point sampling.
    pub fn min_relative_radius(&self) -> f64 {
        let m = (POSITIVITY_OVERSAMPLING * self.modes()).max(64);
        spectral::synthesize(1.0, &self.cos, &self.sin, m)
            .expect("oversampled grid resolves all modes")
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// A candidate V-state: a boundary rotating about the origin with angular
/// velocity `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchState {
    pub boundary: FourierBoundary,
    pub omega: f64,
}

/// On-disk JSON form of a [`PatchState`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchFile {
    pub omega: f64,
    pub mean_radius: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl PatchState {
    pub fn new(boundary: FourierBoundary, omega: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(VStateError::InvalidArgument(format!("omega must be finite, got {omega}")));
        }
        Ok(Self { boundary, omega })
    }

    pub fn disk(omega: f64, modes: usize) -> Self {
        Self {
            boundary: FourierBoundary::unit_disk(modes),
            omega,
        }
    }

    pub fn to_file(&self) -> PatchFile {
        PatchFile {
            omega: self.omega,
            mean_radius: self.boundary.mean_radius,
            cos: self.boundary.cos.clone(),
            sin: self.boundary.sin.clone(),
        }
    }

    pub fn from_file(file: PatchFile) -> Result<Self> {
        if !file.omega.is_finite() {
            return Err(VStateError::InvalidArgument(format!(
                "field `omega` must be finite, got {}",
                file.omega
            )));
        }
        if !(file.mean_radius.is_finite() && file.mean_radius > 0.0) {
            return Err(VStateError::InvalidBoundary(format!(
                "field `mean_radius` must be positive, got {}",
                file.mean_radius
            )));
        }
        if file.cos.len() != file.sin.len() {
            return Err(VStateError::InvalidBoundary(format!(
                "fields `cos` ({}) and `sin` ({}) must have equal length",
                file.cos.len(),
                file.sin.len()
            )));
        }
        let boundary = FourierBoundary::new(file.mean_radius, file.cos, file.sin)?;
        Self::new(boundary, file.omega)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    /// Parses the patch format; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| VStateError::InvalidBoundary("patch JSON must be an object".into()))?;
        if let Some(k) = obj.keys().find(|k| !["omega", "mean_radius", "cos", "sin"].contains(&k.as_str())) {
            return Err(VStateError::InvalidBoundary(format!("unknown field `{k}`")));
        }
        let number = |name: &str| -> Result<f64> {
            obj.get(name)
                .ok_or_else(|| VStateError::InvalidBoundary(format!("missing field `{name}`")))?
                .as_f64()
                .ok_or_else(|| VStateError::InvalidBoundary(format!("field `{name}` must be a number")))
        };
        let list = |name: &str| -> Result<Vec<f64>> {
            let bad = || VStateError::InvalidBoundary(format!("field `{name}` must be an array of numbers"));
            obj.get(name)
                .ok_or_else(|| VStateError::InvalidBoundary(format!("missing field `{name}`")))?
                .as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|v| v.as_f64().ok_or_else(bad))
                .collect()
        };
        Self::from_file(PatchFile {
            omega: number("omega")?,
            mean_radius: number("mean_radius")?,
            cos: list("cos")?,
            sin: list("sin")?,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode2(c: f64) -> FourierBoundary {
        let mut cos = vec![0.0; 8];
        cos[1] = c;
        FourierBoundary::new(1.0, cos, vec![0.0; 8]).unwrap()
    }

    #[test]
    fn radius_examples() {
        let disk = FourierBoundary::unit_disk(4);
        assert_eq!(disk.eval_radius(0.7), 1.0);
        assert_eq!(disk.eval_radius_derivative(0.7), 0.0);
        assert!((mode2(0.1).eval_radius(0.0) - 1.1).abs() < 1e-15);
        assert!((mode2(0.1).eval_radius_derivative(PI / 4.0) + 0.2).abs() < 1e-15);
        let e = FourierBoundary::from_ellipse(1.2, 1.0 / 1.2, 64).unwrap();
        assert!((e.eval_radius(0.0) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut cos = vec![0.0; 6];
        let mut sin = vec![0.0; 6];
        cos[0] = 0.05;
        cos[2] = -0.03;
        sin[1] = 0.02;
        sin[5] = 0.01;
        let b = FourierBoundary::new(1.3, cos, sin).unwrap();
        let theta = 0.37;
        let mut prev = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let fd = (b.eval_radius(theta + h) - b.eval_radius(theta - h)) / (2.0 * h);
            let err = (fd - b.eval_radius_derivative(theta)).abs();
            // O(h^2): halving h cuts the error by about 4
            assert!(err < prev / 3.5, "h={h} err={err}");
            prev = err;
        }
    }

    #[test]
    fn periodic_exactly() {
        let b = mode2(0.1).rotate(0.3);
        // sin/cos of k(theta + 2 pi) may differ in the last ulp; compare loosely
        assert!((b.eval_radius(0.4) - b.eval_radius(0.4 + 2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn rotate_examples() {
        let b = mode2(0.2);
        assert_eq!(b.rotate(0.0), b);
        let r = b.rotate(PI / 2.0);
        assert!((r.cos[1] + 0.2).abs() < 1e-15);
        let back = b.rotate(0.83).rotate(-0.83);
        for (x, y) in back.cos.iter().zip(&b.cos) {
            assert!((x - y).abs() < 1e-15);
        }
        // rotated set: R_rot(theta) = R(theta - phi)
        let phi = 0.61;
        let rb = b.rotate(phi);
        assert!((rb.eval_radius(1.0) - b.eval_radius(1.0 - phi)).abs() < 1e-14);
    }

    #[test]
    fn normalize_examples() {
        let b = FourierBoundary::new(2.0, vec![0.0, 0.1], vec![0.0, 0.0]).unwrap();
        let n = b.normalize_mean();
        assert_eq!(n.mean_radius(), 1.0);
        assert_eq!(n.cos_coeffs(), &[0.0, 0.1]);
        // R = 2(1 + 0.1 cos 2t) = 2 + 0.2 cos 2t, so the absolute a_2 is 0.2 before
        assert!((b.eval_radius(0.0) - 2.2).abs() < 1e-15);
        let m = 64;
        let mean: f64 = n.coeffs_to_grid(m).unwrap().iter().sum::<f64>() / m as f64;
        assert!((mean - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ellipse_projection_structure() {
        let disk = FourierBoundary::from_ellipse(1.0, 1.0, 16).unwrap();
        assert!(disk.cos_coeffs().iter().all(|a| a.abs() < 1e-15));
        assert!((disk.mean_radius() - 1.0).abs() < 1e-15);
        let e = FourierBoundary::from_ellipse(1.2, 1.0 / 1.2, 64).unwrap();
        assert!(e.sin_coeffs().iter().all(|&b| b == 0.0));
        assert!(e.cos_coeffs().iter().step_by(2).all(|&a| a == 0.0));
        assert!(e.cos_coeffs()[1] > 0.0);
    }

    #[test]
    fn ellipse_needs_enough_modes() {
        assert!(matches!(
            FourierBoundary::from_ellipse(3.0, 1.0 / 3.0, 8),
            Err(VStateError::Projection { .. })
        ));
    }

    #[test]
    fn swapped_ellipse_axes_are_a_quarter_turn() {
        let a = FourierBoundary::from_ellipse(1.3, 1.3 * 0.7, 48).unwrap();
        let b = FourierBoundary::from_ellipse(1.3 * 0.7, 1.3, 48).unwrap();
        let r = a.rotate(PI / 2.0);
        assert!((r.mean_radius() - b.mean_radius()).abs() < 1e-12);
        for k in 1..=48 {
            let (ra, rb) = r.mode(k);
            let (ba, bb) = b.mode(k);
            assert!((ra - ba).abs() < 1e-12 && (rb - bb).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn grid_round_trip_single_mode() {
        let mut cos = vec![0.0; 8];
        cos[2] = 0.5;
        let b = FourierBoundary::new(1.0, cos, vec![0.0; 8]).unwrap();
        let back = FourierBoundary::grid_to_coeffs(&b.coeffs_to_grid(64).unwrap(), 8).unwrap();
        assert!((back.cos_coeffs()[2] - 0.5).abs() < 1e-15);
        assert_eq!(FourierBoundary::unit_disk(4).coeffs_to_grid(16).unwrap(), vec![1.0; 16]);
        assert!(matches!(
            FourierBoundary::unit_disk(8).coeffs_to_grid(16),
            Err(VStateError::Aliasing { .. })
        ));
    }

    #[test]
    fn rejects_invalid_boundaries() {
        assert!(FourierBoundary::new(0.0, vec![], vec![]).is_err());
        assert!(FourierBoundary::new(1.0, vec![0.0], vec![]).is_err());
        assert!(FourierBoundary::new(1.0, vec![f64::NAN], vec![0.0]).is_err());
        assert!(FourierBoundary::new(1.0, vec![0.0, 1.2], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn json_errors_name_the_field() {
        let err = PatchState::from_json(r#"{"omega": 0.3, "mean_radius": -1, "cos": [], "sin": []}"#)
            .unwrap_err();
        assert!(err.to_string().contains("mean_radius"), "{err}");
        let err = PatchState::from_json(r#"{"mean_radius": 1, "cos": [], "sin": []}"#).unwrap_err();
        assert!(err.to_string().contains("omega"), "{err}");
        let err = PatchState::from_json(r#"{"omega": 0.3, "mean_radius": 1, "cos": [0.1], "sin": []}"#)
            .unwrap_err();
        assert!(err.to_string().contains("`cos`"), "{err}");
    }
}
