//! Relative stream function of a rotating patch,
//!
//! ```text
//! Psi(x) = (1/2pi) int_D ln|x - y| dA(y) - Omega |x|^2 / 2 + c,
//! ```
//!
//! with `c` chosen so that `Psi` has zero mean over the boundary, and the
//! estimates built on `Psi - Psi0` where `Psi0` is the unit-disk profile.
//!
//! Area integrals are converted to boundary integrals:
//! `ln|x-y| = div_y[(y-x)(ln|y-x|/2 - 1/4)]` for the potential,
//! the complex Green formula for its gradient, and
//! `1/|y-x| = div_y[(y-x)/|y-x|]` for the Steiner-type integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::{FourierBoundary, PatchState};
use crate::error::Result;
use crate::spectral;

/// Inner radius of the annulus used by the gradient estimates.
pub const ANNULUS_INNER: f64 = 2.0 / 3.0;
/// Outer radius of the annulus used by the gradient estimates.
pub const ANNULUS_OUTER: f64 = 4.0 / 3.0;

/// Trapezoid error near the boundary decays like `exp(-m d / |z'|)`; off-boundary
/// evaluation uses at least `NEAR_FACTOR |z'|_max / d` nodes.
const NEAR_FACTOR: f64 = 36.0;
/// Largest refined node count; closer points are extrapolated from the boundary.
const MAX_NODES: usize = 1 << 18;

/// Default boundary node count for `modes` Fourier modes.
pub fn default_nodes(modes: usize) -> usize {
    (8 * (2 * modes + 1)).max(256)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamSample {
    pub position: [f64; 2],
    pub psi: f64,
    /// `d Psi / d r`.
    pub psi_r: f64,
    /// `d Psi / d theta`.
    pub psi_theta: f64,
}

/// Stream function of the unit disk rotating with angular velocity `omega`.
pub fn psi0(omega: f64, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 < 1.0 {
        (1.0 - 2.0 * omega) * (r2 - 1.0) / 4.0
    } else {
        -omega * (r2 - 1.0) / 2.0 + 0.25 * r2.ln()
    }
}

/// Gradient of [`psi0`].
pub fn psi0_gradient(omega: f64, x: [f64; 2]) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let f = if r2 < 1.0 {
        (1.0 - 2.0 * omega) / 2.0
    } else {
        -omega + 0.5 / r2
    };
    [f * x[0], f * x[1]]
}

/// Boundary nodes `z_j = z(t + 2 pi j / M)` and tangents `dz/dt`.
struct BoundaryNodes {
    z: Vec<[f64; 2]>,
    dz: Vec<[f64; 2]>,
}

impl BoundaryNodes {
    fn new(b: &FourierBoundary, m: usize, offset: f64) -> Result<Self> {
        let shifted = b.rotate(-offset);
        let r = shifted.coeffs_to_grid(m)?;
        let dr: Vec<f64> = spectral::synthesize_derivative(shifted.cos_coeffs(), shifted.sin_coeffs(), m)?
            .into_iter()
            .map(|v| v * b.mean_radius())
            .collect();
        let mut z = Vec::with_capacity(m);
        let mut dz = Vec::with_capacity(m);
        for (j, t) in spectral::grid(m, offset).into_iter().enumerate() {
            let (s, c) = t.sin_cos();
            z.push([r[j] * c, r[j] * s]);
            dz.push([dr[j] * c - r[j] * s, dr[j] * s + r[j] * c]);
        }
        Ok(Self { z, dz })
    }

    fn len(&self) -> usize {
        self.z.len()
    }

    fn h(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    /// `(z_j - x) x dz_j`, the outward flux density of `y - x`.
    fn flux(&self, j: usize, x: [f64; 2]) -> f64 {
        let (z, dz) = (self.z[j], self.dz[j]);
        (z[0] - x[0]) * dz[1] - (z[1] - x[1]) * dz[0]
    }

    /// Newtonian potential at a point off the boundary (trapezoid rule).
    fn potential(&self, x: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.len() {
            let r2 = (self.z[j][0] - x[0]).powi(2) + (self.z[j][1] - x[1]).powi(2);
            if r2 > 0.0 {
                acc += (0.25 * r2.ln() - 0.25) * self.flux(j, x);
            }
        }
        acc * self.h() / (2.0 * PI)
    }

    /// Newtonian potential at node `i`, with log-sine weights for the
    /// `ln(4 sin^2)` part of `ln|z_j - z_i|`.
    fn potential_at_node(&self, i: usize, log_weights: &[f64]) -> f64 {
        let m = self.len();
        let h = self.h();
        let x = self.z[i];
        let mut acc = 0.0;
        for j in 0..m {
            if j == i {
                continue;
            }
            let d = if i >= j { i - j } else { i + m - j };
            let q = self.flux(j, x);
            let r2 = (self.z[j][0] - x[0]).powi(2) + (self.z[j][1] - x[1]).powi(2);
            let s2 = 4.0 * (0.5 * h * d as f64).sin().powi(2);
            acc += 0.25 * log_weights[d] * q + h * (0.25 * (r2 / s2).ln() - 0.25) * q;
        }
        acc / (2.0 * PI)
    }

    /// Gradient of the Newtonian potential from
    /// `P_x - i P_y = -(1/(4 pi i)) oint conj(w - z) / (w - z) dw`.
    /// When `on_node` is set, `x` is node `i` and the diagonal takes its limit.
    fn gradient(&self, x: [f64; 2], on_node: Option<usize>) -> [f64; 2] {
        let (mut re, mut im) = (0.0, 0.0);
        for j in 0..self.len() {
            let dw = self.dz[j];
            let (fr, fi) = if Some(j) == on_node {
                // conj(dw) / dw * dw = conj(dw)
                (dw[0], -dw[1])
            } else {
                let u = [self.z[j][0] - x[0], self.z[j][1] - x[1]];
                let n2 = u[0] * u[0] + u[1] * u[1];
                if n2 == 0.0 {
                    continue;
                }
                // conj(u) / u = conj(u)^2 / |u|^2
                let (cr, ci) = ((u[0] * u[0] - u[1] * u[1]) / n2, -2.0 * u[0] * u[1] / n2);
                (cr * dw[0] - ci * dw[1], cr * dw[1] + ci * dw[0])
            };
            re += fr;
            im += fi;
        }
        // multiply by -(1/(4 pi i)) = i / (4 pi)
        let s = self.h() / (4.0 * PI);
        let (gr, gi) = (-im * s, re * s);
        [gr, -gi]
    }
}

/// Relative stream function of a fixed patch, with the boundary-mean
/// constant precomputed.
pub struct StreamField {
    boundary: FourierBoundary,
    omega: f64,
    nodes: BoundaryNodes,
    log_weights: Vec<f64>,
    offset: f64,
    speed: f64,
}

impl StreamField {
    pub fn new(p: &PatchState, m: usize) -> Result<Self> {
        spectral::check_resolution(p.boundary.modes(), m)?;
        let nodes = BoundaryNodes::new(&p.boundary, m, 0.0)?;
        let log_weights = spectral::log_sine_weights(m);
        let mean = (0..m)
            .map(|i| {
                let z = nodes.z[i];
                nodes.potential_at_node(i, &log_weights) - 0.5 * p.omega * (z[0] * z[0] + z[1] * z[1])
            })
            .sum::<f64>()
            / m as f64;
        let speed = nodes.dz.iter().map(|d| d[0].hypot(d[1])).fold(0.0, f64::max);
        Ok(Self {
            boundary: p.boundary.clone(),
            omega: p.omega,
            nodes,
            log_weights,
            offset: -mean,
            speed,
        })
    }

    pub fn with_default_nodes(p: &PatchState) -> Result<Self> {
        Self::new(p, default_nodes(p.boundary.modes()))
    }

    pub fn boundary(&self) -> &FourierBoundary {
        &self.boundary
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Constant added to the Newtonian part.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn boundary_nodes_at(&self, theta: f64) -> Result<BoundaryNodes> {
        BoundaryNodes::new(&self.boundary, self.nodes.len(), theta)
    }

    /// Potential and gradient at `x`, refining the nodes near the boundary.
    fn evaluate(&self, x: [f64; 2]) -> Result<(f64, [f64; 2])> {
        let theta = x[1].atan2(x[0]);
        let r = x[0].hypot(x[1]);
        let rb = self.boundary.eval_radius(theta);
        let gap = r - rb;
        if gap.abs() <= 1e-12 * rb {
            let nodes = self.boundary_nodes_at(theta)?;
            return Ok((nodes.potential_at_node(0, &self.log_weights), nodes.gradient(x, Some(0))));
        }
        let slope = self.boundary.eval_radius_derivative(theta) / rb;
        let stretch = (1.0 + slope * slope).sqrt();
        let need = NEAR_FACTOR * self.speed * stretch / gap.abs();
        if need <= self.nodes.len() as f64 {
            return Ok((self.nodes.potential(x), self.nodes.gradient(x, None)));
        }
        if need <= MAX_NODES as f64 {
            let nodes = BoundaryNodes::new(&self.boundary, (need.ceil() as usize).next_power_of_two(), 0.0)?;
            return Ok((nodes.potential(x), nodes.gradient(x, None)));
        }
        // quadratic in the radial offset through the boundary value and two
        // resolved points on the same side
        let fine = BoundaryNodes::new(&self.boundary, MAX_NODES, 0.0)?;
        let s1 = NEAR_FACTOR * self.speed * stretch / MAX_NODES as f64;
        let s2 = 2.0 * s1;
        let (c, s) = (theta.cos(), theta.sin());
        let at = |off: f64| {
            let y = [(rb + off) * c, (rb + off) * s];
            let g = fine.gradient(y, None);
            [fine.potential(y), g[0], g[1]]
        };
        let edge = self.boundary_nodes_at(theta)?;
        let g0 = edge.gradient(edge.z[0], Some(0));
        let f0 = [edge.potential_at_node(0, &self.log_weights), g0[0], g0[1]];
        let sign = gap.signum();
        let (f1, f2) = (at(sign * s1), at(sign * s2));
        let t = gap.abs();
        let l0 = (t - s1) * (t - s2) / (s1 * s2);
        let l1 = t * (t - s2) / (s1 * (s1 - s2));
        let l2 = t * (t - s1) / (s2 * (s2 - s1));
        let v: Vec<f64> = (0..3).map(|i| l0 * f0[i] + l1 * f1[i] + l2 * f2[i]).collect();
        Ok((v[0], [v[1], v[2]]))
    }

    /// `(1/2pi) int_D ln|x - y| dA(y)`.
    pub fn potential(&self, x: [f64; 2]) -> Result<f64> {
        Ok(self.evaluate(x)?.0)
    }

    /// Newtonian potential at the boundary point with polar angle `theta`.
    pub fn potential_on_boundary(&self, theta: f64) -> Result<f64> {
        Ok(self.boundary_nodes_at(theta)?.potential_at_node(0, &self.log_weights))
    }

    /// Gradient of the Newtonian potential.
    pub fn potential_gradient(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        Ok(self.evaluate(x)?.1)
    }

    pub fn sample(&self, x: [f64; 2]) -> Result<StreamSample> {
        let (p, g) = self.evaluate(x)?;
        Ok(self.assemble(x, p, g))
    }

    /// Sample at the boundary point with polar angle `theta`.
    pub fn sample_on_boundary(&self, theta: f64) -> Result<StreamSample> {
        let nodes = self.boundary_nodes_at(theta)?;
        let x = nodes.z[0];
        let p = nodes.potential_at_node(0, &self.log_weights);
        let g = nodes.gradient(x, Some(0));
        Ok(self.assemble(x, p, g))
    }

    fn assemble(&self, x: [f64; 2], potential: f64, grad: [f64; 2]) -> StreamSample {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let gx = grad[0] - self.omega * x[0];
        let gy = grad[1] - self.omega * x[1];
        let r = r2.sqrt();
        let psi_r = if r > 0.0 { (gx * x[0] + gy * x[1]) / r } else { 0.0 };
        StreamSample {
            position: x,
            psi: potential - 0.5 * self.omega * r2 + self.offset,
            psi_r,
            psi_theta: -gx * x[1] + gy * x[0],
        }
    }

    /// Five-point Laplacian of `Psi` at `x` with spacing `h`.
    pub fn discrete_laplacian(&self, x: [f64; 2], h: f64) -> Result<f64> {
        let f = |dx: f64, dy: f64| self.sample([x[0] + dx, x[1] + dy]).map(|s| s.psi);
        Ok((f(h, 0.0)? + f(-h, 0.0)? + f(0.0, h)? + f(0.0, -h)? - 4.0 * f(0.0, 0.0)?) / (h * h))
    }

    /// Angles of the `4N`-point boundary sampling used by the certificates.
    fn certificate_angles(&self) -> Vec<f64> {
        spectral::grid((4 * self.boundary.modes()).max(16), 0.0)
    }

    /// `sup |Psi|` over the boundary sampling.
    pub fn boundary_flatness(&self) -> Result<f64> {
        self.certificate_angles()
            .into_iter()
            .map(|t| self.sample_on_boundary(t).map(|s| s.psi.abs()))
            .try_fold(0.0, |m: f64, v| v.map(|v| m.max(v)))
    }

    /// `sup |R'(theta) + Psi_theta / Psi_r|` over the boundary sampling.
    pub fn contour_slope_defect(&self) -> Result<f64> {
        self.certificate_angles()
            .into_iter()
            .map(|t| {
                self.sample_on_boundary(t)
                    .map(|s| (self.boundary.eval_radius_derivative(t) + s.psi_theta / s.psi_r).abs())
            })
            .try_fold(0.0, |m: f64, v| v.map(|v| m.max(v)))
    }

    /// Deviation of `grad Psi` from `grad Psi0` over the annulus
    /// `2/3 <= |x| <= 4/3`, sampled on an `n_r x n_theta` polar grid.
    pub fn gradient_deviation(&self, n_r: usize, n_theta: usize) -> Result<GradientDeviation> {
        let mut out = GradientDeviation::default();
        for i in 0..n_r {
            let r = ANNULUS_INNER + (ANNULUS_OUTER - ANNULUS_INNER) * i as f64 / (n_r - 1).max(1) as f64;
            for t in spectral::grid(n_theta, 0.0) {
                let x = [r * t.cos(), r * t.sin()];
                let s = self.sample(x)?;
                let g0 = psi0_gradient(self.omega, x);
                let g0_r = (g0[0] * x[0] + g0[1] * x[1]) / r;
                // Psi0 is radial: d/dtheta Psi0 = 0
                let (c, sn) = (t.cos(), t.sin());
                let gx = s.psi_r * c - s.psi_theta * sn / r;
                let gy = s.psi_r * sn + s.psi_theta * c / r;
                out.gradient = out.gradient.max((gx - g0[0]).hypot(gy - g0[1]));
                out.radial = out.radial.max((s.psi_r - g0_r).abs());
                out.angular = out.angular.max(s.psi_theta.abs());
            }
        }
        Ok(out)
    }
}

/// Measured `sup |grad(Psi - Psi0)|`, `sup |Psi_r - d_r Psi0|` and `sup |Psi_theta|`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GradientDeviation {
    pub gradient: f64,
    pub radial: f64,
    pub angular: f64,
}

impl GradientDeviation {
    pub fn max(&self) -> f64 {
        self.gradient.max(self.radial).max(self.angular)
    }
}

/// `(1/2pi) int_D ln|x - y| dA(y)` with `m` boundary nodes.
pub fn newtonian_potential(b: &FourierBoundary, x: [f64; 2], m: usize) -> Result<f64> {
    let nodes = BoundaryNodes::new(b, m, 0.0)?;
    let theta = x[1].atan2(x[0]);
    let rb = b.eval_radius(theta);
    if (x[0].hypot(x[1]) - rb).abs() <= 1e-12 * rb {
        let shifted = BoundaryNodes::new(b, m, theta)?;
        return Ok(shifted.potential_at_node(0, &spectral::log_sine_weights(m)));
    }
    Ok(nodes.potential(x))
}

pub fn relative_stream(p: &PatchState, x: [f64; 2], m: usize) -> Result<StreamSample> {
    StreamField::new(p, m)?.sample(x)
}

/// V-state certificate: `sup |Psi|` on the boundary after zero-mean normalization.
pub fn boundary_flatness(p: &PatchState) -> Result<f64> {
    StreamField::with_default_nodes(p)?.boundary_flatness()
}

/// Gradient deviations on a `33 x 64` polar grid of the annulus.
pub fn gradient_deviation(p: &PatchState) -> Result<GradientDeviation> {
    StreamField::with_default_nodes(p)?.gradient_deviation(33, 64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinerValue {
    pub value: f64,
    /// `value / sqrt(area)`; at most `2 sqrt(pi)`, attained by the disk centered at `x`.
    pub ratio: f64,
}

/// `int_D |x - y|^{-1} dA(y)`. In polar coordinates about `x` the radial
/// integral of `r^{-1} r dr` is exact, leaving `oint (y - x) . n / |y - x| ds`.
pub fn steiner_integral(b: &FourierBoundary, x: [f64; 2]) -> Result<SteinerValue> {
    steiner_integral_with_nodes(b, x, (64 * b.modes()).max(4096))
}

pub fn steiner_integral_with_nodes(b: &FourierBoundary, x: [f64; 2], m: usize) -> Result<SteinerValue> {
    let nodes = BoundaryNodes::new(b, m, 0.0)?;
    let mut acc = 0.0;
    for j in 0..m {
        let d = (nodes.z[j][0] - x[0]).hypot(nodes.z[j][1] - x[1]);
        if d > 0.0 {
            acc += nodes.flux(j, x) / d;
        }
    }
    let value = acc * nodes.h();
    Ok(SteinerValue {
        value,
        ratio: value / crate::geometry::area(b).sqrt(),
    })
}
