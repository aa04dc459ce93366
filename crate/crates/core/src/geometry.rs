//! Area, center of vorticity, symmetric differences, radial extent and the
//! disk/ellipse classification of star-shaped patches.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::FourierBoundary;
use crate::contour::MEAN_RADIUS_TOL;
use crate::error::{Result, VStateError};
use crate::spectral;

/// Default classification tolerance.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-7;

/// Samples used for the symmetric-difference quadrature.
const SYM_DIFF_POINTS: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Disk,
    Ellipse,
    Other,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Disk => "disk",
            Classification::Ellipse => "ellipse",
            Classification::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub area: f64,
    pub center: [f64; 2],
    pub sym_diff_to_unit_disk: f64,
    pub radial_min: f64,
    pub radial_max: f64,
    pub classification: Classification,
    pub classification_residual: f64,
}

/// `(1/2) int R^2`, exact by Parseval.
pub fn area(b: &FourierBoundary) -> f64 {
    let energy: f64 = b
        .cos_coeffs()
        .iter()
        .chain(b.sin_coeffs())
        .map(|c| c * c)
        .sum();
    PI * b.mean_radius().powi(2) * (1.0 + 0.5 * energy)
}

/// `(int_D x dA) / |D|` with `int_D x_1 dA = int (R^3 / 3) cos(theta) d theta`.
pub fn center_of_vorticity(b: &FourierBoundary) -> [f64; 2] {
    // R^3 cos(theta) has degree 3N + 1; this grid integrates it exactly
    let m = 2 * (3 * b.modes() + 2) + 1;
    let r = b.coeffs_to_grid(m).expect("grid resolves the boundary");
    let h = 2.0 * PI / m as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for (t, r) in spectral::grid(m, 0.0).into_iter().zip(r) {
        let w = h * r * r * r / 3.0;
        mx += w * t.cos();
        my += w * t.sin();
    }
    let a = area(b);
    [mx / a, my / a]
}

/// `|D1 Δ D2| = (1/2) int |R1^2 - R2^2| d theta` for sets star-shaped about
/// the same origin.
pub fn symmetric_difference_area(b1: &FourierBoundary, b2: &FourierBoundary) -> f64 {
    let modes = b1.modes().max(b2.modes());
    let m = SYM_DIFF_POINTS.max(64 * modes);
    let r1 = b1.coeffs_to_grid(m).expect("grid resolves the boundary");
    let r2 = b2.coeffs_to_grid(m).expect("grid resolves the boundary");
    let h = 2.0 * PI / m as f64;
    0.5 * h * r1.iter().zip(&r2).map(|(a, b)| (a * a - b * b).abs()).sum::<f64>()
}

/// `|D Δ unit disk|`.
pub fn sym_diff_to_unit_disk(b: &FourierBoundary) -> f64 {
    symmetric_difference_area(b, &FourierBoundary::unit_disk(b.modes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBounds {
    pub min: f64,
    pub max: f64,
}

impl RadialBounds {
    /// `((max - 1) / sqrt(delta), (1 - min) / sqrt(delta))`.
    pub fn scaled_by(&self, delta: f64) -> (f64, f64) {
        let s = delta.sqrt();
        ((self.max - 1.0) / s, (1.0 - self.min) / s)
    }
}

/// Extrema of `R(theta)` from a `16 N`-point sampling refined by golden
/// section around the best samples.
pub fn radial_bounds(b: &FourierBoundary) -> RadialBounds {
    let m = (16 * b.modes()).max(64);
    let r = b.coeffs_to_grid(m).expect("grid resolves the boundary");
    let h = 2.0 * PI / m as f64;
    let imin = (0..m).min_by(|&i, &j| r[i].total_cmp(&r[j])).unwrap_or(0);
    let imax = (0..m).max_by(|&i, &j| r[i].total_cmp(&r[j])).unwrap_or(0);
    let tmin = golden_min(|t| b.eval_radius(t), imin as f64 * h - h, imin as f64 * h + h);
    let tmax = golden_min(|t| -b.eval_radius(t), imax as f64 * h - h, imax as f64 * h + h);
    RadialBounds {
        min: b.eval_radius(tmin).min(r[imin]),
        max: b.eval_radius(tmax).max(r[imax]),
    }
}

/// Minimizer of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Kirchhoff rotation rate `ab / (a + b)^2` of the ellipse with semi-axes `a`, `b`.
pub fn kirchhoff_omega(a_semi: f64, b_semi: f64) -> f64 {
    a_semi * b_semi / (a_semi + b_semi).powi(2)
}

/// Mean-radius-normalized ellipse with aspect ratio `q = a/b`.
fn normalized_ellipse(q: f64, modes: usize) -> Result<FourierBoundary> {
    let s = q.sqrt();
    let (b, _) = FourierBoundary::ellipse_projection(s, 1.0 / s, modes)?;
    Ok(b.normalize_mean())
}

/// Normalized ellipse (major axis along x when `c > 0`) whose `cos 2 theta`
/// coefficient equals `c`, together with its aspect ratio `a/b`.
pub fn ellipse_with_mode2(c: f64, modes: usize) -> Result<(FourierBoundary, f64)> {
    if !(c.abs() < 0.5) {
        return Err(VStateError::InvalidArgument(format!(
            "mode-2 amplitude {c} is outside the resolvable ellipse range"
        )));
    }
    if c == 0.0 {
        return Ok((FourierBoundary::unit_disk(modes), 1.0));
    }
    let a2 = |lq: f64| normalized_ellipse(lq.exp(), modes).map(|e| e.cos_coeffs()[1] - c);
    // first-order guess: q = (1 + c) / (1 - c)
    let mut x0 = ((1.0 + c) / (1.0 - c)).ln();
    let mut x1 = 1.01 * x0;
    let mut f0 = a2(x0)?;
    let mut f1 = a2(x1)?;
    for _ in 0..60 {
        if f1 == 0.0 || (x1 - x0).abs() < 1e-16 || f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = a2(x1)?;
    }
    let q = x1.exp();
    Ok((normalized_ellipse(q, modes)?, q))
}

fn coeff_distance(a: &FourierBoundary, b: &FourierBoundary) -> f64 {
    let modes = a.modes().max(b.modes());
    (1..=modes)
        .map(|k| {
            let (a1, b1) = a.mode(k);
            let (a2, b2) = b.mode(k);
            (a1 - a2).powi(2) + (b1 - b2).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Best-fit ellipse in the normalized ellipse family and its coefficient distance.
pub fn fit_ellipse(b: &FourierBoundary) -> Result<(FourierBoundary, f64)> {
    let modes = b.modes().max(2);
    let (a2, _) = b.mode(2);
    let guess = ((1.0 + a2) / (1.0 - a2)).max(1e-3).ln();
    let dist = |lq: f64| {
        normalized_ellipse(lq.exp(), modes)
            .map(|e| coeff_distance(&e, b))
            .unwrap_or(f64::INFINITY)
    };
    let width = 0.1 + 0.5 * guess.abs();
    let lq = golden_min(dist, guess - width, guess + width);
    let e = normalized_ellipse(lq.exp(), modes)?;
    let d = coeff_distance(&e, b);
    Ok((e, d))
}

/// Rotates the boundary so that its `sin 2 theta` coefficient vanishes and
/// normalizes the mean radius.
pub fn align_rotation(b: &FourierBoundary) -> FourierBoundary {
    let (a2, b2) = b.mode(2);
    // rotation by phi maps (a2, b2) to (a2 cos 2phi - b2 sin 2phi, a2 sin 2phi + b2 cos 2phi)
    let phi = -0.5 * b2.atan2(a2);
    let r = b.rotate(phi).normalize_mean();
    if r.modes() >= 2 {
        let mut sin = r.sin_coeffs().to_vec();
        sin[1] = 0.0;
        FourierBoundary::new(1.0, r.cos_coeffs().to_vec(), sin).unwrap_or(r)
    } else {
        r
    }
}

/// Disk / ellipse / other classification of a normalized, centered boundary
/// whose `sin 2 theta` coefficient vanishes.
pub fn classify(b: &FourierBoundary, tol: f64) -> Result<(Classification, f64)> {
    if (b.mean_radius() - 1.0).abs() > MEAN_RADIUS_TOL {
        return Err(VStateError::Precondition(format!(
            "classify needs mean radius 1, got {}",
            b.mean_radius()
        )));
    }
    let c = center_of_vorticity(b);
    if c[0].hypot(c[1]) > tol {
        return Err(VStateError::Precondition(format!(
            "classify needs a centered boundary, center of vorticity is ({:e}, {:e})",
            c[0], c[1]
        )));
    }
    if b.mode(2).1.abs() > tol {
        return Err(VStateError::Precondition(format!(
            "classify needs sin 2theta coefficient 0, got {:e}",
            b.mode(2).1
        )));
    }
    let energy = coeff_distance(b, &FourierBoundary::unit_disk(0));
    if energy < tol {
        return Ok((Classification::Disk, energy));
    }
    let (_, d) = fit_ellipse(b)?;
    if d < tol {
        Ok((Classification::Ellipse, d))
    } else {
        Ok((Classification::Other, d))
    }
}

/// Largest `m >= 2` such that the energy outside multiples of `m` is below
/// `tol`, or `None` when no such `m` exists.
pub fn fold_symmetry(b: &FourierBoundary, tol: f64) -> Option<usize> {
    (2..=b.modes()).rev().find(|&m| {
        let leak: f64 = (1..=b.modes())
            .filter(|k| k % m != 0)
            .map(|k| {
                let (a, s) = b.mode(k);
                a * a + s * s
            })
            .sum::<f64>()
            .sqrt();
        let kept: f64 = (1..=b.modes())
            .filter(|k| k % m == 0)
            .map(|k| {
                let (a, s) = b.mode(k);
                a * a + s * s
            })
            .sum::<f64>()
            .sqrt();
        leak < tol && kept >= tol
    })
}

/// Full shape report; classification is done on the rotation-aligned,
/// normalized boundary.
pub fn shape_report(b: &FourierBoundary, tol: f64) -> Result<ShapeReport> {
    let bounds = radial_bounds(b);
    let aligned = align_rotation(b);
    let (classification, classification_residual) = match classify(&aligned, tol) {
        Ok(c) => c,
        Err(VStateError::Precondition(_)) => {
            (Classification::Other, fit_ellipse(&aligned)?.1)
        }
        Err(e) => return Err(e),
    };
    Ok(ShapeReport {
        area: area(b),
        center: center_of_vorticity(b),
        sym_diff_to_unit_disk: sym_diff_to_unit_disk(b),
        radial_min: bounds.min,
        radial_max: bounds.max,
        classification,
        classification_residual,
    })
}
