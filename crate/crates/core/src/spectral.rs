//! Real trigonometric transforms on uniform periodic grids.
//!
//! Grid point `j` of an `M`-point grid sits at `theta_j = 2 pi j / M`.
//! Coefficients follow `f(theta) = mean + sum_k cos_k cos(k theta) + sin_k sin(k theta)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, VStateError};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Smallest grid that resolves `modes` harmonics without aliasing.
pub fn min_points(modes: usize) -> usize {
    2 * modes + 1
}

pub fn check_resolution(modes: usize, points: usize) -> Result<()> {
    let needed = min_points(modes);
    if points < needed {
        return Err(VStateError::Aliasing {
            modes,
            points,
            needed,
        });
    }
    Ok(())
}

/// Uniform periodic grid of `m` angles starting at `offset`.
pub fn grid(m: usize, offset: f64) -> Vec<f64> {
    let h = 2.0 * PI / m as f64;
    (0..m).map(|j| offset + h * j as f64).collect()
}

/// Trigonometric coefficients of grid samples, keeping harmonics `1..=modes`.
pub struct Coefficients {
    pub mean: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

pub fn analyze(values: &[f64], modes: usize) -> Result<Coefficients> {
    let m = values.len();
    check_resolution(modes, m)?;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m).process(&mut buf));
    let scale = 2.0 / m as f64;
    Ok(Coefficients {
        mean: buf[0].re / m as f64,
        cos: (1..=modes).map(|k| scale * buf[k].re).collect(),
        sin: (1..=modes).map(|k| -scale * buf[k].im).collect(),
    })
}

pub fn synthesize(mean: f64, cos: &[f64], sin: &[f64], m: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(cos.len(), sin.len());
    let modes = cos.len();
    check_resolution(modes, m)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[0] = Complex64::new(mean, 0.0);
    for k in 1..=modes {
        let c = Complex64::new(0.5 * cos[k - 1], -0.5 * sin[k - 1]);
        buf[k] += c;
        buf[m - k] += c.conj();
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m).process(&mut buf));
    Ok(buf.into_iter().map(|z| z.re).collect())
}

/// Samples of the termwise derivative of a trigonometric polynomial.
pub fn synthesize_derivative(cos: &[f64], sin: &[f64], m: usize) -> Result<Vec<f64>> {
    let dcos: Vec<f64> = sin.iter().enumerate().map(|(i, b)| (i + 1) as f64 * b).collect();
    let dsin: Vec<f64> = cos.iter().enumerate().map(|(i, a)| -((i + 1) as f64) * a).collect();
    synthesize(0.0, &dcos, &dsin, m)
}

/// Weights `w_j` with `sum_j w_j f(t + 2 pi j / M)` equal to
/// `int_0^{2pi} ln(4 sin^2((t - y)/2)) f(y) dy` for every trigonometric
/// polynomial `f` of degree below `M/2`.
pub fn log_sine_weights(m: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for n in 1..=(m - 1) / 2 {
        let g = 1.0 / n as f64;
        buf[n] = Complex64::new(g, 0.0);
        buf[m - n] = Complex64::new(g, 0.0);
    }
    if m % 2 == 0 {
        buf[m / 2] = Complex64::new(2.0 / m as f64, 0.0);
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m).process(&mut buf));
    let scale = -2.0 * PI / m as f64;
    buf.into_iter().map(|z| scale * z.re).collect()
}
