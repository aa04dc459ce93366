use std::f64::consts::PI;

use proptest::prelude::*;
use vstate::geometry::{
    area, center_of_vorticity, classify, radial_bounds, shape_report, sym_diff_to_unit_disk,
    symmetric_difference_area,
};
use vstate::{Classification, FourierBoundary, PatchState};

fn coeffs(n: usize, scale: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.0..1.0f64, n),
        prop::collection::vec(-1.0..1.0f64, n),
    )
        .prop_map(move |(a, b)| {
            let w = |v: Vec<f64>| {
                v.into_iter()
                    .enumerate()
                    .map(|(k, x)| scale * x / ((k + 1) * (k + 1)) as f64)
                    .collect::<Vec<_>>()
            };
            (w(a), w(b))
        })
}

fn boundary(n: usize, scale: f64) -> impl Strategy<Value = FourierBoundary> {
    coeffs(n, scale).prop_map(|(a, b)| FourierBoundary::new(1.0, a, b).unwrap())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn eval_radius_examples() {
    let disk = FourierBoundary::unit_disk(4);
    assert_eq!(disk.eval_radius(1.234), 1.0);
    let b = FourierBoundary::new(1.0, vec![0.0, 0.1], vec![0.0, 0.0]).unwrap();
    assert!((b.eval_radius(0.0) - 1.1).abs() < 1e-15);
    assert!((b.eval_radius_derivative(PI / 4.0) + 0.2).abs() < 1e-15);
    let e = FourierBoundary::from_ellipse(1.2, 1.0 / 1.2, 64).unwrap();
    assert!((e.eval_radius(0.0) - 1.2).abs() < 1e-10);
}

#[test]
fn derivative_is_second_order_consistent() {
    let b = FourierBoundary::new(1.0, vec![0.05, 0.1, -0.02], vec![0.01, 0.0, 0.03]).unwrap();
    let theta = 0.7;
    let err = |h: f64| ((b.eval_radius(theta + h) - b.eval_radius(theta - h)) / (2.0 * h) - b.eval_radius_derivative(theta)).abs();
    let ratio = err(1e-2) / err(5e-3);
    assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
}

#[test]
fn normalize_examples() {
    // R = 2 + 0.2 cos 2t, stored as 2 (1 + 0.1 cos 2t)
    let b = FourierBoundary::new(2.0, vec![0.0, 0.1], vec![0.0, 0.0]).unwrap();
    assert!((b.eval_radius(0.0) - 2.2).abs() < 1e-15);
    let n = b.normalize_mean();
    assert_eq!(n.mean_radius(), 1.0);
    assert!((n.eval_radius(0.0) - 1.1).abs() < 1e-15);
    let grid = n.coeffs_to_grid(64).unwrap();
    let mean = grid.iter().sum::<f64>() / 64.0;
    assert!((mean - 1.0).abs() < 1e-14);
}

#[test]
fn ellipse_examples() {
    let e = FourierBoundary::from_ellipse(1.2, 1.0 / 1.2, 64).unwrap();
    assert!(e.sin_coeffs().iter().all(|&b| b == 0.0));
    assert!(e.cos_coeffs().iter().step_by(2).all(|&a| a == 0.0));
    assert!((area(&e) - PI).abs() < 1e-10);
    let c = center_of_vorticity(&e);
    assert!(c[0].abs() < 1e-15 && c[1].abs() < 1e-15);
    let unit = FourierBoundary::from_ellipse(1.0, 1.0, 8).unwrap();
    assert!(unit.cos_coeffs().iter().all(|a| a.abs() < 1e-15));
    assert!(FourierBoundary::from_ellipse(3.0, 0.3, 8).is_err());
}

#[test]
fn area_examples() {
    assert!((area(&FourierBoundary::unit_disk(3)) - PI).abs() < 1e-15);
    let b = FourierBoundary::new(1.3, vec![0.1], vec![0.0]).unwrap();
    assert!((area(&b) - PI * 1.3 * 1.3 * (1.0 + 0.005)).abs() < 1e-14);
}

/// Midpoint lattice of the square `[-l, l]^2` with `n^2` cells.
fn lattice(l: f64, n: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = 2.0 * l / n as f64;
    (0..n).flat_map(move |i| (0..n).map(move |j| (-l + (i as f64 + 0.5) * h, -l + (j as f64 + 0.5) * h)))
}

#[test]
fn center_against_area_quadrature() {
    let a1 = 0.02;
    let b = FourierBoundary::new(1.0, vec![a1, 0.01], vec![0.0, 0.0]).unwrap();
    let n = 1500;
    let l = 1.1;
    let h = 2.0 * l / n as f64;
    let (mut m0, mut mx, mut my) = (0.0, 0.0, 0.0);
    for (x, y) in lattice(l, n) {
        if x.hypot(y) < b.eval_radius(y.atan2(x)) {
            m0 += 1.0;
            mx += x;
            my += y;
        }
    }
    let c = center_of_vorticity(&b);
    assert!((c[0] - mx / m0).abs() < 5e-4, "{c:?} vs {}", mx / m0);
    assert!((c[1] - my / m0).abs() < 5e-4);
    assert!((m0 * h * h - area(&b)).abs() < 5e-3);
    assert!((c[0] - a1).abs() < 0.1 * a1);
}

#[test]
fn sym_diff_examples() {
    let disk = FourierBoundary::unit_disk(4);
    let big = FourierBoundary::disk(1.1, 4).unwrap();
    assert!((symmetric_difference_area(&disk, &big) - 0.21 * PI).abs() < 1e-12);

    // exact ellipse membership on a lattice versus the Fourier boundary
    let (a, b) = (1.2, 1.0 / 1.2);
    let n = 3000;
    let l = 1.25;
    let h = 2.0 * l / n as f64;
    let count = lattice(l, n)
        .filter(|&(x, y)| {
            let in_e = (x / a).powi(2) + (y / b).powi(2) < 1.0;
            let in_d = x * x + y * y < 1.0;
            in_e != in_d
        })
        .count();
    let e = FourierBoundary::from_ellipse(a, b, 64).unwrap();
    let d = sym_diff_to_unit_disk(&e);
    assert!((d - count as f64 * h * h).abs() < 1e-3, "{d} vs {}", count as f64 * h * h);
}

#[test]
fn radial_bounds_examples() {
    let r = radial_bounds(&FourierBoundary::unit_disk(4));
    assert_eq!((r.min, r.max), (1.0, 1.0));
    let b = FourierBoundary::new(1.0, vec![0.0, 0.1], vec![0.0, 0.0]).unwrap();
    let r = radial_bounds(&b);
    assert!((r.min - 0.9).abs() < 1e-12 && (r.max - 1.1).abs() < 1e-12);
}

#[test]
fn classify_examples() {
    let (c, r) = classify(&FourierBoundary::unit_disk(8), 1e-8).unwrap();
    assert_eq!((c, r), (Classification::Disk, 0.0));
    let e = FourierBoundary::from_ellipse(1.1, 1.0 / 1.1, 32).unwrap().normalize_mean();
    let (c, r) = classify(&e, 1e-8).unwrap();
    assert_eq!(c, Classification::Ellipse);
    assert!(r < 1e-10);
    let t = FourierBoundary::new(1.0, vec![0.0, 0.0, 0.05], vec![0.0; 3]).unwrap();
    let (c, r) = classify(&t, 1e-8).unwrap();
    assert_eq!(c, Classification::Other);
    assert!(r > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_round_trip(b in boundary(16, 0.3)) {
        let grid = b.coeffs_to_grid(64).unwrap();
        let back = FourierBoundary::grid_to_coeffs(&grid, 16).unwrap();
        prop_assert!((back.mean_radius() - 1.0).abs() < 1e-13);
        prop_assert!(max_diff(back.cos_coeffs(), b.cos_coeffs()) < 1e-13);
        prop_assert!(max_diff(back.sin_coeffs(), b.sin_coeffs()) < 1e-13);
    }

    #[test]
    fn radius_is_periodic(b in boundary(8, 0.3), k in -3i32..4) {
        let t = 0.3;
        prop_assert!((b.eval_radius(t) - b.eval_radius(t + 2.0 * PI * k as f64)).abs() < 1e-14);
    }

    #[test]
    fn rotation_is_a_group_action(b in boundary(8, 0.3), phi in -PI..PI, t in 0.0..6.3f64) {
        let r = b.rotate(phi);
        prop_assert!((r.eval_radius(t) - b.eval_radius(t - phi)).abs() < 1e-13);
        let back = r.rotate(-phi);
        prop_assert!(max_diff(back.cos_coeffs(), b.cos_coeffs()) < 1e-14);
        prop_assert!(max_diff(back.sin_coeffs(), b.sin_coeffs()) < 1e-14);
        prop_assert!((area(&r) - area(&b)).abs() < 1e-13);
        let c = center_of_vorticity(&b);
        let cr = center_of_vorticity(&r);
        let expect = [c[0] * phi.cos() - c[1] * phi.sin(), c[0] * phi.sin() + c[1] * phi.cos()];
        prop_assert!((cr[0] - expect[0]).abs() < 1e-13 && (cr[1] - expect[1]).abs() < 1e-13);
    }

    #[test]
    fn sym_diff_is_a_metric(x in boundary(6, 0.2), y in boundary(6, 0.2), z in boundary(6, 0.2)) {
        let d = symmetric_difference_area;
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-14);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        if x != y {
            prop_assert!(d(&x, &y) > 0.0);
        }
    }

    #[test]
    fn json_round_trip(b in boundary(12, 0.3), lambda in 0.5..2.0f64, omega in 0.0..0.5f64) {
        let b = FourierBoundary::new(lambda, b.cos_coeffs().to_vec(), b.sin_coeffs().to_vec()).unwrap();
        let p = PatchState::new(b, omega).unwrap();
        prop_assert_eq!(PatchState::from_json(&p.to_json().unwrap()).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classification_is_rotation_invariant(a in 1.02..1.3f64, phi in -PI..PI) {
        let e = FourierBoundary::from_ellipse(a, 1.0 / a, 48).unwrap().normalize_mean();
        let tol = 1e-8;
        let base = shape_report(&e, tol).unwrap().classification;
        let rotated = shape_report(&e.rotate(phi), tol).unwrap().classification;
        prop_assert_eq!(base, Classification::Ellipse);
        prop_assert_eq!(rotated, base);
        let t = FourierBoundary::new(1.0, vec![0.0, 0.0, 0.05], vec![0.0; 3]).unwrap();
        prop_assert_eq!(shape_report(&t.rotate(phi), tol).unwrap().classification, Classification::Other);
    }
}
