mod common;

use num_complex::Complex64;
use softguide::measure::{area_measure, curve_measure, CurveShape, Region};
use softguide::quadrature::{integrate_to_infinity, Tolerance};
use softguide::strip::{
    embedding_hs_norm_squared, fourier_route_kernel, free_kernel, rc_kernel, rd_kernel, SheetConfig, StripCoupling,
};
use softguide::transverse::{eval_mode, solve_modes, ContinuumBasis, TransverseProfile};
use softguide::Error;

use common::{bessel_k_integral, TWO_PI};

fn guide() -> TransverseProfile<f64> {
    TransverseProfile::constant(1.0, 5.0).unwrap()
}

fn probes() -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let xs = vec![[0.0, 3.2], [0.7, 3.5], [-0.4, 4.1], [1.3, 2.6], [0.2, -2.0]];
    let ys = vec![[0.5, 4.0], [-0.9, 3.0], [0.05, 3.7], [2.0, 4.4], [-0.3, -2.5]];
    (xs, ys)
}

#[test]
fn mode_sum_matches_fourier_route_below_first_threshold() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let sheet = SheetConfig::physical(modes.len());
    let (xs, ys) = probes();
    for z in [-2.8, -3.5, -5.0] {
        let z = Complex64::new(z, 0.0);
        for x in &xs {
            for y in &ys {
                let f = fourier_route_kernel(&p, z, *x, *y, 1e-12).unwrap();
                let d = rd_kernel(&modes, z, &sheet, *x, *y).unwrap() + rc_kernel(&p, z, *x, *y, 1e-12).unwrap();
                assert!((d - f).norm() <= 1e-6 * f.norm().max(1e-3), "z {z} x {x:?} y {y:?}: {d} vs {f}");
            }
        }
    }
}

#[test]
fn closed_channels_give_real_kernels() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let sheet = SheetConfig::physical(modes.len());
    let (xs, ys) = probes();
    let z = Complex64::new(-3.0, 0.0);
    for x in &xs {
        for y in &ys {
            let v = rd_kernel(&modes, z, &sheet, *x, *y).unwrap() + rc_kernel(&p, z, *x, *y, 1e-12).unwrap();
            assert!(v.im.abs() <= 1e-10, "{v}");
        }
    }
    let m = area_measure(&Region::Disk { center: [0.0, 3.5], radius: 1.0 }, 6, 1.0).unwrap();
    let g = StripCoupling::new(&m, &p, &modes).unwrap().g_matrix(2.0, z, &sheet).unwrap();
    assert!(g.matrix.iter().all(|v| v.im.abs() <= 1e-10));
}

#[test]
fn contour_matches_fourier_route_off_the_axis() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let m = curve_measure(&CurveShape::Segment { from: [-0.5, 2.5], to: [0.8, 3.6] }, 2, 1.0).unwrap();
    let sc = StripCoupling::new(&m, &p, &modes).unwrap();
    let sheet = SheetConfig::physical(modes.len());
    for z in [Complex64::new(-1.0, 0.3), Complex64::new(-0.6, 1.0), Complex64::new(-3.0, 0.0)] {
        for i in 0..m.len() {
            for j in (0..m.len()).filter(|j| *j != i) {
                let (x, y) = (m.nodes[i], m.nodes[j]);
                let f = fourier_route_kernel(&p, z, x, y, 1e-12).unwrap();
                let k = sc.kernel(z, &sheet, i, j).unwrap() + free_kernel(z, x, y).unwrap();
                assert!((k - f).norm() <= 1e-8 * f.norm(), "z {z}: {k} vs {f}");
            }
        }
    }
}

/// `int_0^inf sum_c psi_c psi_c (i/2) e^{i kappa |delta1|} / kappa dp` without
/// any subtraction; converges when `delta1 != 0`.
fn direct_continuum(p: &TransverseProfile<f64>, z: Complex64, x: [f64; 2], y: [f64; 2]) -> Complex64 {
    let d1 = (x[0] - y[0]).abs();
    let f = |q: f64| {
        let b = ContinuumBasis::new(p, q).unwrap();
        let (a1, a2) = b.eval(x[1]);
        let (b1, b2) = b.eval(y[1]);
        let kappa = softguide::specfun::sqrt_upper(z - q * q);
        let i = Complex64::new(0.0, 1.0);
        0.5 * i * (i * kappa * d1).exp() / kappa * (a1 * b1 + a2 * b2)
    };
    integrate_to_infinity(f, 0.0, 1.0, Tolerance::new(1e-14, 1e-12), 1e4).unwrap()
}

#[test]
fn continuum_basis_normalization() {
    let free = TransverseProfile::constant(1.0, 0.0).unwrap();
    let z = Complex64::new(-2.0, 0.0);
    for (x, y) in [([0.0, 0.3], [1.0, 2.0]), ([0.0, 3.0], [0.6, -1.0])] {
        let r = ((x[0] - y[0]) as f64).hypot(x[1] - y[1]);
        let want = bessel_k_integral(0.0, 2f64.sqrt() * r) / TWO_PI;
        let got = direct_continuum(&free, z, x, y);
        assert!((got.re - want).abs() < 1e-9 && got.im.abs() < 1e-12, "{got} vs {want}");
    }
    let p = guide();
    let z = Complex64::new(-3.0, 0.0);
    let (x, y) = ([0.0, 3.0], [1.0, 2.5]);
    let direct = direct_continuum(&p, z, x, y);
    let subtracted = rc_kernel(&p, z, x, y, 1e-13).unwrap();
    assert!((direct - subtracted).norm() < 1e-9, "{direct} vs {subtracted}");
}

#[test]
fn imaginary_part_on_the_real_axis_is_the_cosine_kernel() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let m = area_measure(&Region::Disk { center: [0.0, 3.5], radius: 1.0 }, 6, 1.0).unwrap();
    let sc = StripCoupling::new(&m, &p, &modes).unwrap();
    let e = -1.2;
    let beta = 2.5;
    let sheet = SheetConfig::for_energy(&modes, e);
    assert_eq!(sheet.segment, 1);
    let g = sc.g_matrix(beta, Complex64::new(e, 0.0), &sheet).unwrap();
    let (_, gi) = g.hermitian_parts();
    let tau = (e - modes[0].energy).sqrt();
    for i in 0..m.len() {
        for j in 0..m.len() {
            let (x, y) = (m.nodes[i], m.nodes[j]);
            let k = (tau * (x[0] - y[0])).cos() / (2.0 * tau) * eval_mode(&modes[0], x[1]) * eval_mode(&modes[0], y[1]);
            let want = beta * (m.weights[i] * m.weights[j]).sqrt() * k;
            assert!((gi[(i, j)].re - want).abs() <= 1e-8 * want.abs().max(1e-6));
            assert!(gi[(i, j)].im.abs() < 1e-14);
        }
    }
}

#[test]
fn coupling_is_linear_in_beta() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let m = area_measure(&Region::Rectangle { min: [0.0, 2.0], max: [1.0, 3.0] }, 4, 1.0).unwrap();
    let sc = StripCoupling::new(&m, &p, &modes).unwrap();
    let z = Complex64::new(-1.0, -0.05);
    let sheet = SheetConfig::through_segment(1, 1).unwrap();
    let g1 = sc.g_matrix(1.0, z, &sheet).unwrap();
    let g3 = sc.g_matrix(3.0, z, &sheet).unwrap();
    assert!((&g3.matrix - &g1.matrix * Complex64::new(3.0, 0.0)).norm() <= 1e-14 * g3.matrix.norm());
}

#[test]
fn continuation_is_continuous_across_the_cut() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let m = area_measure(&Region::Disk { center: [0.0, 3.0], radius: 0.5 }, 5, 1.0).unwrap();
    let sc = StripCoupling::new(&m, &p, &modes).unwrap();
    let e = -1.0;
    let second = SheetConfig::through_segment(1, 1).unwrap();
    let physical = SheetConfig::physical(1);
    let on_axis = sc.g_matrix(1.0, Complex64::new(e, 0.0), &second).unwrap().matrix;
    let mut last = f64::INFINITY;
    for eps in [1e-3, 1e-4, 1e-5] {
        let above = sc.g_matrix(1.0, Complex64::new(e, eps), &physical).unwrap().matrix;
        let below = sc.g_matrix(1.0, Complex64::new(e, -eps), &second).unwrap().matrix;
        let jump = (&above - &on_axis).norm().max((&below - &on_axis).norm()) / on_axis.norm();
        assert!(jump < 10.0 * eps && jump < last);
        last = jump;
    }
    let below_physical = sc.g_matrix(1.0, Complex64::new(e, -1e-6), &physical).unwrap().matrix;
    assert!((&below_physical - &on_axis).norm() / on_axis.norm() > 1e-2);
}

#[test]
fn sheet_errors() {
    let p = guide();
    let modes = solve_modes(&p, 1e-14).unwrap();
    let m = area_measure(&Region::Disk { center: [0.0, 3.0], radius: 0.5 }, 3, 1.0).unwrap();
    let sc = StripCoupling::new(&m, &p, &modes).unwrap();
    let second = SheetConfig::through_segment(1, 1).unwrap();
    assert!(matches!(sc.g_matrix(1.0, Complex64::new(-1.0, 0.1), &second), Err(Error::Config(_))));
    assert!(matches!(
        sc.g_matrix(1.0, Complex64::new(modes[0].energy, 0.0), &second),
        Err(Error::Threshold(_))
    ));
    assert!(matches!(
        fourier_route_kernel(&p, Complex64::new(-1.0, 0.0), [0.0, 3.0], [0.0, 3.5], 1e-10),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        area_measure(&Region::Disk { center: [0.0, 0.8], radius: 0.5 }, 3, 1.0)
            .and_then(|m| StripCoupling::new(&m, &p, &modes)),
        Err(Error::Geometry(_))
    ));
}

#[test]
fn embedding_norm_decays_and_tail_is_negligible() {
    let z = Complex64::new(-1.0, 0.0);
    let mut prev = f64::INFINITY;
    for rho in [1.0, 2.0, 3.0] {
        let m = area_measure(&Region::Disk { center: [0.0, 1.0 + rho + 0.5], radius: 0.5 }, 6, 1.0).unwrap();
        let hs = embedding_hs_norm_squared(&m, 1.0, z, 1e-10).unwrap();
        assert!((hs.rho - rho).abs() < 1e-12);
        assert!(hs.tail_bound < 1e-12 * hs.value);
        assert!(hs.value < prev * (-2.0f64 * 0.95).exp());
        prev = hs.value;
    }
}
