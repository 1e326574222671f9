#![allow(dead_code)]
//! Independent reference implementations used as test oracles.

use std::f64::consts::PI;

/// `K_nu(x)` for real `x > 0` from `int_0^inf exp(-x cosh t) cosh(nu t) dt`
/// (composite Simpson on a truncated range).
pub fn bessel_k_integral(nu: f64, x: f64) -> f64 {
    let t_max = (2.0 * (40.0 + x.ln().abs()) / x).acosh().max(1.0) + 2.0;
    let n = 20_000;
    let h = t_max / n as f64;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh();
    let mut s = f(0.0) + f(t_max);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `J_n(x)` from the power series.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let mut term = (0.5 * x).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for k in 1..80 {
        term *= -(0.25 * x * x) / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Ground state of the disk well `-Laplacian - beta 1_{|x|<a}` from radial matching.
pub fn disk_ground_state(beta: f64, a: f64) -> f64 {
    let f = |e: f64| {
        let q = (beta + e).sqrt();
        let k = (-e).sqrt();
        q * bessel_j(1, q * a) * bessel_k_integral(0.0, k * a) - k * bessel_k_integral(1.0, k * a) * bessel_j(0, q * a)
    };
    let (mut lo, mut hi) = (-beta + 1e-12, -1e-10);
    let flo = f(lo);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if f(m).signum() == flo.signum() {
            lo = m
        } else {
            hi = m
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub const TWO_PI: f64 = 2.0 * PI;

/// `I_0(x)` from the power series.
pub fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= 0.25 * x * x / (k as f64 * k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Rotationally symmetric level of a delta shell of strength `beta` on a
/// circle of radius `a`: `beta a I0(k a) K0(k a) = 1`.
pub fn shell_ground_state(beta: f64, a: f64) -> f64 {
    let f = |k: f64| beta * a * bessel_i0(k * a) * bessel_k_integral(0.0, k * a) - 1.0;
    let (mut lo, mut hi) = (1e-6, 50.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if f(m) > 0.0 {
            lo = m
        } else {
            hi = m
        }
    }
    let k = 0.5 * (lo + hi);
    -k * k
}

/// Even and odd square-well conditions about the strip centre, solved by bisection.
pub fn square_well_levels(alpha: f64, d: f64) -> Vec<f64> {
    let half = d / 2.0;
    let even = |e: f64| {
        let q = (alpha + e).sqrt();
        let k = (-e).sqrt();
        q * (q * half).sin() - k * (q * half).cos()
    };
    let odd = |e: f64| {
        let q = (alpha + e).sqrt();
        let k = (-e).sqrt();
        q * (q * half).cos() + k * (q * half).sin()
    };
    let mut roots = Vec::new();
    let n = 200_000;
    for f in [&even as &dyn Fn(f64) -> f64, &odd] {
        let mut prev = -alpha + 1e-12;
        for i in 1..=n {
            let e = -alpha + alpha * i as f64 / n as f64 - if i == n { 1e-12 } else { 0.0 };
            if f(prev).signum() != f(e).signum() {
                let (mut a, mut b) = (prev, e);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if f(a).signum() == f(m).signum() {
                        a = m
                    } else {
                        b = m
                    }
                }
                let r = 0.5 * (a + b);
                // reject sign flips caused by poles of tan
                if f(r).abs() < 1e-6 {
                    roots.push(r);
                }
            }
            prev = e;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}
