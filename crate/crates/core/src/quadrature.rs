//! Gauss-Legendre rules and adaptive Gauss-Kronrod integration.

use num_complex::Complex64;
use num_traits::{Float, FloatConst, FromPrimitive};

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Float + FloatConst + FromPrimitive>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let f = |x: f64| T::from_f64(x).unwrap();
    let one = T::one();
    let two = f(2.0);
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let m = n.div_ceil(2);
    let nf = f(n as f64);
    for i in 0..m {
        let mut z = (T::PI() * f(i as f64 + 0.75) / f(n as f64 + 0.5)).cos();
        let mut dp = one;
        for _ in 0..100 {
            let mut p1 = one;
            let mut p2 = T::zero();
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = f(j as f64);
                p1 = ((two * jf + one) * z * p2 - jf * p3) / (jf + one);
            }
            dp = nf * (z * p1 - p2) / (z * z - one);
            let dz = p1 / dp;
            z = z - dz;
            if dz.abs() <= T::epsilon() * f(4.0) {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = two / ((one - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre::<f64>(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    (
        x.iter().map(|t| m + h * t).collect(),
        w.iter().map(|v| v * h).collect(),
    )
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    let fc = f(m);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(m - dx) + f(m + dx);
        rk += s * WGK[j];
        if j % 2 == 1 {
            rg += s * WG[j / 2];
        }
    }
    (rk * h, ((rk - rg) * h).norm())
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 2000,
        }
    }
}

/// Globally adaptive G7-K15 quadrature of a complex integrand on `[a, b]`.
/// Returns the integral and the error estimate.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<(Complex64, f64)> {
    if a == b {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let (v, e) = kronrod(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol.abs.max(tol.rel * total.norm()) {
        if pieces.len() >= tol.max_intervals {
            return Err(Error::Accuracy(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {err:.3e}"
            )));
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, pv, pe) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Accuracy("quadrature interval underflow".into()));
        }
        let (v1, e1) = kronrod(&mut f, lo, mid);
        let (v2, e2) = kronrod(&mut f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
        if pieces.len() % 64 == 0 {
            total = pieces.iter().map(|p| p.2).sum();
            err = pieces.iter().map(|p| p.3).sum();
        }
    }
    Ok((total, err))
}

/// Real-valued wrapper around [`integrate`].
pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, tol).map(|(v, _)| v.re)
}

/// Integral over `[a, inf)` accumulated panel by panel. Stops once three
/// consecutive panels contribute less than the tolerance; fails past `cap`.
pub fn integrate_to_infinity<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    panel: f64,
    tol: Tolerance,
    cap: f64,
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut lo = a;
    let mut quiet = 0;
    let per_panel = Tolerance {
        abs: tol.abs * 0.1,
        ..tol
    };
    while quiet < 3 {
        if lo >= cap {
            return Err(Error::Accuracy(format!(
                "integrand not negligible before cutoff {cap}"
            )));
        }
        let (v, _) = integrate(&mut f, lo, lo + panel, per_panel)?;
        total += v;
        if v.norm() <= tol.abs.max(tol.rel * total.norm()) * 0.1 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        lo += panel;
    }
    Ok(total)
}
