//! Modified Bessel functions of the second kind and the square-root branches
//! used to continue resolvents across the real axis.
//!
//! `k0`, `k1` and `k0_k1` accept any [`ComplexFloat`], so the same code serves
//! real arguments (fast path for real energies) and complex arguments.

use num_complex::{Complex, ComplexFloat};
use num_traits::{Float, NumCast, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Below this modulus the ascending series is used.
pub const SERIES_LIMIT: f64 = 2.0;
/// Above this modulus the asymptotic expansion is used.
pub const ASYMPTOTIC_LIMIT: f64 = 25.0;
const MAX_TERMS: usize = 10_000;

#[inline]
fn c<F: ComplexFloat>(x: f64) -> F {
    <F as NumCast>::from(x).unwrap()
}

#[inline]
fn r<F: ComplexFloat>(x: f64) -> F::Real {
    <F::Real as NumCast>::from(x).unwrap()
}

fn check_argument<F: ComplexFloat>(w: F) -> Result<()> {
    if w.is_nan() {
        return Err(Error::Domain("NaN argument".into()));
    }
    if w.abs() == F::Real::zero() {
        return Err(Error::Singularity("K_nu(0)".into()));
    }
    if w.re() <= F::Real::zero() {
        let (re, im): (f64, f64) = (
            NumCast::from(w.re()).unwrap_or(f64::NAN),
            NumCast::from(w.im()).unwrap_or(f64::NAN),
        );
        return Err(Error::BranchCut(format!("{re}{im:+}i")));
    }
    Ok(())
}

/// `K0(w)` for `Re w > 0`.
pub fn k0<F: ComplexFloat>(w: F) -> Result<F> {
    k0_k1(w).map(|p| p.0)
}

/// `K1(w)` for `Re w > 0`.
pub fn k1<F: ComplexFloat>(w: F) -> Result<F> {
    k0_k1(w).map(|p| p.1)
}

/// `(K0(w), K1(w))` evaluated together.
pub fn k0_k1<F: ComplexFloat>(w: F) -> Result<(F, F)> {
    check_argument(w)?;
    let a = w.abs();
    if a <= r::<F>(SERIES_LIMIT) {
        Ok(series(w))
    } else if a < r::<F>(ASYMPTOTIC_LIMIT) {
        steed(w)
    } else {
        Ok(asymptotic(w))
    }
}

/// `K0` on the half-line, `x > 0`.
pub fn k0_complex<T: Float>(w: Complex<T>) -> Result<Complex<T>>
where
    Complex<T>: ComplexFloat<Real = T>,
{
    k0(w)
}

/// `1 - w K1(w)` without cancellation for small `|w|`.
pub fn one_minus_w_k1<F: ComplexFloat>(w: F) -> Result<F> {
    check_argument(w)?;
    if w.abs() <= r::<F>(SERIES_LIMIT) {
        Ok(series_parts(w).2)
    } else {
        Ok(F::one() - w * k1(w)?)
    }
}

pub(crate) fn series<F: ComplexFloat>(w: F) -> (F, F) {
    let (k0, k1, _) = series_parts(w);
    (k0, k1)
}

fn series_parts<F: ComplexFloat>(w: F) -> (F, F, F) {
    let eps = F::Real::epsilon();
    let half = c::<F>(0.5);
    let t = w * w * c::<F>(0.25);
    let lnh = (w * half).ln();
    let gamma = c::<F>(EULER_GAMMA);

    let mut i0 = F::one();
    let mut s0 = F::zero();
    let mut i1s = F::one();
    let mut s1 = c::<F>(1.0 - 2.0 * EULER_GAMMA);
    let mut p0 = F::one(); // t^k / (k!)^2
    let mut p1 = F::one(); // t^k / (k! (k+1)!)
    let mut h = 0.0f64; // H_k
    for k in 1..200usize {
        let kf = k as f64;
        h += 1.0 / kf;
        p0 = p0 * t / c::<F>(kf * kf);
        p1 = p1 * t / c::<F>(kf * (kf + 1.0));
        i0 = i0 + p0;
        s0 = s0 + p0 * c::<F>(h);
        i1s = i1s + p1;
        let psi_sum = (h - EULER_GAMMA) + (h + 1.0 / (kf + 1.0) - EULER_GAMMA);
        s1 = s1 + p1 * c::<F>(psi_sum);
        if p0.abs() <= eps * i0.abs() * r::<F>(0.1) && p1.abs() <= eps * i1s.abs() * r::<F>(0.1) {
            break;
        }
    }
    let k0 = -(lnh + gamma) * i0 + s0;
    let i1 = w * half * i1s;
    let tail = w * w * c::<F>(0.25) * s1 - w * lnh * i1;
    let k1 = w.recip() + lnh * i1 - w * c::<F>(0.25) * s1;
    (k0, k1, tail)
}

/// Temme/Steed continued fraction for `K_0`, `K_1`.
pub(crate) fn steed<F: ComplexFloat>(w: F) -> Result<(F, F)> {
    let eps = F::Real::epsilon();
    let one = F::one();
    let two = c::<F>(2.0);
    let mut b = two * (one + w);
    let mut d = b.recip();
    let mut h = d;
    let mut delh = d;
    let mut q1 = F::zero();
    let mut q2 = one;
    let a1 = c::<F>(0.25);
    let mut q = a1;
    let mut cc = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut converged = false;
    for i in 2..MAX_TERMS {
        let fi = c::<F>(i as f64);
        a = a - c::<F>(2.0 * (i as f64 - 1.0));
        cc = -a * cc / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + cc * qnew;
        b = b + two;
        d = (b + a * d).recip();
        delh = (b * d - one) * delh;
        h = h + delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < eps {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Solver("K0 continued fraction did not converge".into()));
    }
    h = a1 * h;
    let k0 = (c::<F>(std::f64::consts::FRAC_PI_2) / w).sqrt() * (-w).exp() / s;
    let k1 = k0 * (w + c::<F>(0.5) - h) / w;
    Ok((k0, k1))
}

pub(crate) fn asymptotic<F: ComplexFloat>(w: F) -> (F, F) {
    let eps = F::Real::epsilon();
    let pref = (c::<F>(std::f64::consts::FRAC_PI_2) / w).sqrt() * (-w).exp();
    let z8 = c::<F>(8.0) * w;
    let mut sum0 = F::one();
    let mut sum1 = F::one();
    let mut t0 = F::one();
    let mut t1 = F::one();
    let mut last0 = F::Real::infinity();
    let mut last1 = F::Real::infinity();
    let mut done0 = false;
    let mut done1 = false;
    for k in 1..60usize {
        let odd = (2 * k - 1) as f64;
        let kf = k as f64;
        if !done0 {
            let next = t0 * c::<F>(-odd * odd / kf) / z8;
            if next.abs() >= last0 {
                done0 = true;
            } else {
                t0 = next;
                last0 = next.abs();
                sum0 = sum0 + next;
                done0 = next.abs() < eps * sum0.abs() * r::<F>(0.1);
            }
        }
        if !done1 {
            let next = t1 * c::<F>((4.0 - odd * odd) / kf) / z8;
            if next.abs() >= last1 {
                done1 = true;
            } else {
                t1 = next;
                last1 = next.abs();
                sum1 = sum1 + next;
                done1 = next.abs() < eps * sum1.abs() * r::<F>(0.1);
            }
        }
        if done0 && done1 {
            break;
        }
    }
    (pref * sum0, pref * sum1)
}

/// Square root with non-negative imaginary part. The cut lies on `[0, inf)`.
pub fn sqrt_upper<T: Float>(z: Complex<T>) -> Complex<T> {
    let s = z.sqrt();
    if s.im < T::zero() {
        -s
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sheet {
    First,
    Second,
}

/// Sheet selection for one transverse channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetFlag {
    pub mode_index: usize,
    pub sheet: Sheet,
}

/// Channel momentum `tau_n(z) = sqrt(z - E_n)` on the requested sheet.
///
/// The first sheet is the physical one (`Im tau >= 0`). The second sheet is
/// reached by crossing the cut `(E_n, inf)` from above: it is the principal
/// root, with `Im tau < 0` in the open lower half-plane. On the real axis
/// below `E_n` the lower-lip value `-i sqrt(E_n - z)` is returned.
pub fn tau_mode<T: Float>(z: Complex<T>, e_n: T, sheet: Sheet) -> Result<Complex<T>> {
    if z.re.is_nan() || z.im.is_nan() || e_n.is_nan() {
        return Err(Error::Domain("NaN in tau_mode".into()));
    }
    let w = z - Complex::new(e_n, T::zero());
    match sheet {
        Sheet::First => Ok(sqrt_upper(w)),
        Sheet::Second => {
            if z.im > T::zero() {
                return Err(Error::Config(
                    "second sheet requested in the upper half-plane".into(),
                ));
            }
            if w.im == T::zero() {
                if w.re >= T::zero() {
                    Ok(Complex::new(w.re.sqrt(), T::zero()))
                } else {
                    Ok(Complex::new(T::zero(), -(-w.re).sqrt()))
                }
            } else {
                Ok(w.sqrt())
            }
        }
    }
}
