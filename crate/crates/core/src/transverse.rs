//! One-dimensional transverse problem `-u'' - alpha(x) u = E u` for a
//! piecewise-constant well supported on `[0, d]`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::specfun::sqrt_upper;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer<T> {
    pub start: T,
    pub end: T,
    /// Well depth; positive values attract.
    pub depth: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseProfile<T> {
    width: T,
    layers: Vec<Layer<T>>,
}

fn t<T: Scalar>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

impl<T: Scalar> TransverseProfile<T> {
    /// Builds a profile from consecutive `(thickness, depth)` pieces whose
    /// thicknesses must add up to `width`.
    pub fn new(width: T, pieces: &[(T, T)]) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::Config("strip width must be positive".into()));
        }
        if pieces.is_empty() {
            return Err(Error::Config("profile needs at least one piece".into()));
        }
        let mut layers = Vec::with_capacity(pieces.len());
        let mut x = T::zero();
        for &(h, depth) in pieces {
            if !(h > T::zero()) || !depth.is_finite() {
                return Err(Error::Config("pieces need positive thickness and finite depth".into()));
            }
            layers.push(Layer {
                start: x,
                end: x + h,
                depth,
            });
            x = x + h;
        }
        if (x - width).abs() > t::<T>(1e-9) * width {
            return Err(Error::Config(format!(
                "piece thicknesses sum to {x}, strip width is {width}"
            )));
        }
        layers.last_mut().unwrap().end = width;
        Ok(Self { width, layers })
    }

    pub fn constant(width: T, depth: T) -> Result<Self> {
        Self::new(width, &[(width, depth)])
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn depth_at(&self, x: T) -> T {
        self.layers
            .iter()
            .find(|l| x >= l.start && x <= l.end)
            .map_or(T::zero(), |l| l.depth)
    }

    pub fn max_depth(&self) -> T {
        self.layers.iter().fold(T::zero(), |m, l| m.max(l.depth))
    }

    /// True when every layer has zero depth.
    pub fn is_free(&self) -> bool {
        self.layers.iter().all(|l| l.depth == T::zero())
    }

    /// Number of eigenvalues strictly below `e <= 0`, from the zeros of the
    /// solution that decays at `-inf`.
    pub fn count_below(&self, e: T) -> usize {
        let kappa = (-e).max(T::zero()).sqrt();
        let (mut f, mut fp) = (T::one(), kappa);
        let mut zeros = 0usize;
        for l in &self.layers {
            let len = l.end - l.start;
            let q2 = l.depth + e;
            let (c, s, sp) = transfer_real(q2, len);
            let (f1, fp1) = (c * f + s * fp, sp * f + c * fp);
            if q2 > T::zero() {
                let q = q2.sqrt();
                let phi0 = (q * f).atan2(fp);
                let pi = T::PI();
                let after = ((phi0 + q * len) / pi).floor().to_i64().unwrap_or(0);
                let before = (phi0 / pi).floor().to_i64().unwrap_or(0);
                zeros += (after - before).max(0) as usize;
            } else if f1 == T::zero() || f * f1 < T::zero() {
                zeros += 1;
            }
            f = f1;
            fp = fp1;
        }
        if kappa > T::zero() {
            let a = (f + fp / kappa) * t(0.5);
            let b = (f - fp / kappa) * t(0.5);
            if a != T::zero() && -b / a > T::one() {
                zeros += 1;
            }
        } else if fp != T::zero() && -f / fp > T::zero() {
            zeros += 1;
        }
        zeros
    }
}

/// `(cos(qL), sin(qL)/q, -q sin(qL))` for `q^2 = q2`, valid for either sign.
pub(crate) fn transfer_real<T: Scalar>(q2: T, len: T) -> (T, T, T) {
    if q2 > T::zero() {
        let q = q2.sqrt();
        let (s, c) = (q * len).sin_cos();
        (c, s / q, -q * s)
    } else if q2 < T::zero() {
        let k = (-q2).sqrt();
        let x = k * len;
        (x.cosh(), x.sinh() / k, k * x.sinh())
    } else {
        (T::one(), len, T::zero())
    }
}

pub(crate) fn transfer_complex<T: Scalar>(
    q2: Complex<T>,
    len: T,
) -> (Complex<T>, Complex<T>, Complex<T>) {
    let q = q2.sqrt();
    let ql = q * len;
    if ql.norm() < t(1e-8) {
        let l2 = len * len;
        let c = Complex::new(T::one(), T::zero()) - q2 * (l2 * t(0.5));
        let s = Complex::new(len, T::zero()) - q2 * (l2 * len / t(6.0));
        return (c, s, -q2 * len);
    }
    let (sn, cs) = (ql.sin(), ql.cos());
    (cs, sn / q, -q * sn)
}

fn propagate_real<T: Scalar>(layers: &[Layer<T>], e: T, f0: T, fp0: T, x: T) -> (T, T) {
    let (mut f, mut fp) = (f0, fp0);
    for l in layers {
        if x <= l.start {
            break;
        }
        let len = x.min(l.end) - l.start;
        let (c, s, sp) = transfer_real(l.depth + e, len);
        let next = (c * f + s * fp, sp * f + c * fp);
        f = next.0;
        fp = next.1;
    }
    (f, fp)
}

/// Solution with data `(f0, fp0)` at `x = 0`, carried to `x` in `[0, d]`.
fn propagate_complex_forward<T: Scalar>(
    layers: &[Layer<T>],
    lambda: Complex<T>,
    f0: Complex<T>,
    fp0: Complex<T>,
    x: T,
) -> (Complex<T>, Complex<T>) {
    let (mut f, mut fp) = (f0, fp0);
    for l in layers {
        if x <= l.start {
            break;
        }
        let len = x.min(l.end) - l.start;
        let (c, s, sp) = transfer_complex(lambda + l.depth, len);
        let next = (c * f + s * fp, sp * f + c * fp);
        f = next.0;
        fp = next.1;
    }
    (f, fp)
}

/// Solution with data `(f0, fp0)` at `x = d`, carried back to `x` in `[0, d]`.
fn propagate_complex_backward<T: Scalar>(
    layers: &[Layer<T>],
    lambda: Complex<T>,
    f0: Complex<T>,
    fp0: Complex<T>,
    x: T,
) -> (Complex<T>, Complex<T>) {
    let (mut f, mut fp) = (f0, fp0);
    for l in layers.iter().rev() {
        if x >= l.end {
            break;
        }
        let len = x.max(l.start) - l.end;
        let (c, s, sp) = transfer_complex(lambda + l.depth, len);
        let next = (c * f + s * fp, sp * f + c * fp);
        f = next.0;
        fp = next.1;
    }
    (f, fp)
}

/// Normalized bound state of the transverse operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseMode<T> {
    /// One-based index, ordered by increasing energy.
    pub index: usize,
    pub energy: T,
    /// Decay rate `sqrt(-E)` outside the strip.
    pub kappa: T,
    /// `phi(x) = m_left exp(kappa x)` for `x < 0`.
    pub m_left: T,
    /// `phi(x) = m_right exp(-kappa (x - d))` for `x > d`.
    pub m_right: T,
    /// Value and slope at the start of each layer.
    pub table: Vec<(T, T)>,
    layers: Vec<Layer<T>>,
    width: T,
}

impl<T: Scalar> TransverseMode<T> {
    pub fn width(&self) -> T {
        self.width
    }
}

/// Bound states of the transverse operator, by Sturm-count bisection.
///
/// Returns an empty list when the well binds nothing.
pub fn solve_modes<T: Scalar>(profile: &TransverseProfile<T>, tol: T) -> Result<Vec<TransverseMode<T>>> {
    let tol = tol.max(T::epsilon() * t(8.0));
    let lower = -profile.max_depth();
    let total = profile.count_below(T::zero());
    let mut energies = Vec::with_capacity(total);
    for n in 1..=total {
        let (mut lo, mut hi) = (lower, T::zero());
        while hi - lo > tol * T::one().max(lo.abs()) {
            let mid = (lo + hi) * t(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if profile.count_below(mid) >= n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        energies.push((lo + hi) * t(0.5));
    }
    for w in energies.windows(2) {
        if w[1] - w[0] < t(1e-9) {
            return Err(Error::Multiplicity(format!(
                "transverse eigenvalues {} and {} are closer than 1e-9",
                w[0], w[1]
            )));
        }
    }
    energies
        .into_iter()
        .enumerate()
        .map(|(i, e)| build_mode(profile, i + 1, e))
        .collect()
}

fn build_mode<T: Scalar>(profile: &TransverseProfile<T>, index: usize, e: T) -> Result<TransverseMode<T>> {
    if !(e < T::zero()) {
        return Err(Error::Solver("bound state energy must be negative".into()));
    }
    let kappa = (-e).sqrt();
    let mut table = Vec::with_capacity(profile.layers.len());
    let (mut f, mut fp) = (T::one(), kappa);
    let mut norm = T::one() / (t::<T>(2.0) * kappa);
    for l in &profile.layers {
        table.push((f, fp));
        let len = l.end - l.start;
        let q2 = l.depth + e;
        let waves = (q2.abs().sqrt() * len).to_f64().unwrap_or(0.0).ceil() as usize;
        let (xs, ws) = gauss_legendre::<T>(24 + 4 * waves);
        let h = len * t(0.5);
        for (x, w) in xs.iter().zip(&ws) {
            let (c, s, _) = transfer_real(q2, h * (*x + T::one()));
            let v = c * f + s * fp;
            norm = norm + *w * h * v * v;
        }
        let (c, s, sp) = transfer_real(q2, len);
        let next = (c * f + s * fp, sp * f + c * fp);
        f = next.0;
        fp = next.1;
    }
    norm = norm + f * f / (t::<T>(2.0) * kappa);
    let scale = T::one() / norm.sqrt();
    for row in &mut table {
        row.0 = row.0 * scale;
        row.1 = row.1 * scale;
    }
    Ok(TransverseMode {
        index,
        energy: e,
        kappa,
        m_left: scale,
        m_right: f * scale,
        table,
        layers: profile.layers.clone(),
        width: profile.width,
    })
}

/// `(phi(x), phi'(x))` for a bound mode.
pub fn eval_mode_with_slope<T: Scalar>(mode: &TransverseMode<T>, x: T) -> (T, T) {
    if x < T::zero() {
        let v = mode.m_left * (mode.kappa * x).exp();
        return (v, mode.kappa * v);
    }
    if x > mode.width {
        let v = mode.m_right * (-mode.kappa * (x - mode.width)).exp();
        return (v, -mode.kappa * v);
    }
    let i = mode
        .layers
        .iter()
        .position(|l| x <= l.end)
        .unwrap_or(mode.layers.len() - 1);
    let l = &mode.layers[i];
    let (f, fp) = mode.table[i];
    let (c, s, sp) = transfer_real(l.depth + mode.energy, x - l.start);
    (c * f + s * fp, sp * f + c * fp)
}

/// Bound mode `phi_n(x)`; positive just below `x = 0`.
pub fn eval_mode<T: Scalar>(mode: &TransverseMode<T>, x: T) -> T {
    eval_mode_with_slope(mode, x).0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Built from the solution with `u(0) = 1, u'(0) = 0`.
    Cosine,
    /// Mixes in the solution with `u(0) = 0, u'(0) = p`.
    Sine,
}

/// Real standing-wave basis of the continuum at momentum `p > 0`, normalized
/// so that `sum_c psi_c(x) psi_c(y)` is the spectral density in `dp`.
#[derive(Debug, Clone)]
pub struct ContinuumBasis<T> {
    pub p: T,
    chol: (T, T, T),
    layers: Vec<Layer<T>>,
    width: T,
    right: [(T, T); 2],
}

impl<T: Scalar> ContinuumBasis<T> {
    pub fn new(profile: &TransverseProfile<T>, p: T) -> Result<Self> {
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::Threshold("continuum momentum must be positive".into()));
        }
        let e = p * p;
        let d = profile.width;
        let u1 = propagate_real(&profile.layers, e, T::one(), T::zero(), d);
        let u2 = propagate_real(&profile.layers, e, T::zero(), p, d);
        let half = t::<T>(0.5);
        let i = Complex::new(T::zero(), T::one());
        let a1 = Complex::new(half, T::zero());
        let a2 = Complex::new(T::zero(), -half);
        let b = |u: (T, T)| (Complex::new(u.0, T::zero()) - i * (u.1 / p)) * half;
        let (b1, b2) = (b(u1).conj(), b(u2).conj());
        let det = a1 * b2 - a2 * b1;
        if det.norm() < T::epsilon() {
            return Err(Error::Solver("singular scattering matrix".into()));
        }
        let s = T::one() / (t::<T>(2.0) * T::PI()).sqrt();
        let c11 = b2 / det * s;
        let c12 = -a2 / det * s;
        let c21 = -b1 / det * s;
        let c22 = a1 / det * s;
        let m11 = (c11 * c11.conj() + c12 * c12.conj()).re;
        let m12 = (c11 * c21.conj() + c12 * c22.conj()).re;
        let m22 = (c21 * c21.conj() + c22 * c22.conj()).re;
        let l11 = m11.sqrt();
        let l21 = m12 / l11;
        let l22 = (m22 - l21 * l21).max(T::zero()).sqrt();
        Ok(Self {
            p,
            chol: (l11, l21, l22),
            layers: profile.layers.clone(),
            width: d,
            right: [u1, u2],
        })
    }

    fn real_solutions(&self, x: T) -> (T, T) {
        let p = self.p;
        if x <= T::zero() {
            let (s, c) = (p * x).sin_cos();
            return (c, s);
        }
        if x >= self.width {
            let (s, c) = (p * (x - self.width)).sin_cos();
            let [u1, u2] = self.right;
            return (u1.0 * c + u1.1 * s / p, u2.0 * c + u2.1 * s / p);
        }
        let e = p * p;
        (
            propagate_real(&self.layers, e, T::one(), T::zero(), x).0,
            propagate_real(&self.layers, e, T::zero(), p, x).0,
        )
    }

    /// Both channels at `x`.
    pub fn eval(&self, x: T) -> (T, T) {
        let (u1, u2) = self.real_solutions(x);
        let (l11, l21, l22) = self.chol;
        (l11 * u1 + l21 * u2, l22 * u2)
    }

    pub fn eval_channel(&self, channel: Channel, x: T) -> T {
        let v = self.eval(x);
        match channel {
            Channel::Cosine => v.0,
            Channel::Sine => v.1,
        }
    }
}

/// Generalized eigenfunction `psi(x; p)` of the given channel.
pub fn generalized_eigenfunction<T: Scalar>(
    profile: &TransverseProfile<T>,
    p: T,
    channel: Channel,
    x: T,
) -> Result<T> {
    Ok(ContinuumBasis::new(profile, p)?.eval_channel(channel, x))
}

/// Jost data at momentum `k`: the solution `f_-` equal to `exp(-ikx)` for
/// `x <= 0` reads `a exp(ik(x-d)) + b exp(-ik(x-d))` for `x >= d`, and
/// `f_+ = exp(ik(x-d))` on the right reads `A exp(-ikx) + B exp(ikx)` on the left.
#[derive(Debug, Clone, Copy)]
pub struct JostData<T> {
    pub k: Complex<T>,
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub a_left: Complex<T>,
    pub b_left: Complex<T>,
    pub width: T,
}

impl<T: Scalar> JostData<T> {
    pub fn new(profile: &TransverseProfile<T>, k: Complex<T>) -> Result<Self> {
        if k.norm() == T::zero() {
            return Err(Error::Threshold("Jost data at k = 0".into()));
        }
        let i = Complex::new(T::zero(), T::one());
        let lambda = k * k;
        let one = Complex::new(T::one(), T::zero());
        let d = profile.width;
        let (f, fp) = propagate_complex_forward(&profile.layers, lambda, one, -i * k, d);
        let half = t::<T>(0.5);
        let a = (f + fp / (i * k)) * half;
        let b = (f - fp / (i * k)) * half;
        let (g, gp) = propagate_complex_backward(&profile.layers, lambda, one, i * k, T::zero());
        let a_left = (g - gp / (i * k)) * half;
        let b_left = (g + gp / (i * k)) * half;
        Ok(Self {
            k,
            a,
            b,
            a_left,
            b_left,
            width: d,
        })
    }

    /// Right reflection amplitude `a / b`.
    pub fn reflection_right(&self) -> Complex<T> {
        self.a / self.b
    }

    /// Left reflection amplitude `A / B`.
    pub fn reflection_left(&self) -> Complex<T> {
        self.a_left / self.b_left
    }

    /// `1/b - exp(ikd)`: the perturbation of the kernel between opposite sides.
    pub fn transmission_excess(&self) -> Complex<T> {
        let i = Complex::new(T::zero(), T::one());
        self.b.inv() - (i * self.k * self.width).exp()
    }
}

/// Kernel of `(h_alpha - zeta)^{-1}` on the physical sheet.
pub fn transverse_green<T: Scalar>(
    profile: &TransverseProfile<T>,
    zeta: Complex<T>,
    x: T,
    y: T,
) -> Result<Complex<T>> {
    let k = sqrt_upper(zeta);
    if k.norm() <= T::epsilon() {
        return Err(Error::Threshold("transverse Green function at zeta = 0".into()));
    }
    let jost = JostData::new(profile, k)?;
    let scale = jost.b.norm().max(jost.a.norm()).max(T::one());
    if jost.b.norm() <= t::<T>(1e-13) * scale {
        return Err(Error::Pole(format!(
            "zeta = {} is a transverse eigenvalue",
            zeta
        )));
    }
    let d = profile.width;
    let i = Complex::new(T::zero(), T::one());
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let pref = i / (k * t::<T>(2.0));
    let e = |s: T| (i * k * s).exp();
    if lo >= d {
        return Ok(pref * (e(hi - lo) + jost.reflection_right() * e(lo + hi - d - d)));
    }
    if hi <= T::zero() {
        return Ok(pref * (e(hi - lo) + jost.reflection_left() * e(-lo - hi)));
    }
    if lo <= T::zero() && hi >= d {
        return Ok(pref * e(-lo + hi - d) / jost.b);
    }
    let one = Complex::new(T::one(), T::zero());
    let f_minus = if lo <= T::zero() {
        e(-lo)
    } else {
        propagate_complex_forward(&profile.layers, k * k, one, -i * k, lo).0
    };
    let f_plus = if hi >= d {
        e(hi - d)
    } else {
        propagate_complex_backward(&profile.layers, k * k, one, i * k, hi).0
    };
    let wronskian = -i * k * jost.b * t::<T>(2.0);
    Ok(f_minus * f_plus / wronskian)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_well_counts_modes() {
        let p = TransverseProfile::constant(2.0f64, 5.0).unwrap();
        let modes = solve_modes(&p, 1e-14).unwrap();
        assert_eq!(modes.len(), 2);
        assert!(modes[0].energy < modes[1].energy);
        assert!(eval_mode(&modes[0], -1e-3) > 0.0 && eval_mode(&modes[1], -1e-3) > 0.0);
    }

    #[test]
    fn free_profile_has_no_modes() {
        let p = TransverseProfile::constant(1.0f64, 0.0).unwrap();
        assert!(solve_modes(&p, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn single_precision_profile() {
        let p = TransverseProfile::constant(2.0f32, 5.0).unwrap();
        let modes = solve_modes(&p, 1e-6).unwrap();
        assert_eq!(modes.len(), 2);
    }
}
