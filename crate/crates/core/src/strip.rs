//! The guide resolvent `R_alpha(z) = (-Laplacian - alpha chi_strip - z)^{-1}`
//! seen from a trap off the strip `R x [0, d]`.
//!
//! `R_alpha = R^d + R^c` splits into bound transverse modes, each continued
//! to its own sheet, and the transverse continuum. The coupling operator is
//! `G(z) = beta chi (R_alpha(z) - R_0(z)) chi`. Off the strip the difference
//! `R^c - R_0` is a reflection integral over the transverse momentum; it is
//! smooth at coincident points and is evaluated on a contour in the upper
//! half-plane, away from the bound-state poles on the imaginary axis.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bs::wavenumber;
use crate::error::{Error, Result};
use crate::measure::{KatoMeasure, Point};
use crate::quadrature::{gauss_legendre, integrate, integrate_to_infinity, Tolerance};
use crate::specfun::{k0, k0_k1, sqrt_upper, tau_mode, Sheet, SheetFlag};
use crate::transverse::{eval_mode, transverse_green, ContinuumBasis, JostData, TransverseMode, TransverseProfile};

/// Angle of the momentum contour rays `u e^{i theta}` and `-u e^{-i theta}`.
pub const CONTOUR_ANGLE: f64 = PI / 4.0;
/// Hard cap on momentum integrals along the real axis.
pub const MOMENTUM_CAP: f64 = 1e5;

const GAUSS_POINTS: usize = 20;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sheet of every transverse channel when continuing through
/// `(E_j, E_{j+1})`: the second sheet for `n <= j`, the first above.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetConfig {
    pub flags: Vec<SheetFlag>,
    /// The segment index `j`; zero means the physical sheet everywhere.
    pub segment: usize,
}

impl SheetConfig {
    pub fn physical(mode_count: usize) -> Self {
        Self {
            flags: (1..=mode_count)
                .map(|n| SheetFlag {
                    mode_index: n,
                    sheet: Sheet::First,
                })
                .collect(),
            segment: 0,
        }
    }

    pub fn through_segment(mode_count: usize, segment: usize) -> Result<Self> {
        if segment > mode_count {
            return Err(Error::Config(format!(
                "segment {segment} needs at least {segment} transverse modes, have {mode_count}"
            )));
        }
        Ok(Self {
            flags: (1..=mode_count)
                .map(|n| SheetFlag {
                    mode_index: n,
                    sheet: if n <= segment { Sheet::Second } else { Sheet::First },
                })
                .collect(),
            segment,
        })
    }

    /// Continuation through the segment containing the real energy `e`.
    pub fn for_energy(modes: &[TransverseMode<f64>], e: f64) -> Self {
        let j = modes.iter().filter(|m| m.energy < e).count();
        Self::through_segment(modes.len(), j).expect("segment bounded by mode count")
    }

    pub fn sheet(&self, mode_index: usize) -> Sheet {
        self.flags
            .iter()
            .find(|f| f.mode_index == mode_index)
            .map_or(Sheet::First, |f| f.sheet)
    }

    /// Second-sheet values exist only in the closed lower half-plane.
    pub fn validate(&self, z: Complex64) -> Result<()> {
        if self.segment > 0 && z.im > 0.0 {
            return Err(Error::Config(format!(
                "z = {z} lies above the real axis but the sheet continues through segment {}",
                self.segment
            )));
        }
        Ok(())
    }
}

/// Kernel `K0(k_z |x - y|) / (2 pi)` of the free resolvent.
pub fn free_kernel(z: Complex64, x: Point, y: Point) -> Result<Complex64> {
    let k = wavenumber(z)?;
    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
    Ok(k0(k * r)? / (2.0 * PI))
}

/// One-dimensional free Green function `(i/2) e^{i kappa |delta|} / kappa`,
/// `kappa = sqrt(zeta)` with `Im kappa >= 0`.
pub fn line_green(zeta: Complex64, delta: f64) -> Result<Complex64> {
    let kappa = sqrt_upper(zeta);
    if kappa.norm() == 0.0 {
        return Err(Error::Threshold("line Green function at zeta = 0".into()));
    }
    Ok(0.5 * I * (I * kappa * delta.abs()).exp() / kappa)
}

/// Discrete part `(i/2) sum_n e^{i tau_n |x1 - y1|} / tau_n phi_n(x2) phi_n(y2)`,
/// with `tau_n` on the sheet chosen for mode `n`.
pub fn rd_kernel(
    modes: &[TransverseMode<f64>],
    z: Complex64,
    sheet: &SheetConfig,
    x: Point,
    y: Point,
) -> Result<Complex64> {
    sheet.validate(z)?;
    let delta = (x[0] - y[0]).abs();
    let mut sum = Complex64::new(0.0, 0.0);
    for m in modes {
        let tau = tau_mode(z, m.energy, sheet.sheet(m.index))?;
        if tau.norm() == 0.0 {
            return Err(Error::Threshold(format!("z sits on the threshold of mode {}", m.index)));
        }
        sum += 0.5 * I * (I * tau * delta).exp() / tau * eval_mode(m, x[1]) * eval_mode(m, y[1]);
    }
    Ok(sum)
}

fn momentum_panel(delta1: f64, delta2: f64) -> f64 {
    let scale = delta1.abs().max(delta2.abs());
    if scale > 0.0 {
        (PI / scale).min(4.0)
    } else {
        4.0
    }
}

/// Continuum part `R^c` from the standing-wave basis:
/// `int_0^inf sum_c psi_c(x2; p) psi_c(y2; p) g_1(z - p^2; x1 - y1) dp`.
/// The plane-wave density `cos(p (x2 - y2)) / pi`, whose integral is the free
/// kernel, is subtracted under the integral and added back in closed form.
pub fn rc_kernel(profile: &TransverseProfile<f64>, z: Complex64, x: Point, y: Point, tol: f64) -> Result<Complex64> {
    if z.re >= 0.0 && z.im == 0.0 {
        return Err(Error::BranchCut(format!("continuum kernel at z = {z} on [0, inf)")));
    }
    let delta1 = x[0] - y[0];
    let delta2 = x[1] - y[1];
    let mut failed = None;
    let integrand = |p: f64| -> Complex64 {
        let density = match ContinuumBasis::new(profile, p) {
            Ok(basis) => {
                let (a1, a2) = basis.eval(x[1]);
                let (b1, b2) = basis.eval(y[1]);
                a1 * b1 + a2 * b2 - (p * delta2).cos() / PI
            }
            Err(e) => {
                failed = Some(e);
                0.0
            }
        };
        match line_green(z - p * p, delta1) {
            Ok(g) => g * density,
            Err(e) => {
                failed = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let tolerance = Tolerance {
        abs: tol,
        rel: tol,
        max_intervals: 4000,
    };
    let remainder = integrate_to_infinity(integrand, 0.0, momentum_panel(delta1, delta2), tolerance, MOMENTUM_CAP)
        .map_err(|e| Error::Accuracy(format!("continuum kernel between {x:?} and {y:?}: {e}")))?;
    if let Some(e) = failed {
        return Err(e);
    }
    Ok(free_kernel(z, x, y)? + remainder)
}

/// Reference route on the physical sheet through the longitudinal Fourier
/// transform, `(1/pi) int_0^inf cos(p (x1 - y1)) g_alpha(z - p^2; x2, y2) dp`
/// with `g_alpha` the transverse Green function. The free line kernel is
/// subtracted under the integral and its transform added back.
pub fn fourier_route_kernel(
    profile: &TransverseProfile<f64>,
    z: Complex64,
    x: Point,
    y: Point,
    tol: f64,
) -> Result<Complex64> {
    if z.im < 0.0 {
        return Err(Error::Config("the Fourier route is defined on the physical sheet only".into()));
    }
    if z.im == 0.0 && profile.count_below(z.re) > 0 {
        return Err(Error::Config(format!(
            "real z = {} lies above the lowest transverse threshold",
            z.re
        )));
    }
    let delta1 = x[0] - y[0];
    let delta2 = x[1] - y[1];
    let mut failed = None;
    let integrand = |p: f64| -> Complex64 {
        let zeta = z - p * p;
        let value = transverse_green(profile, zeta, x[1], y[1]).and_then(|g| Ok(g - line_green(zeta, delta2)?));
        match value {
            Ok(v) => v * (p * delta1).cos() / PI,
            Err(e) => {
                failed = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let tolerance = Tolerance {
        abs: tol,
        rel: tol,
        max_intervals: 4000,
    };
    let remainder = integrate_to_infinity(integrand, 0.0, momentum_panel(delta1, delta2), tolerance, MOMENTUM_CAP)
        .map_err(|e| Error::Accuracy(format!("Fourier route between {x:?} and {y:?}: {e}")))?;
    if let Some(e) = failed {
        return Err(e);
    }
    Ok(free_kernel(z, x, y)? + remainder)
}

/// How a pair of points off the strip sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairKind {
    Above,
    Below,
    Across,
}

/// Distance of `x2` to the strip, with the side it lies on.
fn offset(x2: f64, width: f64) -> Result<(bool, f64)> {
    if x2 > width {
        Ok((true, x2 - width))
    } else if x2 < 0.0 {
        Ok((false, -x2))
    } else {
        Err(Error::Geometry(format!("x2 = {x2} lies inside the strip [0, {width}]")))
    }
}

fn pair(x: Point, y: Point, width: f64) -> Result<(PairKind, f64, f64)> {
    let (ax, sx) = offset(x[1], width)?;
    let (ay, sy) = offset(y[1], width)?;
    let kind = match (ax, ay) {
        (true, true) => PairKind::Above,
        (false, false) => PairKind::Below,
        _ => PairKind::Across,
    };
    Ok((kind, sx + sy, (x[0] - y[0]).abs()))
}

#[derive(Debug, Clone, Copy)]
struct ContourNode {
    p: Complex64,
    weight: Complex64,
    above: Complex64,
    below: Complex64,
    across: Complex64,
}

/// Quadrature for `(R^c - R_0)(z; x, y) = (1/2 pi) int Q(p) e^{i p s} g_1(z - p^2; x1 - y1) dp`
/// on the rays `u e^{i theta}` and `-u e^{-i theta}`, `u >= 0`. `Q` is the
/// right reflection amplitude with `s = (x2 - d) + (y2 - d)` above the strip,
/// the left one with `s = -x2 - y2` below, and `1/b - e^{ipd}` across it.
///
/// The rule depends only on the profile and on the range of `s` and
/// `|x1 - y1|`; it is valid for `Re z < 0`. The branch points of
/// `sqrt(z - p^2)` approach the ray as `arg z -> pi/2`, and accuracy drops
/// there (about `1e-6` at `arg z = 95` degrees).
#[derive(Debug, Clone)]
pub struct ContinuumContour {
    nodes: Vec<ContourNode>,
    width: f64,
}

impl ContinuumContour {
    pub fn new(profile: &TransverseProfile<f64>, s_min: f64, s_max: f64, delta_max: f64) -> Result<Self> {
        if !(s_min > 0.0) || s_max < s_min {
            return Err(Error::Geometry(format!("invalid offset range [{s_min}, {s_max}]")));
        }
        let (sin, cos) = CONTOUR_ANGLE.sin_cos();
        let d = profile.width();
        let reach = 42.0 / (sin * s_min);
        let rate = cos * s_max + sin * delta_max + 2.0 * d + 1.0;
        let h = (10.0 / rate).min(1.0);
        let mut edges = vec![0.0, 0.125 * h, 0.25 * h, 0.5 * h];
        let mut u = h;
        while u < reach + h {
            edges.push(u);
            u += h;
        }
        let (gx, gw) = gauss_legendre::<f64>(GAUSS_POINTS);
        let right = Complex64::from_polar(1.0, CONTOUR_ANGLE);
        let left = right.conj();
        let mut nodes = Vec::with_capacity(2 * GAUSS_POINTS * edges.len());
        for e in edges.windows(2) {
            let (a, b) = (e[0], e[1]);
            for (t, w) in gx.iter().zip(&gw) {
                let u = 0.5 * (a + b) + 0.5 * (b - a) * t;
                let wu = 0.5 * (b - a) * w / (2.0 * PI);
                for (p, dp) in [(u * right, right), (-u * left, left)] {
                    let jost = JostData::new(profile, p)?;
                    nodes.push(ContourNode {
                        p,
                        weight: dp * wu,
                        above: jost.reflection_right(),
                        below: jost.reflection_left(),
                        across: jost.transmission_excess(),
                    });
                }
            }
        }
        Ok(Self { nodes, width: d })
    }

    /// Rule covering every pair of nodes of a measure.
    pub fn for_measure(profile: &TransverseProfile<f64>, measure: &KatoMeasure) -> Result<Self> {
        let d = profile.width();
        let mut offsets = Vec::with_capacity(measure.len());
        for p in &measure.nodes {
            offsets.push(offset(p[1], d)?.1);
        }
        let lo = offsets.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        let hi = offsets.iter().fold(0.0f64, |a, b| a.max(*b));
        let b = measure.support_box;
        Self::new(profile, 2.0 * lo, 2.0 * hi, b.max[0] - b.min[0])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn sum(&self, z: Complex64, kind: PairKind, s: f64, delta: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in &self.nodes {
            let q = match kind {
                PairKind::Above => n.above,
                PairKind::Below => n.below,
                PairKind::Across => n.across,
            };
            let kappa = sqrt_upper(z - n.p * n.p);
            acc += n.weight * q * (I * (n.p * s + kappa * delta)).exp() / kappa;
        }
        0.5 * I * acc
    }

    /// `(R^c - R_0)(z; x, y)` for points off the strip.
    pub fn kernel(&self, z: Complex64, x: Point, y: Point) -> Result<Complex64> {
        if !(z.re < 0.0) {
            return Err(Error::Config(format!("contour continuum needs Re z < 0, got {z}")));
        }
        let (kind, s, delta) = pair(x, y, self.width)?;
        Ok(self.sum(z, kind, s, delta))
    }
}

/// `(R^c - R_0)(z; x, y)` for a single pair of points off the strip.
pub fn continuum_difference_kernel(
    profile: &TransverseProfile<f64>,
    z: Complex64,
    x: Point,
    y: Point,
) -> Result<Complex64> {
    let (_, s, delta) = pair(x, y, profile.width())?;
    ContinuumContour::new(profile, s, s, delta)?.kernel(z, x, y)
}

/// Discretized coupling operator `G(z)` in the weighted coordinates of the
/// trap measure (entries `sqrt(W_i) G(x_i, x_j) sqrt(W_j)`).
#[derive(Debug, Clone)]
pub struct GOperator {
    pub z: Complex64,
    pub beta: f64,
    pub sheet: SheetConfig,
    pub matrix: DMatrix<Complex64>,
}

impl GOperator {
    /// `(G + G^*) / 2` and `(G - G^*) / 2i`.
    pub fn hermitian_parts(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let adj = self.matrix.adjoint();
        let re = (&self.matrix + &adj) * Complex64::new(0.5, 0.0);
        let im = (&self.matrix - &adj) * Complex64::new(0.0, -0.5);
        (re, im)
    }

    /// Bilinear form `u^T G u`.
    pub fn form(&self, u: &[f64]) -> Complex64 {
        let v = DVector::from_iterator(u.len(), u.iter().map(|x| Complex64::new(*x, 0.0)));
        (v.transpose() * &self.matrix * &v)[0]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// Everything about the strip that does not depend on `z`, prepared for one
/// trap measure: mode values at the nodes and the continuum contour.
///
/// For `x1_i >= x1_j` the contour term factorizes,
/// `e^{i p s + i kappa |x1_i - x1_j|} = e^{i p s_i + i kappa x1_i} e^{i p s_j - i kappa x1_j}`,
/// so each entry is a dot product of per-node vectors.
#[derive(Debug, Clone)]
pub struct StripCoupling {
    modes: Vec<TransverseMode<f64>>,
    nodes: Vec<Point>,
    sqrt_weights: Vec<f64>,
    mode_values: Vec<Vec<f64>>,
    /// Side (above) and offset from the strip of each node.
    offsets: Vec<(bool, f64)>,
    /// Longitudinal coordinate relative to the centre of the support.
    x1: Vec<f64>,
    contour: ContinuumContour,
}

impl StripCoupling {
    pub fn new(measure: &KatoMeasure, profile: &TransverseProfile<f64>, modes: &[TransverseMode<f64>]) -> Result<Self> {
        let contour = ContinuumContour::for_measure(profile, measure)?;
        let d = profile.width();
        let offsets = measure
            .nodes
            .iter()
            .map(|p| offset(p[1], d))
            .collect::<Result<Vec<_>>>()?;
        let b = measure.support_box;
        let centre = 0.5 * (b.min[0] + b.max[0]);
        Ok(Self {
            modes: modes.to_vec(),
            nodes: measure.nodes.clone(),
            sqrt_weights: measure.weights.iter().map(|w| w.sqrt()).collect(),
            mode_values: modes
                .iter()
                .map(|m| measure.nodes.iter().map(|p| eval_mode(m, p[1])).collect())
                .collect(),
            offsets,
            x1: measure.nodes.iter().map(|p| p[0] - centre).collect(),
            contour,
        })
    }

    pub fn modes(&self) -> &[TransverseMode<f64>] {
        &self.modes
    }

    pub fn contour(&self) -> &ContinuumContour {
        &self.contour
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// `(R_alpha - R_0)(z; x_i, x_j)` on the requested sheet.
    pub fn kernel(&self, z: Complex64, sheet: &SheetConfig, i: usize, j: usize) -> Result<Complex64> {
        let taus = self.taus(z, sheet)?;
        let (x, y) = (self.nodes[i], self.nodes[j]);
        let delta = (x[0] - y[0]).abs();
        let mut v = self.contour.kernel(z, x, y)?;
        for (k, tau) in taus.iter().enumerate() {
            v += 0.5 * I * (I * tau * delta).exp() / tau * self.mode_values[k][i] * self.mode_values[k][j];
        }
        Ok(v)
    }

    fn taus(&self, z: Complex64, sheet: &SheetConfig) -> Result<Vec<Complex64>> {
        sheet.validate(z)?;
        if !(z.re < 0.0) {
            return Err(Error::Config(format!("coupling operator needs Re z < 0, got {z}")));
        }
        self.modes
            .iter()
            .map(|m| {
                let tau = tau_mode(z, m.energy, sheet.sheet(m.index))?;
                if tau.norm() == 0.0 {
                    Err(Error::Threshold(format!("z sits on the threshold of mode {}", m.index)))
                } else {
                    Ok(tau)
                }
            })
            .collect()
    }

    /// The matrix of `G(z) = beta chi (R_alpha(z) - R_0(z)) chi`.
    pub fn g_matrix(&self, beta: f64, z: Complex64, sheet: &SheetConfig) -> Result<GOperator> {
        let taus = self.taus(z, sheet)?;
        let n = self.dim();
        let nodes = &self.contour.nodes;
        let kappa: Vec<Complex64> = nodes.iter().map(|c| sqrt_upper(z - c.p * c.p)).collect();
        let coef = |pick: fn(&ContourNode) -> Complex64| -> Vec<Complex64> {
            nodes
                .iter()
                .zip(&kappa)
                .map(|(c, k)| 0.5 * I * c.weight * pick(c) / k)
                .collect()
        };
        let coefs = [coef(|c| c.above), coef(|c| c.below), coef(|c| c.across)];
        let (fwd, bwd): (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let (s, x) = (self.offsets[i].1, self.x1[i]);
                let f = nodes.iter().zip(&kappa).map(|(c, k)| (I * (c.p * s + k * x)).exp()).collect();
                let b = nodes.iter().zip(&kappa).map(|(c, k)| (I * (c.p * s - k * x)).exp()).collect();
                (f, b)
            })
            .unzip();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..=i)
                    .map(|j| {
                        let kind = match (self.offsets[i].0, self.offsets[j].0) {
                            (true, true) => 0,
                            (false, false) => 1,
                            _ => 2,
                        };
                        let (a, b) = if self.x1[i] >= self.x1[j] { (i, j) } else { (j, i) };
                        let mut v: Complex64 = coefs[kind]
                            .iter()
                            .zip(&fwd[a])
                            .zip(&bwd[b])
                            .map(|((c, f), g)| c * f * g)
                            .sum();
                        let delta = self.x1[a] - self.x1[b];
                        for (k, tau) in taus.iter().enumerate() {
                            v += 0.5 * I * (I * tau * delta).exp() / tau * self.mode_values[k][i] * self.mode_values[k][j];
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        let sw = &self.sqrt_weights;
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            let v = if i >= j { rows[i][j] } else { rows[j][i] };
            v * (beta * sw[i] * sw[j])
        });
        Ok(GOperator {
            z,
            beta,
            sheet: sheet.clone(),
            matrix,
        })
    }
}

/// `G(z)` for a measure, profile and its modes; see [`StripCoupling`] for
/// repeated evaluation.
pub fn g_matrix(
    measure: &KatoMeasure,
    profile: &TransverseProfile<f64>,
    modes: &[TransverseMode<f64>],
    beta: f64,
    z: Complex64,
    sheet: &SheetConfig,
) -> Result<GOperator> {
    StripCoupling::new(measure, profile, modes)?.g_matrix(beta, z, sheet)
}

/// Squared Hilbert-Schmidt norm of `chi_Omega R_0(z) chi_strip` with the
/// bound on the part of the strip left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsEstimate {
    pub z: Complex64,
    pub rho: f64,
    /// Quadrature value over the truncated strip `|y1 - x1| <= cutoff`.
    pub value: f64,
    pub cutoff: f64,
    /// Rigorous bound on the omitted part, from `|K0(w)| <= K0(Re w)` and
    /// `K0(t) <= sqrt(pi / 2t) e^{-t}`.
    pub tail_bound: f64,
}

/// `int_Omega int_strip |K0(k_z |x - y|)|^2 / (2 pi)^2 dy dmu(x)`.
pub fn embedding_hs_norm_squared(
    measure: &KatoMeasure,
    strip_width: f64,
    z: Complex64,
    tol: f64,
) -> Result<HsEstimate> {
    let k = wavenumber(z)?;
    let t_z = k.re;
    let rho = crate::measure::distance_to_strip(measure, strip_width)?;
    let cutoff = 25.0 / t_z;
    let (gy, gwy) = gauss_legendre::<f64>(24);
    let tolerance = Tolerance {
        abs: 0.0,
        rel: tol,
        max_intervals: 2000,
    };
    let per_node: Vec<f64> = measure
        .nodes
        .par_iter()
        .map(|x| -> Result<f64> {
            let mut acc = 0.0;
            for (t, w) in gy.iter().zip(&gwy) {
                let y2 = 0.5 * strip_width * (1.0 + t);
                let h = x[1] - y2;
                let mut failed = None;
                let f = |s: f64| -> Complex64 {
                    match k0_k1(k * (s * s + h * h).sqrt()) {
                        Ok((v, _)) => Complex64::new(v.norm_sqr(), 0.0),
                        Err(e) => {
                            failed = Some(e);
                            Complex64::new(0.0, 0.0)
                        }
                    }
                };
                let (v, _) = integrate(f, 0.0, cutoff, tolerance)?;
                if let Some(e) = failed {
                    return Err(e);
                }
                acc += 0.5 * strip_width * w * 2.0 * v.re;
            }
            Ok(acc / (4.0 * PI * PI))
        })
        .collect::<Result<_>>()?;
    let value = per_node.iter().zip(&measure.weights).map(|(v, w)| v * w).sum();
    let tail_density = (-2.0 * t_z * cutoff).exp() / (8.0 * PI * t_z * t_z * cutoff);
    Ok(HsEstimate {
        z,
        rho,
        value,
        cutoff,
        tail_bound: tail_density * strip_width * measure.total_mass,
    })
}
