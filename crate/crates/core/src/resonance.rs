//! Resonances of a trap coupled to the guide: the scalar pole equation
//! `eta(z) = z - E + beta^{-1} u^T G(z) (I - A(z) G(z))^{-1} u = 0`, its
//! Newton solution on the continued sheet, the golden-rule width by three
//! routes, and the small utilities used to check asymptotics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bs::{default_radius, deflated_inverse, trap_eigenvalues, DeflatedResolvent, TrapState};
use crate::error::{Error, Result};
use crate::measure::{distance_to_strip, KatoMeasure};
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
use crate::strip::{GOperator, SheetConfig, StripCoupling};
use crate::transverse::{eval_mode, solve_modes, TransverseMode, TransverseProfile};

/// Closest approach of a trap level to a threshold for the pole solver.
pub const POLE_THRESHOLD_GUARD: f64 = 1e-6;
/// Closest approach of a trap level to a threshold for the golden rule.
pub const GOLDEN_RULE_THRESHOLD_GUARD: f64 = 1e-8;
/// Above this `|A G|` the inverse is taken by a direct solve.
pub const NEUMANN_LIMIT: f64 = 0.1;
/// Offset below the real axis at which the regime check evaluates `A`.
pub const REGIME_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inversion {
    Auto,
    Neumann,
    Direct,
}

/// One evaluation of the scalar pole function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaValue {
    pub z: Complex64,
    pub value: Complex64,
    /// Spectral norm of `A(z) G(z)`.
    pub ag_norm: f64,
    pub method: Inversion,
    /// Neumann terms summed; zero for a direct solve.
    pub terms: usize,
}

/// Largest singular value by power iteration on `X^* X`.
pub fn spectral_norm(x: &DMatrix<Complex64>) -> f64 {
    let n = x.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + (i % 7) as f64 * 0.1, 0.0));
    v /= Complex64::new(v.norm(), 0.0);
    let xa = x.adjoint();
    let mut sigma = 0.0;
    for _ in 0..200 {
        let w = &xa * (x * &v);
        let lambda = w.norm();
        if lambda == 0.0 {
            return 0.0;
        }
        let next = lambda.sqrt();
        v = w / Complex64::new(lambda, 0.0);
        if (next - sigma).abs() <= 1e-12 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// `eta(z)` from an assembled coupling operator and deflated resolvent.
pub fn eta_tilde(state: &TrapState, z: Complex64, g: &GOperator, a: &DeflatedResolvent) -> Result<EtaValue> {
    eta_tilde_with(state, z, g, a, Inversion::Auto)
}

/// As [`eta_tilde`], forcing the way `(I - A G)^{-1}` is applied.
pub fn eta_tilde_with(
    state: &TrapState,
    z: Complex64,
    g: &GOperator,
    a: &DeflatedResolvent,
    inversion: Inversion,
) -> Result<EtaValue> {
    let n = g.matrix.nrows();
    if state.bs_vector.len() != n || a.dim() != n {
        return Err(Error::Config("trap state, coupling and resolvent sizes differ".into()));
    }
    let x = a.apply_matrix(&g.matrix);
    let ag_norm = spectral_norm(&x);
    if ag_norm >= 1.0 {
        return Err(Error::Regime(format!(
            "|A G| = {ag_norm:.3} >= 1 at z = {z}; the trap is too close to the guide"
        )));
    }
    let u = DVector::from_iterator(n, state.bs_vector.iter().map(|v| Complex64::new(*v, 0.0)));
    let method = match inversion {
        Inversion::Auto if ag_norm <= NEUMANN_LIMIT => Inversion::Neumann,
        Inversion::Auto => Inversion::Direct,
        m => m,
    };
    let (y, terms) = match method {
        Inversion::Neumann => {
            let mut y = u.clone();
            let mut term = u.clone();
            let mut k = 0;
            loop {
                term = &x * term;
                y += &term;
                k += 1;
                if term.norm() < 1e-14 * y.norm() {
                    break;
                }
                if k > 2000 {
                    return Err(Error::Solver("Neumann series did not converge".into()));
                }
            }
            (y, k)
        }
        _ => {
            let m = DMatrix::identity(n, n) - &x;
            let y = m
                .lu()
                .solve(&u)
                .ok_or_else(|| Error::Solver("I - A G is singular".into()))?;
            (y, 0)
        }
    };
    let gy = &g.matrix * y;
    let form = (u.transpose() * gy)[0];
    Ok(EtaValue {
        z,
        value: z - state.energy + form / g.beta,
        ag_norm,
        method,
        terms,
    })
}

/// Knobs of the pole solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleOptions {
    /// Target `|eta(z)|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Radius of the disc `S_n`; `None` uses the default.
    pub radius: Option<f64>,
    /// Largest `|A G|` at the trap level for which a solve is attempted.
    pub regime_limit: f64,
    /// Extra Newton runs from points inside `S_n`; zero skips the check.
    pub multistart: usize,
}

impl Default for PoleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            radius: None,
            regime_limit: 0.5,
            multistart: 0,
        }
    }
}

/// A converged resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonancePole {
    pub n: usize,
    /// Number `j` of open channels.
    pub segment: usize,
    pub rho: f64,
    pub trap_energy: f64,
    pub z: Complex64,
    /// Golden-rule value of `Im z` at leading order.
    pub gamma_leading: f64,
    /// Width `2 |Im z|`.
    pub gamma: f64,
    pub newton_residual: f64,
    pub iterations: usize,
    pub regime_norm: f64,
    pub radius: f64,
    /// Roots reached from the multistart points.
    pub multistart: Vec<Complex64>,
}

/// Per-channel contribution to the golden rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTerm {
    pub channel: usize,
    pub threshold: f64,
    /// Longitudinal momentum `sqrt(E - E_k)` of the outgoing wave.
    pub momentum: f64,
    pub overlap: f64,
    pub cosine: f64,
}

/// The golden-rule width by three routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRule {
    pub n: usize,
    pub segment: usize,
    pub trap_energy: f64,
    pub overlap: f64,
    pub cosine: f64,
    pub g_imag: f64,
    pub channels: Vec<ChannelTerm>,
    /// Relative differences overlap/cosine, overlap/G^I, cosine/G^I.
    pub rel_diff: [f64; 3],
}

fn open_channels(energy: f64, modes: &[TransverseMode<f64>], guard: f64) -> Result<Vec<&TransverseMode<f64>>> {
    for m in modes {
        if (energy - m.energy).abs() <= guard {
            return Err(Error::Threshold(format!(
                "trap level {energy} within {guard:e} of threshold E_{} = {}",
                m.index, m.energy
            )));
        }
    }
    if energy.abs() <= guard {
        return Err(Error::Threshold(format!("trap level {energy} within {guard:e} of the continuum edge")));
    }
    Ok(modes.iter().filter(|m| m.energy < energy).collect())
}

/// Golden rule from the overlaps of `omega` with the outgoing waves
/// `(2 pi)^{-1/2} e^{+-i p x1} phi_k(x2)`:
/// `Gamma = -beta^2 sum_k pi / (2 p_k) (|c_+|^2 + |c_-|^2)`.
pub fn golden_rule_width(
    state: &TrapState,
    modes: &[TransverseMode<f64>],
    measure: &KatoMeasure,
    beta: f64,
) -> Result<(f64, Vec<ChannelTerm>)> {
    let open = open_channels(state.energy, modes, GOLDEN_RULE_THRESHOLD_GUARD)?;
    let mut total = 0.0;
    let mut terms = Vec::new();
    for m in open {
        let p = (state.energy - m.energy).sqrt();
        let mut amp = [Complex64::new(0.0, 0.0); 2];
        for ((x, w), om) in measure.nodes.iter().zip(&measure.weights).zip(&state.omega_nodes) {
            let f = w * om * eval_mode(m, x[1]) / (2.0 * PI).sqrt();
            for (a, sign) in amp.iter_mut().zip([1.0, -1.0]) {
                *a += Complex64::from_polar(f, sign * p * x[0]);
            }
        }
        let term = -beta * beta * PI / (2.0 * p) * (amp[0].norm_sqr() + amp[1].norm_sqr());
        total += term;
        terms.push(ChannelTerm {
            channel: m.index,
            threshold: m.energy,
            momentum: p,
            overlap: term,
            cosine: f64::NAN,
        });
    }
    Ok((total, terms))
}

/// Golden rule from the cosine kernel
/// `-beta^2 sum_k (2 p_k)^{-1} int int cos(p_k (x1 - y1)) phi_k(x2) phi_k(y2) omega(x) omega(y)`.
pub fn golden_rule_cos_form(
    state: &TrapState,
    modes: &[TransverseMode<f64>],
    measure: &KatoMeasure,
    beta: f64,
) -> Result<(f64, Vec<f64>)> {
    let open = open_channels(state.energy, modes, GOLDEN_RULE_THRESHOLD_GUARD)?;
    let nodes = &measure.nodes;
    let mut total = 0.0;
    let mut terms = Vec::new();
    for m in open {
        let p = (state.energy - m.energy).sqrt();
        let c: Vec<f64> = nodes
            .iter()
            .zip(&measure.weights)
            .zip(&state.omega_nodes)
            .map(|((x, w), om)| w * om * eval_mode(m, x[1]))
            .collect();
        let mut sum = 0.0;
        for i in 0..nodes.len() {
            let mut row = 0.0;
            for j in 0..nodes.len() {
                row += (p * (nodes[i][0] - nodes[j][0])).cos() * c[j];
            }
            sum += c[i] * row;
        }
        let term = -beta * beta * sum / (2.0 * p);
        total += term;
        terms.push(term);
    }
    Ok((total, terms))
}

/// Golden rule through the coupling operator at the trap level,
/// `-beta^{-1} u^T G^I(E) u`.
pub fn golden_rule_from_g(state: &TrapState, g: &GOperator) -> f64 {
    let (_, gi) = g.hermitian_parts();
    let u = DVector::from_iterator(state.bs_vector.len(), state.bs_vector.iter().map(|v| Complex64::new(*v, 0.0)));
    -(u.transpose() * gi * u)[0].re / g.beta
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// A trap level together with the guide, ready for pole solves.
#[derive(Debug, Clone)]
pub struct ResonanceSystem {
    pub measure: KatoMeasure,
    pub beta: f64,
    pub state: TrapState,
    pub rho: f64,
    pub segment: usize,
    pub sheet: SheetConfig,
    pub radius: f64,
    thresholds: Vec<f64>,
    coupling: StripCoupling,
}

impl ResonanceSystem {
    /// Solves the transverse and trap problems and picks level `n` (one-based).
    pub fn new(measure: &KatoMeasure, profile: &TransverseProfile<f64>, beta: f64, n: usize, tol: f64) -> Result<Self> {
        let modes = solve_modes(profile, 1e-14)?;
        let states = trap_eigenvalues(measure, beta, tol)?;
        Self::from_parts(measure, profile, &modes, &states, n, None)
    }

    /// Builds the system from precomputed modes and trap states; trap states
    /// do not change when the measure is translated.
    pub fn from_parts(
        measure: &KatoMeasure,
        profile: &TransverseProfile<f64>,
        modes: &[TransverseMode<f64>],
        states: &[TrapState],
        n: usize,
        radius: Option<f64>,
    ) -> Result<Self> {
        let state = states
            .iter()
            .find(|s| s.index == n)
            .ok_or_else(|| Error::Config(format!("trap level {n} does not exist ({} found)", states.len())))?
            .clone();
        if state.bs_vector.len() != measure.len() {
            return Err(Error::Config("trap state computed on a different measure".into()));
        }
        if state.multiplicity > 1 {
            return Err(Error::Multiplicity(format!(
                "trap level {n} has multiplicity {}",
                state.multiplicity
            )));
        }
        let rho = distance_to_strip(measure, profile.width())?;
        let open = open_channels(state.energy, modes, POLE_THRESHOLD_GUARD)?;
        let segment = open.len();
        let mut thresholds: Vec<f64> = modes.iter().map(|m| m.energy).collect();
        thresholds.push(0.0);
        let others: Vec<f64> = states.iter().filter(|s| s.index != n).map(|s| s.energy).collect();
        let radius = radius.unwrap_or_else(|| default_radius(state.energy, &others, &thresholds));
        if !(radius > 0.0) {
            return Err(Error::Config("radius of S_n must be positive".into()));
        }
        Ok(Self {
            measure: measure.clone(),
            beta: state.beta,
            sheet: SheetConfig::through_segment(modes.len(), segment)?,
            segment,
            rho,
            radius,
            thresholds,
            coupling: StripCoupling::new(measure, profile, modes)?,
            state,
        })
    }

    pub fn modes(&self) -> &[TransverseMode<f64>] {
        self.coupling.modes()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn coupling(&self) -> &StripCoupling {
        &self.coupling
    }

    pub fn g(&self, z: Complex64) -> Result<GOperator> {
        self.coupling.g_matrix(self.beta, z, &self.sheet)
    }

    pub fn deflated(&self, z: Complex64) -> Result<DeflatedResolvent> {
        deflated_inverse(&self.measure, self.beta, &self.state, z)
    }

    pub fn eta(&self, z: Complex64) -> Result<EtaValue> {
        self.eta_with(z, Inversion::Auto)
    }

    pub fn eta_with(&self, z: Complex64, inversion: Inversion) -> Result<EtaValue> {
        let g = self.g(z)?;
        let a = self.deflated(z)?;
        eta_tilde_with(&self.state, z, &g, &a, inversion)
    }

    /// `E - beta^{-1} u^T G(E) u`.
    pub fn leading_guess(&self) -> Result<Complex64> {
        let e = Complex64::new(self.state.energy, 0.0);
        let g = self.g(e)?;
        Ok(e - g.form(&self.state.bs_vector) / self.beta)
    }

    /// `|A(E - i delta) G(E)|` with `delta = REGIME_OFFSET`.
    pub fn regime_norm(&self) -> Result<f64> {
        let e = Complex64::new(self.state.energy, 0.0);
        let g = self.g(e)?;
        let a = self.deflated(e - Complex64::new(0.0, REGIME_OFFSET))?;
        Ok(spectral_norm(&a.apply_matrix(&g.matrix)))
    }

    /// Golden-rule width by the overlap, cosine and `G^I` routes.
    pub fn golden_rule(&self) -> Result<GoldenRule> {
        let (overlap, mut channels) = golden_rule_width(&self.state, self.modes(), &self.measure, self.beta)?;
        let (cosine, cos_terms) = golden_rule_cos_form(&self.state, self.modes(), &self.measure, self.beta)?;
        for (c, v) in channels.iter_mut().zip(cos_terms) {
            c.cosine = v;
        }
        let g = self.g(Complex64::new(self.state.energy, 0.0))?;
        let g_imag = golden_rule_from_g(&self.state, &g);
        Ok(GoldenRule {
            n: self.state.index,
            segment: self.segment,
            trap_energy: self.state.energy,
            overlap,
            cosine,
            g_imag,
            channels,
            rel_diff: [rel_diff(overlap, cosine), rel_diff(overlap, g_imag), rel_diff(cosine, g_imag)],
        })
    }

    /// Damped Newton iteration on `eta` from `z0`, with the derivative by
    /// central differences along the real axis. Iterates are kept in the
    /// closed lower half-plane. Returns `(z, |eta(z)|, iterations)`.
    pub fn newton_from(&self, z0: Complex64, opts: &PoleOptions) -> Result<(Complex64, f64, usize)> {
        let clamp = |z: Complex64| Complex64::new(z.re, z.im.min(0.0));
        let mut z = clamp(z0);
        let mut eta = self.eta(z)?.value;
        let mut iterations = 0;
        while eta.norm() > opts.tol {
            if iterations >= opts.max_iter {
                return Err(Error::Solver(format!(
                    "Newton did not converge in {} iterations (|eta| = {:.3e})",
                    opts.max_iter,
                    eta.norm()
                )));
            }
            iterations += 1;
            let h = 1e-5 * self.radius.min(1.0);
            let dh = Complex64::new(h, 0.0);
            let slope = (self.eta(z + dh)?.value - self.eta(z - dh)?.value) / (2.0 * h);
            if slope.norm() == 0.0 {
                return Err(Error::Solver("vanishing derivative of eta".into()));
            }
            let step = eta / slope;
            let mut lambda = 1.0;
            loop {
                let trial = clamp(z - step * lambda);
                if (trial - self.state.energy).norm() > self.radius {
                    if lambda < 1e-3 {
                        return Err(Error::Regime(format!(
                            "Newton iterate left S_n (radius {:.3e}) around {}",
                            self.radius, self.state.energy
                        )));
                    }
                    lambda *= 0.5;
                    continue;
                }
                let value = self.eta(trial)?.value;
                if value.norm() < eta.norm() || lambda < 1e-3 {
                    z = trial;
                    eta = value;
                    break;
                }
                lambda *= 0.5;
            }
        }
        Ok((z, eta.norm(), iterations))
    }

    /// The resonance near trap level `n` on the continued sheet.
    pub fn find_pole(&self, opts: &PoleOptions) -> Result<ResonancePole> {
        let regime = self.regime_norm()?;
        if regime >= opts.regime_limit {
            return Err(Error::Regime(format!(
                "|A G| = {regime:.3} at the trap level exceeds {}; increase rho",
                opts.regime_limit
            )));
        }
        let z0 = self.leading_guess()?;
        let (z, residual, iterations) = self.newton_from(z0, opts)?;
        if (z - self.state.energy).norm() >= self.radius {
            return Err(Error::Regime("pole outside S_n".into()));
        }
        if z.im > 0.0 {
            return Err(Error::Solver(format!("pole {z} above the real axis")));
        }
        let mut starts = Vec::new();
        for k in 0..opts.multistart {
            let angle = PI + PI * (k as f64 + 0.5) / opts.multistart as f64;
            let z0 = Complex64::new(self.state.energy, 0.0) + Complex64::from_polar(0.5 * self.radius, angle);
            let (root, _, _) = self.newton_from(z0, opts)?;
            if (root - z).norm() > 1e-8 {
                return Err(Error::Uniqueness(format!(
                    "multistart reached {root} and {z}; refine the quadrature"
                )));
            }
            starts.push(root);
        }
        let gamma_leading = if self.segment == 0 {
            0.0
        } else {
            golden_rule_width(&self.state, self.modes(), &self.measure, self.beta)?.0
        };
        Ok(ResonancePole {
            n: self.state.index,
            segment: self.segment,
            rho: self.rho,
            trap_energy: self.state.energy,
            z,
            gamma_leading,
            gamma: 2.0 * z.im.abs(),
            newton_residual: residual,
            iterations,
            regime_norm: regime,
            radius: self.radius,
            multistart: starts,
        })
    }
}

/// Numerical `int_R e^{i p delta} / (p^2 - w) dp` for `w` off `[0, inf)`.
/// The Lorentzian `1 / (p^2 + 1)`, with transform `pi e^{-|delta|}`, is
/// split off so the remainder decays like `p^{-4}`.
pub fn sokhotski_integral(w: Complex64, delta: f64) -> Result<Complex64> {
    if w.im == 0.0 && w.re >= 0.0 {
        return Err(Error::BranchCut(format!("pole on the integration path at w = {w}")));
    }
    let f = |p: f64| (w + 1.0) * (p * delta).cos() / ((p * p - w) * (p * p + 1.0));
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-13,
        max_intervals: 20_000,
    };
    let peak = w.re.max(0.0).sqrt();
    let mut breaks = vec![0.0];
    if peak > 0.0 {
        let width = (w.im.abs() / (2.0 * peak)).max(1e-12);
        for t in [-1e3, -10.0, -1.0, 0.0, 1.0, 10.0, 1e3] {
            let b = peak + t * width;
            if b > *breaks.last().unwrap() {
                breaks.push(b);
            }
        }
    }
    let last = breaks.last().unwrap() + 1.0;
    breaks.push(last);
    let mut sum = Complex64::new(0.0, 0.0);
    for b in breaks.windows(2) {
        sum += integrate(f, b[0], b[1], tol)?.0;
    }
    let panel = if delta != 0.0 { (PI / delta.abs()).min(4.0) } else { 4.0 };
    sum += integrate_to_infinity(f, last, panel, tol, 1e7)?;
    Ok(Complex64::new(PI * (-delta.abs()).exp(), 0.0) + 2.0 * sum)
}

/// Limit of [`sokhotski_integral`] as `w = b + i eps`, `eps -> 0+`, against
/// the closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SokhotskiReport {
    pub b: f64,
    pub delta: f64,
    /// `(i pi / sqrt b) e^{i sqrt(b) |delta|}` for `b > 0`,
    /// `pi e^{-sqrt|b| |delta|} / sqrt|b|` for `b < 0`.
    pub limit: Complex64,
    /// Real part of the limit: the principal-value term.
    pub principal_value: f64,
    pub eps: Vec<f64>,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    /// Log-log slope of the error against `eps`.
    pub order: f64,
    /// Direct evaluation at `eps = 0` when `b < 0`.
    pub closed_channel: Option<Complex64>,
}

pub fn sokhotski_check(b: f64, delta: f64) -> Result<SokhotskiReport> {
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Threshold("Sokhotski check needs b != 0".into()));
    }
    let root = b.abs().sqrt();
    let limit = if b > 0.0 {
        Complex64::new(0.0, PI / root) * Complex64::from_polar(1.0, root * delta.abs())
    } else {
        Complex64::new(PI * (-root * delta.abs()).exp() / root, 0.0)
    };
    let eps = vec![1e-2, 1e-3, 1e-4];
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for e in &eps {
        let v = sokhotski_integral(Complex64::new(b, *e), delta)?;
        errors.push((v - limit).norm());
        values.push(v);
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
    let (order, _, _) = least_squares(&xs, &ys);
    let closed_channel = if b < 0.0 {
        Some(sokhotski_integral(Complex64::new(b, 0.0), delta)?)
    } else {
        None
    };
    Ok(SokhotskiReport {
        b,
        delta,
        limit,
        principal_value: limit.re,
        eps,
        values,
        errors,
        order,
        closed_channel,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Least-squares line through `(rho, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_decay(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.len() < 4 {
        return Err(Error::Domain(format!("decay fit needs at least 4 samples, got {}", samples.len())));
    }
    if let Some((r, v)) = samples.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Domain(format!("non-positive value {v} at rho = {r}")));
    }
    let x: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    if x.iter().all(|v| *v == x[0]) {
        return Err(Error::Domain("decay fit needs distinct abscissae".into()));
    }
    let (slope, intercept, r2) = least_squares(&x, &y);
    Ok(DecayFit { slope, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_slope() {
        let s: Vec<(f64, f64)> = (0..6).map(|k| (1.0 + 0.2 * k as f64, 2.0 * (-3.0 * (1.0 + 0.2 * k as f64)).exp())).collect();
        let f = fit_decay(&s).unwrap();
        assert!((f.slope + 3.0).abs() < 1e-10 && (f.r2 - 1.0).abs() < 1e-12);
        assert!(fit_decay(&s[..3]).is_err());
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(1.0, 0.0),
        ]));
        assert!((spectral_norm(&m) - 2.0).abs() < 1e-10);
    }
}
