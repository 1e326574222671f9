//! Birman-Schwinger operator `chi R_0(z) chi` of a trap measure, its bound
//! states and the deflated resolvent near a bound state.
//!
//! Matrices act on weighted coordinates `u_i = sqrt(W_i) w_i`, so they are
//! complex symmetric (real symmetric below the spectrum). Diagonal entries use
//! singularity subtraction:
//! `S_ii = D_i - sum_{j != i} K(x_i, x_j) W_j`, with
//! `D_i = int K(x_i, y) dmu(y)` evaluated to near machine precision.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::{Complex64, ComplexFloat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{brent, top_eigenpairs};
use crate::measure::{dist, CurveShape, Geometry, KatoMeasure, Point, Region, RingLayout};
use crate::quadrature::{integrate, Tolerance};
use crate::specfun::{k0_k1, one_minus_w_k1, sqrt_upper};

const INV_2PI: f64 = 0.5 / PI;
/// Closest approach to a bound state allowed in the deflated resolvent.
pub const DEFLATION_FLOOR: f64 = 1e-9;
/// States above `-ENERGY_CEILING` are not resolved.
pub const ENERGY_CEILING: f64 = 1e-8;

/// Scalars the assembly runs on: `f64` below the spectrum, `Complex64` elsewhere.
pub trait BsScalar: ComplexFloat<Real = f64> + nalgebra::Scalar + Send + Sync {
    fn from_complex(c: Complex64) -> Self;
    fn from_real(x: f64) -> Self;
}

impl BsScalar for f64 {
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl BsScalar for Complex64 {
    fn from_complex(c: Complex64) -> Self {
        c
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// `k = -i sqrt(z)` with `Im sqrt(z) > 0`, so that `K0(k|x|)/(2 pi)` is the
/// kernel of `(-Laplacian - z)^{-1}`.
pub fn wavenumber(z: Complex64) -> Result<Complex64> {
    let k = -Complex64::i() * sqrt_upper(z);
    if !(k.re > 0.0) {
        return Err(Error::BranchCut(format!("free resolvent at z = {z} on [0, inf)")));
    }
    Ok(k)
}

/// Free resolvent kernel `K0(k r) / (2 pi)` and its `z`-derivative `r K1(k r) / (4 pi k)`.
#[inline]
pub fn kernel_with_derivative<F: BsScalar>(k: F, r: f64) -> Result<(F, F)> {
    let (k0, k1) = k0_k1(k * F::from_real(r))?;
    let c = F::from_real(INV_2PI);
    Ok((k0 * c, k1 * F::from_real(r) / (k * F::from_real(2.0)) * c))
}

/// `(D_i, dD_i/dz)` for node `i`.
fn self_potential(measure: &KatoMeasure, i: usize, k: Complex64, derivative: bool) -> Result<(Complex64, Complex64)> {
    let x = measure.nodes[i];
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-13,
        max_intervals: 4000,
    };
    match &measure.descriptor {
        Geometry::Area(region) => area_self_potential(region, x, k, tol, derivative),
        Geometry::Curve(shape) => curve_self_potential(shape, measure.arclength[i], x, k, tol, derivative),
    }
}

fn area_self_potential(
    region: &Region,
    x: Point,
    k: Complex64,
    tol: Tolerance,
    derivative: bool,
) -> Result<(Complex64, Complex64)> {
    let mut breaks = region.angular_breaks(x);
    if breaks.is_empty() {
        breaks = vec![0.0, 2.0 * PI];
    } else {
        let first = breaks[0];
        breaks.push(first + 2.0 * PI);
    }
    let k2 = k * k;
    let mut failed = None;
    let mut value = |theta: f64, deriv: bool| -> Complex64 {
        let r = region.ray_length(x, theta);
        if r <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match k0_k1(k * r).and_then(|(k0, _)| Ok((k0, one_minus_w_k1(k * r)?))) {
            Ok((k0, f)) => {
                if deriv {
                    (r * r * k0 / k - 2.0 * f / (k2 * k)) * (-0.5 / k)
                } else {
                    f / k2
                }
            }
            Err(e) => {
                failed = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let mut d = Complex64::new(0.0, 0.0);
    let mut dd = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        d += integrate(|t| value(t, false), w[0], w[1], tol)?.0;
        if derivative {
            dd += integrate(|t| value(t, true), w[0], w[1], tol)?.0;
        }
    }
    if let Some(e) = failed {
        return Err(e);
    }
    Ok((d * INV_2PI, dd * INV_2PI))
}

fn curve_self_potential(
    shape: &CurveShape,
    s0: f64,
    x: Point,
    k: Complex64,
    tol: Tolerance,
    derivative: bool,
) -> Result<(Complex64, Complex64)> {
    let len = shape.length();
    let mut cuts: Vec<f64> = if shape.is_closed() {
        vec![s0 - 0.5 * len, s0, s0 + 0.5 * len]
    } else {
        let mut v = shape.breakpoints();
        v.push(s0);
        v
    };
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * len);
    let mut failed = None;
    let mut value = |s: f64, deriv: bool| -> Complex64 {
        let p = shape.point_at(s.rem_euclid(len).min(len));
        let r = dist(p, x);
        if r == 0.0 {
            return if deriv {
                INV_2PI * 0.5 / (k * k)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        match kernel_with_derivative(k, r) {
            Ok((g, dg)) => {
                if deriv {
                    dg
                } else {
                    g
                }
            }
            Err(e) => {
                failed = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let mut d = Complex64::new(0.0, 0.0);
    let mut dd = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        d += integrate(|s| value(s, false), w[0], w[1], tol)?.0;
        if derivative {
            dd += integrate(|s| value(s, true), w[0], w[1], tol)?.0;
        }
    }
    if let Some(e) = failed {
        return Err(e);
    }
    Ok((d, dd))
}

/// Birman-Schwinger matrix and its `z`-derivative in weighted coordinates,
/// stored densely or, for ring layouts, as one row per ring.
#[derive(Debug, Clone)]
pub enum KernelMatrix<F: BsScalar> {
    Dense(DMatrix<F>),
    Rings {
        layout: RingLayout,
        /// `rows[a][b * per_ring + l]` = entry between node `(a, 0)` and node `(b, l)`.
        rows: Vec<Vec<F>>,
    },
}

impl<F: BsScalar> KernelMatrix<F> {
    pub fn dim(&self) -> usize {
        match self {
            KernelMatrix::Dense(m) => m.nrows(),
            KernelMatrix::Rings { layout, .. } => layout.rings * layout.per_ring,
        }
    }

    pub fn matvec(&self, v: &DVector<F>) -> DVector<F> {
        match self {
            KernelMatrix::Dense(m) => {
                let n = m.nrows();
                DVector::from_fn(n, |i, _| {
                    let mut acc = F::zero();
                    for j in 0..n {
                        acc = acc + m[(i, j)] * v[j];
                    }
                    acc
                })
            }
            KernelMatrix::Rings { layout, rows } => {
                let p = layout.per_ring;
                let n = self.dim();
                let mut out = DVector::from_element(n, F::zero());
                for a in 0..layout.rings {
                    let row = &rows[a];
                    for q in 0..p {
                        let mut acc = F::zero();
                        for b in 0..layout.rings {
                            let base = b * p;
                            for l in 0..p {
                                acc = acc + row[base + (l + p - q) % p] * v[base + l];
                            }
                        }
                        out[a * p + q] = acc;
                    }
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<F> {
        match self {
            KernelMatrix::Dense(m) => m.clone(),
            KernelMatrix::Rings { layout, rows } => {
                let p = layout.per_ring;
                let n = self.dim();
                DMatrix::from_fn(n, n, |i, j| {
                    let (a, q) = (i / p, i % p);
                    let (b, l) = (j / p, j % p);
                    rows[a][b * p + (l + p - q) % p]
                })
            }
        }
    }
}

/// Assembled matrices at one spectral parameter.
#[derive(Debug, Clone)]
pub struct Assembled<F: BsScalar> {
    pub s: KernelMatrix<F>,
    pub ds: KernelMatrix<F>,
}

fn sqrt_weights(measure: &KatoMeasure) -> Vec<f64> {
    measure.weights.iter().map(|w| w.sqrt()).collect()
}

/// Assembles `S(z)` and, if requested, `S'(z)` (otherwise left zero);
/// `k` is [`wavenumber`] of `z`, cast to `F`.
pub fn assemble<F: BsScalar>(measure: &KatoMeasure, k: Complex64, derivative: bool) -> Result<Assembled<F>> {
    let kf = F::from_complex(k);
    let n = measure.len();
    let sw = sqrt_weights(measure);
    let nodes = &measure.nodes;
    let w = &measure.weights;
    let row_for = |i: usize| -> Result<(Vec<F>, Vec<F>)> {
        let mut g = vec![F::zero(); n];
        let mut dg = vec![F::zero(); n];
        let (mut sum, mut dsum) = (F::zero(), F::zero());
        for j in 0..n {
            if j == i {
                continue;
            }
            let r = dist(nodes[i], nodes[j]);
            if r == 0.0 {
                return Err(Error::Assembly(format!("nodes {i} and {j} coincide")));
            }
            let (a, b) = kernel_with_derivative(kf, r)?;
            sum = sum + a * F::from_real(w[j]);
            dsum = dsum + b * F::from_real(w[j]);
            let s = F::from_real(sw[i] * sw[j]);
            g[j] = a * s;
            dg[j] = b * s;
        }
        let (d, dd) = self_potential(measure, i, k, derivative)?;
        g[i] = F::from_complex(d) - sum;
        dg[i] = F::from_complex(dd) - dsum;
        Ok((g, dg))
    };
    if let Some(layout) = measure.rings {
        let rows: Vec<(Vec<F>, Vec<F>)> = (0..layout.rings)
            .into_par_iter()
            .map(|a| row_for(a * layout.per_ring))
            .collect::<Result<_>>()?;
        let (s, ds) = rows.into_iter().unzip();
        return Ok(Assembled {
            s: KernelMatrix::Rings { layout, rows: s },
            ds: KernelMatrix::Rings { layout, rows: ds },
        });
    }
    let rows: Vec<(Vec<F>, Vec<F>)> = (0..n).into_par_iter().map(row_for).collect::<Result<_>>()?;
    let s = DMatrix::from_fn(n, n, |i, j| rows[i].0[j]);
    let ds = DMatrix::from_fn(n, n, |i, j| rows[i].1[j]);
    Ok(Assembled {
        s: KernelMatrix::Dense(s),
        ds: KernelMatrix::Dense(ds),
    })
}

/// Birman-Schwinger matrix at complex `z`.
#[derive(Debug, Clone)]
pub struct BsOperator {
    pub z: Complex64,
    pub matrix: DMatrix<Complex64>,
    pub derivative: DMatrix<Complex64>,
    /// Number of nodes of the measure it was built from.
    pub dimension: usize,
}

/// `chi R_0(z) chi` discretized on the measure.
pub fn free_bs_matrix(measure: &KatoMeasure, z: Complex64) -> Result<BsOperator> {
    let k = wavenumber(z)?;
    let a = assemble::<Complex64>(measure, k, true)?;
    Ok(BsOperator {
        z,
        matrix: a.s.to_dense(),
        derivative: a.ds.to_dense(),
        dimension: measure.len(),
    })
}

/// Real Birman-Schwinger data at an energy `e < 0`.
pub fn free_bs_matrix_real(measure: &KatoMeasure, e: f64, derivative: bool) -> Result<Assembled<f64>> {
    if !(e < 0.0) {
        return Err(Error::BranchCut(format!("real assembly needs e < 0, got {e}")));
    }
    assemble::<f64>(measure, Complex64::new((-e).sqrt(), 0.0), derivative)
}

/// Leading eigenvalue of the Birman-Schwinger matrix, counted with multiplicity.
#[derive(Debug, Clone)]
struct Level {
    lambda: f64,
    multiplicity: usize,
    vector: DVector<f64>,
}

fn leading_levels(s: &KernelMatrix<f64>, count: usize) -> Result<Vec<Level>> {
    match s {
        KernelMatrix::Dense(m) => {
            let (vals, vecs) = top_eigenpairs(m, count)?;
            Ok(vals
                .into_iter()
                .zip(vecs)
                .map(|(lambda, vector)| Level {
                    lambda,
                    multiplicity: 1,
                    vector,
                })
                .collect())
        }
        KernelMatrix::Rings { layout, rows } => {
            let (nr, p) = (layout.rings, layout.per_ring);
            let mut levels = Vec::new();
            for m in 0..=p / 2 {
                let phase: Vec<f64> = (0..p).map(|l| (2.0 * PI * (m * l) as f64 / p as f64).cos()).collect();
                let block = DMatrix::from_fn(nr, nr, |a, b| {
                    let row = &rows[a][b * p..(b + 1) * p];
                    row.iter().zip(&phase).map(|(x, c)| x * c).sum::<f64>()
                });
                let block = (&block + block.transpose()) * 0.5;
                let (vals, vecs) = top_eigenpairs(&block, count.min(nr))?;
                let mult = if m == 0 || 2 * m == p { 1 } else { 2 };
                for (lambda, v) in vals.into_iter().zip(vecs) {
                    let norm = if mult == 1 { (1.0 / p as f64).sqrt() } else { (2.0 / p as f64).sqrt() };
                    let vector = DVector::from_fn(nr * p, |i, _| v[i / p] * phase[i % p] * norm);
                    levels.push(Level {
                        lambda,
                        multiplicity: mult,
                        vector,
                    });
                }
            }
            levels.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
            Ok(levels)
        }
    }
}

/// `n`-th largest eigenvalue with multiplicity (one-based).
fn nth_eigenvalue(levels: &[Level], n: usize) -> Option<&Level> {
    let mut seen = 0;
    for l in levels {
        seen += l.multiplicity;
        if seen >= n {
            return Some(l);
        }
    }
    None
}

/// A bound state `E < 0` of `-Laplacian - beta mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapState {
    pub index: usize,
    pub energy: f64,
    pub beta: f64,
    pub multiplicity: usize,
    /// Weighted Birman-Schwinger eigenvector, normalized by `u^T S'(E) u = 1`.
    pub bs_vector: Vec<f64>,
    /// Eigenfunction at the nodes.
    pub omega_nodes: Vec<f64>,
    /// `|beta S u - u| / |u|`.
    pub residual: f64,
}

fn counting(levels: &[Level], beta: f64) -> usize {
    levels
        .iter()
        .filter(|l| beta * l.lambda > 1.0)
        .map(|l| l.multiplicity)
        .sum()
}

/// Bound states of `-Laplacian - beta mu` below `-ENERGY_CEILING`, located on
/// the eigenvalue branches of the Birman-Schwinger matrix, which increase
/// monotonically with the energy.
pub fn trap_eigenvalues(measure: &KatoMeasure, beta: f64, tol: f64) -> Result<Vec<TrapState>> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Config("coupling must be positive".into()));
    }
    let tol = tol.max(1e-15);
    let levels_at = |e: f64, count: usize| -> Result<Vec<Level>> {
        let a = free_bs_matrix_real(measure, e, false)?;
        leading_levels(&a.s, count)
    };
    let e_hi = -ENERGY_CEILING;
    let mut want = 4usize;
    let mut top = levels_at(e_hi, want)?;
    let mut total = counting(&top, beta);
    while total >= want && want < measure.len() {
        want = (2 * want).min(measure.len());
        top = levels_at(e_hi, want)?;
        total = counting(&top, beta);
    }
    if total == 0 {
        return Ok(Vec::new());
    }
    let mut e_lo = -beta.max(beta * beta).max(1.0);
    let mut guard = 0;
    while counting(&levels_at(e_lo, 2)?, beta) > 0 {
        e_lo *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::Solver("no lower bound for the trap spectrum".into()));
        }
    }
    let mut states = Vec::new();
    let mut n = 1;
    while n <= total {
        let f = |e: f64| -> Result<f64> {
            let levels = levels_at(e, n + 1)?;
            Ok(nth_eigenvalue(&levels, n).map_or(-1.0, |l| beta * l.lambda - 1.0))
        };
        let e = brent(f, e_lo, e_hi, tol, 200)?;
        let a = free_bs_matrix_real(measure, e, true)?;
        let levels = leading_levels(&a.s, n + 2)?;
        let level = nth_eigenvalue(&levels, n)
            .ok_or_else(|| Error::Solver("lost eigenvalue branch".into()))?
            .clone();
        let mut multiplicity = level.multiplicity;
        if let (KernelMatrix::Dense(_), Some(next)) = (&a.s, nth_eigenvalue(&levels, n + 1)) {
            if (beta * next.lambda - 1.0).abs() < 1e-8 {
                multiplicity += 1;
            }
        }
        let mut u = level.vector.clone();
        let flip = u.iter().fold(0.0, |s, v| s + v) < 0.0 || (u.sum().abs() < 1e-12 && u[u.iamax()] < 0.0);
        if flip {
            u = -u;
        }
        let dsu = a.ds.matvec(&u);
        let norm = u.dot(&dsu);
        if !(norm > 0.0) {
            return Err(Error::Solver("non-positive derivative of the Birman-Schwinger form".into()));
        }
        u /= norm.sqrt();
        let su = a.s.matvec(&u);
        let residual = (&su * beta - &u).norm() / u.norm();
        let omega_nodes = su.iter().zip(&measure.weights).map(|(v, w)| v / w.sqrt()).collect();
        states.push(TrapState {
            index: states.len() + 1,
            energy: e,
            beta,
            multiplicity,
            bs_vector: u.iter().copied().collect(),
            omega_nodes,
            residual,
        });
        n += multiplicity;
    }
    Ok(states)
}

/// Eigenfunction `omega = R_0(E) chi w` at a point. Inside an area support
/// the Nystrom interpolant is used; elsewhere the quadrature sum.
pub fn trap_eigenfunction(state: &TrapState, measure: &KatoMeasure, x: Point) -> Result<f64> {
    if let Some(i) = measure.nodes.iter().position(|p| *p == x) {
        return Ok(state.omega_nodes[i]);
    }
    let k = (-state.energy).sqrt();
    let mut sum = 0.0;
    let mut mass = 0.0;
    for ((p, w), u) in measure.nodes.iter().zip(&measure.weights).zip(&state.bs_vector) {
        let g: f64 = kernel_with_derivative(k, dist(*p, x))?.0;
        sum += g * w.sqrt() * u;
        mass += g * w;
    }
    if let Geometry::Area(region) = &measure.descriptor {
        if inside(region, x) {
            let (d, _) = area_self_potential(
                region,
                x,
                Complex64::new(k, 0.0),
                Tolerance {
                    abs: 1e-15,
                    rel: 1e-13,
                    max_intervals: 4000,
                },
                false,
            )?;
            return Ok(sum / (1.0 - state.beta * (d.re - mass)));
        }
    }
    Ok(sum)
}

fn inside(region: &Region, x: Point) -> bool {
    match region {
        Region::Disk { center, radius } => dist(*center, x) < *radius,
        Region::Rectangle { min, max } => x[0] > min[0] && x[0] < max[0] && x[1] > min[1] && x[1] < max[1],
    }
}

/// Exact `L^2(R^2)` norm of the quadrature representation of `omega`, using
/// `int K(x-y) K(y-x') dy = |x-x'| K1(kappa |x-x'|) / (4 pi kappa)`.
pub fn omega_l2_norm(state: &TrapState, measure: &KatoMeasure) -> Result<f64> {
    let kappa = (-state.energy).sqrt();
    let c: Vec<f64> = state
        .bs_vector
        .iter()
        .zip(&measure.weights)
        .map(|(u, w)| u * w.sqrt())
        .collect();
    let gram = |r: f64| -> Result<f64> {
        if r == 0.0 {
            Ok(1.0 / (4.0 * PI * kappa * kappa))
        } else {
            let (_, k1) = k0_k1(kappa * r)?;
            Ok(r * k1 / (4.0 * PI * kappa))
        }
    };
    let nodes = &measure.nodes;
    let n = nodes.len();
    let total: f64 = if let Some(layout) = measure.rings {
        let p = layout.per_ring;
        (0..layout.rings)
            .into_par_iter()
            .map(|a| -> Result<f64> {
                let row: Vec<f64> = (0..n).map(|j| gram(dist(nodes[a * p], nodes[j]))).collect::<Result<_>>()?;
                let mut acc = 0.0;
                for q in 0..p {
                    for j in 0..n {
                        let (b, l) = (j / p, j % p);
                        acc += c[a * p + q] * row[b * p + (l + p - q) % p] * c[j];
                    }
                }
                Ok(acc)
            })
            .sum::<Result<f64>>()?
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += c[i] * gram(dist(nodes[i], nodes[j]))? * c[j];
                }
                Ok(acc)
            })
            .sum::<Result<f64>>()?
    };
    Ok(total.sqrt())
}

/// Regular part `A_n(z) = (I - beta S(z))^{-1} - (beta (E - z))^{-1} u u^T`
/// of the Birman-Schwinger resolvent near a simple bound state.
#[derive(Debug, Clone)]
pub struct DeflatedResolvent {
    pub z: Complex64,
    pub energy: f64,
    pub beta: f64,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    u: DVector<Complex64>,
    pole: Complex64,
}

impl DeflatedResolvent {
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut x = self.lu.solve(v).expect("factorization checked at construction");
        let c = self.u.transpose() * v;
        x.axpy(-self.pole * c[0], &self.u, Complex64::new(1.0, 0.0));
        x
    }

    pub fn apply_matrix(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut x = self.lu.solve(m).expect("factorization checked at construction");
        let c = self.u.transpose() * m;
        x -= &self.u * c * self.pole;
        x
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        self.apply_matrix(&DMatrix::identity(self.dim(), self.dim()))
    }

    pub fn bs_vector(&self) -> &DVector<Complex64> {
        &self.u
    }
}

pub fn deflated_inverse(
    measure: &KatoMeasure,
    beta: f64,
    state: &TrapState,
    z: Complex64,
) -> Result<DeflatedResolvent> {
    let op = free_bs_matrix(measure, z)?;
    deflated_inverse_from(&op, beta, state)
}

/// As [`deflated_inverse`], reusing an assembled operator.
pub fn deflated_inverse_from(op: &BsOperator, beta: f64, state: &TrapState) -> Result<DeflatedResolvent> {
    let z = op.z;
    if state.multiplicity > 1 {
        return Err(Error::Multiplicity(format!(
            "trap level {} has multiplicity {}",
            state.index, state.multiplicity
        )));
    }
    if state.bs_vector.len() != op.dimension {
        return Err(Error::Config("trap state and operator use different measures".into()));
    }
    let gap = z - state.energy;
    if gap.norm() < DEFLATION_FLOOR {
        return Err(Error::Cancellation(format!(
            "|z - E| = {:.3e} is below the floor {DEFLATION_FLOOR:e}",
            gap.norm()
        )));
    }
    let n = op.dimension;
    let t = DMatrix::identity(n, n) - &op.matrix * Complex64::new(beta, 0.0);
    let lu = t.lu();
    if !lu.is_invertible() {
        return Err(Error::Pole(format!("I - beta S(z) is singular at z = {z}")));
    }
    let u = DVector::from_iterator(n, state.bs_vector.iter().map(|v| Complex64::new(*v, 0.0)));
    let pole = 1.0 / (beta * (-gap));
    Ok(DeflatedResolvent {
        z,
        energy: state.energy,
        beta,
        lu,
        u,
        pole,
    })
}

/// Default radius of the disc `S_n` around a trap level: a quarter of the
/// distance to the nearest other trap level or threshold.
pub fn default_radius(energy: f64, others: &[f64], thresholds: &[f64]) -> f64 {
    let gap = others
        .iter()
        .chain(thresholds)
        .filter(|e| (**e - energy).abs() > 0.0)
        .fold(f64::INFINITY, |g, e| g.min((e - energy).abs()));
    0.25 * gap.min(energy.abs())
}
