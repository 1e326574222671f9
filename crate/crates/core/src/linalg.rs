//! Small dense helpers: leading eigenpairs of symmetric matrices and a
//! bracketing root finder.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Dense symmetric problems up to this size go to the full eigensolver.
pub const DENSE_LIMIT: usize = 160;

/// The `count` largest eigenvalues of a symmetric matrix with eigenvectors,
/// in decreasing order.
pub fn top_eigenpairs(a: &DMatrix<f64>, count: usize) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let n = a.nrows();
    let count = count.min(n);
    if n <= DENSE_LIMIT {
        let eig = SymmetricEigen::new(a.clone());
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let vals = idx[..count].iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = idx[..count].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        return Ok((vals, vecs));
    }
    lanczos_top(|v| a * v, n, count, 1e-13)
}

/// Lanczos with full reorthogonalization; restarts with a longer basis until
/// the Ritz residuals of the requested pairs fall below `tol`.
pub fn lanczos_top<F: Fn(&DVector<f64>) -> DVector<f64>>(
    matvec: F,
    n: usize,
    count: usize,
    tol: f64,
) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let mut m = (3 * count + 30).min(n);
    loop {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut q = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919) % 101) as f64 / 101.0);
        q /= q.norm();
        let mut last_beta = 0.0;
        for j in 0..m {
            basis.push(q.clone());
            let mut w = matvec(&q);
            let a = w.dot(&q);
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = w.dot(b);
                    w.axpy(-c, b, 1.0);
                }
            }
            last_beta = w.norm();
            if j + 1 == m || last_beta < 1e-300 {
                break;
            }
            beta.push(last_beta);
            q = w / last_beta;
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let want = count.min(k);
        let scale = eig.eigenvalues.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
        let converged = idx[..want]
            .iter()
            .all(|&i| (last_beta * eig.eigenvectors[(k - 1, i)]).abs() <= tol * scale);
        if converged || k >= n {
            let vals = idx[..want].iter().map(|&i| eig.eigenvalues[i]).collect();
            let vecs = idx[..want]
                .iter()
                .map(|&i| {
                    let mut v = DVector::zeros(n);
                    for (j, b) in basis.iter().enumerate() {
                        v.axpy(eig.eigenvectors[(j, i)], b, 1.0);
                    }
                    let nv = v.norm();
                    v / nv
                })
                .collect();
            return Ok((vals, vecs));
        }
        if m >= n {
            return Err(Error::Solver("Lanczos iteration did not converge".into()));
        }
        m = (2 * m).min(n);
    }
}

/// Brent's method on a bracket `[a, b]` with `f(a) f(b) < 0`.
pub fn brent<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Solver(format!("root not bracketed on [{a}, {b}]")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::Solver("Brent iteration limit reached".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanczos_matches_dense() {
        let n = 120;
        let a = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { 0.01 * i as f64 } else { 0.0 });
        let (v1, _) = lanczos_top(|v| &a * v, n, 3, 1e-13).unwrap();
        let eig = SymmetricEigen::new(a.clone());
        let mut all: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        all.sort_by(|x, y| y.total_cmp(x));
        for i in 0..3 {
            assert!((v1[i] - all[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn brent_finds_cube_root() {
        let r = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }
}
