//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with Gram-Schmidt against the vectors already found, which keeps
//! nearly degenerate tunnel-split pairs orthogonal.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = M[i][i+1]`.
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            out[i] = s;
        }
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let b2 = if i > 0 { self.off[i - 1].powi(2) } else { 0.0 };
            q = self.diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Upper bound on the largest eigenvalue magnitude.
    pub fn spectral_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// The `j`-th smallest eigenvalue (0-based).
    fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(M - shift) x = rhs` by Gaussian elimination with partial
    /// pivoting on the tridiagonal band.
    fn shifted_solve(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        // rows hold up to three nonzeros after pivoting: a[i], b[i], c[i]
        let mut a: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let mut b: Vec<f64> = self.off.clone();
        b.push(0.0);
        let mut c = vec![0.0; n];
        let mut below: Vec<f64> = self.off.clone();
        below.push(0.0);
        let mut x = rhs.to_vec();
        let tiny = f64::EPSILON * self.spectral_bound().max(1.0);
        for i in 0..n.saturating_sub(1) {
            let l = below[i];
            if l.abs() > a[i].abs() {
                // swap rows i and i+1
                let (ai1, bi1, ci1) = (a[i + 1], b[i + 1], c[i + 1]);
                let (ai, bi, ci) = (a[i], b[i], c[i]);
                a[i] = l;
                b[i] = ai1;
                c[i] = bi1;
                let m = ai / l;
                a[i + 1] = bi - m * ai1;
                b[i + 1] = ci - m * bi1;
                c[i + 1] = -m * ci1;
                x.swap(i, i + 1);
                x[i + 1] -= m * x[i];
            } else {
                if a[i] == 0.0 {
                    a[i] = tiny;
                }
                let m = l / a[i];
                a[i + 1] -= m * b[i];
                b[i + 1] -= m * c[i];
                x[i + 1] -= m * x[i];
            }
        }
        if a[n - 1] == 0.0 {
            a[n - 1] = tiny;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= b[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= c[i] * x[i + 2];
            }
            x[i] = s / a[i];
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// The `k` lowest eigenpairs, eigenvectors normalized to unit Euclidean norm.
///
/// Fails when an eigenvector residual `‖Mx − λx‖` exceeds `tol`.
pub fn lowest_eigenpairs(m: &Tridiagonal, k: usize, tol: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = m.len();
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    let mut work = vec![0.0; n];
    for j in 0..k.min(n) {
        let lambda = m.eigenvalue(j);
        // deterministic, generic start vector
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75 * (j as f64 + 1.0)).sin())
            .collect();
        let mut residual = f64::INFINITY;
        for _ in 0..8 {
            for (_, prev) in &out {
                let p = dot(&v, prev);
                v.iter_mut().zip(prev).for_each(|(x, y)| *x -= p * y);
            }
            normalize(&mut v);
            v = m.shifted_solve(lambda, &v);
            for (_, prev) in &out {
                let p = dot(&v, prev);
                v.iter_mut().zip(prev).for_each(|(x, y)| *x -= p * y);
            }
            normalize(&mut v);
            m.apply(&v, &mut work);
            residual = work
                .iter()
                .zip(&v)
                .map(|(hv, x)| (hv - lambda * x).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual < tol {
                break;
            }
        }
        if !(residual < tol) {
            return Err(Error::NoConvergence {
                what: format!("eigenvector {j}"),
                residual,
            });
        }
        out.push((lambda, v));
    }
    Ok(out)
}
