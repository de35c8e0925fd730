//! Real symmetric tridiagonal matrices and their low-lying eigenpairs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows i and i+1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Contract(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &b) in self.off.iter().enumerate() {
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
        m
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Max absolute row sum, an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i < self.off.len() {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            if d.abs() < tiny {
                d = -tiny;
            }
            d = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / d;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th smallest eigenvalue (k = 0 is the ground state) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim(), "eigenvalue index {k} out of range");
        let r = self.norm_inf();
        let (mut lo, mut hi) = (-r - 1.0, r + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Normalized eigenvector for a (converged) eigenvalue by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> DVector<f64> {
        let n = self.dim();
        let scale = self.norm_inf().max(1.0);
        let shift = lambda - 1e-13 * scale;
        let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919 % 101) as f64) / 101.0);
        v /= v.norm();
        for _ in 0..4 {
            let mut y = DVector::from_vec(self.solve_shifted(shift, v.as_slice()));
            let norm = y.norm();
            if !(norm.is_finite() && norm > 0.0) {
                break;
            }
            y /= norm;
            v = y;
        }
        // fix the overall sign so the largest component is positive
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v.neg_mut();
        }
        v
    }

    /// Solves (T − shift·I) y = b by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let tiny = 1e-300;
        if n == 1 {
            let d = self.diag[0] - shift;
            return vec![b[0] / if d.abs() < tiny { tiny } else { d }];
        }
        // Row i holds entries in columns i, i+1, i+2 after elimination.
        let mut d: Vec<f64> = self.diag.iter().map(|a| a - shift).collect();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut dl = self.off.clone();
        let mut rhs = b.to_vec();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                let piv = if d[i].abs() < tiny { tiny } else { d[i] };
                d[i] = piv;
                let f = dl[i] / piv;
                dl[i] = f;
                d[i + 1] -= f * du[i];
                rhs[i + 1] -= f * rhs[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                rhs.swap(i, i + 1);
                rhs[i + 1] -= f * rhs[i];
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = tiny;
        }
        let mut y = vec![0.0; n];
        y[n - 1] = rhs[n - 1] / d[n - 1];
        y[n - 2] = (rhs[n - 2] - du[n - 2] * y[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            y[i] = (rhs[i] - du[i] * y[i + 1] - du2[i] * y[i + 2]) / d[i];
        }
        y
    }
}
