use nalgebra::DMatrix;

use super::gate::{bond_hamiltonian, LocalOp};
use super::MpsState;
use crate::discretize::LatticeHamiltonian;
use crate::error::{Error, Result};
use crate::exec::ExecPolicy;

impl MpsState {
    fn ensure_canonical(&self) -> Result<()> {
        if self.canonical {
            Ok(())
        } else {
            Err(Error::Contract("measurement requires a canonicalized state".into()))
        }
    }

    /// `⟨f(n_i)⟩` for a diagonal single-site function.
    pub fn site_expectation(&self, i: usize, f: &[f64]) -> Result<f64> {
        self.ensure_canonical()?;
        let d = self.local_dim;
        let mut acc = 0.0;
        for q in 0..=self.particles {
            let lam = &self.lambdas[i][q];
            for s in 0..d {
                if q + s > self.particles || f[s] == 0.0 {
                    continue;
                }
                let b = self.block(i, q, s);
                for a in 0..b.nrows() {
                    acc += f[s] * lam[a] * lam[a] * b.row(a).norm_squared();
                }
            }
        }
        Ok(acc)
    }

    /// `⟨n_i⟩` for every site.
    pub fn occupations(&self) -> Result<Vec<f64>> {
        let num: Vec<f64> = (0..self.local_dim).map(|s| s as f64).collect();
        (0..self.len()).map(|i| self.site_expectation(i, &num)).collect()
    }

    /// `⟨O⟩` for a number-conserving operator on sites (i, i+1), basis `s1 * d + s2`.
    pub fn bond_expectation(&self, i: usize, op: &DMatrix<f64>) -> Result<f64> {
        self.ensure_canonical()?;
        let d = self.local_dim;
        let n = self.particles;
        let mut acc = 0.0;
        for q in 0..=n {
            let lam = &self.lambdas[i][q];
            if lam.is_empty() {
                continue;
            }
            // θ blocks for this left charge, weighted by λ
            let mut theta: Vec<Option<DMatrix<f64>>> = vec![None; d * d];
            for s1 in 0..d {
                for s2 in 0..d {
                    if q + s1 + s2 > n {
                        continue;
                    }
                    let b1 = self.block(i, q, s1);
                    let b2 = self.block(i + 1, q + s1, s2);
                    if b1.ncols() == 0 || b2.ncols() == 0 {
                        continue;
                    }
                    let mut t = b1 * b2;
                    for a in 0..t.nrows() {
                        t.row_mut(a).scale_mut(lam[a]);
                    }
                    theta[s1 * d + s2] = Some(t);
                }
            }
            for (ka, ta) in theta.iter().enumerate() {
                let Some(ta) = ta else { continue };
                for (kb, tb) in theta.iter().enumerate() {
                    let Some(tb) = tb else { continue };
                    let o = op[(ka, kb)];
                    if o != 0.0 && ta.ncols() == tb.ncols() && ka / d + ka % d == kb / d + kb % d {
                        acc += o * ta.dot(tb);
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Connected-string correlator `⟨A_i ∏_{i<m<j} S_m B_j⟩` for all i < j,
    /// filled symmetrically; the diagonal holds `⟨(AB)_i⟩` from `diag`.
    pub fn correlation_matrix(
        &self,
        a: &LocalOp,
        string: Option<&LocalOp>,
        b: &LocalOp,
        diag: &[f64],
        exec: ExecPolicy,
    ) -> Result<DMatrix<f64>> {
        self.ensure_canonical()?;
        if a.shift + b.shift != 0 || string.is_some_and(|s| s.shift != 0) {
            return Err(Error::Contract("correlator must conserve particle number".into()));
        }
        let l = self.len();
        let rows = exec.map_range(l, |i| self.correlation_row(i, a, string, b));
        let mut m = DMatrix::zeros(l, l);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                m[(i, i + 1 + j)] = v;
                m[(i + 1 + j, i)] = v;
            }
            m[(i, i)] = self.site_expectation(i, diag)?;
        }
        Ok(m)
    }

    fn correlation_row(&self, i: usize, a: &LocalOp, string: Option<&LocalOp>, b: &LocalOp) -> Vec<f64> {
        let d = self.local_dim;
        let n = self.particles;
        let l = self.len();
        let delta = a.shift;
        // env[c]: bra charge c + δ, ket charge c, right of site m
        let bra = |c: usize| -> Option<usize> {
            let t = c as i64 + delta as i64;
            (0..=n as i64).contains(&t).then_some(t as usize)
        };
        let mut env: Vec<Option<DMatrix<f64>>> = vec![None; n + 1];
        for q in 0..=n {
            let lam = &self.lambdas[i][q];
            if lam.is_empty() {
                continue;
            }
            for s in 0..d {
                let Some(t) = a.target(s, d) else { continue };
                if q + s > n || q + t > n || a.values[s] == 0.0 {
                    continue;
                }
                let bk = self.block(i, q, s);
                let bb = self.block(i, q, t);
                if bk.ncols() == 0 || bb.ncols() == 0 {
                    continue;
                }
                let mut wk = bk.clone();
                for r in 0..wk.nrows() {
                    wk.row_mut(r).scale_mut(lam[r] * lam[r] * a.values[s]);
                }
                let x = bb.tr_mul(&wk);
                accumulate(&mut env[q + s], x);
            }
        }
        let mut out = Vec::with_capacity(l - i - 1);
        for j in i + 1..l {
            // close with B
            let mut val = 0.0;
            for (c, x) in env.iter().enumerate() {
                let Some(x) = x else { continue };
                let Some(cb) = bra(c) else { continue };
                for s in 0..d {
                    let Some(t) = b.target(s, d) else { continue };
                    if c + s > n || cb + t > n || b.values[s] == 0.0 || cb + t != c + s {
                        continue;
                    }
                    let bk = self.block(j, c, s);
                    let bb = self.block(j, cb, t);
                    if bk.ncols() == 0 {
                        continue;
                    }
                    val += b.values[s] * bb.dot(&(x * bk));
                }
            }
            out.push(val);
            if j + 1 == l {
                break;
            }
            // propagate through j with the string
            let mut next: Vec<Option<DMatrix<f64>>> = vec![None; n + 1];
            for (c, x) in env.iter().enumerate() {
                let Some(x) = x else { continue };
                let Some(cb) = bra(c) else { continue };
                for s in 0..d {
                    if c + s > n || cb + s > n {
                        continue;
                    }
                    let f = string.map_or(1.0, |op| op.values[s]);
                    if f == 0.0 {
                        continue;
                    }
                    let bk = self.block(j, c, s);
                    let bb = self.block(j, cb, s);
                    if bk.ncols() == 0 || bb.ncols() == 0 {
                        continue;
                    }
                    let y = bb.tr_mul(&(x * bk)) * f;
                    accumulate(&mut next[c + s], y);
                }
            }
            env = next;
        }
        out
    }
}

fn accumulate(slot: &mut Option<DMatrix<f64>>, x: DMatrix<f64>) {
    match slot {
        Some(acc) => *acc += x,
        None => *slot = Some(x),
    }
}

/// `⟨H⟩` of a canonicalized state.
pub fn energy(state: &MpsState, ham: &LatticeHamiltonian) -> Result<f64> {
    if ham.site_count() != state.len() || ham.local_dim() != state.local_dim() {
        return Err(Error::Contract("Hamiltonian and state disagree in shape".into()));
    }
    (0..state.len() - 1)
        .map(|b| bond_hamiltonian(ham, b).and_then(|h| state.bond_expectation(b, &h)))
        .sum()
}

/// `Σ_i ⟨n_i⟩`.
pub fn total_number(state: &MpsState) -> Result<f64> {
    Ok(state.occupations()?.iter().sum())
}
