use nalgebra::{DMatrix, DVector};

use super::MpsState;
use crate::error::{Error, Result};
use crate::linalg;

/// Schmidt weights below this fraction of the bond total are numerical zeros.
const NULL_WEIGHT: f64 = 1e-28;

impl MpsState {
    /// Restores the exact right-canonical Schmidt form and unit norm.
    ///
    /// A right-to-left LQ sweep makes every tensor right-isometric, then a
    /// left-to-right SVD sweep rotates each bond into its Schmidt basis.
    /// Only numerically vanishing Schmidt values are discarded.
    pub fn canonicalize(&mut self) -> Result<()> {
        let l = self.len();
        let n = self.particles;
        let d = self.local_dim;

        for i in (1..l).rev() {
            for q in 0..=n {
                let dl = self.bonds[i][q];
                if dl == 0 {
                    continue;
                }
                let widths: Vec<usize> = (0..d).map(|s| self.right_dim(i + 1, q + s)).collect();
                let cols: usize = widths.iter().sum();
                let mut row = DMatrix::zeros(dl, cols);
                let mut c0 = 0;
                for s in 0..d {
                    if widths[s] > 0 {
                        row.view_mut((0, c0), (dl, widths[s])).copy_from(self.block(i, q, s));
                    }
                    c0 += widths[s];
                }
                let (q_mat, r_mat) = if cols == 0 {
                    (DMatrix::zeros(0, 0), DMatrix::zeros(0, dl))
                } else {
                    let qr = row.transpose().qr();
                    (qr.q(), qr.r())
                };
                let rank = q_mat.ncols();
                let mut c0 = 0;
                for s in 0..d {
                    let blk = if widths[s] > 0 {
                        q_mat.view((c0, 0), (widths[s], rank)).transpose()
                    } else {
                        DMatrix::zeros(rank, 0)
                    };
                    self.sites[i].blocks[q * d + s] = blk;
                    c0 += widths[s];
                }
                // absorb Rᵀ into the left neighbour
                let lmat = r_mat.transpose();
                for s in 0..d {
                    if s > q {
                        continue;
                    }
                    let k = (q - s) * d + s;
                    let b = &self.sites[i - 1].blocks[k];
                    self.sites[i - 1].blocks[k] = b * &lmat;
                }
                self.bonds[i][q] = rank;
            }
        }
        for s in 0..d {
            let k = s;
            let want = self.right_dim(1, s);
            if self.sites[0].blocks[k].ncols() != want {
                return Err(Error::Contract("bond bookkeeping out of sync".into()));
            }
        }

        let norm2: f64 = (0..d).map(|s| self.block(0, 0, s).norm_squared()).sum();
        if !(norm2.is_finite() && norm2 > 0.0) {
            return Err(Error::Numerical { bond: 0, reason: format!("state norm² = {norm2}") });
        }
        let inv = norm2.sqrt().recip();
        for s in 0..d {
            self.sites[0].blocks[s] *= inv;
        }

        let mut lambdas = vec![vec![DVector::zeros(0); n + 1]; l + 1];
        lambdas[0][0] = DVector::from_element(1, 1.0);
        lambdas[l][n] = DVector::from_element(1, 1.0);
        for i in 0..l - 1 {
            let mut sectors = Vec::with_capacity(n + 1);
            let mut total = 0.0;
            for c in 0..=n {
                let dr = self.bonds[i + 1][c];
                let parts: Vec<(usize, usize)> = (0..d)
                    .filter(|&s| s <= c && self.bonds[i][c - s] > 0)
                    .map(|s| (c - s, s))
                    .collect();
                let rows: usize = parts.iter().map(|&(q, _)| self.bonds[i][q]).sum();
                if dr == 0 || rows == 0 {
                    sectors.push(None);
                    continue;
                }
                let mut m = DMatrix::zeros(rows, dr);
                let mut r0 = 0;
                for &(q, s) in &parts {
                    let blk = self.block(i, q, s);
                    let lam = &lambdas[i][q];
                    let mut v = m.view_mut((r0, 0), (blk.nrows(), dr));
                    for a in 0..blk.nrows() {
                        for b in 0..dr {
                            v[(a, b)] = lam[a] * blk[(a, b)];
                        }
                    }
                    r0 += blk.nrows();
                }
                let svd = linalg::svd(&m).map_err(|_| Error::Numerical {
                    bond: i + 1,
                    reason: "SVD did not converge".into(),
                })?;
                total += svd.s.norm_squared();
                sectors.push(Some((svd.s, svd.v_t)));
            }
            if !(total > 0.0) {
                return Err(Error::Numerical { bond: i + 1, reason: "vanishing Schmidt spectrum".into() });
            }
            for (c, sector) in sectors.into_iter().enumerate() {
                let Some((sv, v_t)) = sector else {
                    self.set_bond_dim(i, c, &DMatrix::zeros(0, self.bonds[i + 1][c]));
                    lambdas[i + 1][c] = DVector::zeros(0);
                    continue;
                };
                let mut order: Vec<usize> =
                    (0..sv.len()).filter(|&k| sv[k] * sv[k] > NULL_WEIGHT * total).collect();
                order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
                let kept = DMatrix::from_fn(order.len(), v_t.ncols(), |r, col| v_t[(order[r], col)]);
                self.set_bond_dim(i, c, &kept);
                lambdas[i + 1][c] = DVector::from_iterator(
                    order.len(),
                    order.iter().map(|&k| sv[k] / total.sqrt()),
                );
            }
        }
        self.lambdas = lambdas;
        self.canonical = true;
        Ok(())
    }

    /// Rotates bond i+1, charge c, by the isometry `v_t` (new × old).
    fn set_bond_dim(&mut self, i: usize, c: usize, v_t: &DMatrix<f64>) {
        let d = self.local_dim;
        for s in 0..d {
            if s <= c {
                let k = (c - s) * d + s;
                let b = &self.sites[i].blocks[k];
                self.sites[i].blocks[k] = b * v_t.transpose();
            }
            if c + s <= self.particles {
                let k = c * d + s;
                let b = &self.sites[i + 1].blocks[k];
                self.sites[i + 1].blocks[k] = v_t * b;
            }
        }
        self.bonds[i + 1][c] = v_t.nrows();
    }
}
