use nalgebra::{DMatrix, DVector};

use super::{MpsState, SiteTensor, TruncationPolicy, TwoSiteGate};
use crate::error::{Error, Result};
use crate::linalg;

/// New tensors for one bond, computed without touching the state.
pub(crate) struct BondUpdate {
    bond: usize,
    left: SiteTensor,
    right: SiteTensor,
    dims: Vec<usize>,
    lambda: Vec<DVector<f64>>,
    pub(crate) discarded: f64,
}

/// Applies a two-site gate, truncates the bond and renormalizes.
/// Returns the discarded relative Schmidt weight.
pub fn apply_gate_and_truncate(
    state: &mut MpsState,
    gate: &TwoSiteGate,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let upd = compute_update(state, gate, policy)?;
    let w = upd.discarded;
    install(state, upd);
    Ok(w)
}

pub(crate) fn install(state: &mut MpsState, upd: BondUpdate) {
    let i = upd.bond;
    state.sites[i] = upd.left;
    state.sites[i + 1] = upd.right;
    state.bonds[i + 1] = upd.dims;
    state.lambdas[i + 1] = upd.lambda;
    state.canonical = false;
}

pub(crate) fn compute_update(
    state: &MpsState,
    gate: &TwoSiteGate,
    policy: &TruncationPolicy,
) -> Result<BondUpdate> {
    let i = gate.bond;
    let l = state.len();
    let d = state.local_dim;
    let n = state.particles;
    if i + 1 >= l {
        return Err(Error::Contract(format!("gate bond {i} outside a chain of {l} sites")));
    }
    if gate.matrix.nrows() != d * d || gate.matrix.ncols() != d * d {
        return Err(Error::Contract(format!(
            "gate of shape {}×{} for local dimension {d}",
            gate.matrix.nrows(),
            gate.matrix.ncols()
        )));
    }
    let dl = &state.bonds[i];
    let dr = |c: usize| state.right_dim(i + 2, c);

    // θ[q][s1][s2] = B_i(q,s1) B_{i+1}(q+s1,s2)
    let idx = |q: usize, s1: usize, s2: usize| (q * d + s1) * d + s2;
    let mut theta: Vec<Option<DMatrix<f64>>> = vec![None; (n + 1) * d * d];
    for q in 0..=n {
        if dl[q] == 0 {
            continue;
        }
        for s1 in 0..d {
            if q + s1 > n || state.bonds[i + 1][q + s1] == 0 {
                continue;
            }
            for s2 in 0..d {
                if q + s1 + s2 > n || dr(q + s1 + s2) == 0 {
                    continue;
                }
                theta[idx(q, s1, s2)] = Some(state.block(i, q, s1) * state.block(i + 1, q + s1, s2));
            }
        }
    }

    // Gate action: pairs with equal s1 + s2 mix.
    let mut phi: Vec<Option<DMatrix<f64>>> = vec![None; (n + 1) * d * d];
    for q in 0..=n {
        if dl[q] == 0 {
            continue;
        }
        for t1 in 0..d {
            for t2 in 0..d {
                let tot = t1 + t2;
                if q + tot > n || dr(q + tot) == 0 {
                    continue;
                }
                let mut acc: Option<DMatrix<f64>> = None;
                for s1 in tot.saturating_sub(d - 1)..=tot.min(d - 1) {
                    let s2 = tot - s1;
                    let g = gate.matrix[(t1 * d + t2, s1 * d + s2)];
                    if g == 0.0 {
                        continue;
                    }
                    if let Some(th) = &theta[idx(q, s1, s2)] {
                        match &mut acc {
                            Some(a) => *a += th * g,
                            None => acc = Some(th * g),
                        }
                    }
                }
                phi[idx(q, t1, t2)] = acc;
            }
        }
    }

    // Sector c of the new middle bond: rows (q, t1) with q + t1 = c, columns t2.
    struct Sector {
        rows: Vec<(usize, usize, usize)>,
        cols: Vec<(usize, usize)>,
        m: DMatrix<f64>,
        weights: DVector<f64>,
        vecs: DMatrix<f64>,
    }
    let lam_left = &state.lambdas[i];
    let mut sectors: Vec<Option<Sector>> = Vec::with_capacity(n + 1);
    let mut total = 0.0;
    for c in 0..=n {
        let mut rows = Vec::new();
        let mut nr = 0;
        for t1 in 0..d.min(c + 1) {
            let q = c - t1;
            if dl[q] > 0 {
                rows.push((q, t1, nr));
                nr += dl[q];
            }
        }
        let mut cols = Vec::new();
        let mut nc = 0;
        for t2 in 0..d {
            if c + t2 <= n && dr(c + t2) > 0 {
                cols.push((t2, nc));
                nc += dr(c + t2);
            }
        }
        if nr == 0 || nc == 0 {
            sectors.push(None);
            continue;
        }
        let mut m = DMatrix::zeros(nr, nc);
        for &(q, t1, r0) in &rows {
            for &(t2, c0) in &cols {
                if let Some(p) = &phi[idx(q, t1, t2)] {
                    m.view_mut((r0, c0), (p.nrows(), p.ncols())).copy_from(p);
                }
            }
        }
        let mut w = m.clone();
        for &(q, _, r0) in &rows {
            for a in 0..dl[q] {
                w.row_mut(r0 + a).scale_mut(lam_left[q][a]);
            }
        }
        let svd = linalg::svd(&w).map_err(|_| Error::Numerical { bond: i + 1, reason: "SVD failed".into() })?;
        let weights = svd.s.map(|x| x * x);
        total += weights.sum();
        sectors.push(Some(Sector { rows, cols, m, weights, vecs: svd.v_t.transpose() }));
    }
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numerical { bond: i + 1, reason: format!("two-site weight {total}") });
    }

    // Global truncation across sectors.
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (c, s) in sectors.iter().enumerate() {
        if let Some(s) = s {
            all.extend(s.weights.iter().enumerate().map(|(k, &w)| (w, c, k)));
        }
    }
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut keep: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut kept = 0.0;
    for &(w, c, k) in all.iter().take(policy.chi_max) {
        if w <= policy.svd_cutoff * total || w <= 0.0 {
            break;
        }
        keep[c].push(k);
        kept += w;
    }
    let discarded = ((total - kept) / total).max(0.0);
    let norm = kept.sqrt();

    let mut dims = vec![0; n + 1];
    for (c, ks) in keep.iter().enumerate() {
        dims[c] = ks.len();
    }
    let mut lambda = vec![DVector::zeros(0); n + 1];
    let mut left = SiteTensor {
        blocks: (0..(n + 1) * d)
            .map(|k| {
                let (q, t) = (k / d, k % d);
                DMatrix::zeros(dl[q], if q + t <= n { dims[q + t] } else { 0 })
            })
            .collect(),
    };
    let mut right = SiteTensor {
        blocks: (0..(n + 1) * d)
            .map(|k| {
                let (c, t) = (k / d, k % d);
                DMatrix::zeros(dims[c], if c + t <= n { dr(c + t) } else { 0 })
            })
            .collect(),
    };
    for (c, sector) in sectors.iter().enumerate() {
        let Some(s) = sector else { continue };
        let ks = &keep[c];
        if ks.is_empty() {
            continue;
        }
        lambda[c] = DVector::from_iterator(ks.len(), ks.iter().map(|&k| s.weights[k].sqrt() / norm));
        let v = DMatrix::from_fn(s.vecs.nrows(), ks.len(), |r, col| s.vecs[(r, ks[col])]);
        for &(t2, c0) in &s.cols {
            let w = dr(c + t2);
            right.blocks[c * d + t2] = v.view((c0, 0), (w, ks.len())).transpose();
        }
        let mv = &s.m * &v / norm;
        for &(q, t1, r0) in &s.rows {
            left.blocks[q * d + t1] = mv.rows(r0, dl[q]).into_owned();
        }
    }
    Ok(BondUpdate { bond: i, left, right, dims, lambda, discarded })
}
