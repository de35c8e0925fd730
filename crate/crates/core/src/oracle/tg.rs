use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::exec::ExecPolicy;

const CUTOFF: f64 = 6.0;
const PANEL: f64 = 1.2;
const ORDER: usize = 20;

fn phi0(x: f64) -> f64 {
    std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp()
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Composite Gauss-Legendre rule on [−6, 6] with panel edges at `breaks`.
fn composite_rule(rule: &GaussLegendre, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut edges: Vec<f64> = vec![-CUTOFF, CUTOFF];
    edges.extend(breaks.iter().copied().filter(|b| b.abs() < CUTOFF));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let panels = ((b - a) / PANEL).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for &(node, weight) in rule.as_node_weight_pairs() {
                out.push((lo + 0.5 * h * (node + 1.0), 0.5 * h * weight));
            }
        }
    }
    out
}

/// ρ(x, y) of the fermionic Tonks-Girardeau gas of N ∈ {2, 3} particles,
/// by direct quadrature over the remaining N − 1 coordinates of
/// N ∫ ψ_F(x, z…) ψ_F(y, z…) with ψ_F = ∏ sgn(x_i − x_j) ∏ φ₀(x_i).
pub fn tg_odm_bruteforce(n: usize, grid: &[f64], exec: ExecPolicy) -> Result<DMatrix<f64>> {
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!("brute-force Tonks-Girardeau ODM needs N ∈ {{2, 3}}, got {n}")));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(ORDER).expect("nonzero order"));
    let m = grid.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect();
    let values = exec.map(&pairs, |&(a, b)| {
        let (x, y) = (grid[a], grid[b]);
        let nodes = composite_rule(&rule, &[x, y]);
        let pref = n as f64 * phi0(x) * phi0(y);
        // per-coordinate factor sgn(x − z) sgn(y − z) |φ₀(z)|²
        let f: Vec<(f64, f64)> = nodes
            .iter()
            .map(|&(z, w)| (w, sgn(x - z) * sgn(y - z) * phi0(z) * phi0(z)))
            .collect();
        match n {
            2 => pref * f.iter().map(|(w, v)| w * v).sum::<f64>(),
            _ => {
                // sgn(z₁ − z₂) enters both wave functions, so its square (one
                // almost everywhere) drops out.
                let mut acc = 0.0;
                for &(w1, v1) in &f {
                    let mut inner = 0.0;
                    for &(w2, v2) in &f {
                        inner += w2 * v2;
                    }
                    acc += w1 * v1 * inner;
                }
                pref * acc
            }
        }
    });
    let mut out = DMatrix::zeros(m, m);
    for (&(a, b), v) in pairs.iter().zip(values) {
        out[(a, b)] = v;
        out[(b, a)] = v;
    }
    Ok(out)
}

/// N φ₀(x) φ₀(y) (1 − |erf x − erf y|)^{N−1}, the same density matrix with
/// the single-coordinate integral done analytically.
pub fn tg_odm_semiclosed(n: usize, grid: &[f64]) -> DMatrix<f64> {
    let m = grid.len();
    DMatrix::from_fn(m, m, |a, b| {
        let (x, y) = (grid[a], grid[b]);
        let inner = 1.0 - (erf(x) - erf(y)).abs();
        n as f64 * phi0(x) * phi0(y) * inner.powi(n as i32 - 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn grid(step: f64, half: f64) -> Vec<f64> {
        let k = (half / step).round() as i64;
        (-k..=k).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn quadrature_matches_semiclosed_form() {
        let g = grid(0.25, 4.0);
        for n in [2, 3] {
            let bf = tg_odm_bruteforce(n, &g, ExecPolicy::Serial).unwrap();
            let sc = tg_odm_semiclosed(n, &g);
            assert!((&bf - &sc).amax() < 1e-8, "N={n}: {}", (&bf - &sc).amax());
        }
    }

    #[test]
    fn diagonal_and_trace() {
        let g = grid(0.05, 6.0);
        let sc = tg_odm_semiclosed(3, &g);
        for (k, &x) in g.iter().enumerate() {
            assert_abs_diff_eq!(sc[(k, k)], 3.0 * phi0(x).powi(2), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(sc.trace() * 0.05, 3.0, epsilon = 1e-5);
        let bf = tg_odm_bruteforce(2, &g[..5], ExecPolicy::Serial).unwrap();
        for k in 0..5 {
            assert_abs_diff_eq!(bf[(k, k)], 2.0 * phi0(g[k]).powi(2), epsilon = 1e-10);
        }
    }

    #[test]
    fn positive_semidefinite() {
        let g = grid(0.2, 5.0);
        let bf = tg_odm_bruteforce(3, &g, ExecPolicy::Parallel).unwrap();
        let eig = SymmetricEigen::new(bf * 0.2);
        assert!(eig.eigenvalues.iter().all(|&e| e > -1e-8));
    }

    #[test]
    fn rejects_other_particle_numbers() {
        assert!(matches!(tg_odm_bruteforce(4, &[0.0], ExecPolicy::Serial), Err(Error::Unsupported(_))));
    }
}
