//! Nonnegative least squares and least-distance programming.
//!
//! Projections onto polyhedra and cones reduce to `min |z| s.t. G z >= h`,
//! which is solved through the Lawson-Hanson NNLS active-set method and then
//! polished on the identified active set.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{pinv, select_rows, RANK_TOL};

fn select_columns(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), idx.len());
    for (k, &j) in idx.iter().enumerate() {
        out.set_column(k, &a.column(j));
    }
    out
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    pinv(a, 1e-13) * b
}

/// `argmin |a x - b|` over `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (m, n) = a.shape();
    let mut x = DVector::zeros(n);
    if n == 0 {
        return x;
    }
    let tol = 10.0 * f64::EPSILON * a.norm().max(1.0) * (m.max(n) as f64) * b.norm().max(1.0);
    let mut passive = vec![false; n];
    let mut blocked = vec![false; n];
    let mut outer = 0;
    while outer < 3 * n + 30 {
        outer += 1;
        let w = a.transpose() * (b - a * &x);
        let pick = (0..n)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = pick else { break };
        passive[t] = true;
        let mut first = true;
        for _ in 0..3 * n + 30 {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = least_squares(&select_columns(a, &idx), b);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                blocked.iter_mut().for_each(|f| *f = false);
                break;
            }
            if first {
                let kt = idx.iter().position(|&j| j == t).unwrap();
                if z[kt] <= 0.0 {
                    passive[t] = false;
                    blocked[t] = true;
                    break;
                }
            }
            first = false;
            let mut alpha = f64::INFINITY;
            let mut hit = usize::MAX;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let al = x[j] / (x[j] - z[k]);
                    if al < alpha {
                        alpha = al;
                        hit = j;
                    }
                }
            }
            let xmax = x.amax().max(1.0);
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
            }
            for &j in &idx {
                if j == hit || x[j] <= 1e-15 * xmax {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}

/// Solution of `min |z| s.t. g z >= h` with its multipliers (`z = g^T lambda`).
#[derive(Clone, Debug)]
pub struct LeastDistance {
    pub z: DVector<f64>,
    pub multipliers: DVector<f64>,
}

/// Returns `None` when `{z : g z >= h}` is empty.
pub fn least_distance(g: &DMatrix<f64>, h: &DVector<f64>) -> Option<LeastDistance> {
    let (k, d) = g.shape();
    if k == 0 {
        return Some(LeastDistance {
            z: DVector::zeros(d),
            multipliers: DVector::zeros(0),
        });
    }
    let mut e = DMatrix::zeros(d + 1, k);
    e.rows_mut(0, d).copy_from(&g.transpose());
    e.row_mut(d).copy_from(&h.transpose());
    let mut f = DVector::zeros(d + 1);
    f[d] = 1.0;
    let u = nnls(&e, &f);
    let r = &e * &u - &f;
    if r[d] > -1e-13 {
        return None;
    }
    let z: DVector<f64> = -r.rows(0, d) / r[d];
    let lambda = &u / (-r[d]);
    let scale = 1.0 + h.amax();
    let slack = g * &z - h;
    if slack.iter().any(|s| *s < -1e-7 * scale) {
        return None;
    }
    Some(polish(g, h, z, lambda))
}

/// Re-solve exactly on the active set; keep the result if it is KKT-valid.
fn polish(g: &DMatrix<f64>, h: &DVector<f64>, z: DVector<f64>, lambda: DVector<f64>) -> LeastDistance {
    let scale = 1.0 + h.amax() + z.amax();
    let slack = g * &z - h;
    let active: Vec<usize> = (0..g.nrows())
        .filter(|&i| slack[i].abs() <= 1e-8 * scale || lambda[i] > 1e-12 * scale)
        .collect();
    let fallback = LeastDistance {
        z: z.clone(),
        multipliers: lambda,
    };
    if active.is_empty() {
        if slack.iter().all(|s| *s >= -1e-12 * scale) {
            return LeastDistance {
                z: DVector::zeros(z.len()),
                multipliers: DVector::zeros(g.nrows()),
            };
        }
        return fallback;
    }
    let gs = select_rows(g, &active);
    let hs = DVector::from_iterator(active.len(), active.iter().map(|&i| h[i]));
    let mu = pinv(&(&gs * gs.transpose()), RANK_TOL) * &hs;
    let zn = gs.transpose() * &mu;
    let ok_mult = mu.iter().all(|m| *m >= -1e-10 * scale);
    let ok_feas = (g * &zn - h).iter().all(|s| *s >= -1e-11 * scale);
    let ok_eq = (&gs * &zn - &hs).amax() <= 1e-10 * scale;
    if ok_mult && ok_feas && ok_eq {
        let mut mult = DVector::zeros(g.nrows());
        for (k, &i) in active.iter().enumerate() {
            mult[i] = mu[k].max(0.0);
        }
        LeastDistance { z: zn, multipliers: mult }
    } else {
        fallback
    }
}
