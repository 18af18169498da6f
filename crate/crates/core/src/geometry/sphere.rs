//! Optimization over the unit sphere intersected with a polyhedral cone.
//!
//! A maximizer lies in the relative interior of some face, where it is a
//! critical point of the objective restricted to the face's linear span. Every
//! face span is enumerated, critical points are computed in closed form, and
//! the candidates lying in the cone are compared.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cone::{ConvexCone, HalfspaceForm, CONE_TOL};
use super::subspace::Subspace;
use crate::error::{Error, Result};
use crate::linalg::{binomial, null_space, select_rows, vstack, Combinations, RANK_TOL};

/// Upper limit on the number of faces visited.
pub const FACE_LIMIT: usize = 200_000;

/// Spans of all nonzero faces of `{A v <= 0, E v = 0}`.
pub fn enumerate_faces(h: &HalfspaceForm) -> Result<Vec<DMatrix<f64>>> {
    let a = &h.inequalities;
    let k = a.nrows();
    let closure = |flat: &[bool], extra: Option<usize>| -> Vec<bool> {
        let mut rows: Vec<usize> = (0..k).filter(|&i| flat[i]).collect();
        if let Some(i) = extra {
            rows.push(i);
        }
        let m = vstack(&h.equalities, &select_rows(a, &rows));
        let span = Subspace::span(&m.transpose());
        (0..k)
            .map(|i| {
                let r = a.row(i).transpose();
                (&r - span.project(&r)).norm() <= 1e-9
            })
            .collect()
    };
    let start = closure(&vec![false; k], None);
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    seen.insert(start.clone());
    let mut stack = vec![start];
    let mut out = Vec::new();
    while let Some(flat) = stack.pop() {
        let rows: Vec<usize> = (0..k).filter(|&i| flat[i]).collect();
        let m = vstack(&h.equalities, &select_rows(a, &rows));
        let l = null_space(&m, RANK_TOL);
        if l.ncols() == 0 {
            continue;
        }
        out.push(l);
        if out.len() > FACE_LIMIT {
            return Err(Error::TooLarge(format!("more than {FACE_LIMIT} faces")));
        }
        for i in 0..k {
            if flat[i] {
                continue;
            }
            let child = closure(&flat, Some(i));
            if seen.insert(child.clone()) {
                stack.push(child);
            }
        }
    }
    Ok(out)
}

/// Maximizer of a quadratic or linear objective over the unit sphere of a cone.
#[derive(Clone, Debug)]
pub struct SphereOptimum {
    pub value: f64,
    pub argmax: DVector<f64>,
}

fn keep_best(best: &mut Option<SphereOptimum>, value: f64, u: DVector<f64>) {
    if best.as_ref().is_none_or(|b| value > b.value) {
        *best = Some(SphereOptimum { value, argmax: u });
    }
}

/// `max u^T M u` over unit `u` in the cone; `None` when the cone is `{0}`.
pub fn max_quadratic(cone: &ConvexCone, m: &DMatrix<f64>) -> Result<Option<SphereOptimum>> {
    let sym = (m + m.transpose()) * 0.5;
    let mut best = None;
    for l in cone.face_subspaces()?.iter() {
        let k = l.transpose() * &sym * l;
        let eig = k.symmetric_eigen();
        for i in 0..eig.eigenvalues.len() {
            let u = l * eig.eigenvectors.column(i);
            let u = &u / u.norm();
            for s in [1.0, -1.0] {
                let us = &u * s;
                if cone.contains(&us, CONE_TOL) {
                    let val = us.dot(&(&sym * &us));
                    keep_best(&mut best, val, us);
                }
            }
        }
    }
    Ok(best)
}

/// `max g^T u` over unit `u` in the cone.
pub fn max_linear(cone: &ConvexCone, g: &DVector<f64>) -> Result<Option<SphereOptimum>> {
    let mut best = None;
    for l in cone.face_subspaces()?.iter() {
        let c = l.transpose() * g;
        let mut cands: Vec<DVector<f64>> = Vec::new();
        if c.norm() > 1e-14 * g.norm().max(1e-300) {
            let u = l * &c;
            cands.push(&u / u.norm());
        } else {
            for j in 0..l.ncols() {
                cands.push(l.column(j).into_owned());
            }
        }
        for u in cands {
            for s in [1.0, -1.0] {
                let us = &u * s;
                if cone.contains(&us, CONE_TOL) {
                    keep_best(&mut best, g.dot(&us), us);
                }
            }
        }
    }
    Ok(best)
}

/// Projected-gradient ascent from many starts; used to cross-check the exact search.
pub fn max_quadratic_multistart(
    cone: &ConvexCone,
    m: &DMatrix<f64>,
    starts: usize,
    seed: u64,
) -> Result<Option<SphereOptimum>> {
    let sym = (m + m.transpose()) * 0.5;
    let grad = |u: &DVector<f64>| &sym * u * 2.0;
    let val = |u: &DVector<f64>| u.dot(&(&sym * u));
    multistart(cone, starts, seed, &grad, &val)
}

pub fn max_linear_multistart(
    cone: &ConvexCone,
    g: &DVector<f64>,
    starts: usize,
    seed: u64,
) -> Result<Option<SphereOptimum>> {
    let grad = |_: &DVector<f64>| g.clone();
    let val = |u: &DVector<f64>| g.dot(u);
    multistart(cone, starts, seed, &grad, &val)
}

fn multistart(
    cone: &ConvexCone,
    starts: usize,
    seed: u64,
    grad: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    val: &dyn Fn(&DVector<f64>) -> f64,
) -> Result<Option<SphereOptimum>> {
    let n = cone.dim();
    let g = cone.generators()?;
    let mut seeds: Vec<DVector<f64>> = g.rays.clone();
    for j in 0..g.lineality.ncols() {
        seeds.push(g.lineality.column(j).into_owned());
        seeds.push(-g.lineality.column(j).into_owned());
    }
    if seeds.is_empty() {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while seeds.len() < starts {
        let mut u = DVector::zeros(n);
        for r in &g.rays {
            u += r * rng.random::<f64>();
        }
        for j in 0..g.lineality.ncols() {
            u += g.lineality.column(j) * (2.0 * rng.random::<f64>() - 1.0);
        }
        if u.norm() > 1e-12 {
            seeds.push(u);
        }
    }
    let scale = {
        let probe = grad(&seeds[0]).norm();
        if probe > 0.0 {
            1.0 / probe
        } else {
            1.0
        }
    };
    let mut best = None;
    for s in seeds {
        let mut u = &s / s.norm();
        let mut step = 0.5 * scale;
        let mut f = val(&u);
        for _ in 0..400 {
            let cand = cone.project(&(&u + grad(&u) * step))?;
            let nc = cand.norm();
            if nc < 1e-14 {
                step *= 0.5;
                continue;
            }
            let cand = cand / nc;
            let fc = val(&cand);
            if fc >= f - 1e-15 {
                let moved = (&cand - &u).norm();
                u = cand;
                f = fc;
                if moved < 1e-12 {
                    break;
                }
            } else {
                step *= 0.5;
                if step < 1e-14 {
                    break;
                }
            }
        }
        keep_best(&mut best, f, u);
    }
    Ok(best)
}

/// Result of `min |F z|_1 / |z|` over a subspace.
#[derive(Clone, Debug)]
pub struct NormRatioMin {
    pub value: f64,
    pub argmin: DVector<f64>,
    pub exact: bool,
}

/// Upper limit on arrangement rays inspected before falling back to local search.
pub const ARRANGEMENT_LIMIT: f64 = 2e5;

/// `min |F v|_1` over unit `v` in the span of `basis`.
///
/// The minimizer lies on a ray of the hyperplane arrangement `{(F v)_y = 0}`
/// restricted to the subspace, so all such rays are inspected when there are
/// few enough of them.
pub fn min_l1_ratio(f: &DMatrix<f64>, basis: &DMatrix<f64>, seed: u64) -> NormRatioMin {
    let d = basis.ncols();
    let n = basis.nrows();
    if d == 0 {
        return NormRatioMin {
            value: f64::INFINITY,
            argmin: DVector::zeros(n),
            exact: true,
        };
    }
    let fb = f * basis;
    let rows: Vec<usize> = (0..fb.nrows()).filter(|&i| fb.row(i).norm() > 1e-14).collect();
    let fb = select_rows(&fb, &rows);
    let ratio = |z: &DVector<f64>| (&fb * z).iter().map(|x| x.abs()).sum::<f64>() / z.norm();
    if d == 1 {
        let z = DVector::from_element(1, 1.0);
        return NormRatioMin {
            value: ratio(&z),
            argmin: basis * z,
            exact: true,
        };
    }
    if binomial(fb.nrows(), d - 1) <= ARRANGEMENT_LIMIT {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for s in Combinations::new(fb.nrows(), d - 1) {
            let nsp = null_space(&select_rows(&fb, &s), 1e-10);
            if nsp.ncols() != 1 {
                continue;
            }
            let z = nsp.column(0).into_owned();
            let r = ratio(&z);
            if best.as_ref().is_none_or(|b| r < b.0) {
                best = Some((r, z));
            }
        }
        if let Some((value, z)) = best {
            return NormRatioMin {
                value,
                argmin: basis * z,
                exact: true,
            };
        }
    }
    let (value, z) = l1_local_min(&fb, seed);
    NormRatioMin {
        value,
        argmin: basis * z,
        exact: false,
    }
}

/// Null vector of the rows `s` of `g`, if they have corank one.
fn vertex_of(g: &DMatrix<f64>, s: &[usize]) -> Option<DVector<f64>> {
    let nsp = null_space(&select_rows(g, s), 1e-10);
    (nsp.ncols() == 1).then(|| nsp.column(0).into_owned())
}

/// Reweighted least squares from several starts, each finished by a walk over
/// neighbouring vertices of the arrangement `{(G z)_y = 0}`.
fn l1_local_min(g: &DMatrix<f64>, seed: u64) -> (f64, DVector<f64>) {
    let (m, d) = g.shape();
    let l1 = |z: &DVector<f64>| (g * z).iter().map(|x| x.abs()).sum::<f64>() / z.norm();
    let row_norm: Vec<f64> = (0..m).map(|i| g.row(i).norm()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let mut starts: Vec<DVector<f64>> = Vec::new();
    let eig = (g.transpose() * g).symmetric_eigen();
    let imin = eig.eigenvalues.imin();
    starts.push(eig.eigenvectors.column(imin).into_owned());
    for _ in 0..(2 * d).min(24) {
        starts.push(DVector::from_fn(d, |_, _| rng.sample::<f64, _>(normal)));
    }
    let mut best = (f64::INFINITY, DVector::zeros(d));
    for s in starts {
        let mut z = &s / s.norm();
        for _ in 0..200 {
            let r = g * &z;
            let scale = r.amax().max(1e-300);
            let w: Vec<f64> = r.iter().map(|x| 1.0 / x.abs().max(1e-10 * scale)).collect();
            let mut h = DMatrix::zeros(d, d);
            for y in 0..m {
                let gy = g.row(y);
                h += gy.transpose() * gy * w[y];
            }
            let e = h.symmetric_eigen();
            let mut zn = e.eigenvectors.column(e.eigenvalues.imin()).into_owned();
            if zn.dot(&z) < 0.0 {
                zn = -zn;
            }
            let moved = (&zn - &z).norm();
            z = zn;
            if moved < 1e-13 {
                break;
            }
        }
        let r = g * &z;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| (r[a].abs() / row_norm[a]).total_cmp(&(r[b].abs() / row_norm[b])));
        let mut zero: Vec<usize> = Vec::new();
        for &y in &order {
            let mut t = zero.clone();
            t.push(y);
            if crate::linalg::rank(&select_rows(g, &t), 1e-10) == t.len() {
                zero = t;
            }
            if zero.len() + 1 == d {
                break;
            }
        }
        let mut cur = (l1(&z), z.clone());
        if let Some(v) = vertex_of(g, &zero) {
            let val = l1(&v);
            if val < cur.0 {
                cur = (val, v);
            }
            let pool: Vec<usize> = order.iter().cloned().filter(|y| !zero.contains(y)).take(2 * d + 4).collect();
            let mut improved = true;
            while improved {
                improved = false;
                'swap: for i in 0..zero.len() {
                    for &j in &pool {
                        if zero.contains(&j) {
                            continue;
                        }
                        let mut t = zero.clone();
                        t[i] = j;
                        if let Some(v) = vertex_of(g, &t) {
                            let val = l1(&v);
                            if val < cur.0 - 1e-15 * cur.0.max(1.0) {
                                cur = (val, v);
                                zero = t;
                                improved = true;
                                break 'swap;
                            }
                        }
                    }
                }
            }
        }
        if cur.0 < best.0 {
            best = (cur.0, &cur.1 / cur.1.norm());
        }
    }
    best
}

/// Multi-start coordinate-rotation descent of a 0-homogeneous function on `S^{d-1}`.
pub fn sphere_local_min(d: usize, obj: &dyn Fn(&DVector<f64>) -> f64, seed: u64) -> (f64, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let mut starts: Vec<DVector<f64>> = Vec::new();
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        starts.push(e);
    }
    for _ in 0..(4 * d + 8).min(32) {
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(normal));
        starts.push(z);
    }
    let mut best = (f64::INFINITY, DVector::zeros(d));
    for s in starts {
        let mut z = &s / s.norm();
        let mut f = obj(&z);
        let mut step = 0.5;
        let mut sweeps = 0;
        while step > 1e-13 && sweeps < 4000 {
            sweeps += 1;
            let mut improved = false;
            for i in 0..d {
                for sign in [1.0, -1.0] {
                    let mut c = z.clone();
                    c[i] += sign * step;
                    let c = &c / c.norm();
                    let fc = obj(&c);
                    if fc < f - 1e-15 * f.abs() {
                        z = c;
                        f = fc;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if f < best.0 {
            best = (f, z);
        }
    }
    best
}
