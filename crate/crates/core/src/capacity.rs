//! Constrained channel capacity, the capacity-achieving affine set and the
//! optimal input set `Pi = Lambda ∩ A`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AffineSubspace, Polyhedron, Subspace};
use crate::linalg::{dot_extended, null_space, pinv, RANK_TOL};
use crate::model::InformationModel;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the Frank-Wolfe duality gap is below this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iterations: 200_000,
        }
    }
}

/// Output of [`solve_capacity`]. Vectors live on the support coordinates unless noted.
#[derive(Clone, Debug)]
pub struct CapacitySolution<M: InformationModel> {
    /// The model restricted to the support letters.
    pub model: M,
    /// Support letters `X_Λ` as indices into the original alphabet.
    pub support: Vec<usize>,
    pub full_inputs: usize,
    /// `Λ` restricted to the support coordinates.
    pub constraint: Polyhedron,
    pub capacity: f64,
    pub maximizer: DVector<f64>,
    pub center: M::Output,
    /// `D(W(x) || center)` on the support.
    pub gradient: DVector<f64>,
    /// Frank-Wolfe duality gap at the maximizer; an upper bound on `C - I(maximizer)`.
    pub duality_gap: f64,
    pub iterations: usize,
    pub caid_affine: AffineSubspace,
    pub optimal_set: Polyhedron,
    pub optimal_vertices: Vec<DVector<f64>>,
}

impl<M: InformationModel> CapacitySolution<M> {
    /// Embed a support-coordinate vector into the full input alphabet.
    pub fn expand(&self, v: &DVector<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.full_inputs];
        for (k, &x) in self.support.iter().enumerate() {
            out[x] = v[k];
        }
        out
    }

    /// Inverse of [`expand`](Self::expand); fails if `p` charges letters outside the support.
    pub fn reduce(&self, p: &[f64]) -> Result<DVector<f64>> {
        if p.len() != self.full_inputs {
            return Err(Error::DimensionMismatch {
                expected: self.full_inputs,
                found: p.len(),
            });
        }
        let off: f64 = (0..p.len())
            .filter(|x| !self.support.contains(x))
            .map(|x| p[x].abs())
            .sum();
        if off > 1e-12 {
            return Err(Error::InvalidInput("point charges letters outside the support".into()));
        }
        Ok(DVector::from_iterator(self.support.len(), self.support.iter().map(|&x| p[x])))
    }

    pub fn tangent_of_affine(&self) -> &Subspace {
        &self.caid_affine.tangent
    }

    /// `ker_d = {v : v^T D(W||q) = 0}`.
    pub fn gradient_kernel(&self) -> Subspace {
        gradient_kernel(&self.gradient)
    }

    /// `ker W = {v : q_v = 0}` on the support.
    pub fn channel_kernel(&self) -> Subspace {
        channel_kernel(&self.model)
    }

    pub fn information(&self, p: &DVector<f64>) -> f64 {
        self.model.mutual_information(p.as_slice())
    }

    /// Distance to `Pi` and the projection onto it.
    pub fn project_to_optimal(&self, p: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let pr = self.optimal_set.project(p)?;
        Ok((pr.distance, pr.point))
    }
}

pub fn channel_kernel<M: InformationModel>(model: &M) -> Subspace {
    Subspace::kernel(&model.linear_map())
}

pub fn gradient_kernel(g: &DVector<f64>) -> Subspace {
    Subspace::kernel(&DMatrix::from_row_slice(1, g.len(), g.as_slice()))
}

/// Letters that some point of `Λ ∩ simplex` charges.
pub fn support_set(lambda: &Polyhedron) -> Result<Vec<usize>> {
    let s = lambda.intersect(&Polyhedron::simplex(lambda.dim()))?;
    s.support(1e-12)
}

struct Iterate {
    vertices: Vec<DVector<f64>>,
    weights: Vec<f64>,
    p: DVector<f64>,
}

impl Iterate {
    fn recompute(&mut self) {
        let n = self.p.len();
        let mut p = DVector::zeros(n);
        for (v, w) in self.vertices.iter().zip(&self.weights) {
            if *w > 0.0 {
                p += v * *w;
            }
        }
        self.p = p;
    }
}

/// Derivative of `t -> I(p + t d)` for `sum d = 0`.
fn line_derivative<M: InformationModel>(
    model: &M,
    lin: f64,
    qp: &M::Output,
    qd: &M::Output,
    t: f64,
    combine: &dyn Fn(&M::Output, &M::Output, f64) -> M::Output,
) -> f64 {
    let qt = combine(qp, qd, t);
    lin - model.cross_log(qd, &qt)
}

fn exact_line_search<M: InformationModel>(model: &M, p: &DVector<f64>, d: &DVector<f64>, tmax: f64) -> f64 {
    let lin = model.weighted_negentropy(d.as_slice());
    let qd = model.output(d.as_slice());
    let qp = model.output(p.as_slice());
    let combine = |_: &M::Output, _: &M::Output, t: f64| model.output((p + d * t).as_slice());
    let deriv = |t: f64| line_derivative(model, lin, &qp, &qd, t, &combine);
    let dmax = deriv(tmax);
    if !(dmax < 0.0) {
        return tmax;
    }
    let (mut lo, mut hi) = (0.0, tmax);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if deriv(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn fw_gap<M: InformationModel>(model: &M, it: &Iterate) -> (f64, usize, DVector<f64>) {
    let q = model.output(it.p.as_slice());
    let g = DVector::from_vec(model.divergences(&q));
    let pg = dot_extended(it.p.as_slice(), g.as_slice());
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, v) in it.vertices.iter().enumerate() {
        let s = dot_extended(v.as_slice(), g.as_slice());
        if s > best.0 {
            best = (s, k);
        }
    }
    (best.0 - pg, best.1, g)
}

/// Newton iterations on the weights of the active vertices.
fn newton_polish<M: InformationModel>(model: &M, it: &mut Iterate) {
    for _ in 0..40 {
        let act: Vec<usize> = (0..it.weights.len()).filter(|&k| it.weights[k] > 0.0).collect();
        let k = act.len();
        if k < 2 {
            return;
        }
        let q = model.output(it.p.as_slice());
        let g = model.divergences(&q);
        if g.iter().zip(it.p.iter()).any(|(gx, px)| *px > 0.0 && !gx.is_finite()) {
            return;
        }
        let h = model.curvature(&q);
        if h.iter().any(|x| !x.is_finite()) {
            return;
        }
        let n = it.p.len();
        let mut v = DMatrix::zeros(n, k);
        for (j, &a) in act.iter().enumerate() {
            v.set_column(j, &it.vertices[a]);
        }
        let gv: Vec<f64> = (0..k)
            .map(|j| dot_extended(v.column(j).as_slice(), &g))
            .collect();
        let gv = DVector::from_vec(gv);
        let hv = v.transpose() * &h * &v;
        let z = null_space(&DMatrix::from_element(1, k, 1.0), RANK_TOL);
        let red = z.transpose() * &hv * &z;
        let step = &z * (pinv(&red, 1e-12) * (z.transpose() * &gv));
        if step.amax() < 1e-16 {
            return;
        }
        let mut t: f64 = 1.0;
        for (j, &a) in act.iter().enumerate() {
            if step[j] < 0.0 {
                t = t.min(it.weights[a] / -step[j]);
            }
        }
        let before = model.mutual_information(it.p.as_slice());
        let old = it.weights.clone();
        let mut accepted = false;
        for _ in 0..30 {
            for (j, &a) in act.iter().enumerate() {
                let w = old[a] + t * step[j];
                it.weights[a] = if w <= 1e-15 { 0.0 } else { w };
            }
            let s: f64 = it.weights.iter().sum();
            it.weights.iter_mut().for_each(|w| *w /= s);
            it.recompute();
            if model.mutual_information(it.p.as_slice()) >= before - 1e-15 {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            it.weights = old;
            it.recompute();
            return;
        }
        if t * step.amax() < 1e-15 {
            return;
        }
    }
}

/// Maximize `I(P; W)` over `P ∈ Λ ∩ simplex` by Frank-Wolfe with away steps.
pub fn solve_capacity<M: InformationModel>(
    model: &M,
    lambda: &Polyhedron,
    opts: &SolverOptions,
) -> Result<CapacitySolution<M>> {
    let n_full = model.input_count();
    if lambda.dim() != n_full {
        return Err(Error::DimensionMismatch {
            expected: n_full,
            found: lambda.dim(),
        });
    }
    let lam = lambda.intersect(&Polyhedron::simplex(n_full))?;
    let verts_full = lam.vertices()?;
    if verts_full.is_empty() {
        return Err(Error::EmptyConstraintSet);
    }
    let support: Vec<usize> = (0..n_full)
        .filter(|&j| verts_full.iter().any(|v| v[j] > 1e-12))
        .collect();
    let reduced_model = model.restrict_inputs(&support);
    let constraint = lam.restrict_coordinates(&support)?;
    let n = support.len();
    let mut vertices: Vec<DVector<f64>> = Vec::new();
    for v in &verts_full {
        let r = DVector::from_iterator(n, support.iter().map(|&x| v[x]));
        if !vertices.iter().any(|u| (u - &r).amax() < 1e-12) {
            vertices.push(r);
        }
    }
    let k = vertices.len();
    let mut it = Iterate {
        weights: vec![1.0 / k as f64; k],
        vertices,
        p: DVector::zeros(n),
    };
    it.recompute();
    let model = reduced_model;
    let mut iterations = 0;
    let mut gap;
    let mut polished_at_gap = f64::INFINITY;
    loop {
        let (g_fw, s, g) = fw_gap(&model, &it);
        gap = g_fw;
        if gap <= opts.tol && polished_at_gap <= opts.tol * 1e3 {
            break;
        }
        if gap <= 1e-6 && gap < 0.1 * polished_at_gap {
            polished_at_gap = gap;
            newton_polish(&model, &mut it);
            continue;
        }
        if gap <= opts.tol {
            polished_at_gap = gap;
            newton_polish(&model, &mut it);
            let (g2, _, _) = fw_gap(&model, &it);
            gap = g2;
            if gap <= opts.tol {
                break;
            }
            continue;
        }
        iterations += 1;
        if iterations > opts.max_iterations {
            return Err(Error::NonConvergence {
                what: "capacity solver",
                iterations,
                residual: gap,
            });
        }
        let pg = dot_extended(it.p.as_slice(), g.as_slice());
        let mut away = (f64::INFINITY, usize::MAX);
        for (kk, v) in it.vertices.iter().enumerate() {
            if it.weights[kk] > 0.0 {
                let val = dot_extended(v.as_slice(), g.as_slice());
                if val < away.0 {
                    away = (val, kk);
                }
            }
        }
        let away_gap = pg - away.0;
        if gap >= away_gap || away.1 == usize::MAX {
            let d = &it.vertices[s] - &it.p;
            let t = exact_line_search(&model, &it.p, &d, 1.0);
            for w in it.weights.iter_mut() {
                *w *= 1.0 - t;
            }
            it.weights[s] += t;
        } else {
            let a = away.1;
            let wa = it.weights[a];
            let tmax = if wa >= 1.0 { 1e6 } else { wa / (1.0 - wa) };
            let d = &it.p - &it.vertices[a];
            let t = exact_line_search(&model, &it.p, &d, tmax);
            for w in it.weights.iter_mut() {
                *w *= 1.0 + t;
            }
            it.weights[a] -= t;
            if t >= tmax * (1.0 - 1e-12) || it.weights[a] < 1e-15 {
                it.weights[a] = 0.0;
            }
        }
        for w in it.weights.iter_mut() {
            if *w < 1e-17 {
                *w = 0.0;
            }
        }
        let s: f64 = it.weights.iter().sum();
        it.weights.iter_mut().for_each(|w| *w /= s);
        it.recompute();
    }
    let p = it.p.clone();
    let center = model.output(p.as_slice());
    let gradient = DVector::from_vec(model.divergences(&center));
    let capacity = model.mutual_information(p.as_slice());
    let (caid_affine, optimal_set) = optimal_sets(&model, &constraint, &p, &gradient)?;
    let mut optimal_vertices = optimal_set.vertices()?;
    if optimal_vertices.is_empty() {
        optimal_vertices.push(p.clone());
    }
    log::debug!("capacity {capacity} gap {gap:e} after {iterations} iterations");
    Ok(CapacitySolution {
        model,
        support,
        full_inputs: n_full,
        constraint,
        capacity,
        maximizer: p,
        center,
        gradient,
        duality_gap: gap,
        iterations,
        caid_affine,
        optimal_set,
        optimal_vertices,
    })
}

/// `A = {V : V^T g = C, q_V = q}` through `p`, and `Π = Λ ∩ A`.
fn optimal_sets<M: InformationModel>(
    model: &M,
    constraint: &Polyhedron,
    p: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<(AffineSubspace, Polyhedron)> {
    let n = p.len();
    let map = model.linear_map();
    let mut stacked = DMatrix::zeros(1 + map.nrows(), n);
    stacked.set_row(0, &g.transpose());
    stacked.rows_mut(1, map.nrows()).copy_from(&map);
    let tangent = Subspace::kernel(&stacked);
    let normal = tangent.complement();
    let r = normal.basis().transpose();
    let rhs = &r * p;
    let affine = AffineSubspace {
        point: p.clone(),
        tangent,
    };
    let pi = constraint.with_equalities(&r, &rhs)?;
    Ok((affine, pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{binary_entropy, Channel};

    fn solve(rows: Vec<Vec<f64>>) -> CapacitySolution<Channel> {
        let w = Channel::new(rows).unwrap();
        let n = w.inputs();
        solve_capacity(&w, &Polyhedron::simplex(n), &SolverOptions::default()).unwrap()
    }

    #[test]
    fn identity_channel() {
        let s = solve(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert!((s.capacity - 3f64.ln()).abs() < 1e-12);
        assert_eq!(s.optimal_vertices.len(), 1);
        assert!(s.duality_gap <= 1e-10);
    }

    #[test]
    fn bsc_capacity() {
        let p = 0.11;
        let s = solve(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]);
        assert!((s.capacity - (2f64.ln() - binary_entropy(p))).abs() < 1e-12);
        assert!((s.maximizer[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn duplicated_rows_give_segment() {
        let s = solve(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        assert!((s.capacity - 2f64.ln()).abs() < 1e-12);
        assert_eq!(s.optimal_vertices.len(), 2);
        assert_eq!(s.tangent_of_affine().dim(), 1);
    }

    #[test]
    fn useless_letter_is_dropped_from_support_only_if_forced() {
        let w = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let lam = Polyhedron::simplex(3)
            .with_equalities(&DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]), &DVector::from_vec(vec![0.0]))
            .unwrap();
        let s = solve_capacity(&w, &lam, &SolverOptions::default()).unwrap();
        assert_eq!(s.support, vec![0, 1]);
        assert_eq!(s.expand(&s.maximizer).len(), 3);
    }

    #[test]
    fn support_of_face() {
        let lam = Polyhedron::simplex(3)
            .with_inequalities(&DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]), &DVector::from_vec(vec![0.0]))
            .unwrap();
        assert_eq!(support_set(&lam).unwrap(), vec![0, 2]);
    }
}
