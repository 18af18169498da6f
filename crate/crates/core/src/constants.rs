//! Explicit decay constants around the optimal input set.
//!
//! Everything here runs on the support coordinates of a [`CapacitySolution`]
//! and only needs the [`InformationModel`] interface, so classical and
//! classical-quantum channels share one implementation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::capacity::CapacitySolution;
use crate::error::{Error, Result};
use crate::geometry::polyhedron::ACTIVE_TOL;
use crate::geometry::sphere::{
    enumerate_faces, max_linear, max_linear_multistart, max_quadratic, max_quadratic_multistart, sphere_local_min,
};
use crate::geometry::{angle_to_subspace, pushover_union, ConvexCone, Polyhedron, Subspace, UnionOfCones};
use crate::model::InformationModel;

/// Number of random starts used by the projected-gradient cross-checks.
pub const MULTISTART_STARTS: usize = 48;
/// Agreement threshold between an exact optimum and its multistart cross-check.
pub const ORACLE_AGREEMENT: f64 = 1e-6;

/// A computed optimum together with how it was obtained and an independent check.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Certified {
    pub value: f64,
    pub method: String,
    pub oracle_value: Option<f64>,
    pub oracle_agrees: bool,
}

impl Certified {
    fn new(value: f64, method: &str, oracle: Option<f64>, scale: f64) -> Self {
        let agrees = oracle.is_none_or(|o| (o - value).abs() <= ORACLE_AGREEMENT * scale.max(1.0));
        Certified {
            value,
            method: method.to_string(),
            oracle_value: oracle,
            oracle_agrees: agrees,
        }
    }
}

/// `Σ(x, x') = <W(x) - q, W(x') - q>` in the chi-square (or BKM) metric at the center.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherMatrix(pub DMatrix<f64>);

impl FisherMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `|v|_Σ^2`.
    pub fn norm_sq(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.0 * v))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let s = (&self.0 + self.0.transpose()) * 0.5;
        s.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.0.nrows()).map(|i| self.0.row(i).iter().cloned().collect()).collect()
    }
}

/// Fisher matrix of `model` at `center`.
pub fn fisher_matrix<M: InformationModel>(model: &M, center: &M::Output) -> FisherMatrix {
    FisherMatrix(model.curvature(center).add_scalar(-1.0))
}

/// Third-order coefficient `A` with the bounds that bracket it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ACoefficient {
    #[serde(with = "crate::serde_ext::float")]
    pub value: f64,
    #[serde(with = "crate::serde_ext::float")]
    pub cubed: f64,
    /// `sqrt(tr Σ)`.
    pub lower_bound: f64,
    /// Third-moment bound, classical channels only.
    #[serde(with = "crate::serde_ext::opt_float")]
    pub upper_bound: Option<f64>,
    /// Set when the value comes from an output truncation whose estimates keep growing.
    pub lower_bound_only: bool,
}

impl ACoefficient {
    pub fn is_usable(&self) -> bool {
        self.value.is_finite() && !self.lower_bound_only
    }
}

pub fn a_coefficient<M: InformationModel>(model: &M, center: &M::Output, fisher: &FisherMatrix) -> ACoefficient {
    let cubed = model.a_cubed(center);
    ACoefficient {
        value: cubed.cbrt(),
        cubed,
        lower_bound: fisher.trace().max(0.0).sqrt(),
        upper_bound: model.a_upper_bound(center),
        lower_bound_only: false,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Theorem1Constants {
    pub beta: Certified,
    /// `min |q_v|_1` over unit `v` in `ker_d ∩ N(A)`.
    pub min_output_norm: Certified,
    pub min_output_norm_exact: bool,
    pub gamma: f64,
    pub delta: f64,
    pub gradient_norm: f64,
    pub support_size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FaceConstants {
    pub base: Vec<f64>,
    pub outer_active: Vec<usize>,
    pub inner_active: Vec<usize>,
    /// Whether `D_P ∩ ker_d = {0}` at this face.
    pub kernel_cone_trivial: bool,
    pub phi: f64,
    pub delta: f64,
    /// `true` when the sharper `sin(phi) |g| / Γ₂` branch was used.
    pub improved: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Theorem2Constants {
    pub gamma1: Certified,
    /// Unit direction attaining `Γ₁` and the index of its member cone.
    pub gamma1_direction: Vec<f64>,
    pub gamma1_member: usize,
    pub gamma2: Option<Certified>,
    pub gamma2_direction: Option<Vec<f64>>,
    pub gamma2_member: Option<usize>,
    pub delta: Option<f64>,
    pub per_face: Vec<FaceConstants>,
    pub trace_sigma: f64,
    pub a_coeff: ACoefficient,
    /// Set when `A` is unusable and the quadratic-branch constants were withheld.
    pub partial: bool,
}

/// Tolerance under which `Γ₁` is treated as zero.
pub fn gamma1_zero_tol(g: &DVector<f64>) -> f64 {
    1e-9 * g.norm().max(1.0)
}

/// `D(Λ | Π)` for a solution, on support coordinates.
pub fn pushover_of<M: InformationModel>(sol: &CapacitySolution<M>) -> Result<UnionOfCones> {
    pushover_union(&sol.constraint, &sol.optimal_set)
}

fn ensure_nontrivial<M: InformationModel>(sol: &CapacitySolution<M>) -> Result<()> {
    let verts = sol.constraint.vertices()?;
    if verts.iter().all(|v| sol.optimal_set.contains(v, 1e-9)) {
        return Err(Error::Degenerate("every feasible input is optimal".into()));
    }
    Ok(())
}

pub fn theorem1_constants<M: InformationModel>(
    sol: &CapacitySolution<M>,
    union: &UnionOfCones,
    seed: u64,
) -> Result<Theorem1Constants> {
    ensure_nontrivial(sol)?;
    let t = sol.tangent_of_affine();
    let proj = t.projector();
    let mut beta = std::f64::consts::FRAC_PI_2;
    let mut beta_ms = std::f64::consts::FRAC_PI_2;
    for (k, m) in union.members.iter().enumerate() {
        if m.cone.is_trivial()? {
            continue;
        }
        beta = beta.min(angle_to_subspace(&m.cone, t)?);
        if t.dim() > 0 {
            if let Some(o) = max_quadratic_multistart(&m.cone, &proj, MULTISTART_STARTS, seed ^ k as u64)? {
                beta_ms = beta_ms.min(o.value.clamp(0.0, 1.0).sqrt().acos());
            }
        }
    }
    let kernel = theorem1_kernel(sol);
    if kernel.dim() == 0 {
        return Err(Error::Degenerate("ker_d ∩ N(A) is trivial".into()));
    }
    let r = sol.model.min_output_norm(kernel.basis(), seed);
    let basis = kernel.basis().clone();
    let obj = |z: &DVector<f64>| {
        let v = &basis * z;
        sol.model.norm1(&sol.model.output(v.as_slice())) / z.norm()
    };
    let (local, _) = sphere_local_min(basis.ncols(), &obj, seed.wrapping_add(1));
    let s2 = beta.sin().powi(2);
    let gamma = 0.5 * s2 * r.value * r.value;
    let gnorm = sol.gradient.norm();
    let n = sol.support.len() as f64;
    Ok(Theorem1Constants {
        beta: Certified::new(beta, "face enumeration", Some(beta_ms), 1.0),
        min_output_norm: Certified::new(
            r.value,
            if r.exact { "arrangement rays" } else { "coordinate descent" },
            Some(local),
            r.value,
        ),
        min_output_norm_exact: r.exact,
        gamma,
        delta: gnorm / (n + gamma / s2),
        gradient_norm: gnorm,
        support_size: sol.support.len(),
    })
}

/// Cone of `{v : A v <= 0, E v = 0}` as a polyhedron with zero right-hand side.
fn cone_polyhedron(c: &ConvexCone) -> Result<Polyhedron> {
    let h = c.halfspaces()?;
    let n = c.dim();
    let a = if h.inequalities.nrows() == 0 { DMatrix::zeros(0, n) } else { h.inequalities.clone() };
    let e = if h.equalities.nrows() == 0 { DMatrix::zeros(0, n) } else { h.equalities.clone() };
    Polyhedron::new(a.clone(), DVector::zeros(a.nrows()), e.clone(), DVector::zeros(e.nrows()))
}

/// Members of `D(D | W)` for a cone `D` and a subcone `W`, one per face of `W`.
pub fn cone_pushover_members(d: &ConvexCone, w: &ConvexCone) -> Result<Vec<ConvexCone>> {
    let n = d.dim();
    let dp = cone_polyhedron(d)?;
    let wp = cone_polyhedron(w)?;
    let wg = w.generators()?;
    let mut points = vec![DVector::zeros(n)];
    for span in enumerate_faces(w.halfspaces()?)? {
        let mut p = DVector::zeros(n);
        for r in &wg.rays {
            let inside = r - &span * (span.transpose() * r);
            if inside.norm() <= 1e-9 {
                p += r;
            }
        }
        points.push(p);
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for p in points {
        let da = dp.active_set(&p, ACTIVE_TOL);
        let wa = wp.active_set(&p, ACTIVE_TOL);
        if seen.insert((da.clone(), wa.clone())) {
            out.push(dp.tangent_cone_for(&da).intersect(&wp.normal_cone_for(&wa))?);
        }
    }
    Ok(out)
}

pub fn theorem2_constants<M: InformationModel>(
    sol: &CapacitySolution<M>,
    union: &UnionOfCones,
    fisher: &FisherMatrix,
    a: &ACoefficient,
    seed: u64,
) -> Result<Theorem2Constants> {
    ensure_nontrivial(sol)?;
    let g = &sol.gradient;
    let mut best: Option<(f64, DVector<f64>, usize)> = None;
    let mut best_ms = f64::NEG_INFINITY;
    for (k, m) in union.members.iter().enumerate() {
        if let Some(o) = max_linear(&m.cone, g)? {
            if (o.value.abs() > 0.0 || o.argmax.norm() > 0.0)
                && best.as_ref().is_none_or(|b| o.value > b.0) {
                    best = Some((o.value, o.argmax, k));
                }
        }
        if let Some(o) = max_linear_multistart(&m.cone, g, MULTISTART_STARTS, seed ^ k as u64)? {
            best_ms = best_ms.max(o.value);
        }
    }
    let (gmax, gdir, gmember) = best.ok_or_else(|| Error::Degenerate("no nonzero pushover direction".into()))?;
    let mut gamma1 = -gmax;
    if gamma1.abs() <= gamma1_zero_tol(g) {
        gamma1 = 0.0;
    }
    let oracle = if best_ms.is_finite() { Some((-best_ms).max(0.0)) } else { None };
    let gamma1_rec = Certified::new(gamma1, "face enumeration", oracle.map(|o| if o.abs() <= gamma1_zero_tol(g) { 0.0 } else { o }), 1.0);
    let trace_sigma = fisher.trace();
    let mut out = Theorem2Constants {
        gamma1: gamma1_rec,
        gamma1_direction: gdir.iter().cloned().collect(),
        gamma1_member: gmember,
        gamma2: None,
        gamma2_direction: None,
        gamma2_member: None,
        delta: None,
        per_face: Vec::new(),
        trace_sigma,
        a_coeff: a.clone(),
        partial: false,
    };
    if gamma1 > 0.0 {
        return Ok(out);
    }
    if !a.is_usable() || !fisher.is_finite() {
        out.partial = true;
        return Ok(out);
    }
    let kd = ConvexCone::from_subspace(&sol.gradient_kernel());
    let neg = -fisher.entries().clone();
    let mut kernel_cones = Vec::with_capacity(union.len());
    let mut g2: Option<(f64, DVector<f64>, usize)> = None;
    let mut g2_ms = f64::INFINITY;
    for (k, m) in union.members.iter().enumerate() {
        let wk = m.cone.intersect(&kd)?;
        if !wk.is_trivial()? {
            if let Some(o) = max_quadratic(&wk, &neg)? {
                let val = -o.value;
                if g2.as_ref().is_none_or(|b| val < b.0) {
                    g2 = Some((val, o.argmax, k));
                }
            }
            if let Some(o) = max_quadratic_multistart(&wk, &neg, MULTISTART_STARTS, seed ^ (k as u64) << 8)? {
                g2_ms = g2_ms.min(-o.value);
            }
        }
        kernel_cones.push(wk);
    }
    let (min_sq, dir, member) =
        g2.ok_or_else(|| Error::Degenerate("Γ₁ = 0 but D(Λ|Π) ∩ ker_d is trivial".into()))?;
    let gamma2 = 0.5 * min_sq;
    let gnorm = g.norm();
    let kspace = sol.gradient_kernel();
    let mut per_face = Vec::with_capacity(union.len());
    for (m, wk) in union.members.iter().zip(&kernel_cones) {
        if m.cone.is_trivial()? {
            continue;
        }
        let trivial = wk.is_trivial()?;
        let mut phi = std::f64::consts::FRAC_PI_2;
        for c in cone_pushover_members(&m.cone, wk)? {
            if !c.is_trivial()? {
                phi = phi.min(angle_to_subspace(&c, &kspace)?);
            }
        }
        let denom = if trivial { gamma2 } else { trace_sigma + gamma2 };
        per_face.push(FaceConstants {
            base: m.base.iter().cloned().collect(),
            outer_active: m.outer_active.clone(),
            inner_active: m.inner_active.clone(),
            kernel_cone_trivial: trivial,
            phi,
            delta: phi.sin() / denom * gnorm,
            improved: trivial,
        });
    }
    let delta = per_face.iter().map(|f| f.delta).fold(f64::INFINITY, f64::min);
    out.gamma2 = Some(Certified::new(
        gamma2,
        "face enumeration",
        if g2_ms.is_finite() { Some(0.5 * g2_ms) } else { None },
        gamma2,
    ));
    out.gamma2_direction = Some(dir.iter().cloned().collect());
    out.gamma2_member = Some(member);
    out.delta = Some(delta);
    out.per_face = per_face;
    Ok(out)
}

/// `(|D(q_P || q) - |P - P̄|_Σ^2 / 2|, A^3 |P - P̄|^3 / 2)`.
pub fn kld_taylor_check<M: InformationModel>(
    model: &M,
    center: &M::Output,
    fisher: &FisherMatrix,
    a_cubed: f64,
    p: &DVector<f64>,
    pbar: &DVector<f64>,
) -> Result<(f64, f64)> {
    let mismatch = model.norm1_diff(&model.output(pbar.as_slice()), center);
    if mismatch > 1e-9 {
        return Err(Error::InvalidInput(format!("P̄ does not induce the center (gap {mismatch:e})")));
    }
    let v = p - pbar;
    let d = model.relative_entropy(&model.output(p.as_slice()), center);
    let lhs = (d - 0.5 * fisher.norm_sq(&v)).abs();
    Ok((lhs, 0.5 * a_cubed * v.norm().powi(3)))
}

/// Orthonormal basis of `ker_d ∩ N(A)`.
pub fn theorem1_kernel<M: InformationModel>(sol: &CapacitySolution<M>) -> Subspace {
    sol.gradient_kernel().intersect(&sol.tangent_of_affine().complement())
}
