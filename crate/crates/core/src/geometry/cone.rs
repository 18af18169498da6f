//! Finitely generated convex cones in halfspace and generator form.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use super::qp::{least_distance, nnls};
use super::subspace::Subspace;
use crate::error::{Error, Result};
use crate::linalg::{binomial, null_space, select_rows, vstack, Combinations, RANK_TOL};

/// Relative membership tolerance.
pub const CONE_TOL: f64 = 1e-9;
/// Upper limit on candidate row subsets in ray enumeration.
pub const RAY_ENUMERATION_LIMIT: f64 = 4e6;

/// `{v : A v <= 0, E v = 0}`.
#[derive(Clone, Debug)]
pub struct HalfspaceForm {
    pub inequalities: DMatrix<f64>,
    pub equalities: DMatrix<f64>,
}

/// `cone(rays) + span(lineality)`; lineality columns are orthonormal.
#[derive(Clone, Debug)]
pub struct GeneratorForm {
    pub rays: Vec<DVector<f64>>,
    pub lineality: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvexCone {
    dim: usize,
    h: OnceLock<HalfspaceForm>,
    g: OnceLock<GeneratorForm>,
    faces: OnceLock<Arc<Vec<DMatrix<f64>>>>,
}

impl HalfspaceForm {
    fn normalized(a: DMatrix<f64>, e: DMatrix<f64>, dim: usize) -> Self {
        let mut rows: Vec<DVector<f64>> = Vec::new();
        for i in 0..a.nrows() {
            let r = a.row(i).transpose();
            let nr = r.norm();
            if nr < 1e-13 {
                continue;
            }
            let r = r / nr;
            if !rows.iter().any(|s| (s - &r).amax() < 1e-12) {
                rows.push(r);
            }
        }
        let eq = if e.nrows() == 0 {
            DMatrix::zeros(0, dim)
        } else {
            Subspace::span(&e.transpose()).basis().transpose()
        };
        HalfspaceForm {
            inequalities: crate::linalg::rows(dim, &rows),
            equalities: eq,
        }
    }
}

impl GeneratorForm {
    fn normalized(rays: Vec<DVector<f64>>, lineality: DMatrix<f64>, dim: usize) -> Self {
        let lin = if lineality.ncols() == 0 {
            DMatrix::zeros(dim, 0)
        } else {
            Subspace::span(&lineality).basis().clone()
        };
        let mut out: Vec<DVector<f64>> = Vec::new();
        for r in rays {
            let r = &r - &lin * (lin.transpose() * &r);
            let nr = r.norm();
            if nr < 1e-13 {
                continue;
            }
            let r = r / nr;
            if !out.iter().any(|s| (s - &r).amax() < 1e-10) {
                out.push(r);
            }
        }
        GeneratorForm { rays: out, lineality: lin }
    }
}

impl ConvexCone {
    pub fn from_halfspaces(a: DMatrix<f64>, e: DMatrix<f64>) -> Self {
        let dim = a.ncols().max(e.ncols());
        let c = ConvexCone::empty(dim);
        let _ = c.h.set(HalfspaceForm::normalized(a, e, dim));
        c
    }

    pub fn from_generators(dim: usize, rays: Vec<DVector<f64>>, lineality: DMatrix<f64>) -> Self {
        let c = ConvexCone::empty(dim);
        let lin = if lineality.nrows() == 0 {
            DMatrix::zeros(dim, 0)
        } else {
            lineality
        };
        let _ = c.g.set(GeneratorForm::normalized(rays, lin, dim));
        c
    }

    pub fn from_subspace(s: &Subspace) -> Self {
        ConvexCone::from_generators(s.ambient(), Vec::new(), s.basis().clone())
    }

    pub fn whole(n: usize) -> Self {
        ConvexCone::from_subspace(&Subspace::whole(n))
    }

    pub fn zero(n: usize) -> Self {
        ConvexCone::from_subspace(&Subspace::zero(n))
    }

    fn empty(dim: usize) -> Self {
        ConvexCone {
            dim,
            h: OnceLock::new(),
            g: OnceLock::new(),
            faces: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> Result<&HalfspaceForm> {
        if let Some(h) = self.h.get() {
            return Ok(h);
        }
        let g = self.g.get().expect("cone holds at least one form");
        // C = (C°)° and C° = {u : R^T u <= 0, L^T u = 0}.
        let polar = HalfspaceForm::normalized(
            crate::linalg::rows(self.dim, &g.rays),
            g.lineality.transpose(),
            self.dim,
        );
        let pg = enumerate_generators(&polar)?;
        let h = HalfspaceForm::normalized(
            crate::linalg::rows(self.dim, &pg.rays),
            pg.lineality.transpose(),
            self.dim,
        );
        let _ = self.h.set(h);
        Ok(self.h.get().unwrap())
    }

    pub fn generators(&self) -> Result<&GeneratorForm> {
        if let Some(g) = self.g.get() {
            return Ok(g);
        }
        let h = self.h.get().expect("cone holds at least one form");
        let g = enumerate_generators(h)?;
        let _ = self.g.set(g);
        Ok(self.g.get().unwrap())
    }

    /// Swaps the two representations.
    pub fn polar(&self) -> ConvexCone {
        let c = ConvexCone::empty(self.dim);
        if let Some(h) = self.h.get() {
            let rays = (0..h.inequalities.nrows())
                .map(|i| h.inequalities.row(i).transpose())
                .collect();
            let _ = c.g.set(GeneratorForm::normalized(rays, h.equalities.transpose(), self.dim));
        }
        if let Some(g) = self.g.get() {
            let _ = c.h.set(HalfspaceForm::normalized(
                crate::linalg::rows(self.dim, &g.rays),
                g.lineality.transpose(),
                self.dim,
            ));
        }
        c
    }

    pub fn intersect(&self, other: &ConvexCone) -> Result<ConvexCone> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let a = self.halfspaces()?;
        let b = other.halfspaces()?;
        Ok(ConvexCone::from_halfspaces(
            vstack(&a.inequalities, &b.inequalities),
            vstack(&a.equalities, &b.equalities),
        ))
    }

    /// Intersection with a linear subspace.
    pub fn restrict(&self, s: &Subspace) -> Result<ConvexCone> {
        self.intersect(&ConvexCone::from_subspace(s))
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        let scale = v.norm().max(1e-300);
        if let Some(h) = self.h.get() {
            return (&h.inequalities * v).iter().all(|s| *s <= tol * scale)
                && (&h.equalities * v).iter().all(|s| s.abs() <= tol * scale);
        }
        match self.project(v) {
            Ok(p) => (v - p).norm() <= tol * scale,
            Err(_) => false,
        }
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if let (None, Some(g)) = (self.h.get(), self.g.get()) {
            let lin = &g.lineality;
            let w = v - lin * (lin.transpose() * v);
            if g.rays.is_empty() {
                return Ok(v - w);
            }
            let r = crate::linalg::columns(self.dim, &g.rays);
            let r = &r - lin * (lin.transpose() * &r);
            let lam = nnls(&r, &w);
            return Ok(lin * (lin.transpose() * v) + r * lam);
        }
        let h = self.halfspaces()?;
        let n = null_space(&h.equalities, RANK_TOL);
        let an = &h.inequalities * &n;
        let y0 = n.transpose() * v;
        let g = -&an;
        let hh = &an * &y0;
        let sol = least_distance(&g, &hh)
            .ok_or(Error::NonConvergence {
                what: "cone projection",
                iterations: 0,
                residual: f64::NAN,
            })?;
        Ok(&n * (y0 + sol.z))
    }

    /// `(v_bar, v_perp)` with `v_bar` in the cone, `v_perp` in its polar, orthogonal.
    pub fn moreau(&self, v: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let vb = self.project(v)?;
        let vp = v - &vb;
        Ok((vb, vp))
    }

    pub fn is_trivial(&self) -> Result<bool> {
        let g = self.generators()?;
        Ok(g.rays.is_empty() && g.lineality.ncols() == 0)
    }

    /// True when the cone equals its lineality space.
    pub fn is_subspace(&self) -> Result<bool> {
        Ok(self.generators()?.rays.is_empty())
    }

    pub fn lineality(&self) -> Result<Subspace> {
        Ok(Subspace::from_orthonormal(self.generators()?.lineality.clone()))
    }

    /// Linear subspaces spanned by the faces of the cone, one per distinct face.
    pub fn face_subspaces(&self) -> Result<Arc<Vec<DMatrix<f64>>>> {
        if let Some(f) = self.faces.get() {
            return Ok(f.clone());
        }
        let f = Arc::new(super::sphere::enumerate_faces(self.halfspaces()?)?);
        let _ = self.faces.set(f.clone());
        Ok(f)
    }
}

/// Extreme rays and lineality space of a halfspace-form cone.
pub fn enumerate_generators(h: &HalfspaceForm) -> Result<GeneratorForm> {
    let all = vstack(&h.inequalities, &h.equalities);
    let lin = null_space(&all, RANK_TOL);
    let pointed = null_space(&vstack(&h.equalities, &lin.transpose()), RANK_TOL);
    let d = pointed.ncols();
    if d == 0 {
        return Ok(GeneratorForm {
            rays: Vec::new(),
            lineality: lin,
        });
    }
    let ab = &h.inequalities * &pointed;
    let keep: Vec<usize> = (0..ab.nrows()).filter(|&i| ab.row(i).norm() > 1e-12).collect();
    let ab = select_rows(&ab, &keep);
    let mut ab_n = ab.clone();
    for i in 0..ab_n.nrows() {
        let nr = ab.row(i).norm();
        ab_n.row_mut(i).scale_mut(1.0 / nr);
    }
    let k = ab_n.nrows();
    let inside = |y: &DVector<f64>| (&ab_n * y).iter().all(|s| *s <= CONE_TOL);
    let mut rays: Vec<DVector<f64>> = Vec::new();
    let mut push = |y: DVector<f64>| {
        let r = &pointed * y;
        let r = &r / r.norm();
        if !rays.iter().any(|s| (s - &r).amax() < 1e-9) {
            rays.push(r);
        }
    };
    if d == 1 {
        for s in [1.0, -1.0] {
            let y = DVector::from_element(1, s);
            if inside(&y) {
                push(y);
            }
        }
    } else {
        if binomial(k, d - 1) > RAY_ENUMERATION_LIMIT {
            return Err(Error::TooLarge(format!("ray enumeration over {k} rows in dimension {d}")));
        }
        for s in Combinations::new(k, d - 1) {
            let m = select_rows(&ab_n, &s);
            let nsp = null_space(&m, 1e-9);
            if nsp.ncols() != 1 {
                continue;
            }
            let y = nsp.column(0).into_owned();
            for sign in [1.0, -1.0] {
                let ys = &y * sign;
                if inside(&ys) {
                    push(ys);
                }
            }
        }
    }
    Ok(GeneratorForm { rays, lineality: lin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn orthant(n: usize) -> ConvexCone {
        ConvexCone::from_halfspaces(-DMatrix::identity(n, n), DMatrix::zeros(0, n))
    }

    #[test]
    fn orthant_rays() {
        let g = orthant(3).generators().unwrap().clone();
        assert_eq!(g.rays.len(), 3);
        assert_eq!(g.lineality.ncols(), 0);
    }

    #[test]
    fn polar_of_orthant_is_negative_orthant() {
        let p = orthant(2).polar();
        assert!(p.contains(&v(&[-1.0, -2.0]), 1e-12));
        assert!(!p.contains(&v(&[1.0, -2.0]), 1e-12));
        let pp = p.polar();
        assert!(pp.contains(&v(&[1.0, 2.0]), 1e-12));
    }

    #[test]
    fn generator_to_halfspace_round_trip() {
        let c = ConvexCone::from_generators(
            3,
            vec![v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, 1.0]), v(&[-1.0, 0.0, 1.0])],
            DMatrix::zeros(3, 0),
        );
        let h = c.halfspaces().unwrap();
        assert_eq!(h.inequalities.nrows(), 3);
        assert!(c.contains(&v(&[0.0, 0.2, 1.0]), 1e-12));
        assert!(!c.contains(&v(&[0.0, -0.2, 1.0]), 1e-12));
    }

    #[test]
    fn moreau_decomposition() {
        let c = orthant(3);
        let x = v(&[1.0, -2.0, 0.5]);
        let (b, p) = c.moreau(&x).unwrap();
        assert!((b.clone() - v(&[1.0, 0.0, 0.5])).amax() < 1e-14);
        assert!(b.dot(&p).abs() < 1e-14);
        assert!(c.polar().contains(&p, 1e-12));
    }

    #[test]
    fn half_plane_has_lineality() {
        let c = ConvexCone::from_halfspaces(DMatrix::from_row_slice(1, 2, &[0.0, 1.0]), DMatrix::zeros(0, 2));
        let g = c.generators().unwrap();
        assert_eq!(g.lineality.ncols(), 1);
        assert_eq!(g.rays.len(), 1);
        assert!(!c.is_subspace().unwrap());
    }

    #[test]
    fn trivial_cone() {
        let c = ConvexCone::from_halfspaces(
            DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
            DMatrix::zeros(0, 1),
        );
        assert!(c.is_trivial().unwrap());
        assert!(ConvexCone::zero(3).is_trivial().unwrap());
    }

    #[test]
    fn generator_projection_matches_halfspace_projection() {
        let g = ConvexCone::from_generators(2, vec![v(&[1.0, 0.0]), v(&[1.0, 1.0])], DMatrix::zeros(2, 0));
        let h = ConvexCone::from_halfspaces(g.halfspaces().unwrap().inequalities.clone(), DMatrix::zeros(0, 2));
        for x in [v(&[0.0, 1.0]), v(&[-1.0, -1.0]), v(&[2.0, 0.5]), v(&[0.0, -3.0])] {
            assert!((g.project(&x).unwrap() - h.project(&x).unwrap()).norm() < 1e-12);
        }
    }
}
