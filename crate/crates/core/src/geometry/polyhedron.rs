use nalgebra::{DMatrix, DVector};

use super::cone::ConvexCone;
use super::qp::least_distance;
use crate::error::{Error, Result};
use crate::linalg::{binomial, column_space, pinv, select_rows, Combinations, RANK_TOL};

/// Absolute tolerance for deciding that a constraint is active.
pub const ACTIVE_TOL: f64 = 1e-9;
/// Upper limit on the number of candidate bases inspected by vertex enumeration.
pub const VERTEX_ENUMERATION_LIMIT: f64 = 4e6;

/// `{x : A x <= b, E x = f}` with unit-norm inequality rows and orthonormal equality rows.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    dim: usize,
    a: DMatrix<f64>,
    b: DVector<f64>,
    e: DMatrix<f64>,
    f: DVector<f64>,
}

/// Nearest point of a polyhedron with its KKT data.
#[derive(Clone, Debug)]
pub struct Projection {
    pub point: DVector<f64>,
    pub distance: f64,
    pub active: Vec<usize>,
    /// One multiplier per inequality row; `p - point - A^T mult` lies in the equality row space.
    pub multipliers: DVector<f64>,
    pub kkt_residual: f64,
}

impl Polyhedron {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, e: DMatrix<f64>, f: DVector<f64>) -> Result<Self> {
        let dim = a.ncols().max(e.ncols());
        if a.nrows() != b.len() || e.nrows() != f.len() {
            return Err(Error::InvalidInput("constraint rows and right-hand sides differ in length".into()));
        }
        if (a.nrows() > 0 && a.ncols() != dim) || (e.nrows() > 0 && e.ncols() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.ncols().min(e.ncols()),
            });
        }
        if a.iter().chain(b.iter()).chain(e.iter()).chain(f.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite constraint data".into()));
        }
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..a.nrows() {
            let r = a.row(i).transpose();
            let nr = r.norm();
            if nr < 1e-14 {
                if b[i] < -ACTIVE_TOL {
                    return Err(Error::EmptyConstraintSet);
                }
                continue;
            }
            let r = r / nr;
            let bi = b[i] / nr;
            // Parallel duplicates keep the tighter right-hand side.
            if let Some(k) = rows.iter().position(|q: &DVector<f64>| (q - &r).amax() < 1e-12) {
                if bi < rhs[k] {
                    rhs[k] = bi;
                }
                continue;
            }
            rows.push(r);
            rhs.push(bi);
        }
        let a = crate::linalg::rows(dim, &rows);
        let b = DVector::from_vec(rhs);
        let (e, f) = orthonormal_equalities(&e, &f, dim)?;
        Ok(Polyhedron { dim, a, b, e, f })
    }

    /// Probability simplex in `R^n`.
    pub fn simplex(n: usize) -> Self {
        let a = -DMatrix::identity(n, n);
        let b = DVector::zeros(n);
        let e = DMatrix::from_element(1, n, 1.0);
        let f = DVector::from_element(1, 1.0);
        Polyhedron::new(a, b, e, f).expect("simplex is well formed")
    }

    pub fn from_rows(
        dim: usize,
        ineq: &[(Vec<f64>, f64)],
        eq: &[(Vec<f64>, f64)],
    ) -> Result<Self> {
        let mk = |rows: &[(Vec<f64>, f64)]| -> Result<(DMatrix<f64>, DVector<f64>)> {
            let mut m = DMatrix::zeros(rows.len(), dim);
            for (i, (r, _)) in rows.iter().enumerate() {
                if r.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: r.len(),
                    });
                }
                m.set_row(i, &DVector::from_column_slice(r).transpose());
            }
            Ok((m, DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1))))
        };
        let (a, b) = mk(ineq)?;
        let (e, f) = mk(eq)?;
        Polyhedron::new(a, b, e, f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> (&DMatrix<f64>, &DVector<f64>) {
        (&self.a, &self.b)
    }

    pub fn equalities(&self) -> (&DMatrix<f64>, &DVector<f64>) {
        (&self.e, &self.f)
    }

    pub fn inequality_count(&self) -> usize {
        self.a.nrows()
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Polyhedron::new(
            crate::linalg::vstack(&self.a, &other.a),
            stack(&self.b, &other.b),
            crate::linalg::vstack(&self.e, &other.e),
            stack(&self.f, &other.f),
        )
    }

    pub fn with_equalities(&self, e: &DMatrix<f64>, f: &DVector<f64>) -> Result<Polyhedron> {
        Polyhedron::new(
            self.a.clone(),
            self.b.clone(),
            crate::linalg::vstack(&self.e, e),
            stack(&self.f, f),
        )
    }

    pub fn with_inequalities(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Polyhedron> {
        Polyhedron::new(
            crate::linalg::vstack(&self.a, a),
            stack(&self.b, b),
            self.e.clone(),
            self.f.clone(),
        )
    }

    /// Substitute zero for every coordinate outside `keep`.
    pub fn restrict_coordinates(&self, keep: &[usize]) -> Result<Polyhedron> {
        let cols = |m: &DMatrix<f64>| {
            let mut out = DMatrix::zeros(m.nrows(), keep.len());
            for (k, &j) in keep.iter().enumerate() {
                out.set_column(k, &m.column(j));
            }
            out
        };
        let mut e = cols(&self.e);
        if e.nrows() > 0 && keep.is_empty() {
            e = DMatrix::zeros(0, 0);
        }
        let mut p = Polyhedron::new(cols(&self.a), self.b.clone(), e, self.f.clone())?;
        p.dim = keep.len();
        Ok(p)
    }

    pub fn slack(&self, p: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.a * p
    }

    pub fn contains(&self, p: &DVector<f64>, tol: f64) -> bool {
        p.len() == self.dim
            && self.slack(p).iter().all(|s| *s >= -tol)
            && (&self.e * p - &self.f).iter().all(|r| r.abs() <= tol)
    }

    /// Indices of inequality rows active at `p`.
    pub fn active_set(&self, p: &DVector<f64>, tol: f64) -> Vec<usize> {
        let s = self.slack(p);
        (0..s.len()).filter(|&i| s[i].abs() <= tol).collect()
    }

    pub fn active_constraints(&self, p: &DVector<f64>) -> Result<Vec<usize>> {
        self.check_member(p)?;
        Ok(self.active_set(p, ACTIVE_TOL))
    }

    fn check_member(&self, p: &DVector<f64>) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        if !self.contains(p, 1e-7) {
            return Err(Error::InvalidInput("point lies outside the polyhedron".into()));
        }
        Ok(())
    }

    /// `T_p = {v : a_i v <= 0 (i active), E v = 0}`.
    pub fn tangent_cone(&self, p: &DVector<f64>) -> Result<ConvexCone> {
        self.check_member(p)?;
        Ok(self.tangent_cone_for(&self.active_set(p, ACTIVE_TOL)))
    }

    pub fn tangent_cone_for(&self, active: &[usize]) -> ConvexCone {
        ConvexCone::from_halfspaces(select_rows(&self.a, active), self.e.clone())
    }

    /// `N_p = cone{a_i : i active} + rowspace(E)`.
    pub fn normal_cone(&self, p: &DVector<f64>) -> Result<ConvexCone> {
        self.check_member(p)?;
        Ok(self.normal_cone_for(&self.active_set(p, ACTIVE_TOL)))
    }

    pub fn normal_cone_for(&self, active: &[usize]) -> ConvexCone {
        let rays = active.iter().map(|&i| self.a.row(i).transpose()).collect();
        ConvexCone::from_generators(self.dim, rays, self.e.transpose())
    }

    /// Largest `t >= 0` with `p + t d` feasible for the inequalities (`inf` if unbounded).
    pub fn max_step(&self, p: &DVector<f64>, d: &DVector<f64>) -> f64 {
        let ad = &self.a * d;
        let s = self.slack(p);
        let mut t = f64::INFINITY;
        for i in 0..ad.len() {
            if ad[i] > 1e-14 * d.norm() {
                t = t.min(s[i].max(0.0) / ad[i]);
            }
        }
        t
    }

    fn particular(&self) -> Result<DVector<f64>> {
        if self.e.nrows() == 0 {
            return Ok(DVector::zeros(self.dim));
        }
        let x0 = self.e.transpose() * &self.f;
        if (&self.e * &x0 - &self.f).amax() > 1e-9 {
            return Err(Error::EmptyConstraintSet);
        }
        Ok(x0)
    }

    fn affine_basis(&self) -> DMatrix<f64> {
        crate::linalg::null_space(&self.e, RANK_TOL)
    }

    /// Euclidean projection of `p`.
    pub fn project(&self, p: &DVector<f64>) -> Result<Projection> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        let x0 = self.particular()?;
        let n = self.affine_basis();
        let an = &self.a * &n;
        let bp = &self.b - &self.a * &x0;
        let y0 = n.transpose() * (p - &x0);
        let g = -&an;
        let h = &an * &y0 - &bp;
        let sol = least_distance(&g, &h).ok_or(Error::EmptyConstraintSet)?;
        let point = &x0 + &n * (&y0 + &sol.z);
        let lambda = sol.multipliers;
        let r = (p - &point) - self.a.transpose() * &lambda;
        let kkt_residual = (&n * (n.transpose() * &r)).norm();
        Ok(Projection {
            distance: (p - &point).norm(),
            active: self.active_set(&point, ACTIVE_TOL),
            point,
            multipliers: lambda,
            kkt_residual,
        })
    }

    pub fn distance(&self, p: &DVector<f64>) -> Result<f64> {
        Ok(self.project(p)?.distance)
    }

    /// `{d : A d <= 0, E d = 0}`.
    pub fn recession_cone(&self) -> ConvexCone {
        ConvexCone::from_halfspaces(self.a.clone(), self.e.clone())
    }

    pub fn is_bounded(&self) -> Result<bool> {
        self.recession_cone().is_trivial()
    }

    /// All vertices, by exhaustive search over bases of active rows.
    pub fn vertices(&self) -> Result<Vec<DVector<f64>>> {
        let x0 = self.particular()?;
        let n = self.affine_basis();
        let d = n.ncols();
        let an = &self.a * &n;
        let bp = &self.b - &self.a * &x0;
        let feasible = |y: &DVector<f64>| (&an * y - &bp).iter().all(|s| *s <= ACTIVE_TOL);
        let mut out: Vec<DVector<f64>> = Vec::new();
        let push = |x: DVector<f64>, out: &mut Vec<DVector<f64>>| {
            if !out.iter().any(|v| (v - &x).amax() <= 1e-9) {
                out.push(x);
            }
        };
        if d == 0 {
            if feasible(&DVector::zeros(0)) {
                push(x0, &mut out);
            }
            return Ok(out);
        }
        let k = an.nrows();
        if binomial(k, d) > VERTEX_ENUMERATION_LIMIT {
            return Err(Error::TooLarge(format!(
                "vertex enumeration over {k} rows in dimension {d}"
            )));
        }
        for s in Combinations::new(k, d) {
            let m = select_rows(&an, &s);
            let sv = m.singular_values();
            let smax = sv.max();
            if sv.min() <= 1e-10 * smax.max(1.0) {
                continue;
            }
            let rhs = DVector::from_iterator(d, s.iter().map(|&i| bp[i]));
            let Some(y) = m.lu().solve(&rhs) else { continue };
            if feasible(&y) {
                push(&x0 + &n * y, &mut out);
            }
        }
        out.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(out)
    }

    /// Coordinates that are positive at some vertex (bounded sets only).
    pub fn support(&self, tol: f64) -> Result<Vec<usize>> {
        let v = self.vertices()?;
        if v.is_empty() {
            return Err(Error::EmptyConstraintSet);
        }
        Ok((0..self.dim).filter(|&j| v.iter().any(|x| x[j] > tol)).collect())
    }
}

fn stack(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).cloned())
}

fn orthonormal_equalities(e: &DMatrix<f64>, f: &DVector<f64>, dim: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if e.nrows() == 0 {
        return Ok((DMatrix::zeros(0, dim), DVector::zeros(0)));
    }
    let x0 = pinv(e, 1e-12) * f;
    if (e * &x0 - f).amax() > 1e-9 * (1.0 + f.amax()) {
        return Err(Error::EmptyConstraintSet);
    }
    let basis = column_space(&e.transpose(), RANK_TOL);
    let en = basis.transpose();
    let fn_ = &en * &x0;
    Ok((en, fn_))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn simplex_vertices_and_support() {
        let s = Polyhedron::simplex(4);
        let vs = s.vertices().unwrap();
        assert_eq!(vs.len(), 4);
        assert_eq!(s.support(1e-12).unwrap(), vec![0, 1, 2, 3]);
        assert!(s.is_bounded().unwrap());
    }

    #[test]
    fn simplex_vertex_tangent_cone() {
        let s = Polyhedron::simplex(3);
        let p = v(&[1.0, 0.0, 0.0]);
        assert_eq!(s.active_constraints(&p).unwrap(), vec![1, 2]);
        let t = s.tangent_cone(&p).unwrap();
        assert!(t.contains(&v(&[-1.0, 1.0, 0.0]), 1e-12));
        assert!(!t.contains(&v(&[1.0, -1.0, 0.0]), 1e-12));
        assert_eq!(t.generators().unwrap().rays.len(), 2);
    }

    #[test]
    fn interior_point_has_no_active_rows() {
        let s = Polyhedron::simplex(3);
        let p = v(&[1.0 / 3.0; 3]);
        assert!(s.active_constraints(&p).unwrap().is_empty());
    }

    #[test]
    fn projection_onto_simplex() {
        let s = Polyhedron::simplex(3);
        let pr = s.project(&v(&[1.0, 1.0, -1.0])).unwrap();
        assert!((pr.point.clone() - v(&[0.5, 0.5, 0.0])).amax() < 1e-13);
        assert!(pr.kkt_residual < 1e-12);
        assert_eq!(pr.active, vec![2]);
    }

    #[test]
    fn restriction_drops_vacuous_rows() {
        let s = Polyhedron::simplex(3).restrict_coordinates(&[0, 2]).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.inequality_count(), 2);
        assert_eq!(s.vertices().unwrap().len(), 2);
    }

    #[test]
    fn infeasible_equalities_are_rejected() {
        let e = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let f = v(&[0.0, 1.0]);
        assert!(matches!(
            Polyhedron::new(DMatrix::zeros(0, 1), DVector::zeros(0), e, f),
            Err(Error::EmptyConstraintSet)
        ));
    }

    #[test]
    fn empty_inequalities_detected_by_projection() {
        let s = Polyhedron::simplex(2)
            .with_inequalities(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), &v(&[0.5]))
            .unwrap();
        assert!(s.vertices().unwrap().is_empty());
        assert!(matches!(s.project(&v(&[0.0, 0.0])), Err(Error::EmptyConstraintSet)));
    }
}
