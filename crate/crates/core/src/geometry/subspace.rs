use nalgebra::{DMatrix, DVector};

use crate::linalg::{column_space, hstack, null_space, vstack, RANK_TOL};

/// Linear subspace of `R^n` stored as an orthonormal basis (columns).
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn whole(n: usize) -> Self {
        Subspace {
            basis: DMatrix::identity(n, n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Subspace {
            basis: DMatrix::zeros(n, 0),
        }
    }

    /// Span of the columns of `m`.
    pub fn span(m: &DMatrix<f64>) -> Self {
        Subspace {
            basis: column_space(m, RANK_TOL),
        }
    }

    pub fn span_of(n: usize, vs: &[DVector<f64>]) -> Self {
        Subspace::span(&crate::linalg::columns(n, vs))
    }

    /// `{x : rows x = 0}`.
    pub fn kernel(rows: &DMatrix<f64>) -> Self {
        Subspace {
            basis: null_space(rows, RANK_TOL),
        }
    }

    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Subspace { basis }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        (v - self.project(v)).norm() <= tol * v.norm().max(1.0)
    }

    pub fn complement(&self) -> Self {
        Subspace::kernel(&self.basis.transpose())
    }

    pub fn intersect(&self, other: &Subspace) -> Self {
        let a = self.complement().basis.transpose();
        let b = other.complement().basis.transpose();
        Subspace::kernel(&vstack(&a, &b))
    }

    pub fn sum(&self, other: &Subspace) -> Self {
        Subspace::span(&hstack(&self.basis, &other.basis))
    }
}

/// `point + tangent`.
#[derive(Clone, Debug)]
pub struct AffineSubspace {
    pub point: DVector<f64>,
    pub tangent: Subspace,
}

impl AffineSubspace {
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        let d = v - &self.point;
        (&d - self.tangent.project(&d)).norm() <= tol
    }

    pub fn normal(&self) -> Subspace {
        self.tangent.complement()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_of_planes_is_a_line() {
        let a = Subspace::kernel(&DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]));
        let b = Subspace::kernel(&DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]));
        let l = a.intersect(&b);
        assert_eq!(l.dim(), 1);
        assert!(l.contains(&DVector::from_vec(vec![0.0, 0.0, 2.0]), 1e-12));
        assert_eq!(a.sum(&b).dim(), 3);
        assert_eq!(l.complement().dim(), 2);
    }
}
