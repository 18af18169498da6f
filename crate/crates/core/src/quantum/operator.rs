use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigen-decomposition `m = U diag(values) U^*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Spectral {
    pub fn of(m: &CMatrix) -> Self {
        let h = hermitian_part(m);
        let e = h.symmetric_eigen();
        Spectral {
            values: e.eigenvalues,
            vectors: e.eigenvectors,
        }
    }

    /// `U^* a U`.
    pub fn rotate(&self, a: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * a * &self.vectors
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = DVector::from_iterator(self.values.len(), self.values.iter().map(|&l| Complex64::new(f(l), 0.0)));
        &self.vectors * CMatrix::from_diagonal(&d) * self.vectors.adjoint()
    }
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn real_trace(m: &CMatrix) -> f64 {
    m.trace().re
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    Spectral::of(m).values.iter().map(|x| x.abs()).sum()
}

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn diagonal(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| Complex64::new(x, 0.0))))
}

/// Pure state `|psi><psi|` from an unnormalized vector.
pub fn pure_state(psi: &[Complex64]) -> CMatrix {
    let v = DVector::from_column_slice(psi);
    let n = v.norm();
    let v = v / Complex64::new(n, 0.0);
    &v * v.adjoint()
}

/// Density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(CMatrix);

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidDistribution("density operator must be square".into()));
        }
        if !is_hermitian(&m, 1e-12) {
            return Err(Error::InvalidDistribution("operator is not Hermitian".into()));
        }
        let m = hermitian_part(&m);
        let s = Spectral::of(&m);
        if let Some(l) = s.values.iter().find(|l| **l < -1e-10) {
            return Err(Error::InvalidDistribution(format!("negative eigenvalue {l}")));
        }
        let t = real_trace(&m);
        if (t - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("trace {t}")));
        }
        Ok(DensityOperator(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// Random full-rank density matrix `G G^* / tr` with complex Gaussian `G`.
pub fn random_density(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    use rand::RngExt;
    let normal = rand_distr::StandardNormal;
    let g = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.sample::<f64, _>(normal), rng.sample::<f64, _>(normal)));
    let m = &g * g.adjoint();
    let t = real_trace(&m);
    hermitian_part(&(m / Complex64::new(t, 0.0)))
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
