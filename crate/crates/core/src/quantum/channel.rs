use nalgebra::DMatrix;
use num_complex::Complex64;

use super::divergence::{bkm_inner, cubic_trace_integral, negentropy, q_relative_entropy, trace_a_log_b};
use super::operator::{diagonal, hermitian_part, trace_norm, CMatrix, DensityOperator, Spectral};
use crate::divergence::Channel;
use crate::error::{Error, Result};
use crate::geometry::sphere::{min_l1_ratio, sphere_local_min, NormRatioMin};
use crate::model::InformationModel;

/// Classical-quantum channel `x -> W(x)`.
#[derive(Clone, Debug)]
pub struct CQChannel {
    letters: Vec<CMatrix>,
    dim: usize,
    negent: Vec<f64>,
    common_basis: Option<CMatrix>,
}

impl CQChannel {
    pub fn new(letters: Vec<CMatrix>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidChannel("no input letters".into()));
        }
        let dim = letters[0].nrows();
        let mut checked = Vec::with_capacity(letters.len());
        for (x, w) in letters.into_iter().enumerate() {
            if w.nrows() != dim {
                return Err(Error::InvalidChannel(format!("letter {x} has dimension {}", w.nrows())));
            }
            let d = DensityOperator::new(w).map_err(|e| Error::InvalidChannel(format!("letter {x}: {e}")))?;
            checked.push(d.into_matrix());
        }
        Ok(CQChannel::build(checked))
    }

    fn build(letters: Vec<CMatrix>) -> Self {
        let dim = letters[0].nrows();
        let negent = letters.iter().map(negentropy).collect();
        let common_basis = common_eigenbasis(&letters);
        CQChannel {
            letters,
            dim,
            negent,
            common_basis,
        }
    }

    /// Diagonal embedding of a classical channel.
    pub fn from_classical(w: &Channel) -> Self {
        CQChannel::build(w.rows().map(diagonal).collect())
    }

    pub fn letters(&self) -> &[CMatrix] {
        &self.letters
    }

    pub fn letter(&self, x: usize) -> &CMatrix {
        &self.letters[x]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inputs(&self) -> usize {
        self.letters.len()
    }

    pub fn is_commuting(&self) -> bool {
        self.common_basis.is_some()
    }

    /// Diagonals in a common eigenbasis, when the letters commute.
    pub fn as_classical(&self) -> Option<Channel> {
        let u = self.common_basis.as_ref()?;
        let rows = self
            .letters
            .iter()
            .map(|w| {
                let r = u.adjoint() * w * u;
                (0..self.dim).map(|i| r[(i, i)].re.max(0.0)).collect::<Vec<f64>>()
            })
            .map(|r: Vec<f64>| {
                let s: f64 = r.iter().sum();
                r.iter().map(|x| x / s).collect()
            })
            .collect();
        Channel::new(rows).ok()
    }

    /// Compress onto the span of the supports of the letters.
    fn compress(letters: Vec<CMatrix>) -> Vec<CMatrix> {
        let d = letters[0].nrows();
        let mut sum = CMatrix::zeros(d, d);
        for w in &letters {
            sum += w;
        }
        let s = Spectral::of(&sum);
        let cut = 1e-12 * s.values.amax().max(1e-300);
        let keep: Vec<usize> = (0..d).filter(|&i| s.values[i] > cut).collect();
        if keep.len() == d {
            return letters;
        }
        let mut v = CMatrix::zeros(d, keep.len());
        for (k, &i) in keep.iter().enumerate() {
            v.set_column(k, &s.vectors.column(i));
        }
        letters.iter().map(|w| hermitian_part(&(v.adjoint() * w * &v))).collect()
    }
}

fn common_eigenbasis(letters: &[CMatrix]) -> Option<CMatrix> {
    for a in letters {
        for b in letters {
            if (a * b - b * a).iter().any(|z| z.norm() > 1e-12) {
                return None;
            }
        }
    }
    let d = letters[0].nrows();
    for attempt in 0..4 {
        let mut h = CMatrix::zeros(d, d);
        for (x, w) in letters.iter().enumerate() {
            let c = 1.0 + ((x + 1) as f64 * (0.618_033_988_749_894_9 + attempt as f64 * 0.414_213_562)).fract();
            h += w * Complex64::new(c, 0.0);
        }
        let u = Spectral::of(&h).vectors;
        let diag = letters.iter().all(|w| {
            let r = u.adjoint() * w * &u;
            (0..d).all(|i| (0..d).all(|j| i == j || r[(i, j)].norm() <= 1e-10))
        });
        if diag {
            return Some(u);
        }
    }
    None
}

/// Real isometric coordinates of a Hermitian matrix.
pub fn vectorize(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..d {
        v.push(m[(i, i)].re);
        for j in i + 1..d {
            v.push(r2 * m[(i, j)].re);
            v.push(r2 * m[(i, j)].im);
        }
    }
    v
}

impl InformationModel for CQChannel {
    type Output = CMatrix;

    fn input_count(&self) -> usize {
        self.letters.len()
    }

    fn output(&self, v: &[f64]) -> CMatrix {
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for (w, &c) in self.letters.iter().zip(v) {
            if c != 0.0 {
                s += w * Complex64::new(c, 0.0);
            }
        }
        hermitian_part(&s)
    }

    fn negentropies(&self) -> Vec<f64> {
        self.negent.clone()
    }

    fn cross_log(&self, a: &CMatrix, b: &CMatrix) -> f64 {
        trace_a_log_b(a, &Spectral::of(b))
    }

    fn divergences(&self, center: &CMatrix) -> Vec<f64> {
        let s = Spectral::of(center);
        self.letters
            .iter()
            .zip(&self.negent)
            .map(|(w, h)| {
                let c = trace_a_log_b(w, &s);
                if c == f64::NEG_INFINITY {
                    f64::INFINITY
                } else {
                    (h - c).max(0.0)
                }
            })
            .collect()
    }

    fn relative_entropy(&self, a: &CMatrix, b: &CMatrix) -> f64 {
        q_relative_entropy(a, b)
    }

    fn norm1(&self, a: &CMatrix) -> f64 {
        trace_norm(a)
    }

    fn norm1_diff(&self, a: &CMatrix, b: &CMatrix) -> f64 {
        trace_norm(&(a - b))
    }

    fn curvature(&self, center: &CMatrix) -> DMatrix<f64> {
        let s = Spectral::of(center);
        let n = self.letters.len();
        let mut h = DMatrix::zeros(n, n);
        for x in 0..n {
            for z in x..n {
                let v = bkm_inner(&s, &self.letters[x], &self.letters[z]);
                h[(x, z)] = v;
                h[(z, x)] = v;
            }
        }
        h
    }

    fn a_cubed(&self, center: &CMatrix) -> f64 {
        let mut sq = CMatrix::zeros(self.dim, self.dim);
        for w in &self.letters {
            sq += w * w;
        }
        let m = Spectral::of(&hermitian_part(&sq)).apply(|l| l.max(0.0).sqrt());
        2.0 * cubic_trace_integral(&Spectral::of(center), &m)
    }

    fn linear_map(&self) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = self.letters.iter().map(vectorize).collect();
        DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i])
    }

    fn restrict_inputs(&self, keep: &[usize]) -> Self {
        let letters = keep.iter().map(|&x| self.letters[x].clone()).collect();
        CQChannel::build(CQChannel::compress(letters))
    }

    fn min_output_norm(&self, basis: &DMatrix<f64>, seed: u64) -> NormRatioMin {
        if let Some(c) = self.as_classical() {
            return min_l1_ratio(&c.to_matrix().transpose(), basis, seed);
        }
        let obj = |z: &nalgebra::DVector<f64>| {
            let v = basis * z;
            trace_norm(&self.output(v.as_slice())) / z.norm()
        };
        let (value, z) = sphere_local_min(basis.ncols(), &obj, seed);
        NormRatioMin {
            value,
            argmin: basis * z,
            exact: false,
        }
    }
}
