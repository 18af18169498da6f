//! The interface shared by classical and classical-quantum channels.
//!
//! Everything downstream of the capacity solver (cone constants, Fisher matrix,
//! certification) is written against [`InformationModel`], so the quantum
//! module only has to supply its own divergences and metrics.

use nalgebra::DMatrix;

use crate::divergence::{kl_divergence, output_distribution, Channel};
use crate::geometry::sphere::{min_l1_ratio, NormRatioMin};

pub trait InformationModel: Clone + Send + Sync {
    type Output: Clone + Send + Sync + std::fmt::Debug;

    fn input_count(&self) -> usize;
    /// `sum_x v(x) W(x)` for a signed weight vector.
    fn output(&self, v: &[f64]) -> Self::Output;
    /// `tr W(x) ln W(x)` per letter.
    fn negentropies(&self) -> Vec<f64>;
    /// `tr a ln b` for a signed `a` and a positive semidefinite `b`.
    fn cross_log(&self, a: &Self::Output, b: &Self::Output) -> f64;
    /// `D(W(x) || center)` per letter.
    fn divergences(&self, center: &Self::Output) -> Vec<f64>;
    fn relative_entropy(&self, a: &Self::Output, b: &Self::Output) -> f64;
    /// `l1` norm, or trace norm for operators.
    fn norm1(&self, a: &Self::Output) -> f64;
    /// `norm1(a - b)`.
    fn norm1_diff(&self, a: &Self::Output, b: &Self::Output) -> f64;
    /// Gram matrix of the letters in the chi-square metric at `center`; the
    /// Hessian of mutual information is its negative.
    fn curvature(&self, center: &Self::Output) -> DMatrix<f64>;
    /// Cube of the third-order coefficient `A` at `center`.
    fn a_cubed(&self, center: &Self::Output) -> f64;
    /// An upper bound on `A` that does not need the exact third-order form.
    fn a_upper_bound(&self, _center: &Self::Output) -> Option<f64> {
        None
    }
    /// Real matrix whose columns are the vectorized letters.
    fn linear_map(&self) -> DMatrix<f64>;
    fn restrict_inputs(&self, keep: &[usize]) -> Self;
    /// `min |q_v|_1` over unit `v` in the span of `basis`.
    fn min_output_norm(&self, basis: &DMatrix<f64>, seed: u64) -> NormRatioMin;

    /// `I(P) = sum_x P(x) tr W(x) ln W(x) - tr q_P ln q_P`.
    fn mutual_information(&self, p: &[f64]) -> f64 {
        let neg = self.negentropies();
        let q = self.output(p);
        let lin: f64 = p.iter().zip(&neg).map(|(a, b)| a * b).sum();
        (lin - self.cross_log(&q, &q)).max(0.0)
    }

    /// `sum_x v(x) (tr W(x) ln W(x))`; used by line searches.
    fn weighted_negentropy(&self, v: &[f64]) -> f64 {
        self.negentropies().iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

impl InformationModel for Channel {
    type Output = Vec<f64>;

    fn input_count(&self) -> usize {
        self.inputs()
    }

    fn output(&self, v: &[f64]) -> Vec<f64> {
        output_distribution(self, v)
    }

    fn negentropies(&self) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().filter(|w| **w > 0.0).map(|w| w * w.ln()).sum())
            .collect()
    }

    fn cross_log(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        let mut s = 0.0;
        for (&x, &y) in a.iter().zip(b) {
            if x == 0.0 {
                continue;
            }
            if y <= 0.0 {
                return if x > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
            }
            s += x * y.ln();
        }
        s
    }

    fn divergences(&self, center: &Vec<f64>) -> Vec<f64> {
        self.rows().map(|r| kl_divergence(r, center)).collect()
    }

    fn relative_entropy(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        kl_divergence(a, b)
    }

    fn norm1(&self, a: &Vec<f64>) -> f64 {
        a.iter().map(|x| x.abs()).sum()
    }

    fn norm1_diff(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    }

    fn curvature(&self, q: &Vec<f64>) -> DMatrix<f64> {
        let n = self.inputs();
        let mut h = DMatrix::zeros(n, n);
        for x in 0..n {
            let wx = self.row(x);
            for z in x..n {
                let wz = self.row(z);
                let mut s = 0.0;
                for y in 0..q.len() {
                    let prod = wx[y] * wz[y];
                    if prod == 0.0 {
                        continue;
                    }
                    if q[y] <= 0.0 {
                        s = f64::INFINITY;
                        break;
                    }
                    s += prod / q[y];
                }
                h[(x, z)] = s;
                h[(z, x)] = s;
            }
        }
        h
    }

    fn a_cubed(&self, q: &Vec<f64>) -> f64 {
        let mut s = 0.0;
        for y in 0..q.len() {
            let sq: f64 = self.rows().map(|r| r[y] * r[y]).sum();
            if sq == 0.0 {
                continue;
            }
            if q[y] <= 0.0 {
                return f64::INFINITY;
            }
            s += sq.powf(1.5) / (q[y] * q[y]);
        }
        s
    }

    /// `n^(1/6) (sum_x sum_y W(x,y)^3 / q(y)^2)^(1/3)`.
    fn a_upper_bound(&self, q: &Vec<f64>) -> Option<f64> {
        let mut third = 0.0;
        for r in self.rows() {
            for (wy, qy) in r.iter().zip(q) {
                if *wy > 0.0 {
                    third += if *qy > 0.0 { wy.powi(3) / (qy * qy) } else { f64::INFINITY };
                }
            }
        }
        Some((self.inputs() as f64).powf(1.0 / 6.0) * third.cbrt())
    }

    fn linear_map(&self) -> DMatrix<f64> {
        self.to_matrix().transpose()
    }

    fn restrict_inputs(&self, keep: &[usize]) -> Self {
        Channel::restrict_inputs(self, keep)
    }

    fn min_output_norm(&self, basis: &DMatrix<f64>, seed: u64) -> NormRatioMin {
        min_l1_ratio(&self.linear_map(), basis, seed)
    }
}
