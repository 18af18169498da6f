//! Classical-quantum channels: density operators, Umegaki relative entropy,
//! quantum chi-divergences, the Bogoliubov-Kubo-Mori metric and the quantum
//! third-order coefficient.
//!
//! [`CQChannel`] implements [`InformationModel`](crate::model::InformationModel),
//! so capacity, cone constants and certification run unchanged on it.

pub mod channel;
pub mod divergence;
pub mod kernels;
pub mod operator;

pub use channel::CQChannel;
pub use divergence::{bkm_inner, q_chi_divergence, q_relative_entropy};
pub use operator::{CMatrix, DensityOperator, Spectral};

use crate::model::InformationModel;

/// `I(P; W) = sum_x P(x) D(W(x) || sigma_P)`.
pub fn q_mutual_information(cq: &CQChannel, p: &[f64]) -> f64 {
    cq.mutual_information(p)
}

/// Quantum third-order coefficient `A` at `sigma`.
pub fn q_a_coefficient(cq: &CQChannel, sigma: &CMatrix) -> f64 {
    cq.a_cubed(sigma).cbrt()
}
