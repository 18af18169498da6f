//! Umegaki relative entropy, quantum chi-divergences and the BKM metric.

use num_complex::Complex64;

use super::kernels::{log_dd1, triple_integral};
use super::operator::{CMatrix, Spectral};
use crate::error::{Error, Result};
use crate::quadrature::integrate_half_line;

/// Eigenvalues at or below this count as zero.
pub const ZERO_EIGEN: f64 = 1e-13;

/// `tr a ln b`; `-inf` when a positive part of `a` leaves the support of `b`.
pub fn trace_a_log_b(a: &CMatrix, b: &Spectral) -> f64 {
    let at = b.rotate(a);
    let mut s = 0.0;
    for i in 0..b.values.len() {
        let aii = at[(i, i)].re;
        if b.values[i] <= ZERO_EIGEN {
            if aii > ZERO_EIGEN {
                return f64::NEG_INFINITY;
            }
            if aii < -ZERO_EIGEN {
                return f64::INFINITY;
            }
            continue;
        }
        s += aii * b.values[i].ln();
    }
    s
}

/// `tr a ln a` for positive semidefinite `a`.
pub fn negentropy(a: &CMatrix) -> f64 {
    Spectral::of(a)
        .values
        .iter()
        .filter(|l| **l > 0.0)
        .map(|l| l * l.ln())
        .sum()
}

/// `D(rho || sigma) = tr rho (ln rho - ln sigma)`.
pub fn q_relative_entropy(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let cross = trace_a_log_b(rho, &Spectral::of(sigma));
    if cross == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    (negentropy(rho) - cross).max(0.0)
}

fn support_violation(delta_rot: &CMatrix, s: &Spectral) -> bool {
    let d = s.values.len();
    (0..d).any(|i| {
        s.values[i] <= ZERO_EIGEN && (0..d).any(|j| delta_rot[(i, j)].norm() > 1e-12)
    })
}

/// `<a, b>_sigma = int_0^inf tr[a^* (sigma+s)^-1 b (sigma+s)^-1] ds`.
pub fn bkm_inner(sigma: &Spectral, a: &CMatrix, b: &CMatrix) -> f64 {
    let at = sigma.rotate(a);
    let bt = sigma.rotate(b);
    let d = sigma.values.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let z = at[(i, j)].conj() * bt[(i, j)];
            if z.norm() == 0.0 {
                continue;
            }
            let (li, lj) = (sigma.values[i], sigma.values[j]);
            if li <= ZERO_EIGEN || lj <= ZERO_EIGEN {
                return f64::INFINITY;
            }
            s += log_dd1(li, lj) * z.re;
        }
    }
    s
}

/// `int_0^inf tr[(m/(sigma+s))^3] ds` for Hermitian `m`, with `t/u = u^-1/2 t u^-1/2`.
pub fn cubic_trace_integral(sigma: &Spectral, m: &CMatrix) -> f64 {
    let mt = sigma.rotate(m);
    let d = sigma.values.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mij = mt[(i, j)];
            if mij.norm() == 0.0 {
                continue;
            }
            for k in 0..d {
                let z: Complex64 = mij * mt[(j, k)] * mt[(k, i)];
                if z.norm() == 0.0 {
                    continue;
                }
                let (a, b, c) = (sigma.values[i], sigma.values[j], sigma.values[k]);
                if a <= ZERO_EIGEN || b <= ZERO_EIGEN || c <= ZERO_EIGEN {
                    return f64::INFINITY;
                }
                s += triple_integral(a, b, c) * z.re;
            }
        }
    }
    s
}

/// Integrand `tr |(rho - sigma)/(sigma + s)|^alpha` in the eigenbasis of `sigma`.
fn chi_integrand(delta_rot: &CMatrix, values: &[f64], s: f64, alpha: f64) -> f64 {
    let d = values.len();
    let x = CMatrix::from_fn(d, d, |i, j| {
        delta_rot[(i, j)] / Complex64::new(((values[i] + s) * (values[j] + s)).sqrt(), 0.0)
    });
    Spectral::of(&x).values.iter().map(|m| m.abs().powf(alpha)).sum()
}

/// `chi^alpha(rho||sigma) = (alpha-1) int_0^inf tr|(rho-sigma)/(sigma+s)|^alpha ds`, `alpha >= 1`.
///
/// `alpha = 2` and commuting pairs are evaluated in closed form; the rest by
/// adaptive quadrature.
pub fn q_chi_divergence(rho: &CMatrix, sigma: &CMatrix, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must be >= 1")));
    }
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch {
            expected: sigma.nrows(),
            found: rho.nrows(),
        });
    }
    let s = Spectral::of(sigma);
    let delta = s.rotate(&(rho - sigma));
    if support_violation(&delta, &s) {
        return Ok(f64::INFINITY);
    }
    if alpha == 1.0 {
        return Ok(0.0);
    }
    let keep: Vec<usize> = (0..s.values.len()).filter(|&i| s.values[i] > ZERO_EIGEN).collect();
    let vals: Vec<f64> = keep.iter().map(|&i| s.values[i]).collect();
    let dr = CMatrix::from_fn(keep.len(), keep.len(), |i, j| delta[(keep[i], keep[j])]);
    if alpha == 2.0 {
        let mut t = 0.0;
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                t += log_dd1(vals[i], vals[j]) * dr[(i, j)].norm_sqr();
            }
        }
        return Ok(t);
    }
    let off: f64 = (0..vals.len())
        .flat_map(|i| (0..vals.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| dr[(i, j)].norm())
        .sum();
    if off <= 1e-15 {
        // commuting pair: (alpha-1) int |d|^alpha / (l+s)^alpha ds = |d|^alpha l^(1-alpha)
        return Ok((0..vals.len())
            .map(|i| dr[(i, i)].re.abs().powf(alpha) * vals[i].powf(1.0 - alpha))
            .sum());
    }
    let f = |x: f64| chi_integrand(&dr, &vals, x, alpha);
    Ok((alpha - 1.0) * integrate_half_line(&f, 1e-13))
}

/// Quantum Pinsker right-hand side `|rho - sigma|_1^2 / 2`.
pub fn trace_distance_sq_half(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let t = super::operator::trace_norm(&(rho - sigma));
    0.5 * t * t
}
