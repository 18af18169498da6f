//! Classical divergences, channels and mutual information.
//!
//! Logarithms are natural. `+inf` stands for the extended-real infinity returned
//! when absolute continuity fails.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for nonnegativity and normalization checks.
pub const PROB_TOL: f64 = 1e-12;

/// A probability vector: nonnegative entries summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        validate_probability(&p)?;
        Ok(Distribution(p))
    }

    pub fn uniform(n: usize) -> Self {
        Distribution(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, x: usize) -> Self {
        let mut p = vec![0.0; n];
        p[x] = 1.0;
        Distribution(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Vec<f64> {
        d.0
    }
}

impl std::ops::Deref for Distribution {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn validate_probability(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -PROB_TOL) {
        return Err(Error::InvalidDistribution(format!("entry {x} is not a probability")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_TOL * (p.len() as f64).max(1.0) {
        return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
    }
    Ok(())
}

/// A stochastic matrix, one row `W(x)` per input letter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    data: Vec<f64>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::InvalidChannel("no input letters".into()));
        }
        let outputs = rows[0].len();
        let mut data = Vec::with_capacity(inputs * outputs);
        for (x, r) in rows.into_iter().enumerate() {
            if r.len() != outputs {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {outputs}",
                    r.len()
                )));
            }
            validate_probability(&r)
                .map_err(|e| Error::InvalidChannel(format!("row {x}: {e}")))?;
            data.extend(r);
        }
        Ok(Channel { inputs, outputs, data })
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Channel::new(m.row_iter().map(|r| r.iter().cloned().collect()).collect())
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.outputs)
    }

    /// `n x m` matrix with `W(x)` as row `x`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.inputs, self.outputs, &self.data)
    }

    /// Sub-channel keeping only the listed input letters.
    pub fn restrict_inputs(&self, keep: &[usize]) -> Channel {
        let mut data = Vec::with_capacity(keep.len() * self.outputs);
        for &x in keep {
            data.extend_from_slice(self.row(x));
        }
        Channel {
            inputs: keep.len(),
            outputs: self.outputs,
            data,
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for Channel {
    type Error = Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        Channel::new(v)
    }
}

impl From<Channel> for Vec<Vec<f64>> {
    fn from(c: Channel) -> Self {
        c.rows().map(|r| r.to_vec()).collect()
    }
}

/// `q_v = sum_x v(x) W(x)` for an arbitrary signed weight vector.
pub fn output_distribution(channel: &Channel, v: &[f64]) -> Vec<f64> {
    assert_eq!(v.len(), channel.inputs(), "weight vector length");
    let mut q = vec![0.0; channel.outputs()];
    for (x, &vx) in v.iter().enumerate() {
        if vx == 0.0 {
            continue;
        }
        for (qy, w) in q.iter_mut().zip(channel.row(x)) {
            *qy += vx * w;
        }
    }
    q
}

/// `sum_y w ln(w/q)` with `0 ln 0 = 0`; `+inf` when `w` charges a zero of `q`.
pub fn kl_divergence(w: &[f64], q: &[f64]) -> f64 {
    assert_eq!(w.len(), q.len(), "alphabet sizes differ");
    let mut d = 0.0;
    for (&a, &b) in w.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return f64::INFINITY;
        }
        d += a * (a / b).ln();
    }
    d
}

/// `l1` distance `sum_y |a - b|`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "alphabet sizes differ");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `chi^alpha(w||q) = sum_y q |w/q - 1|^alpha`, `alpha >= 1`.
pub fn chi_divergence(w: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must be >= 1")));
    }
    if w.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            found: w.len(),
        });
    }
    let mut s = 0.0;
    for (&a, &b) in w.iter().zip(q) {
        if b <= 0.0 {
            if a > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        s += b * (a / b - 1.0).abs().powf(alpha);
    }
    Ok(s)
}

/// `D(W(x) || q)` for every input letter.
pub fn divergence_profile(channel: &Channel, q: &[f64]) -> Vec<f64> {
    channel.rows().map(|r| kl_divergence(r, q)).collect()
}

/// `I(P; W) = sum_x P(x) D(W(x) || q_P)`.
pub fn mutual_information(channel: &Channel, p: &[f64]) -> f64 {
    let q = output_distribution(channel, p);
    p.iter()
        .zip(channel.rows())
        .filter(|(px, _)| **px > 0.0)
        .map(|(px, r)| px * kl_divergence(r, &q))
        .sum()
}

/// Both sides of `sum_x P(x) D(W(x)||q) = I(P;W) + D(q_P||q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopsoeSides {
    pub average_divergence: f64,
    pub information_plus_output_divergence: f64,
}

pub fn topsoe_expansion(channel: &Channel, p: &[f64], q: &[f64]) -> TopsoeSides {
    let qp = output_distribution(channel, p);
    let lhs = p
        .iter()
        .zip(channel.rows())
        .filter(|(px, _)| **px > 0.0)
        .map(|(px, r)| px * kl_divergence(r, q))
        .sum();
    TopsoeSides {
        average_divergence: lhs,
        information_plus_output_divergence: mutual_information(channel, p) + kl_divergence(&qp, q),
    }
}

/// Binary entropy in nats.
pub fn binary_entropy(t: f64) -> f64 {
    let f = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    f(t) + f(1.0 - t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn kl_of_half_half_against_quarter() {
        let d = kl_divergence(&[0.5, 0.5], &[0.25, 0.75]);
        assert!(close(d, 0.5 * (4.0f64 / 3.0).ln(), 1e-15));
    }

    #[test]
    fn kl_infinite_without_absolute_continuity() {
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]), 2f64.ln());
    }

    #[test]
    fn chi_square_reference() {
        // sum q (w/q - 1)^2 = (0.25)^2/0.25 + (0.25)^2/0.75
        let c = chi_divergence(&[0.5, 0.5], &[0.25, 0.75], 2.0).unwrap();
        assert!(close(c, 1.0 / 3.0, 1e-15));
        assert!(chi_divergence(&[0.5, 0.5], &[0.25, 0.75], 0.5).is_err());
    }

    #[test]
    fn identity_channel_information() {
        let w = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(close(mutual_information(&w, &[0.5, 0.5]), 2f64.ln(), 1e-15));
        assert_eq!(mutual_information(&w, &[1.0, 0.0]), 0.0);
    }

    #[test]
    fn bsc_information_is_ln2_minus_entropy() {
        let p = 0.11;
        let w = Channel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap();
        let i = mutual_information(&w, &[0.5, 0.5]);
        assert!(close(i, 2f64.ln() - binary_entropy(p), 1e-15));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(Channel::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(Channel::new(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![0.3, 0.7]).is_ok());
    }

    #[test]
    fn serde_round_trip_validates() {
        let w = Channel::new(vec![vec![0.2, 0.8], vec![1.0, 0.0]]).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<Channel>(&s).unwrap(), w);
        assert!(serde_json::from_str::<Channel>("[[0.2,0.2]]").is_err());
    }

    fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, n).prop_filter_map("nonzero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn pinsker_and_chi_square_sandwich(w in simplex(5), q in simplex(5)) {
            let d = kl_divergence(&w, &q);
            let tv = total_variation(&w, &q);
            prop_assert!(d + 1e-12 >= 0.5 * tv * tv);
            let c2 = chi_divergence(&w, &q, 2.0).unwrap();
            prop_assert!(c2.ln_1p() + 1e-12 >= d);
            prop_assert!(c2 + 1e-12 >= c2.ln_1p());
        }

        #[test]
        fn topsoe_identity(rows in proptest::collection::vec(simplex(3), 4), p in simplex(4), q in simplex(3)) {
            let w = Channel::new(rows).unwrap();
            let t = topsoe_expansion(&w, &p, &q);
            prop_assert!((t.average_divergence - t.information_plus_output_divergence).abs() < 1e-10);
        }

        #[test]
        fn information_bounded_by_input_entropy(rows in proptest::collection::vec(simplex(3), 4), p in simplex(4)) {
            let w = Channel::new(rows).unwrap();
            let i = mutual_information(&w, &p);
            let h: f64 = p.iter().filter(|x| **x > 0.0).map(|x| -x * x.ln()).sum();
            prop_assert!(i >= -1e-12 && i <= h + 1e-12);
        }
    }
}
