//! Built-in channels and constraint sets.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divergence::Channel;
use crate::error::{Error, Result};
use crate::geometry::Polyhedron;
use crate::quantum::operator::{diagonal, pure_state, CMatrix};
use crate::quantum::CQChannel;
use crate::special::{bisect, zeta_tail, ZETA2, ZETA3};

/// A classical or classical-quantum channel.
#[derive(Clone, Debug)]
pub enum AnyModel {
    Classical(Channel),
    Quantum(CQChannel),
}

impl AnyModel {
    pub fn inputs(&self) -> usize {
        match self {
            AnyModel::Classical(w) => w.inputs(),
            AnyModel::Quantum(w) => w.inputs(),
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, AnyModel::Quantum(_))
    }
}

/// Size knobs for the parametrized entries; `None` picks the entry's default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub truncation: Option<usize>,
    pub sides: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub params: CorpusParams,
    pub model: AnyModel,
    pub constraint: Polyhedron,
    /// Output truncation for channels with countably many outputs.
    pub output_truncation: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub quantum: bool,
}

pub const CORPUS: [CorpusInfo; 8] = [
    CorpusInfo {
        name: "identity-n",
        description: "noiseless n-ary channel on the full simplex (--n, default 3)",
        quantum: false,
    },
    CorpusInfo {
        name: "bsc-p",
        description: "binary symmetric channel with crossover p (default 0.11)",
        quantum: false,
    },
    CorpusInfo {
        name: "example-1",
        description: "three-input binary-output channel under a ball constraint; fourth-power decay, polygon surrogate with --sides",
        quantum: false,
    },
    CorpusInfo {
        name: "example-2",
        description: "tanh channel on the integers truncated to |x| <= --trunc (default 8)",
        quantum: false,
    },
    CorpusInfo {
        name: "zeta",
        description: "zeta-tailed channel with --n inputs and --trunc negative outputs plus a tail bin",
        quantum: false,
    },
    CorpusInfo {
        name: "appendix-b",
        description: "9x8 channel whose kernel is orthogonal to the gradient (alias ppv-counterexample)",
        quantum: false,
    },
    CorpusInfo {
        name: "cq-pure-pair",
        description: "qubit states |0> and |+> on the full simplex",
        quantum: true,
    },
    CorpusInfo {
        name: "cq-commuting",
        description: "commuting qutrit channel in a rotated basis with a one-sided constraint",
        quantum: true,
    },
];

pub fn list(quantum_only: bool) -> Vec<CorpusInfo> {
    CORPUS.iter().filter(|c| !quantum_only || c.quantum).copied().collect()
}

fn canonical(name: &str) -> &str {
    match name {
        "ppv-counterexample" => "appendix-b",
        "identity" => "identity-n",
        "bsc" => "bsc-p",
        other => other,
    }
}

pub fn build(name: &str, params: CorpusParams) -> Result<CorpusEntry> {
    let key = canonical(name);
    let (model, constraint, trunc) = match key {
        "identity-n" => {
            let n = params.n.unwrap_or(3);
            if n == 0 {
                return Err(Error::InvalidInput("identity needs n >= 1".into()));
            }
            (AnyModel::Classical(identity(n)), Polyhedron::simplex(n), None)
        }
        "bsc-p" => (AnyModel::Classical(bsc(params.p.unwrap_or(0.11))?), Polyhedron::simplex(2), None),
        "example-1" => {
            let k = params.sides.unwrap_or(12);
            (AnyModel::Classical(example1_channel()), example1_polygon(k)?, None)
        }
        "example-2" => {
            let k = params.truncation.unwrap_or(8);
            if k < 2 {
                return Err(Error::InvalidInput("example-2 needs --trunc >= 2".into()));
            }
            let w = example2_channel(k);
            let n = w.inputs();
            (AnyModel::Classical(w), Polyhedron::simplex(n), None)
        }
        "zeta" => {
            let n = params.n.unwrap_or(16);
            let t = params.truncation.unwrap_or(1000);
            if n < zeta_threshold() {
                return Err(Error::InvalidInput(format!(
                    "zeta needs n >= {} inputs, got {n}",
                    zeta_threshold()
                )));
            }
            (AnyModel::Classical(zeta_channel(n, t)), Polyhedron::simplex(n), Some(t))
        }
        "appendix-b" => (
            AnyModel::Classical(appendix_b_channel(appendix_b_epsilon())),
            Polyhedron::simplex(9),
            None,
        ),
        "cq-pure-pair" => (AnyModel::Quantum(cq_pure_pair()), Polyhedron::simplex(2), None),
        "cq-commuting" => {
            let lam = Polyhedron::from_rows(4, &[(vec![1.0, 0.0, 0.0, 0.0], 0.3)], &[])?;
            (AnyModel::Quantum(cq_commuting()), lam, None)
        }
        _ => {
            let names: Vec<&str> = CORPUS.iter().map(|c| c.name).collect();
            return Err(Error::InvalidInput(format!(
                "unknown corpus entry `{name}`; available: {}, ppv-counterexample",
                names.join(", ")
            )));
        }
    };
    Ok(CorpusEntry {
        name: key.to_string(),
        params,
        model,
        constraint,
        output_truncation: trunc,
    })
}

pub fn identity(n: usize) -> Channel {
    let rows = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    Channel::new(rows).expect("identity rows are distributions")
}

pub fn bsc(p: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("crossover {p} outside [0, 1]")));
    }
    Channel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
}

pub fn example1_channel() -> Channel {
    Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]).expect("valid rows")
}

/// Boundary point of the ball constraint at angle `tau`.
pub fn example1_point(tau: f64) -> [f64; 3] {
    let (s, c) = tau.sin_cos();
    let r3 = 3f64.sqrt();
    [(8.0 - 2.0 * c) / 12.0, (2.0 + c + r3 * s) / 12.0, (2.0 + c - r3 * s) / 12.0]
}

pub const EXAMPLE1_CENTER: [f64; 3] = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
pub const EXAMPLE1_OPTIMUM: [f64; 3] = [0.5, 0.25, 0.25];

/// Regular `k`-gon inscribed in the ball constraint with a vertex at the optimum.
pub fn example1_polygon(k: usize) -> Result<Polyhedron> {
    if k < 3 {
        return Err(Error::InvalidInput("polygon needs at least 3 sides".into()));
    }
    let verts: Vec<DVector<f64>> = (0..k)
        .map(|j| DVector::from_column_slice(&example1_point(2.0 * std::f64::consts::PI * j as f64 / k as f64)))
        .collect();
    let c = DVector::from_column_slice(&EXAMPLE1_CENTER);
    let mut ineq = Vec::with_capacity(k);
    for j in 0..k {
        let (a, b) = (&verts[j], &verts[(j + 1) % k]);
        let e = (b - a).normalize();
        let m = (a + b) * 0.5 - &c;
        let nrm = &m - &e * e.dot(&m);
        ineq.push((nrm.iter().cloned().collect::<Vec<f64>>(), nrm.dot(a)));
    }
    Polyhedron::from_rows(3, &ineq, &[(vec![1.0; 3], 1.0)])
}

/// `P(y = 0 | x) = 1 / (1 + e^{-2x})`, i.e. `(1 + tanh x) / 2`, without cancellation.
fn tanh_row(x: i64) -> Vec<f64> {
    match x {
        1 => vec![1.0, 0.0],
        -1 => vec![0.0, 1.0],
        _ => {
            let t = 2.0 * x as f64;
            vec![1.0 / (1.0 + (-t).exp()), 1.0 / (1.0 + t.exp())]
        }
    }
}

/// Inputs `-k..=k` in increasing order; input `x` sits at index `x + k`.
pub fn example2_channel(k: usize) -> Channel {
    let k = k as i64;
    Channel::new((-k..=k).map(tanh_row).collect()).expect("valid rows")
}

/// Shortfall `ln 2 - I(p_k; W)` of the uniform input on `{k, -k}`, i.e. the binary entropy of the row.
pub fn example2_shortfall(k: usize) -> f64 {
    if k == 1 {
        return 0.0;
    }
    let t = 2.0 * k as f64;
    let small = 1.0 / (1.0 + t.exp());
    let large_ln = -(-t).exp().ln_1p();
    -small * small.ln() - (1.0 - small) * large_ln
}

/// Smallest input count for which the zeta channel has capacity `ln sqrt(n - 1)`.
pub fn zeta_threshold() -> usize {
    let bound = 1.0
        + (2.0 * ZETA3 / ZETA2).powi(2) * (2.0 * crate::special::neg_zeta_prime_2() / ZETA2).exp();
    bound.ceil() as usize
}

/// Inputs `0..n`; outputs `1..n-1`, then `-1..=-t`, then one bin for `y < -t`.
pub fn zeta_channel(n: usize, t: usize) -> Channel {
    let m = n - 1 + t + 1;
    let mut rows = Vec::with_capacity(n);
    let mut r0 = vec![0.0; m];
    for k in 1..=t {
        r0[n - 1 + k - 1] = (k as f64).powi(-2) / ZETA2;
    }
    r0[m - 1] = zeta_tail(2.0, t as u64) / ZETA2;
    rows.push(r0);
    for x in 1..n {
        let mut r = vec![0.0; m];
        r[x - 1] = 0.5;
        for k in 1..=t {
            r[n - 1 + k - 1] = 0.5 * (k as f64).powi(-3) / ZETA3;
        }
        r[m - 1] = 0.5 * zeta_tail(3.0, t as u64) / ZETA3;
        rows.push(r);
    }
    let rows = rows
        .into_iter()
        .map(|r: Vec<f64>| {
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect();
    Channel::new(rows).expect("valid rows")
}

/// Root of `e 5^{-e} = sqrt(3) 2^{1/3} / 10` on `(0, 1 / ln 5)`.
pub fn appendix_b_epsilon() -> f64 {
    let target = 3f64.sqrt() * 2f64.cbrt() / 10.0;
    let hi = 1.0 / 5f64.ln();
    bisect(|e| e * 5f64.powf(-e) - target, 0.0, hi).expect("root is bracketed")
}

pub fn appendix_b_channel(eps: f64) -> Channel {
    let mut rows = Vec::with_capacity(9);
    for i in 0..5 {
        let mut r = vec![eps / 3.0; 3];
        r.extend((0..5).map(|j| if i == j { 1.0 - eps } else { 0.0 }));
        rows.push(r);
    }
    for head in [[0.5, 1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 0.5, 1.0 / 3.0], [1.0 / 3.0, 1.0 / 6.0, 0.5], [1.0 / 3.0, 0.5, 1.0 / 6.0]] {
        let mut r = head.to_vec();
        r.extend([0.0; 5]);
        rows.push(r);
    }
    Channel::new(rows).expect("valid rows")
}

/// Kernel direction of the appendix-b channel.
pub const APPENDIX_B_KERNEL: [f64; 9] = [0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 2.0, -1.0, -3.0];

pub fn cq_pure_pair() -> CQChannel {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    CQChannel::new(vec![pure_state(&[one, z]), pure_state(&[one, one])]).expect("valid states")
}

/// Rows of the classical channel underlying [`cq_commuting`].
pub const CQ_COMMUTING_ROWS: [[f64; 3]; 4] = [
    [0.7, 0.2, 0.1],
    [0.1, 0.6, 0.3],
    [0.2, 0.2, 0.6],
    [0.4, 0.3, 0.3],
];

/// Hermitian unitary `I - 2 u u^* / |u|^2` with `u = (1, i, 1 + i)`.
pub fn cq_commuting_basis() -> CMatrix {
    let u = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)]);
    let nn = u.norm_squared();
    CMatrix::identity(3, 3) - (&u * u.adjoint()) * Complex64::new(2.0 / nn, 0.0)
}

pub fn cq_commuting_classical() -> Channel {
    Channel::new(CQ_COMMUTING_ROWS.iter().map(|r| r.to_vec()).collect()).expect("valid rows")
}

pub fn cq_commuting() -> CQChannel {
    let u = cq_commuting_basis();
    let letters = CQ_COMMUTING_ROWS
        .iter()
        .map(|r| {
            let m = &u * diagonal(r) * u.adjoint();
            (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
        })
        .collect();
    CQChannel::new(letters).expect("valid states")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_sizes() {
        assert_eq!(list(false).len(), 8);
        assert_eq!(list(true).len(), 2);
        assert!(build("nope", CorpusParams::default()).is_err());
        assert_eq!(build("ppv-counterexample", CorpusParams::default()).unwrap().name, "appendix-b");
    }

    #[test]
    fn appendix_b_root() {
        let e = appendix_b_epsilon();
        let target = 3f64.sqrt() * 2f64.cbrt() / 10.0;
        assert!((e * 5f64.powf(-e) - target).abs() < 1e-14);
        assert!((e - 0.45).abs() < 5e-3);
    }

    #[test]
    fn appendix_b_kernel_vector() {
        let w = appendix_b_channel(appendix_b_epsilon());
        let u = APPENDIX_B_KERNEL;
        let q = crate::divergence::output_distribution(&w, &u);
        assert!(q.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn example1_geometry() {
        let p = example1_point(0.0);
        assert_eq!(p, EXAMPLE1_OPTIMUM);
        let c = DVector::from_column_slice(&EXAMPLE1_CENTER);
        for t in [0.3, 1.0, 2.5] {
            let d = (DVector::from_column_slice(&example1_point(t)) - &c).norm();
            assert!((d - 6f64.sqrt() / 12.0).abs() < 1e-15);
        }
        let poly = example1_polygon(6).unwrap();
        assert_eq!(poly.vertices().unwrap().len(), 6);
    }

    #[test]
    fn tanh_rows_are_stable() {
        let w = example2_channel(30);
        let r = w.row(30 + 25);
        assert!(r[1] > 0.0 && r[1] < 1e-20);
        assert!(example2_shortfall(3) > example2_shortfall(4));
        assert!(example2_shortfall(25) > 0.0);
    }

    #[test]
    fn zeta_rows_sum_to_one() {
        assert_eq!(zeta_threshold(), 8);
        let w = zeta_channel(10, 50);
        assert_eq!(w.outputs(), 9 + 51);
    }
}
