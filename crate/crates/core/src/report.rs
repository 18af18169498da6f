//! Serializable results of one CLI run.
//!
//! Reports contain no timestamps, paths or thread counts, so the same inputs and
//! seed give byte-identical JSON.

use serde::{Deserialize, Serialize};

use crate::capacity::CapacitySolution;
use crate::certify::{AppendixBReport, Certificate, DecayCurve, Example1Report, ZetaReport};
use crate::constants::{ACoefficient, Theorem1Constants, Theorem2Constants};
use crate::corpus::CorpusParams;
use crate::quantum::Spectral;
use crate::spec_file::Kind;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub version: u32,
    pub command: String,
    pub source: Source,
    pub capacity: CapacityBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<CertificationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extras: Option<Extras>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Source {
    pub kind: Kind,
    pub corpus: Option<String>,
    pub params: Option<CorpusParams>,
    /// Names of the input letters, in alphabet order.
    pub labels: Vec<String>,
    /// Set when theorem 3 or 4 was run on the diagonal embedding of a classical channel.
    #[serde(default)]
    pub embedded: bool,
}

/// The output state at the maximizer.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OutputState {
    Distribution { probabilities: Vec<f64> },
    Density { eigenvalues: Vec<f64>, matrix: Vec<Vec<[f64; 2]>> },
}

pub trait DescribeOutput {
    fn describe(out: &Self) -> OutputState;
}

impl DescribeOutput for Vec<f64> {
    fn describe(out: &Self) -> OutputState {
        OutputState::Distribution {
            probabilities: out.clone(),
        }
    }
}

impl DescribeOutput for crate::quantum::CMatrix {
    fn describe(out: &Self) -> OutputState {
        let mut ev: Vec<f64> = Spectral::of(out).values.iter().cloned().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        OutputState::Density {
            eigenvalues: ev,
            matrix: (0..out.nrows())
                .map(|i| (0..out.ncols()).map(|j| [out[(i, j)].re, out[(i, j)].im]).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CapacityBlock {
    pub capacity: f64,
    /// Maximizer over the full input alphabet.
    pub maximizer: Vec<f64>,
    pub output: OutputState,
    /// Letters used by some optimal input.
    pub support: Vec<usize>,
    pub support_labels: Vec<String>,
    /// Vertices of the optimal input set, over the full alphabet.
    pub optimal_vertices: Vec<Vec<f64>>,
    /// `D(W(x) || q)` for the support letters.
    pub divergences: Vec<f64>,
    pub caid_dimension: usize,
    pub duality_gap: f64,
    pub iterations: usize,
}

impl CapacityBlock {
    pub fn of<M>(sol: &CapacitySolution<M>, labels: &[String]) -> Self
    where
        M: crate::model::InformationModel,
        M::Output: DescribeOutput,
    {
        CapacityBlock {
            capacity: sol.capacity,
            maximizer: sol.expand(&sol.maximizer),
            output: M::Output::describe(&sol.center),
            support: sol.support.clone(),
            support_labels: sol.support.iter().map(|&x| labels[x].clone()).collect(),
            optimal_vertices: sol.optimal_vertices.iter().map(|v| sol.expand(v)).collect(),
            divergences: sol.gradient.iter().cloned().collect(),
            caid_dimension: sol.caid_affine.tangent.dim(),
            duality_gap: sol.duality_gap,
            iterations: sol.iterations,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConstantsBlock {
    /// 1 to 4; 3 and 4 are the classical-quantum forms of 1 and 2.
    pub theorem: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<Theorem1Constants>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<Theorem2Constants>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_coefficient: Option<ACoefficient>,
    /// `A` was only bounded from below, so the quadratic branch is withheld.
    pub partial: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CertificationBlock {
    pub samples_requested: usize,
    pub certificates: Vec<Certificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<DecayCurve>,
    pub violations: usize,
    pub warnings: usize,
}

impl CertificationBlock {
    pub fn new(samples_requested: usize, certificates: Vec<Certificate>, curves: Vec<DecayCurve>) -> Self {
        let all = certificates.iter().chain(curves.iter().map(|c| &c.certificate));
        let (violations, warnings) = all.fold((0, 0), |(v, w), c| (v + c.severe_violations(), w + c.warnings));
        CertificationBlock {
            samples_requested,
            certificates,
            curves,
            violations,
            warnings,
        }
    }
}

/// Entry-specific checks attached to certification runs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Extras {
    FourthPower(Example1Report),
    Counterexample(AppendixBReport),
    Zeta(ZetaReport),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub crate_version: String,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    pub solver_iterations: usize,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }
}
