//! JSON channel files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "kind": "classical",
//!   "matrix": [[1, 0], [0, 1]],
//!   "constraint": { "A": [[1, 0]], "b": [0.7] },
//!   "labels": ["a", "b"]
//! }
//! ```
//!
//! Classical channels give `matrix` (one row per input letter). Classical-quantum
//! channels give `operators`, a list of square matrices whose entries are
//! `[re, im]` pairs or plain reals. Any number may be written as a decimal
//! string; with `"precise": true` every number must be. A file may instead name
//! a built-in channel with `"corpus"` and optional `"params"`.
//!
//! The constraint set is the probability simplex intersected with
//! `A p <= b` and `Aeq p = beq`.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::corpus::{self, AnyModel, CorpusParams};
use crate::divergence::Channel;
use crate::geometry::Polyhedron;
use crate::quantum::{CMatrix, CQChannel};

pub const SPEC_VERSION: u32 = 1;

/// A parse or validation failure, located in the source text when possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for SpecError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Classical,
    ClassicalQuantum,
}

#[derive(Clone, Debug)]
pub struct ChannelSpecFile {
    pub kind: Kind,
    pub model: AnyModel,
    pub constraint: Polyhedron,
    pub labels: Vec<String>,
    pub corpus: Option<String>,
    pub params: Option<CorpusParams>,
    pub output_truncation: Option<usize>,
}

/// A number written either as a JSON number or as a decimal string.
#[derive(Clone, Copy, Debug)]
struct Num {
    value: f64,
    quoted: bool,
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num { value: v, quoted: false })
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num { value: v as f64, quoted: false })
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num { value: v as f64, quoted: false })
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Num, E> {
                let value: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| E::custom(format!("`{s}` is not a decimal number")))?;
                if !value.is_finite() {
                    return Err(E::custom(format!("`{s}` is not finite")));
                }
                Ok(Num { value, quoted: true })
            }
        }
        d.deserialize_any(V)
    }
}

/// One row of a classical channel; checked as soon as it is read so errors point at it.
#[derive(Debug)]
struct ProbRow(Vec<Num>);

impl<'de> Deserialize<'de> for ProbRow {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let row = Vec::<Num>::deserialize(d)?;
        if row.is_empty() {
            return Err(de::Error::custom("channel row is empty"));
        }
        if let Some(x) = row.iter().find(|x| x.value < 0.0) {
            return Err(de::Error::custom(format!("channel row has a negative entry {}", x.value)));
        }
        let s: f64 = row.iter().map(|x| x.value).sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(de::Error::custom(format!("channel row sums to {s}, not 1")));
        }
        Ok(ProbRow(row))
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(Num),
    Complex([Num; 2]),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintBlock {
    #[serde(rename = "A", default)]
    a: Vec<Vec<Num>>,
    #[serde(default)]
    b: Vec<Num>,
    #[serde(rename = "Aeq", default)]
    aeq: Vec<Vec<Num>>,
    #[serde(default)]
    beq: Vec<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    version: u32,
    kind: Option<Kind>,
    matrix: Option<Vec<ProbRow>>,
    operators: Option<Vec<Vec<Vec<Entry>>>>,
    constraint: Option<ConstraintBlock>,
    labels: Option<Vec<String>>,
    corpus: Option<String>,
    params: Option<CorpusParams>,
    #[serde(default)]
    precise: bool,
}

fn plain(message: impl Into<String>) -> SpecError {
    SpecError {
        line: 0,
        column: 0,
        message: message.into(),
    }
}

fn nums<'a>(raw: &'a Raw) -> Box<dyn Iterator<Item = &'a Num> + 'a> {
    let m = raw.matrix.iter().flatten().flat_map(|r| r.0.iter());
    let ops = raw.operators.iter().flatten().flatten().flatten().flat_map(|e| match e {
        Entry::Real(x) => std::slice::from_ref(x).iter(),
        Entry::Complex(p) => p.iter(),
    });
    let c = raw.constraint.iter().flat_map(|c| {
        c.a.iter()
            .flatten()
            .chain(c.b.iter())
            .chain(c.aeq.iter().flatten())
            .chain(c.beq.iter())
    });
    Box::new(m.chain(ops).chain(c))
}

fn matrix_of(rows: &[Vec<Num>], n: usize, what: &str) -> Result<DMatrix<f64>, SpecError> {
    let mut m = DMatrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(plain(format!("{what} row {i} has {} entries, expected {n}", r.len())));
        }
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = x.value;
        }
    }
    Ok(m)
}

fn vector_of(v: &[Num]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|x| x.value))
}

fn operator_of(rows: &[Vec<Entry>], x: usize) -> Result<CMatrix, SpecError> {
    let d = rows.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(plain(format!("operator {x} is not square (row {i} has {} entries)", r.len())));
        }
        for (j, e) in r.iter().enumerate() {
            m[(i, j)] = match e {
                Entry::Real(a) => Complex64::new(a.value, 0.0),
                Entry::Complex([a, b]) => Complex64::new(a.value, b.value),
            };
        }
    }
    Ok(m)
}

fn constraint_of(block: &ConstraintBlock, n: usize) -> Result<Polyhedron, SpecError> {
    if block.a.len() != block.b.len() {
        return Err(plain(format!("constraint A has {} rows but b has {}", block.a.len(), block.b.len())));
    }
    if block.aeq.len() != block.beq.len() {
        return Err(plain(format!(
            "constraint Aeq has {} rows but beq has {}",
            block.aeq.len(),
            block.beq.len()
        )));
    }
    let user = Polyhedron::new(
        matrix_of(&block.a, n, "constraint A")?,
        vector_of(&block.b),
        matrix_of(&block.aeq, n, "constraint Aeq")?,
        vector_of(&block.beq),
    )
    .map_err(|e| plain(format!("constraint: {e}")))?;
    Polyhedron::simplex(n)
        .intersect(&user)
        .map_err(|e| plain(format!("constraint: {e}")))
}

/// Parses a channel file.
pub fn parse(text: &str) -> Result<ChannelSpecFile, SpecError> {
    let raw: Raw = serde_json::from_str(text).map_err(|e| SpecError {
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })?;
    if raw.version != SPEC_VERSION {
        return Err(plain(format!("unsupported version {}; expected {SPEC_VERSION}", raw.version)));
    }
    if raw.precise {
        if let Some(x) = nums(&raw).find(|x| !x.quoted) {
            return Err(plain(format!(
                "\"precise\": true requires every number as a decimal string; found the bare number {}",
                x.value
            )));
        }
    }
    if let Some(name) = &raw.corpus {
        if raw.matrix.is_some() || raw.operators.is_some() || raw.constraint.is_some() {
            return Err(plain("a corpus file cannot also give matrix, operators or constraint"));
        }
        let params = raw.params.unwrap_or_default();
        let e = corpus::build(name, params).map_err(|e| plain(e.to_string()))?;
        let kind = if e.model.is_quantum() { Kind::ClassicalQuantum } else { Kind::Classical };
        if raw.kind.is_some_and(|k| k != kind) {
            return Err(plain(format!("corpus entry `{name}` does not have the declared kind")));
        }
        let labels = labels_for(raw.labels, e.model.inputs())?;
        return Ok(ChannelSpecFile {
            kind,
            model: e.model,
            constraint: e.constraint,
            labels,
            corpus: Some(e.name),
            params: Some(params),
            output_truncation: e.output_truncation,
        });
    }
    if raw.params.is_some() {
        return Err(plain("\"params\" only applies to corpus files"));
    }
    let kind = raw.kind.ok_or_else(|| plain("missing field `kind`"))?;
    let model = match kind {
        Kind::Classical => {
            if raw.operators.is_some() {
                return Err(plain("a classical channel takes `matrix`, not `operators`"));
            }
            let rows = raw.matrix.as_ref().ok_or_else(|| plain("missing field `matrix`"))?;
            let rows = rows.iter().map(|r| r.0.iter().map(|x| x.value).collect()).collect();
            AnyModel::Classical(Channel::new(rows).map_err(|e| plain(e.to_string()))?)
        }
        Kind::ClassicalQuantum => {
            if raw.matrix.is_some() {
                return Err(plain("a classical-quantum channel takes `operators`, not `matrix`"));
            }
            let ops = raw.operators.as_ref().ok_or_else(|| plain("missing field `operators`"))?;
            let letters = ops
                .iter()
                .enumerate()
                .map(|(x, m)| operator_of(m, x))
                .collect::<Result<Vec<_>, _>>()?;
            AnyModel::Quantum(CQChannel::new(letters).map_err(|e| plain(e.to_string()))?)
        }
    };
    let n = model.inputs();
    let constraint = match &raw.constraint {
        Some(block) => constraint_of(block, n)?,
        None => Polyhedron::simplex(n),
    };
    Ok(ChannelSpecFile {
        kind,
        model,
        constraint,
        labels: labels_for(raw.labels, n)?,
        corpus: None,
        params: None,
        output_truncation: None,
    })
}

fn labels_for(labels: Option<Vec<String>>, n: usize) -> Result<Vec<String>, SpecError> {
    match labels {
        Some(l) if l.len() != n => Err(plain(format!("{} labels given for {n} input letters", l.len()))),
        Some(l) => Ok(l),
        None => Ok((0..n).map(|x| x.to_string()).collect()),
    }
}

pub fn load(path: &Path) -> Result<ChannelSpecFile, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| plain(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}
