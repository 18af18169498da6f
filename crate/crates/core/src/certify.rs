//! Sampling checks of the decay bounds, converse curves, and reproductions of
//! the worked examples and the counterexample channel.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{solve_capacity, CapacitySolution, SolverOptions};
use crate::constants::{a_coefficient, fisher_matrix, kld_taylor_check, FisherMatrix, Theorem1Constants, Theorem2Constants};
use crate::corpus;
use crate::divergence::{binary_entropy, chi_divergence, kl_divergence, total_variation, Channel};
use crate::error::{Error, Result};
use crate::geometry::{Polyhedron, UnionOfCones};
use crate::linalg::null_space;
use crate::model::InformationModel;
use crate::pipeline::analyze;
use crate::special::{neg_zeta_prime_2, ZETA2, ZETA3};

/// Default tolerance for a bound to count as violated.
pub const SLACK: f64 = 1e-9;
/// Breaches up to this size are reported as warnings rather than violations.
pub const WARNING_BAND: f64 = 1e-6;
/// Samples per shard; shard `k` draws from its own stream so results do not depend on thread count.
pub const SHARD_SIZE: usize = 256;
/// Agreement required between a constructed base point and the recomputed projection.
pub const PROJECTION_AGREEMENT: f64 = 1e-8;

/// Tally of one inequality checked over many points.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Certificate {
    pub theorem: String,
    pub slack: f64,
    pub samples: usize,
    /// Points where the inequality fails by more than `slack`.
    pub violations: usize,
    /// The subset of `violations` whose breach is at most [`WARNING_BAND`].
    pub warnings: usize,
    #[serde(with = "crate::serde_ext::opt_float")]
    pub worst_margin: Option<f64>,
    #[serde(with = "crate::serde_ext::float_map")]
    pub constants: BTreeMap<String, f64>,
    pub projection_mismatches: usize,
}

impl Certificate {
    pub fn new(theorem: &str, slack: f64, constants: &[(&str, f64)]) -> Self {
        Certificate {
            theorem: theorem.to_string(),
            slack,
            samples: 0,
            violations: 0,
            warnings: 0,
            worst_margin: None,
            constants: constants.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            projection_mismatches: 0,
        }
    }

    /// Records `bound - value`; negative margins are failures.
    pub fn record(&mut self, margin: f64) {
        self.samples += 1;
        let m = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        self.worst_margin = Some(self.worst_margin.map_or(m, |w| w.min(m)));
        if m < -self.slack {
            self.violations += 1;
            if m >= -WARNING_BAND {
                self.warnings += 1;
            }
        }
    }

    /// Combines tallies of the same check; associative and commutative.
    pub fn merge(mut self, other: &Certificate) -> Certificate {
        self.samples += other.samples;
        self.violations += other.violations;
        self.warnings += other.warnings;
        self.projection_mismatches += other.projection_mismatches;
        self.worst_margin = match (self.worst_margin, other.worst_margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        for (k, v) in &other.constants {
            self.constants.entry(k.clone()).or_insert(*v);
        }
        self
    }

    /// Violations beyond the warning band.
    pub fn severe_violations(&self) -> usize {
        self.violations - self.warnings
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// A point of `Λ` together with its projection onto `Π`.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodSample {
    pub point: DVector<f64>,
    pub base: DVector<f64>,
    pub distance: f64,
    /// Built as `base + s d` with `d` in a pushover member, rather than by a random walk.
    pub constructed: bool,
    /// Whether the recomputed projection matched the construction.
    pub projection_agrees: bool,
}

/// One row of the per-sample CSV.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SampleRecord {
    pub distance: f64,
    pub info: f64,
    pub bound: f64,
    pub margin: f64,
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64 + 1);
    rng
}

/// Random convex combination with all weights positive.
fn random_combination(rng: &mut ChaCha8Rng, points: &[&DVector<f64>]) -> DVector<f64> {
    let w: Vec<f64> = points.iter().map(|_| rng.sample::<f64, _>(Exp1) + 1e-12).collect();
    let total: f64 = w.iter().sum();
    let mut out = DVector::zeros(points[0].len());
    for (p, wi) in points.iter().zip(&w) {
        out += *p * (wi / total);
    }
    out
}

fn random_optimal_point<M: InformationModel>(sol: &CapacitySolution<M>, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let verts: Vec<&DVector<f64>> = sol.optimal_vertices.iter().collect();
    random_combination(rng, &verts)
}

fn uniform_unit(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Nonzero direction in a member cone, or `None` if the draw vanished.
fn random_cone_direction(rng: &mut ChaCha8Rng, union: &UnionOfCones, k: usize) -> Result<Option<DVector<f64>>> {
    let g = union.members[k].cone.generators()?;
    let mut d = DVector::zeros(union.members[k].cone.dim());
    for r in &g.rays {
        d += r * rng.sample::<f64, _>(Exp1);
    }
    for j in 0..g.lineality.ncols() {
        d += g.lineality.column(j) * rng.sample::<f64, _>(StandardNormal);
    }
    Ok((d.norm() > 1e-12).then_some(d))
}

struct Walker<'a, M: InformationModel> {
    sol: &'a CapacitySolution<M>,
    affine: DMatrix<f64>,
    delta: f64,
    current: DVector<f64>,
}

impl<M: InformationModel> Walker<'_, M> {
    fn within(&self, p: &DVector<f64>) -> Result<bool> {
        Ok(self.sol.optimal_set.distance(p)? <= self.delta)
    }

    /// Largest `t` in `[0, hi]` (to bisection accuracy) keeping `current + t d` within `delta`.
    fn reach(&self, d: &DVector<f64>, hi: f64) -> Result<f64> {
        if !self.delta.is_finite() || self.within(&(&self.current + d * hi))? {
            return Ok(hi);
        }
        let (mut lo, mut hi) = (0.0, hi);
        for _ in 0..24 {
            let mid = 0.5 * (lo + hi);
            if self.within(&(&self.current + d * mid))? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        if self.affine.ncols() == 0 {
            return Ok(());
        }
        let z = DVector::from_fn(self.affine.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let d = &self.affine * z;
        let d = &d / d.norm();
        let up = self.sol.constraint.max_step(&self.current, &d);
        let down = self.sol.constraint.max_step(&self.current, &-&d);
        let up = self.reach(&d, up)?;
        let down = self.reach(&-&d, down)?;
        let t = -down + (up + down) * rng.random::<f64>();
        self.current = &self.current + d * t;
        Ok(())
    }
}

fn finish<M: InformationModel>(
    sol: &CapacitySolution<M>,
    mut point: DVector<f64>,
    constructed: Option<&DVector<f64>>,
) -> Result<NeighborhoodSample> {
    point.iter_mut().for_each(|x| *x = x.max(0.0));
    let pr = sol.optimal_set.project(&point)?;
    let agrees = constructed.is_none_or(|b| (b - &pr.point).norm() <= PROJECTION_AGREEMENT);
    Ok(NeighborhoodSample {
        distance: pr.distance,
        base: pr.point,
        point,
        constructed: constructed.is_some(),
        projection_agrees: agrees,
    })
}

/// Points of `Λ` within `delta` of `Π` (all of `Λ` when `delta` is infinite).
///
/// About four in five points are `base + s d` with `base` in the relative
/// interior of a face of `Π` and `d` drawn from the matching pushover member;
/// the rest come from a hit-and-run walk confined to the neighborhood.
/// Each point's projection is recomputed, and the recomputed one is stored.
pub fn sample_neighborhood<M: InformationModel>(
    sol: &CapacitySolution<M>,
    union: &UnionOfCones,
    delta: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<NeighborhoodSample>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("neighborhood radius {delta} must be positive")));
    }
    let (e, _) = sol.constraint.equalities();
    let affine = null_space(e, 1e-10);
    let usable: Vec<usize> = (0..union.len())
        .filter(|&k| union.members[k].cone.is_trivial().map(|t| !t).unwrap_or(false))
        .collect();
    let shards = count.div_ceil(SHARD_SIZE);
    let batches: Result<Vec<Vec<NeighborhoodSample>>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(seed, shard);
            let n = SHARD_SIZE.min(count - shard * SHARD_SIZE);
            let start = random_optimal_point(sol, &mut rng);
            let mut walker = Walker {
                sol,
                affine: affine.clone(),
                delta,
                current: start,
            };
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                if !usable.is_empty() && rng.random::<f64>() < 0.8 {
                    let k = usable[rng.random_range(0..usable.len())];
                    let m = &union.members[k];
                    let verts: Vec<&DVector<f64>> = m.face_vertices.iter().map(|&i| &union.inner_vertices[i]).collect();
                    let base = random_combination(&mut rng, &verts);
                    if let Some(d) = random_cone_direction(&mut rng, union, k)? {
                        let smax = sol.constraint.max_step(&base, &d).min(delta / d.norm());
                        if smax.is_finite() && smax > 0.0 {
                            let p = &base + &d * (smax * uniform_unit(&mut rng));
                            out.push(finish(sol, p, Some(&base))?);
                            continue;
                        }
                    }
                }
                walker.step(&mut rng)?;
                out.push(finish(sol, walker.current.clone(), None)?);
            }
            Ok(out)
        })
        .collect();
    Ok(batches?.into_iter().flatten().collect())
}

/// The vertices of `Λ`, as samples.
pub fn vertex_samples<M: InformationModel>(sol: &CapacitySolution<M>) -> Result<Vec<NeighborhoodSample>> {
    sol.constraint.vertices()?.into_iter().map(|v| finish(sol, v, None)).collect()
}

fn evaluate<M: InformationModel>(
    sol: &CapacitySolution<M>,
    samples: &[NeighborhoodSample],
    theorem: &str,
    constants: &[(&str, f64)],
    bound: impl Fn(f64) -> Option<f64> + Sync,
) -> (Certificate, Vec<SampleRecord>) {
    let rows: Vec<Option<SampleRecord>> = samples
        .par_iter()
        .map(|s| {
            bound(s.distance).map(|b| {
                let info = sol.information(&s.point);
                SampleRecord {
                    distance: s.distance,
                    info,
                    bound: b,
                    margin: b - info,
                }
            })
        })
        .collect();
    let mut cert = Certificate::new(theorem, SLACK, constants);
    let mut records = Vec::with_capacity(rows.len());
    for (s, r) in samples.iter().zip(rows) {
        if let Some(r) = r {
            cert.record(r.margin);
            if !s.projection_agrees {
                cert.projection_mismatches += 1;
            }
            records.push(r);
        }
    }
    (cert, records)
}

/// `I(P) <= C - Γ |P - proj P|^2` on samples within `delta`.
pub fn check_quadratic<M: InformationModel>(
    sol: &CapacitySolution<M>,
    gamma: f64,
    delta: f64,
    samples: &[NeighborhoodSample],
) -> (Certificate, Vec<SampleRecord>) {
    let c = sol.capacity;
    evaluate(
        sol,
        samples,
        "1",
        &[("capacity", c), ("gamma", gamma), ("delta", delta)],
        |d| (d <= delta * (1.0 + 1e-12)).then_some(c - gamma * d * d),
    )
}

pub fn certify_theorem1<M: InformationModel>(
    sol: &CapacitySolution<M>,
    consts: &Theorem1Constants,
    samples: &[NeighborhoodSample],
) -> (Certificate, Vec<SampleRecord>) {
    check_quadratic(sol, consts.gamma, consts.delta, samples)
}

/// `I(P) <= C - Γ₁ |P - proj P|` on every sample.
pub fn check_linear<M: InformationModel>(
    sol: &CapacitySolution<M>,
    gamma1: f64,
    samples: &[NeighborhoodSample],
) -> (Certificate, Vec<SampleRecord>) {
    let c = sol.capacity;
    evaluate(sol, samples, "2-linear", &[("capacity", c), ("gamma1", gamma1)], |d| Some(c - gamma1 * d))
}

/// `I(P) <= C - Γ₂ d^2 + A^3 d^3 / 2` on samples within `delta`.
pub fn check_quadratic_cubic<M: InformationModel>(
    sol: &CapacitySolution<M>,
    gamma2: f64,
    a_cubed: f64,
    delta: f64,
    samples: &[NeighborhoodSample],
) -> (Certificate, Vec<SampleRecord>) {
    let c = sol.capacity;
    evaluate(
        sol,
        samples,
        "2-quadratic",
        &[("capacity", c), ("gamma2", gamma2), ("a_cubed", a_cubed), ("delta", delta)],
        |d| (d <= delta * (1.0 + 1e-12)).then(|| c - gamma2 * d * d + 0.5 * a_cubed * d.powi(3)),
    )
}

/// Checks whichever branch applies; samples should cover all of `Λ` when `Γ₁ > 0`.
pub fn certify_theorem2<M: InformationModel>(
    sol: &CapacitySolution<M>,
    consts: &Theorem2Constants,
    samples: &[NeighborhoodSample],
) -> Result<(Certificate, Vec<SampleRecord>)> {
    if consts.gamma1.value > 0.0 {
        return Ok(check_linear(sol, consts.gamma1.value, samples));
    }
    match (&consts.gamma2, consts.delta) {
        (Some(g2), Some(delta)) if !consts.partial => {
            Ok(check_quadratic_cubic(sol, g2.value, consts.a_coeff.cubed, delta, samples))
        }
        _ => Err(Error::Degenerate("quadratic-branch constants are unavailable".into())),
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Linear,
    Quadratic,
}

/// Mutual information along `P(τ) = P̄ + τ v` with the two-sided envelopes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DecayCurve {
    pub branch: Branch,
    pub base: Vec<f64>,
    /// `v = P - P̄` for the endpoint `P` of the ray inside `Λ`.
    pub direction: Vec<f64>,
    pub tau: Vec<f64>,
    pub info: Vec<f64>,
    pub lower: Vec<f64>,
    /// Upper bound where the matching inequality applies.
    pub upper: Vec<Option<f64>>,
    pub certificate: Certificate,
}

/// Converse curve along the direction attaining `Γ₁` or `Γ₂`.
pub fn converse_curve<M: InformationModel>(
    sol: &CapacitySolution<M>,
    union: &UnionOfCones,
    consts: &Theorem2Constants,
    fisher: &FisherMatrix,
    branch: Branch,
    taus: &[f64],
) -> Result<DecayCurve> {
    let (dir, member) = match branch {
        Branch::Linear => (consts.gamma1_direction.clone(), consts.gamma1_member),
        Branch::Quadratic => match (&consts.gamma2_direction, consts.gamma2_member) {
            (Some(d), Some(m)) => (d.clone(), m),
            _ => return Err(Error::Degenerate("no quadratic-branch direction".into())),
        },
    };
    let u = DVector::from_vec(dir);
    let base = union.members[member].base.clone();
    let s = sol.constraint.max_step(&base, &u);
    if !(s.is_finite() && s > 1e-12) {
        return Err(Error::Degenerate("extremal direction leaves Λ immediately".into()));
    }
    let v = &u * s;
    let end = &base + &v;
    let (dist, proj) = sol.project_to_optimal(&end)?;
    if (&proj - &base).norm() > PROJECTION_AGREEMENT || (dist - s).abs() > PROJECTION_AGREEMENT {
        return Err(Error::Degenerate("extremal ray does not project onto its base".into()));
    }
    let c = sol.capacity;
    let g1 = consts.gamma1.value;
    let g2 = consts.gamma2.as_ref().map_or(0.0, |g| g.value);
    let a3 = consts.a_coeff.cubed;
    let tr = fisher.trace();
    let mut cert = Certificate::new(
        match branch {
            Branch::Linear => "2-linear-converse",
            Branch::Quadratic => "2-quadratic-converse",
        },
        SLACK,
        &[("capacity", c), ("step", s)],
    );
    let (mut info, mut lower, mut upper) = (Vec::new(), Vec::new(), Vec::new());
    for &t in taus {
        let p = &base + &v * t;
        let i = sol.information(&p);
        let d = s * t;
        let (lo, up) = match branch {
            Branch::Linear => (c - g1 * d - tr * d * d, Some(c - g1 * d)),
            Branch::Quadratic => {
                let within = consts.delta.is_some_and(|delta| d <= delta);
                (c - g2 * d * d - 0.5 * a3 * d.powi(3), within.then(|| c - g2 * d * d + 0.5 * a3 * d.powi(3)))
            }
        };
        cert.record(i - lo);
        if let Some(u) = up {
            cert.record(u - i);
        }
        info.push(i);
        lower.push(lo);
        upper.push(up);
    }
    Ok(DecayCurve {
        branch,
        base: base.iter().cloned().collect(),
        direction: v.iter().cloned().collect(),
        tau: taus.to_vec(),
        info,
        lower,
        upper,
        certificate: cert,
    })
}

/// `|D(q_P || q) - |P - P̄|_Σ^2 / 2| <= A^3 |P - P̄|^3 / 2` for `P̄` in `Π` and `P` in the support simplex.
pub fn taylor_envelope_sweep<M: InformationModel>(
    sol: &CapacitySolution<M>,
    fisher: &FisherMatrix,
    a_cubed: f64,
    count: usize,
    seed: u64,
) -> Result<Certificate> {
    let n = sol.support.len();
    let corners: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect();
    let corner_refs: Vec<&DVector<f64>> = corners.iter().collect();
    let shards = count.div_ceil(SHARD_SIZE);
    let parts: Result<Vec<Certificate>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(seed, shard);
            let mut cert = Certificate::new("taylor-envelope", SLACK, &[("a_cubed", a_cubed)]);
            for _ in 0..SHARD_SIZE.min(count - shard * SHARD_SIZE) {
                let pbar = random_optimal_point(sol, &mut rng);
                let far = random_combination(&mut rng, &corner_refs);
                let t = uniform_unit(&mut rng).powi(3);
                let p = &pbar + (far - &pbar) * t;
                let (lhs, env) = kld_taylor_check(&sol.model, &sol.center, fisher, a_cubed, &p, &pbar)?;
                cert.record(env - lhs);
            }
            Ok(cert)
        })
        .collect();
    let mut parts = parts?.into_iter();
    let first = parts.next().unwrap_or_else(|| Certificate::new("taylor-envelope", SLACK, &[("a_cubed", a_cubed)]));
    Ok(parts.fold(first, |a, b| a.merge(&b)))
}

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Pinsker, `ln(1 + χ²) >= KL` and `|KL - χ²/2| <= χ³/2` on random pairs.
///
/// One pair in ten has a reference distribution with an entry near `1e-8`.
pub fn divergence_sandwich_suite(trials: usize, sizes: &[usize], slack: f64, seed: u64) -> Certificate {
    let parts: Vec<Certificate> = sizes
        .par_iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut rng = shard_rng(seed, k);
            let mut cert = Certificate::new("divergence-sandwich", slack, &[]);
            for t in 0..trials {
                let w = random_distribution(&mut rng, n);
                let mut q = random_distribution(&mut rng, n);
                if t % 10 == 9 {
                    let i = rng.random_range(0..n);
                    q[i] = 1e-8 * (0.5 + rng.random::<f64>());
                    let s: f64 = q.iter().sum();
                    q.iter_mut().for_each(|x| *x /= s);
                }
                let w = if t % 10 == 4 {
                    let mix = rng.random::<f64>() * 1e-3;
                    w.iter().zip(&q).map(|(a, b)| b + mix * (a - b)).collect()
                } else {
                    w
                };
                let kl = kl_divergence(&w, &q);
                let tv = total_variation(&w, &q);
                let c2 = chi_divergence(&w, &q, 2.0).expect("valid order");
                let c3 = chi_divergence(&w, &q, 3.0).expect("valid order");
                cert.record(kl - 0.5 * tv * tv);
                cert.record(c2.ln_1p() - kl);
                cert.record(0.5 * c3 - (kl - 0.5 * c2).abs());
            }
            cert
        })
        .collect();
    parts
        .into_iter()
        .fold(Certificate::new("divergence-sandwich", slack, &[]), |a, b| a.merge(&b))
}

/// Fisher information of `θ -> q(P̄ + θ - (1ᵀθ) P̄)` at `θ = 0` by central differences of the log-likelihood.
pub fn fisher_finite_difference(w: &Channel, pbar: &[f64], h: f64) -> DMatrix<f64> {
    let n = w.inputs();
    let q0 = w.output(pbar);
    let loglik = |theta: &[f64]| -> f64 {
        let s: f64 = theta.iter().sum();
        let p: Vec<f64> = (0..n).map(|x| pbar[x] + theta[x] - s * pbar[x]).collect();
        let q = w.output(&p);
        q0.iter().zip(&q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * b.ln()).sum()
    };
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let at = |si: f64, sj: f64| {
                let mut t = vec![0.0; n];
                t[i] += si * h;
                t[j] += sj * h;
                loglik(&t)
            };
            let d2 = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
            out[(i, j)] = -d2;
            out[(j, i)] = -d2;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Example1Report {
    pub taus: Vec<f64>,
    /// `(C - I(p_τ)) / |p_τ - proj p_τ|^4`.
    pub ratios: Vec<f64>,
    pub extrapolated_ratio: f64,
    pub fit_taus: Vec<f64>,
    pub fitted_exponent: f64,
    /// `(C - I) / distance^2` on the fit grid; tends to zero.
    pub quadratic_ratios: Vec<f64>,
    /// Largest deviation of the distance from `(√6/6)|sin(τ/2)|`.
    pub distance_formula_error: f64,
    /// Largest deviation of `q_{p_τ}` from `q + [sin²(τ/2)/3, -sin²(τ/2)/3]`.
    pub output_formula_error: f64,
    /// `|ln 2 - I(p_τ)| - D(q_{p_τ} || q)` at the largest `τ`, comparing the two evaluation routes.
    pub route_agreement: f64,
}

fn example1_shortfall(tau: f64) -> (f64, f64, Vec<f64>) {
    let w = corpus::example1_channel();
    let p = corpus::example1_point(tau);
    let q = w.output(&p);
    let dist = p
        .iter()
        .zip(&corpus::EXAMPLE1_OPTIMUM)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    (kl_divergence(&q, &[0.5, 0.5]), dist, q)
}

/// Fourth-power decay on the boundary of the ball constraint.
pub fn example1_fourth_power() -> Example1Report {
    let taus = vec![0.2, 0.1, 0.05];
    let ratios: Vec<f64> = taus
        .iter()
        .map(|&t| {
            let (gap, d, _) = example1_shortfall(t);
            gap / d.powi(4)
        })
        .collect();
    let r1a = (4.0 * ratios[1] - ratios[0]) / 3.0;
    let r1b = (4.0 * ratios[2] - ratios[1]) / 3.0;
    let extrapolated = (16.0 * r1b - r1a) / 15.0;
    let fit_taus: Vec<f64> = (0..6).map(|k| 0.2 / 2f64.powi(k)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut quadratic = Vec::new();
    let (mut dist_err, mut out_err) = (0f64, 0f64);
    for &t in &fit_taus {
        let (gap, d, q) = example1_shortfall(t);
        xs.push(d.ln());
        ys.push(gap.ln());
        quadratic.push(gap / (d * d));
        let s2 = (t / 2.0).sin().powi(2);
        dist_err = dist_err.max((d - (6f64.sqrt() / 6.0) * (t / 2.0).sin().abs()).abs());
        out_err = out_err.max((q[0] - 0.5 - s2 / 3.0).abs()).max((q[1] - 0.5 + s2 / 3.0).abs());
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let w = corpus::example1_channel();
    let (gap, _, _) = example1_shortfall(taus[0]);
    let generic = 2f64.ln() - w.mutual_information(&corpus::example1_point(taus[0]));
    Example1Report {
        taus,
        ratios,
        extrapolated_ratio: extrapolated,
        fit_taus,
        fitted_exponent: sxy / sxx,
        quadratic_ratios: quadratic,
        distance_formula_error: dist_err,
        output_formula_error: out_err,
        route_agreement: (generic - gap).abs(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolygonRow {
    pub sides: usize,
    pub capacity: f64,
    pub gamma: f64,
    pub gamma1: f64,
    #[serde(with = "crate::serde_ext::opt_float")]
    pub gamma2: Option<f64>,
}

/// Constants for inscribed polygons approximating the ball; they shrink as the side count grows.
pub fn example1_polygon_sweep(sides: &[usize], seed: u64) -> Result<Vec<PolygonRow>> {
    let w = corpus::example1_channel();
    sides
        .iter()
        .map(|&k| {
            let an = analyze(&w, &corpus::example1_polygon(k)?, &SolverOptions::default())?;
            let t1 = an.theorem1(seed)?;
            let t2 = an.theorem2(seed)?;
            Ok(PolygonRow {
                sides: k,
                capacity: an.solution.capacity,
                gamma: t1.gamma,
                gamma1: t2.gamma1.value,
                gamma2: t2.gamma2.map(|g| g.value),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Example2Row {
    pub k: usize,
    pub info: f64,
    /// `ln 2 - I(p_k)` from the solver's model.
    pub shortfall: f64,
    /// Binary entropy of the row, the closed form of the shortfall.
    pub shortfall_closed: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Example2Report {
    pub max_index: usize,
    pub capacity: f64,
    pub optimal_vertices: Vec<Vec<f64>>,
    pub rows: Vec<Example2Row>,
    pub info_increasing: bool,
    /// `(τ, distance, shortfall, τ · shortfall(p_K))` along the segment from `p_1` to `p_K`.
    pub segment: Vec<[f64; 4]>,
}

/// Truncated tanh channel: capacity `ln 2`, unit distance of every `p_k`, vanishing shortfall.
pub fn example2_truncation(max_index: usize) -> Result<Example2Report> {
    if max_index < 2 {
        return Err(Error::InvalidInput("truncation must be at least 2".into()));
    }
    let k_max = max_index;
    let w = corpus::example2_channel(k_max);
    let n = w.inputs();
    let sol = solve_capacity(&w, &Polyhedron::simplex(n), &SolverOptions::default())?;
    let pk = |k: usize| {
        let mut p = vec![0.0; n];
        p[k_max + k] = 0.5;
        p[k_max - k] = 0.5;
        p
    };
    let mut rows = Vec::new();
    for k in 2..=k_max {
        let p = pk(k);
        let info = w.mutual_information(&p);
        let (distance, _) = sol.project_to_optimal(&sol.reduce(&p)?)?;
        rows.push(Example2Row {
            k,
            info,
            shortfall: 2f64.ln() - info,
            shortfall_closed: binary_entropy(1.0 / (1.0 + (2.0 * k as f64).exp())),
            distance,
        });
    }
    let info_increasing = rows.windows(2).all(|r| r[1].info > r[0].info);
    let p1 = DVector::from_vec(pk(1));
    let pk_far = DVector::from_vec(pk(k_max));
    let far_short = 2f64.ln() - w.mutual_information(pk_far.as_slice());
    let mut segment = Vec::new();
    for t in [0.125, 0.25, 0.5, 0.75, 1.0] {
        let p = &p1 * (1.0 - t) + &pk_far * t;
        let (d, _) = sol.project_to_optimal(&sol.reduce(p.as_slice())?)?;
        segment.push([t, d, 2f64.ln() - w.mutual_information(p.as_slice()), t * far_short]);
    }
    Ok(Example2Report {
        max_index,
        capacity: sol.capacity,
        optimal_vertices: sol.optimal_vertices.iter().map(|v| sol.expand(v)).collect(),
        rows,
        info_increasing,
        segment,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZetaRow {
    pub truncation: usize,
    pub capacity: f64,
    pub sigma00: f64,
    pub sigma01: f64,
    /// `D(W(0) || q)` on the truncated alphabet.
    pub divergence0: f64,
    #[serde(with = "crate::serde_ext::float")]
    pub a: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZetaReport {
    pub n: usize,
    pub threshold: usize,
    /// `ln sqrt(n - 1)`.
    pub capacity_closed: f64,
    /// `ln(2ζ(3)/ζ(2)) - ζ'(2)/ζ(2)`.
    pub divergence0_closed: f64,
    pub rows: Vec<ZetaRow>,
    pub sigma00_increasing: bool,
    /// Ratios of successive `Σ(0,0)` estimates.
    pub growth_ratios: Vec<f64>,
}

/// Zeta-tailed channel: capacity, growth of `Σ(0,0)` under output truncation, and `Σ(0,1) = 0`.
pub fn example3_zeta(n: usize, truncations: &[usize]) -> Result<ZetaReport> {
    let threshold = corpus::zeta_threshold();
    if n < threshold {
        return Err(Error::InvalidInput(format!("n = {n} is below the threshold {threshold}")));
    }
    let mut rows = Vec::new();
    for &t in truncations {
        let w = corpus::zeta_channel(n, t);
        let sol = &solve_capacity(&w, &Polyhedron::simplex(n), &SolverOptions::default())?;
        let fisher = fisher_matrix(&sol.model, &sol.center);
        let a = a_coefficient(&sol.model, &sol.center, &fisher);
        let i0 = sol.support.iter().position(|&x| x == 0);
        let i1 = sol.support.iter().position(|&x| x == 1);
        let (i0, i1) = match (i0, i1) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Degenerate("letters 0 and 1 must be in the support".into())),
        };
        rows.push(ZetaRow {
            truncation: t,
            capacity: sol.capacity,
            sigma00: fisher.entries()[(i0, i0)],
            sigma01: fisher.entries()[(i0, i1)],
            divergence0: sol.gradient[i0],
            a: a.value,
        });
    }
    let growth_ratios: Vec<f64> = rows.windows(2).map(|r| r[1].sigma00 / r[0].sigma00).collect();
    Ok(ZetaReport {
        n,
        threshold,
        capacity_closed: 0.5 * ((n - 1) as f64).ln(),
        divergence0_closed: (2.0 * ZETA3 / ZETA2).ln() + neg_zeta_prime_2() / ZETA2,
        sigma00_increasing: rows.windows(2).all(|r| r[1].sigma00 > r[0].sigma00),
        growth_ratios,
        rows,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AppendixBReport {
    pub epsilon: f64,
    pub root_residual: f64,
    pub capacity: f64,
    /// `(1 - ε) ln 5`.
    pub capacity_closed: f64,
    pub maximizer: Vec<f64>,
    /// `max_x |D(W(x) || q) - C|`.
    pub gradient_deviation: f64,
    pub kernel_dimension: usize,
    /// `|Wᵀ U|` for the integer kernel vector `U`.
    pub kernel_residual: f64,
    pub u_dot_gradient: f64,
    /// Input distribution used to refute the linear kernel bound.
    pub refuting_point: Vec<f64>,
    /// Projection of `P - P̄` onto `ker W`.
    pub v0: Vec<f64>,
    pub v0_norm: f64,
    pub v0_dot_gradient: f64,
    /// `‖v₀‖ > 0` while `v₀ᵀ∇I = 0`, so no positive `Γ` works.
    pub refuted: bool,
}

/// The nine-letter channel whose kernel is orthogonal to the gradient on the optimal set.
pub fn appendix_b_counterexample() -> Result<AppendixBReport> {
    let eps = corpus::appendix_b_epsilon();
    let target = 3f64.sqrt() * 2f64.cbrt() / 10.0;
    let w = corpus::appendix_b_channel(eps);
    let n = w.inputs();
    let sol = solve_capacity(&w, &Polyhedron::simplex(n), &SolverOptions::default())?;
    let g = DVector::from_vec(sol.expand(&sol.gradient));
    let c = sol.capacity;
    let gradient_deviation = sol.gradient.iter().map(|x| (x - c).abs()).fold(0.0, f64::max);
    let kernel = crate::capacity::channel_kernel(&w);
    let u = DVector::from_column_slice(&corpus::APPENDIX_B_KERNEL);
    let kernel_residual = (w.to_matrix().transpose() * &u).norm();
    let pbar = DVector::from_vec(sol.expand(&sol.maximizer));
    let mut p = DVector::zeros(n);
    p[5] = 1.0;
    let v0 = kernel.project(&(&p - &pbar));
    let v0_norm = v0.norm();
    let v0_dot = v0.dot(&g);
    Ok(AppendixBReport {
        epsilon: eps,
        root_residual: (eps * 5f64.powf(-eps) - target).abs(),
        capacity: c,
        capacity_closed: (1.0 - eps) * 5f64.ln(),
        maximizer: pbar.iter().cloned().collect(),
        gradient_deviation,
        kernel_dimension: kernel.dim(),
        kernel_residual,
        u_dot_gradient: u.dot(&g),
        refuting_point: p.iter().cloned().collect(),
        v0: v0.iter().cloned().collect(),
        v0_norm,
        v0_dot_gradient: v0_dot,
        refuted: v0_norm > 1e-6 && v0_dot.abs() <= 1e-9 * (1.0 + g.norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{pushover_of, theorem1_constants};

    fn identity_half() -> CapacitySolution<Channel> {
        let w = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let lam = Polyhedron::from_rows(2, &[(vec![1.0, 0.0], 0.3)], &[]).unwrap();
        solve_capacity(&w, &lam, &SolverOptions::default()).unwrap()
    }

    #[test]
    fn merge_is_associative() {
        let mk = |ms: &[f64]| {
            let mut c = Certificate::new("x", SLACK, &[]);
            ms.iter().for_each(|m| c.record(*m));
            c
        };
        let (a, b, c) = (mk(&[0.1, -1e-8]), mk(&[-1.0]), mk(&[0.0, 2.0]));
        let left = a.clone().merge(&b).merge(&c);
        let right = a.merge(&b.merge(&c));
        assert_eq!(left, right);
        assert_eq!(left.violations, 2);
        assert_eq!(left.warnings, 1);
        assert_eq!(left.worst_margin, Some(-1.0));
    }

    #[test]
    fn sampling_is_deterministic_and_within_radius() {
        let sol = identity_half();
        let union = pushover_of(&sol).unwrap();
        let a = sample_neighborhood(&sol, &union, 0.2, 600, 3).unwrap();
        let b = sample_neighborhood(&sol, &union, 0.2, 600, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 600);
        assert!(a.iter().all(|s| s.distance <= 0.2 + 1e-12 && s.projection_agrees));
        assert!(a.iter().any(|s| !s.constructed));
        assert!(sample_neighborhood(&sol, &union, 0.2, 0, 3).unwrap().is_empty());
    }

    #[test]
    fn optimal_point_has_zero_margin() {
        let sol = identity_half();
        let union = pushover_of(&sol).unwrap();
        let t1 = theorem1_constants(&sol, &union, 0).unwrap();
        let s = finish(&sol, sol.maximizer.clone(), None).unwrap();
        let (cert, rec) = certify_theorem1(&sol, &t1, &[s]);
        assert!(cert.passed());
        assert!(rec[0].margin.abs() < 1e-9);
    }

    #[test]
    fn sandwich_suite_small() {
        let c = divergence_sandwich_suite(200, &[2, 5], 1e-12, 1);
        assert_eq!(c.samples, 1200);
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn finite_difference_fisher_matches_identity() {
        let w = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let f = fisher_finite_difference(&w, &[0.5, 0.5], 1e-4);
        let want = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((f - want).amax() < 1e-6);
    }
}
