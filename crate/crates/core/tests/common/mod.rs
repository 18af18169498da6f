#![allow(dead_code)]

use caidgeo::divergence::Channel;
use caidgeo::geometry::Polyhedron;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_channel(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Channel {
    Channel::new((0..n).map(|_| random_distribution(rng, m)).collect()).unwrap()
}

/// Simplex cut by `cuts` random halfspaces, each passing through a random interior point.
pub fn random_constraint(rng: &mut ChaCha8Rng, n: usize, cuts: usize) -> Polyhedron {
    let rows: Vec<(Vec<f64>, f64)> = (0..cuts)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = random_distribution(rng, n);
            let b = a.iter().zip(&p).map(|(x, y)| x * y).sum();
            (a, b)
        })
        .collect();
    Polyhedron::from_rows(n, &rows, &[]).unwrap()
}
