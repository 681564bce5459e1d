//! Random test instances: irreducible chains, reversible chains and measures.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chain::{Chain, Measure};
use crate::error::Result;

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// An irreducible chain on `n` states: a random Hamiltonian cycle plus each
/// remaining ordered pair with probability `density`. Rates are log-uniform
/// on [0.1, 10].
pub fn random_chain<R: Rng>(rng: &mut R, n: usize, density: f64) -> Result<Chain> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = vec![false; n * n];
    let mut edges = Vec::new();
    if n > 1 {
        for k in 0..n {
            let (y, z) = (order[k], order[(k + 1) % n]);
            if !present[y * n + z] {
                present[y * n + z] = true;
                edges.push((y, z, log_uniform(rng, 0.1, 10.0)));
            }
        }
    }
    for y in 0..n {
        for z in 0..n {
            if y != z && !present[y * n + z] && rng.random_bool(density.clamp(0.0, 1.0)) {
                present[y * n + z] = true;
                edges.push((y, z, log_uniform(rng, 0.1, 10.0)));
            }
        }
    }
    Chain::from_rates(n, &edges)
}

/// A reversible chain with a known stationary law: symmetric conductances on
/// a random connected graph, r(y,z) = c(y,z) / π(y). Returns the chain and π.
pub fn random_reversible_chain<R: Rng>(
    rng: &mut R,
    n: usize,
    density: f64,
) -> Result<(Chain, Measure)> {
    let pi = random_measure(rng, n, 1.0)?;
    let mut pairs = Vec::new();
    let mut linked = vec![false; n * n];
    for z in 1..n {
        let y = rng.random_range(0..z);
        linked[y * n + z] = true;
        pairs.push((y, z));
    }
    for y in 0..n {
        for z in y + 1..n {
            if !linked[y * n + z] && rng.random_bool(density.clamp(0.0, 1.0)) {
                pairs.push((y, z));
            }
        }
    }
    let mut edges = Vec::with_capacity(2 * pairs.len());
    for (y, z) in pairs {
        let c = log_uniform(rng, 0.01, 1.0);
        edges.push((y, z, c / pi[y]));
        edges.push((z, y, c / pi[z]));
    }
    Ok((Chain::from_rates(n, &edges)?, pi))
}

/// A probability vector with weights log-uniform on [0.05, 1] before
/// normalization; each state is dropped from the support with probability
/// `1 − keep`, though at least one state is always kept.
pub fn random_measure<R: Rng>(rng: &mut R, n: usize, keep: f64) -> Result<Measure> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(keep.clamp(0.0, 1.0)) {
                log_uniform(rng, 0.05, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        let x = rng.random_range(0..n);
        w[x] = 1.0;
    }
    Measure::normalized(w)
}
