//! Independent oracles and instance builders shared by the integration tests.
#![allow(dead_code)]

use ctmc_ldp::graph::oriented_cycle_through;
use ctmc_ldp::{Chain, Flow};
use rand::Rng;

/// Φ(q, p) evaluated directly, for q, p > 0.
pub fn phi_direct(q: f64, p: f64) -> f64 {
    q * (q / p).ln() - (q - p)
}

/// Golden-section minimization of a unimodal function on [a, b].
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// sup_{q ≥ 0} { f q − Φ(q, w) } by a log-grid scan refined with golden section.
pub fn brute_force_edge_conjugate(w: f64, f: f64) -> f64 {
    let objective = |s: f64| {
        let q = s.exp();
        f * q - phi_direct(q, w)
    };
    let (lo, hi, steps) = (-60.0, 60.0, 2400);
    let h = (hi - lo) / steps as f64;
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..=steps {
        let s = lo + k as f64 * h;
        let v = objective(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let (_, v) = golden_min(|s| -objective(s), best.0 - h, best.0 + h, 200);
    // q = 0 gives −w.
    (-v).max(best.1).max(-w)
}

/// A random divergence-free flow: positive combination of oriented cycles
/// through randomly chosen edges.
pub fn random_circulation<R: Rng>(rng: &mut R, chain: &Chain, terms: usize) -> Flow {
    let allowed = vec![true; chain.n_edges()];
    let mut values = vec![0.0; chain.n_edges()];
    for _ in 0..terms {
        let id = rng.random_range(0..chain.n_edges());
        if let Some(cycle) = oriented_cycle_through(chain, &allowed, id) {
            let weight = rng.random_range(0.1..2.0);
            for pair in cycle.windows(2) {
                values[chain.edge_id(pair[0], pair[1]).unwrap()] += weight;
            }
        }
    }
    Flow::new(values).unwrap()
}

/// Maximum absolute entry of a vector.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
