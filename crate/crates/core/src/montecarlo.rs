//! Trajectory simulation, empirical measure and flow, and Monte Carlo
//! estimates of large-deviation decay rates.
//!
//! Randomness: every path is driven by its own `ChaCha8Rng` seeded through
//! `SeedableRng::seed_from_u64`. Estimators derive per-sample seeds from a
//! master seed with SplitMix64, so results depend only on
//! `(master seed, horizon index, sample index)` and not on how samples are
//! spread over threads. Holding times use the inverse CDF −ln(U)/r with
//! U ∈ (0, 1].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{Chain, Flow, Measure, VertexFn};
use crate::config::EXP_GUARD;
use crate::error::{Error, Result};

/// Identifier recorded in outputs so seeds can be replayed elsewhere.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64+splitmix64";

/// A path on [0, T]: initial state and `(jump time, destination)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: usize,
    pub jumps: Vec<(f64, usize)>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> usize {
        self.jumps.last().map_or(self.initial, |j| j.1)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sample `index` in stream `stream` under a master seed.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

/// Gillespie loop over edge rates `rates` (indexed like the chain's edges).
#[allow(clippy::too_many_arguments)]
fn run_path<R: Rng>(
    chain: &Chain,
    rates: &[f64],
    exit: &[f64],
    x0: usize,
    horizon: f64,
    rng: &mut R,
    mut on_hold: impl FnMut(usize, f64),
    mut on_jump: impl FnMut(f64, usize),
) {
    let mut t = 0.0;
    let mut x = x0;
    loop {
        let total = exit[x];
        let hold = if total > 0.0 {
            let u: f64 = 1.0 - rng.random::<f64>();
            -u.ln() / total
        } else {
            f64::INFINITY
        };
        if t + hold > horizon {
            on_hold(x, horizon - t);
            return;
        }
        on_hold(x, hold);
        t += hold;
        let target = rng.random::<f64>() * total;
        let out = chain.out_edges(x);
        let mut acc = 0.0;
        let mut chosen = *out.last().expect("positive exit rate implies an edge");
        for &id in out {
            acc += rates[id];
            if target < acc {
                chosen = id;
                break;
            }
        }
        on_jump(t, chosen);
        x = chain.edge(chosen).to;
    }
}

fn check_start(chain: &Chain, x0: usize, horizon: f64) -> Result<()> {
    if x0 >= chain.n_states() {
        return Err(Error::StateOutOfRange(x0));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::OutOfRange(format!("horizon {horizon} must be positive")));
    }
    Ok(())
}

pub fn simulate(chain: &Chain, x0: usize, horizon: f64, seed: u64) -> Result<Trajectory> {
    check_start(chain, x0, horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jumps = Vec::new();
    run_path(
        chain,
        chain.rates(),
        chain.exit_rates(),
        x0,
        horizon,
        &mut rng,
        |_, _| {},
        |t, id| jumps.push((t, chain.edge(id).to)),
    );
    Ok(Trajectory {
        initial: x0,
        jumps,
        horizon,
    })
}

/// Empirical measure μ_T and flow Q_T of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPair {
    pub measure: Measure,
    pub flow: Flow,
    /// Jump counts T·Q_T per edge.
    pub counts: Vec<u64>,
    pub horizon: f64,
}

fn occupation(chain: &Chain, traj: &Trajectory) -> Result<Measure> {
    let mut occ = vec![0.0; chain.n_states()];
    let mut t = 0.0;
    let mut x = traj.initial;
    for &(time, to) in &traj.jumps {
        occ[x] += time - t;
        t = time;
        x = to;
    }
    occ[x] += traj.horizon - t;
    Measure::normalized(occ)
}

fn jump_counts(chain: &Chain, traj: &Trajectory, upto: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; chain.n_edges()];
    let mut x = traj.initial;
    for &(_, to) in &traj.jumps[..upto] {
        let id = chain
            .edge_id(x, to)
            .ok_or_else(|| Error::InvalidFlow(format!("jump ({x}, {to}) is not an edge")))?;
        counts[id] += 1;
        x = to;
    }
    Ok(counts)
}

pub fn empirical_pair(chain: &Chain, traj: &Trajectory) -> Result<EmpiricalPair> {
    let measure = occupation(chain, traj)?;
    let counts = jump_counts(chain, traj, traj.jumps.len())?;
    let flow = Flow::new(counts.iter().map(|&c| c as f64 / traj.horizon).collect())?;
    Ok(EmpiricalPair {
        measure,
        flow,
        counts,
        horizon: traj.horizon,
    })
}

/// Like [`empirical_pair`], but the flow keeps only jumps up to the last
/// return to the initial state, which makes the counts a circulation.
pub fn closed_empirical_pair(chain: &Chain, traj: &Trajectory) -> Result<EmpiricalPair> {
    let measure = occupation(chain, traj)?;
    let upto = traj
        .jumps
        .iter()
        .rposition(|j| j.1 == traj.initial)
        .map_or(0, |k| k + 1);
    let counts = jump_counts(chain, traj, upto)?;
    let flow = Flow::new(counts.iter().map(|&c| c as f64 / traj.horizon).collect())?;
    Ok(EmpiricalPair {
        measure,
        flow,
        counts,
        horizon: traj.horizon,
    })
}

/// Integer divergence of jump counts: exits minus entries per state.
pub fn count_divergence(chain: &Chain, counts: &[u64]) -> Vec<i64> {
    let mut div = vec![0i64; chain.n_states()];
    for (e, &c) in chain.edges().iter().zip(counts) {
        div[e.from] += c as i64;
        div[e.to] -= c as i64;
    }
    div
}

/// Σ_x c_x μ(x) ≥ θ.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub coefficients: Vec<f64>,
    pub threshold: f64,
}

/// Intersection of half-spaces of the simplex; empty means the whole simplex.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Event {
    pub constraints: Vec<HalfSpace>,
}

impl Event {
    pub fn whole() -> Self {
        Event::default()
    }

    /// μ(x) ≥ θ.
    pub fn at_least(n: usize, x: usize, threshold: f64) -> Self {
        let mut coefficients = vec![0.0; n];
        coefficients[x] = 1.0;
        Event {
            constraints: vec![HalfSpace {
                coefficients,
                threshold,
            }],
        }
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        self.constraints.iter().all(|h| {
            h.coefficients.iter().zip(mu).map(|(c, m)| c * m).sum::<f64>() >= h.threshold
        })
    }

    fn check(&self, n: usize) -> Result<()> {
        for h in &self.constraints {
            if h.coefficients.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: h.coefficients.len(),
                });
            }
        }
        Ok(())
    }
}

fn occupation_fractions(
    chain: &Chain,
    rates: &[f64],
    exit: &[f64],
    x0: usize,
    horizon: f64,
    seed: u64,
    occ: &mut [f64],
) {
    occ.iter_mut().for_each(|o| *o = 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_path(chain, rates, exit, x0, horizon, &mut rng, |x, dt| occ[x] += dt, |_, _| {});
    for o in occ.iter_mut() {
        *o /= horizon;
    }
}

/// A Monte Carlo probability estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub samples: usize,
    pub hits: usize,
}

/// Plain Monte Carlo estimate of P_{x0}(μ_T ∈ event).
pub fn estimate_probability(
    chain: &Chain,
    x0: usize,
    event: &Event,
    horizon: f64,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<ProbabilityEstimate> {
    check_start(chain, x0, horizon)?;
    event.check(chain.n_states())?;
    if samples == 0 {
        return Err(Error::OutOfRange("sample count must be positive".into()));
    }
    let n = chain.n_states();
    let hits = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |occ, i| {
                occupation_fractions(
                    chain,
                    chain.rates(),
                    chain.exit_rates(),
                    x0,
                    horizon,
                    derive_seed(seed, stream, i),
                    occ,
                );
                event.contains(occ) as usize
            },
        )
        .sum::<usize>();
    let p = hits as f64 / samples as f64;
    Ok(ProbabilityEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        hits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonEstimate {
    pub horizon: f64,
    pub estimate: ProbabilityEstimate,
    /// −(1/T) log P̂, when at least one hit was observed.
    pub slope: Option<f64>,
    pub slope_std_error: Option<f64>,
    /// With zero hits: −(1/T) log(3/n), a one-sided 95% lower bound on the slope.
    pub slope_lower_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate {
    pub per_horizon: Vec<HorizonEstimate>,
    /// Intercept a of the weighted fit slope(T) ≈ a + b/T.
    pub slope: Option<f64>,
    pub slope_std_error: Option<f64>,
    pub finite_size_coefficient: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub rng: &'static str,
}

pub fn estimate_ldp_slope(
    chain: &Chain,
    x0: usize,
    event: &Event,
    horizons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SlopeEstimate> {
    if horizons.is_empty() || horizons.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::OutOfRange("horizons must be nonempty and increasing".into()));
    }
    let mut per_horizon = Vec::with_capacity(horizons.len());
    for (k, &t) in horizons.iter().enumerate() {
        let estimate = estimate_probability(chain, x0, event, t, samples, seed, k as u64)?;
        let (slope, slope_std_error, slope_lower_bound) = if estimate.hits > 0 {
            let p = estimate.probability;
            // Delta method: sd(log p̂) ≈ sqrt((1 − p) / (n p)).
            let se = ((1.0 - p) / (samples as f64 * p)).sqrt() / t;
            (Some(-p.ln() / t), Some(se), None)
        } else {
            (None, None, Some(-(3.0 / samples as f64).ln() / t))
        };
        per_horizon.push(HorizonEstimate {
            horizon: t,
            estimate,
            slope,
            slope_std_error,
            slope_lower_bound,
        });
    }
    let (slope, slope_std_error, finite_size_coefficient) = extrapolate(&per_horizon);
    Ok(SlopeEstimate {
        per_horizon,
        slope,
        slope_std_error,
        finite_size_coefficient,
        samples,
        seed,
        rng: RNG_ALGORITHM,
    })
}

/// Weighted least squares of slope(T) = a + b/T; returns (a, se(a), b).
fn extrapolate(points: &[HorizonEstimate]) -> (Option<f64>, Option<f64>, Option<f64>) {
    let data: Vec<(f64, f64, f64)> = points
        .iter()
        .filter_map(|h| {
            let s = h.slope?;
            let se = h.slope_std_error?.max(1e-12);
            Some((1.0 / h.horizon, s, 1.0 / (se * se)))
        })
        .collect();
    match data.len() {
        0 => (None, None, None),
        1 => {
            let (_, s, w) = data[0];
            (Some(s), Some(w.recip().sqrt()), None)
        }
        _ => {
            let (mut sw, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &(x, y, w) in &data {
                sw += w;
                sx += w * x;
                sxx += w * x * x;
                sy += w * y;
                sxy += w * x * y;
            }
            let det = sw * sxx - sx * sx;
            let a = (sxx * sy - sx * sxy) / det;
            let b = (sw * sxy - sx * sy) / det;
            (Some(a), Some((sxx / det).sqrt()), Some(b))
        }
    }
}

fn tilted_rates(chain: &Chain, g: &VertexFn) -> Result<(Vec<f64>, Vec<f64>)> {
    chain.check_vertex_len(g.len())?;
    let mut rates = Vec::with_capacity(chain.n_edges());
    let mut exit = vec![0.0; chain.n_states()];
    for (id, e) in chain.edges().iter().enumerate() {
        let step = g[e.to] - g[e.from];
        if step.abs() > EXP_GUARD {
            return Err(Error::Overflow(step));
        }
        let r = chain.rate(id) * step.exp();
        rates.push(r);
        exit[e.from] += r;
    }
    Ok((rates, exit))
}

/// Simulates under the tilted rates r(y,z) e^{g(z)−g(y)} and returns the
/// log likelihood ratio of the original law against the tilted one:
/// Σ_jumps (g(from) − g(to)) + ∫₀^T (r̃(X_t) − r(X_t)) dt.
pub fn tilted_simulate(
    chain: &Chain,
    g: &VertexFn,
    x0: usize,
    horizon: f64,
    seed: u64,
) -> Result<(Trajectory, f64)> {
    check_start(chain, x0, horizon)?;
    let (rates, exit) = tilted_rates(chain, g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jumps = Vec::new();
    let mut hold_part = 0.0;
    let mut jump_part = 0.0;
    run_path(
        chain,
        &rates,
        &exit,
        x0,
        horizon,
        &mut rng,
        |x, dt| hold_part += (exit[x] - chain.exit_rates()[x]) * dt,
        |t, id| {
            let e = chain.edge(id);
            jump_part += g[e.from] - g[e.to];
            jumps.push((t, e.to));
        },
    );
    let log_weight = jump_part + hold_part;
    Ok((
        Trajectory {
            initial: x0,
            jumps,
            horizon,
        },
        log_weight,
    ))
}

/// Importance-sampling estimate of P_{x0}(μ_T ∈ event) under the tilt by `g`.
pub fn estimate_tilted_probability(
    chain: &Chain,
    g: &VertexFn,
    x0: usize,
    event: &Event,
    horizon: f64,
    samples: usize,
    seed: u64,
) -> Result<ProbabilityEstimate> {
    check_start(chain, x0, horizon)?;
    event.check(chain.n_states())?;
    if samples == 0 {
        return Err(Error::OutOfRange("sample count must be positive".into()));
    }
    let (rates, exit) = tilted_rates(chain, g)?;
    let n = chain.n_states();
    let (sum, sum_sq, hits) = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |occ, i| {
                occ.iter_mut().for_each(|o| *o = 0.0);
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX, i));
                let mut hold_part = 0.0;
                let mut jump_part = 0.0;
                run_path(
                    chain,
                    &rates,
                    &exit,
                    x0,
                    horizon,
                    &mut rng,
                    |x, dt| {
                        occ[x] += dt;
                        hold_part += (exit[x] - chain.exit_rates()[x]) * dt;
                    },
                    |_, id| {
                        let e = chain.edge(id);
                        jump_part += g[e.from] - g[e.to];
                    },
                );
                let log_weight = jump_part + hold_part;
                for o in occ.iter_mut() {
                    *o /= horizon;
                }
                if event.contains(occ) {
                    let w = log_weight.exp();
                    (w, w * w, 1usize)
                } else {
                    (0.0, 0.0, 0)
                }
            },
        )
        .reduce(|| (0.0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
    Ok(ProbabilityEstimate {
        probability: mean,
        std_error: (var / m).sqrt(),
        samples,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gradient;

    fn unit_two_state() -> Chain {
        Chain::from_rates(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap()
    }

    #[test]
    fn short_horizon_has_no_jumps() {
        let c = Chain::from_rates(2, &[(0, 1, 1e-9), (1, 0, 1.0)]).unwrap();
        let traj = simulate(&c, 0, 1.0, 7).unwrap();
        assert!(traj.jumps.is_empty());
        let pair = empirical_pair(&c, &traj).unwrap();
        assert_eq!(pair.measure.weights(), &[1.0, 0.0]);
        assert_eq!(pair.flow.norm_l1(), 0.0);
    }

    #[test]
    fn reproducible() {
        let c = unit_two_state();
        assert_eq!(simulate(&c, 0, 50.0, 3).unwrap(), simulate(&c, 0, 50.0, 3).unwrap());
        assert_ne!(simulate(&c, 0, 50.0, 3).unwrap(), simulate(&c, 0, 50.0, 4).unwrap());
    }

    #[test]
    fn jump_count_concentrates() {
        // Mean jump rate ⟨π, r⟩ = 1; the count is close to Poisson(T).
        let c = unit_two_state();
        let t = 1e4;
        let traj = simulate(&c, 0, t, 11).unwrap();
        let n = traj.jumps.len() as f64;
        assert!((n - t).abs() <= 5.0 * t.sqrt(), "{n} jumps");
        let times: Vec<f64> = traj.jumps.iter().map(|j| j.0).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!(times.iter().all(|&s| s > 0.0 && s <= t));
    }

    #[test]
    fn divergence_telescopes() {
        let c = Chain::from_rates(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 0.5), (1, 0, 1.0)]).unwrap();
        let traj = simulate(&c, 1, 30.0, 5).unwrap();
        let pair = empirical_pair(&c, &traj).unwrap();
        let div = count_divergence(&c, &pair.counts);
        let mut expected = vec![0i64; 3];
        expected[traj.initial] += 1;
        expected[traj.final_state()] -= 1;
        assert_eq!(div, expected);
        let closed = closed_empirical_pair(&c, &traj).unwrap();
        assert!(count_divergence(&c, &closed.counts).iter().all(|&d| d == 0));
    }

    #[test]
    fn tilt_by_constant_is_neutral() {
        let c = unit_two_state();
        let (traj, w) = tilted_simulate(&c, &VertexFn::constant(2, 0.7), 0, 20.0, 9).unwrap();
        assert_eq!(w, 0.0);
        assert_eq!(traj, simulate(&c, 0, 20.0, 9).unwrap());
    }

    #[test]
    fn tilted_weight_matches_path_formula() {
        let c = Chain::from_rates(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 0.5), (1, 0, 1.0)]).unwrap();
        let g = VertexFn::new(vec![0.2, -0.3, 0.5]).unwrap();
        let (traj, w) = tilted_simulate(&c, &g, 0, 10.0, 1).unwrap();
        let grad = gradient(&c, &g).unwrap();
        let tilted = c.tilted_exit_rate(&grad).unwrap();
        let pair = empirical_pair(&c, &traj).unwrap();
        let integral: f64 = (0..3)
            .map(|x| pair.measure[x] * traj.horizon * (tilted[x] - c.exit_rates()[x]))
            .sum();
        let expected = g[traj.initial] - g[traj.final_state()] + integral;
        assert!((w - expected).abs() < 1e-10);
    }

    #[test]
    fn whole_simplex_event() {
        let c = unit_two_state();
        let est = estimate_ldp_slope(&c, 0, &Event::whole(), &[5.0, 10.0], 200, 1).unwrap();
        assert_eq!(est.slope, Some(0.0));
        assert!(est.per_horizon.iter().all(|h| h.estimate.probability == 1.0));
    }

    #[test]
    fn bad_inputs() {
        let c = unit_two_state();
        assert!(simulate(&c, 5, 1.0, 0).is_err());
        assert!(simulate(&c, 0, 0.0, 0).is_err());
        assert!(estimate_ldp_slope(&c, 0, &Event::whole(), &[10.0, 5.0], 10, 0).is_err());
        assert!(estimate_probability(&c, 0, &Event::at_least(3, 0, 0.5), 1.0, 10, 0, 0).is_err());
    }
}
