use ctmc_ldp::generate::random_chain;
use ctmc_ldp::montecarlo::{
    closed_empirical_pair, count_divergence, derive_seed, estimate_probability,
    estimate_tilted_probability,
};
use ctmc_ldp::{
    dv_sup, empirical_pair, estimate_ldp_slope, joint_rate, simulate, Chain, Event, Measure,
    SolverConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_two_state() -> Chain {
    Chain::from_rates(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap()
}

#[test]
fn ergodic_averages_converge() {
    let chain = unit_two_state();
    let pi = chain.stationary_distribution().unwrap();
    let q_pi = chain.mu_flow(&pi).unwrap();
    let mut close = 0;
    for seed in 0..100 {
        let traj = simulate(&chain, 0, 1e4, seed).unwrap();
        let pair = empirical_pair(&chain, &traj).unwrap();
        if pair.measure.l1_distance(&pi) <= 0.05 {
            close += 1;
        }
        let flow_err: f64 = pair
            .flow
            .values()
            .iter()
            .zip(q_pi.values())
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(flow_err < 0.1, "seed {seed}: flow error {flow_err}");
    }
    assert!(close >= 95, "{close} of 100 seeds within 0.05");
}

#[test]
fn empirical_measure_sums_to_one_and_counts_are_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..50 {
        let n = rng.random_range(2..=6);
        let chain = random_chain(&mut rng, n, 0.3).unwrap();
        let traj = simulate(&chain, 0, 200.0, k).unwrap();
        let pair = empirical_pair(&chain, &traj).unwrap();
        assert!((pair.measure.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (c, q) in pair.counts.iter().zip(pair.flow.values()) {
            assert_eq!(*c as f64, (q * pair.horizon).round());
        }
        assert_eq!(pair.counts.iter().sum::<u64>() as usize, traj.jumps.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulated_paths_are_consistent(seed in any::<u64>(), horizon in 0.1f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=7);
        let chain = random_chain(&mut rng, n, 0.3).unwrap();
        let x0 = rng.random_range(0..n);
        let traj = simulate(&chain, x0, horizon, seed).unwrap();
        prop_assert_eq!(&traj, &simulate(&chain, x0, horizon, seed).unwrap());
        let mut prev = (0.0, x0);
        for &(t, to) in &traj.jumps {
            prop_assert!(t > prev.0 && t <= horizon);
            prop_assert!(chain.edge_id(prev.1, to).is_some());
            prev = (t, to);
        }
        let pair = empirical_pair(&chain, &traj).unwrap();
        let mut expected = vec![0i64; n];
        expected[x0] += 1;
        expected[traj.final_state()] -= 1;
        prop_assert_eq!(count_divergence(&chain, &pair.counts), expected);

        let closed = closed_empirical_pair(&chain, &traj).unwrap();
        prop_assert!(count_divergence(&chain, &closed.counts).iter().all(|&d| d == 0));
        prop_assert!(!joint_rate(&chain, &closed.measure, &closed.flow).unwrap().is_infinite());
    }
}

#[test]
fn seeds_are_distinct_per_stream_and_index() {
    let mut seen = std::collections::HashSet::new();
    for stream in 0..4 {
        for index in 0..1000 {
            assert!(seen.insert(derive_seed(42, stream, index)));
        }
    }
}

#[test]
fn estimators_are_deterministic() {
    let chain = unit_two_state();
    let event = Event::at_least(2, 1, 0.6);
    let a = estimate_ldp_slope(&chain, 0, &event, &[10.0, 20.0], 2000, 5).unwrap();
    let b = estimate_ldp_slope(&chain, 0, &event, &[10.0, 20.0], 2000, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn typical_event_has_vanishing_slope() {
    let chain = unit_two_state();
    let event = Event::at_least(2, 1, 0.5);
    let est = estimate_ldp_slope(&chain, 0, &event, &[50.0, 100.0, 200.0], 20_000, 3).unwrap();
    assert!(est.slope.unwrap().abs() < 2e-3, "{:?}", est.slope);
}

#[test]
fn zero_hits_give_a_lower_bound() {
    let chain = unit_two_state();
    let event = Event::at_least(2, 1, 0.99);
    let est = estimate_ldp_slope(&chain, 0, &event, &[200.0], 1000, 1).unwrap();
    let h = &est.per_horizon[0];
    assert_eq!(h.estimate.hits, 0);
    assert!(h.slope.is_none());
    assert!((h.slope_lower_bound.unwrap() - (1000.0f64 / 3.0).ln() / 200.0).abs() < 1e-15);
    assert!(est.slope.is_none());
}

#[test]
fn tilted_estimator_is_consistent() {
    let chain = unit_two_state();
    let event = Event::at_least(2, 1, 0.6);
    let tilt = Measure::new(vec![0.4, 0.6]).unwrap();
    let g = dv_sup(&chain, &tilt, &SolverConfig::default()).unwrap().maximizer.unwrap();
    let naive = estimate_probability(&chain, 0, &event, 50.0, 20_000, 4, 0).unwrap();
    let tilted = estimate_tilted_probability(&chain, &g, 0, &event, 50.0, 20_000, 4).unwrap();
    let sigma = (naive.std_error.powi(2) + tilted.std_error.powi(2)).sqrt();
    assert!((naive.probability - tilted.probability).abs() <= 3.0 * sigma);
    assert!(tilted.std_error <= 1.5 * naive.std_error);
}
