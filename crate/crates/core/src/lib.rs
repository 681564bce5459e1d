//! Large deviations of the empirical measure of finite continuous-time
//! Markov chains.
//!
//! The Donsker–Varadhan rate of a probability vector μ is computed two ways:
//! as the least cost of a divergence-free flow on the support of μ
//! ([`minimize_flow`]) and as a supremum over potentials ([`dv_sup`]). The
//! two agree, including when μ has partial support and the supremum is only
//! approached along a sequence. [`montecarlo`] checks the rates against
//! simulated decay of event probabilities.
//!
//! ```
//! use ctmc_ldp::{dv_sup, minimize_flow, Chain, Measure, SolverConfig};
//!
//! let chain = Chain::new(&["a", "b"], &[("a", "b", 1.0), ("b", "a", 1.0)]).unwrap();
//! let mu = Measure::new(vec![0.75, 0.25]).unwrap();
//! let cfg = SolverConfig::default();
//! let inf = minimize_flow(&chain, &mu, &cfg).unwrap().rate_inf.to_f64();
//! let sup = dv_sup(&chain, &mu, &cfg).unwrap().value;
//! assert!((inf - sup).abs() < 1e-9);
//! assert!((inf - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-9);
//! ```

pub mod chain;
pub mod config;
pub mod contraction;
pub mod error;
pub mod fenchel;
pub mod functionals;
pub mod generate;
pub mod graph;
pub mod montecarlo;

pub use chain::{Chain, Edge, EdgeFn, Flow, Measure, VertexFn};
pub use config::{FlowMethod, SolverConfig, Tolerances, EXP_GUARD, MAX_STATES};
pub use contraction::{
    build_approximating_sequence, construct_class_potential, dv_sup, minimize_flow,
    mixed_measure_rate, sequence_objective, ApproximatingSequence, ClassPotential,
    ContractionResult, DvSup,
};
pub use error::{Error, Result};
pub use fenchel::{duality_check, FenchelReport};
pub use functionals::{
    dv_objective, flow_cost, joint_rate, perturbed_rate, phi, reversible_optimal_flow,
    reversible_rate, ExtendedReal,
};
pub use graph::{
    condensation, cycle_decomposition, gradient, is_gradient, mutual_reachability_classes,
    support_graph, ClassPartition, CondensationGraph, CycleDecomposition, GradientCheck,
    SupportGraph,
};
pub use montecarlo::{
    empirical_pair, estimate_ldp_slope, simulate, tilted_simulate, EmpiricalPair, Event,
    HalfSpace, SlopeEstimate, Trajectory,
};
