//! The contracted rate function of the empirical measure, computed as an
//! infimum of the joint rate over divergence-free flows and as a supremum of
//! the Donsker–Varadhan objective over bounded potentials.
//!
//! Both problems split over the mutual-reachability classes of the support
//! graph: an optimal flow vanishes on edges joining different classes, and
//! each class is an independent smooth convex problem. Edges leaving a class
//! contribute their full reference weight μ(y) r(y,z) to the rate.
//!
//! When μ has full support there is a single class and the supremum is
//! attained by the Newton potential. Otherwise the supremum is approached
//! by the sequence g⁽ⁿ⁾ that lifts each class by h(ℓ)·n along a decreasing
//! ordering of the condensation, so that cross-class terms are damped by at
//! least e^{−n/3}.

mod dual;
mod primal;

use crate::chain::{Chain, Flow, Measure, VertexFn};
use crate::config::{FlowMethod, SolverConfig, EXP_GUARD};
use crate::error::{Error, Result};
use crate::functionals::{dv_objective, flow_cost, ExtendedReal};
use crate::graph::{
    condensation, fundamental_cycles, mutual_reachability_classes, oriented_cycle_through,
    support_graph, ClassPartition, CondensationGraph, SupportGraph,
};

/// Levels of the approximating sequence used to certify the supremum when
/// μ has degenerate support.
pub const SEQUENCE_LEVELS: [usize; 3] = [10, 20, 40];

/// A potential on one mutual-reachability class, zero at the class's smallest vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPotential {
    pub vertices: Vec<usize>,
    pub values: Vec<f64>,
}

impl ClassPotential {
    pub fn value(&self, v: usize) -> Option<f64> {
        self.vertices
            .binary_search(&v)
            .ok()
            .map(|i| self.values[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct ContractionResult {
    /// inf_Q I(μ,Q), the flow cost of `optimal_flow`.
    pub rate_inf: ExtendedReal,
    /// Best Donsker–Varadhan value certified from the class potentials.
    pub rate_sup: f64,
    pub optimal_flow: Flow,
    pub partition: ClassPartition,
    pub condensation: CondensationGraph,
    /// One potential per class, in class order.
    pub class_potentials: Vec<ClassPotential>,
    /// |rate_inf − rate_sup|.
    pub duality_gap: f64,
    /// Σ μ(y) r(y,z) over support edges joining different classes.
    pub cross_class_mass: f64,
    /// Whether `rate_sup` comes from a single bounded potential rather than a sequence.
    pub sup_attained: bool,
    /// Algorithm that produced the flow (after any fallback).
    pub method: FlowMethod,
    pub iterations: usize,
    /// max |div Q*|.
    pub divergence_residual: f64,
    /// Final solver gradient residual, maximized over classes.
    pub solver_residual: f64,
    /// max over fundamental cycles of |Σ ± log(Q*/(μ r))|.
    pub cycle_residual: f64,
}

struct ClassLayout {
    vertices: Vec<usize>,
    edges: Vec<usize>,
    weights: Vec<f64>,
    local: Vec<usize>,
}

fn layout(chain: &Chain, mu: &Measure, cp: &ClassPartition, class: usize) -> ClassLayout {
    let vertices = cp.classes[class].clone();
    let mut local = vec![usize::MAX; chain.n_states()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    let edges = cp.class_edges[class].clone();
    let weights = edges
        .iter()
        .map(|&id| mu[chain.edge(id).from] * chain.rate(id))
        .collect();
    ClassLayout {
        vertices,
        edges,
        weights,
        local,
    }
}

struct ClassSolve {
    flow: Vec<f64>,
    iterations: usize,
    residual: f64,
    method: FlowMethod,
}

fn solve_dual(chain: &Chain, lay: &ClassLayout, cfg: &SolverConfig) -> Result<(ClassSolve, Vec<f64>, Vec<f64>)> {
    let problem = dual::ClassProblem {
        n: lay.vertices.len(),
        arcs: lay
            .edges
            .iter()
            .zip(&lay.weights)
            .map(|(&id, &w)| {
                let e = chain.edge(id);
                (lay.local[e.from], lay.local[e.to], w)
            })
            .collect(),
    };
    let sol = dual::solve(&problem, cfg)?;
    let flow = problem
        .arcs
        .iter()
        .map(|&(y, z, w)| w * (sol.potential[z] - sol.potential[y]).exp())
        .collect();
    Ok((
        ClassSolve {
            flow,
            iterations: sol.iterations,
            residual: sol.residual,
            method: FlowMethod::DualNewton,
        },
        sol.potential,
        sol.trace,
    ))
}

fn solve_primal(chain: &Chain, lay: &ClassLayout, cfg: &SolverConfig) -> Result<ClassSolve> {
    let mut allowed = vec![false; chain.n_edges()];
    let mut slot = vec![usize::MAX; chain.n_edges()];
    for (i, &id) in lay.edges.iter().enumerate() {
        allowed[id] = true;
        slot[id] = i;
    }
    let mut start = vec![0.0; lay.edges.len()];
    for &id in &lay.edges {
        let cycle = oriented_cycle_through(chain, &allowed, id)
            .expect("every edge of a strongly connected class lies on a cycle");
        for pair in cycle.windows(2) {
            let e = chain.edge_id(pair[0], pair[1]).expect("cycle edge");
            start[slot[e]] += 1.0;
        }
    }
    let basis = fundamental_cycles(chain, &lay.vertices, &lay.edges)
        .into_iter()
        .map(|c| c.into_iter().map(|(id, s)| (slot[id], s)).collect())
        .collect();
    let problem = primal::CycleProblem {
        weights: lay.weights.clone(),
        start,
        basis,
    };
    let sol = primal::solve(&problem, cfg)?;
    Ok(ClassSolve {
        flow: sol.flow,
        iterations: sol.iterations,
        residual: sol.residual,
        method: FlowMethod::CycleBasis,
    })
}

fn solve_class(chain: &Chain, lay: &ClassLayout, cfg: &SolverConfig) -> Result<ClassSolve> {
    match cfg.method {
        FlowMethod::CycleBasis => solve_primal(chain, lay, cfg),
        FlowMethod::DualNewton => match solve_dual(chain, lay, cfg) {
            Ok((solve, _, _)) => Ok(solve),
            Err(_) => solve_primal(chain, lay, cfg),
        },
    }
}

/// inf { I(μ,Q) : Q ≥ 0 } with the optimal flow and the class potentials.
pub fn minimize_flow(chain: &Chain, mu: &Measure, cfg: &SolverConfig) -> Result<ContractionResult> {
    let sg = support_graph(chain, mu)?;
    let cp = mutual_reachability_classes(&sg);
    let cond = condensation(&cp)?;
    let mut flow = vec![0.0; chain.n_edges()];
    let mut iterations = 0;
    let mut solver_residual: f64 = 0.0;
    let mut method = cfg.method;
    for class in 0..cp.n_classes() {
        if cp.class_edges[class].is_empty() {
            continue;
        }
        let lay = layout(chain, mu, &cp, class);
        let solve = solve_class(chain, &lay, cfg)?;
        for (&id, &q) in lay.edges.iter().zip(&solve.flow) {
            flow[id] = q;
        }
        iterations += solve.iterations;
        solver_residual = solver_residual.max(solve.residual);
        if solve.method != cfg.method {
            method = solve.method;
        }
    }
    let optimal_flow = Flow::new(flow)?;
    let class_potentials = (0..cp.n_classes())
        .map(|l| construct_class_potential_with(chain, mu, &optimal_flow, &cp.classes[l], cfg))
        .collect::<Result<Vec<_>>>()?;
    let rate_inf = flow_cost(chain, mu, &optimal_flow)?;
    let cross_class_mass = cp
        .cross_edges
        .iter()
        .map(|&(id, _, _)| mu[chain.edge(id).from] * chain.rate(id))
        .sum();
    let (rate_sup, sup_attained) = if sg.is_full() {
        let g = assemble_potential(chain.n_states(), &class_potentials);
        (dv_objective(chain, mu, &g)?, true)
    } else {
        let seq = ApproximatingSequence::new(chain.n_states(), &cp, &cond, class_potentials.clone());
        let best = SEQUENCE_LEVELS
            .iter()
            .map(|&n| sequence_objective(chain, mu, &seq.at(n)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        (best, false)
    };
    let divergence_residual = chain.divergence(&optimal_flow)?.max_abs();
    let cycle_residual = cycle_residuals(chain, mu, &optimal_flow, &cp)?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(ContractionResult {
        duality_gap: (rate_inf.to_f64() - rate_sup).abs(),
        rate_inf,
        rate_sup,
        optimal_flow,
        partition: cp,
        condensation: cond,
        class_potentials,
        cross_class_mass,
        sup_attained,
        method,
        iterations,
        divergence_residual,
        solver_residual,
        cycle_residual,
    })
}

fn assemble_potential(n: usize, potentials: &[ClassPotential]) -> VertexFn {
    let mut g = vec![0.0; n];
    for p in potentials {
        for (&v, &val) in p.vertices.iter().zip(&p.values) {
            g[v] = val;
        }
    }
    VertexFn::new(g).expect("finite class potentials")
}

/// |Σ_{e∈C} ± log(Q*(e)/(μ(y) r(e)))| for every fundamental cycle C of every class.
pub fn cycle_residuals(
    chain: &Chain,
    mu: &Measure,
    q: &Flow,
    cp: &ClassPartition,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for class in 0..cp.n_classes() {
        for cycle in fundamental_cycles(chain, &cp.classes[class], &cp.class_edges[class]) {
            let mut total = 0.0;
            for (id, s) in cycle {
                let e = chain.edge(id);
                let w = mu[e.from] * chain.rate(id);
                if !(q[id] > 0.0) {
                    return Err(Error::NonPositiveClassFlow(e.from, e.to));
                }
                total += s * (q[id].ln() - w.ln());
            }
            out.push(total.abs());
        }
    }
    Ok(out)
}

pub fn construct_class_potential(
    chain: &Chain,
    mu: &Measure,
    qstar: &Flow,
    class: &[usize],
) -> Result<ClassPotential> {
    construct_class_potential_with(chain, mu, qstar, class, &SolverConfig::default())
}

/// g_ℓ(z) = Σ log(Q*(z_i, z_{i+1}) / (μ(z_i) r(z_i, z_{i+1}))) along an
/// oriented path from the class's smallest vertex, checked for path
/// independence on every class edge.
pub fn construct_class_potential_with(
    chain: &Chain,
    mu: &Measure,
    qstar: &Flow,
    class: &[usize],
    cfg: &SolverConfig,
) -> Result<ClassPotential> {
    chain.check_vertex_len(mu.len())?;
    chain.check_edge_len(qstar.len())?;
    let mut vertices = class.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    if vertices.is_empty() {
        return Err(Error::OutOfRange("empty class".into()));
    }
    let mut member = vec![false; chain.n_states()];
    for &v in &vertices {
        member[v] = true;
    }
    let class_edges: Vec<usize> = (0..chain.n_edges())
        .filter(|&id| {
            let e = chain.edge(id);
            member[e.from] && member[e.to] && mu[e.from] * chain.rate(id) > 0.0
        })
        .collect();
    let mut log_ratio = vec![0.0; chain.n_edges()];
    for &id in &class_edges {
        let e = chain.edge(id);
        if !(qstar[id] > 0.0) {
            return Err(Error::NonPositiveClassFlow(e.from, e.to));
        }
        log_ratio[id] = qstar[id].ln() - (mu[e.from] * chain.rate(id)).ln();
    }
    let mut value = vec![f64::NAN; chain.n_states()];
    value[vertices[0]] = 0.0;
    let mut queue = std::collections::VecDeque::from([vertices[0]]);
    while let Some(v) = queue.pop_front() {
        for &id in chain.out_edges(v) {
            let w = chain.edge(id).to;
            if member[w] && value[w].is_nan() && mu[v] * chain.rate(id) > 0.0 {
                value[w] = value[v] + log_ratio[id];
                queue.push_back(w);
            }
        }
    }
    if vertices.iter().any(|&v| value[v].is_nan()) {
        return Err(Error::OutOfRange(
            "vertex set is not a mutual-reachability class".into(),
        ));
    }
    let worst = class_edges
        .iter()
        .map(|&id| {
            let e = chain.edge(id);
            (log_ratio[id] - (value[e.to] - value[e.from])).abs()
        })
        .fold(0.0, f64::max);
    if worst > cfg.tol.potential {
        return Err(Error::PathDependent(worst));
    }
    Ok(ClassPotential {
        values: vertices.iter().map(|&v| value[v]).collect(),
        vertices,
    })
}

/// Descriptor of the bounded sequence g⁽ⁿ⁾ approaching the supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximatingSequence {
    n_states: usize,
    /// Class potentials, in class order.
    pub potentials: Vec<ClassPotential>,
    /// h(ℓ) for each class.
    pub order: Vec<usize>,
}

impl ApproximatingSequence {
    pub fn new(
        n_states: usize,
        cp: &ClassPartition,
        cond: &CondensationGraph,
        potentials: Vec<ClassPotential>,
    ) -> Self {
        debug_assert_eq!(cp.n_classes(), potentials.len());
        ApproximatingSequence {
            n_states,
            potentials,
            order: cond.order.clone(),
        }
    }

    /// g⁽ⁿ⁾: class potential truncated at ±n/3 plus h(ℓ)·n on each class, 0 off V_μ.
    pub fn at(&self, n: usize) -> VertexFn {
        build_approximating_sequence(self.n_states, &self.potentials, &self.order, n)
    }
}

pub fn build_approximating_sequence(
    n_states: usize,
    potentials: &[ClassPotential],
    order: &[usize],
    n: usize,
) -> VertexFn {
    let level = n as f64;
    let cap = level / 3.0;
    let mut g = vec![0.0; n_states];
    for (p, &h) in potentials.iter().zip(order) {
        for (&v, &val) in p.vertices.iter().zip(&p.values) {
            g[v] = val.clamp(-cap, cap) + h as f64 * level;
        }
    }
    VertexFn::new(g).expect("finite sequence")
}

/// The Donsker–Varadhan objective for sequence members, whose cross-class
/// steps may be very negative; only positive steps are guarded.
pub fn sequence_objective(chain: &Chain, mu: &Measure, g: &VertexFn) -> Result<f64> {
    chain.check_vertex_len(g.len())?;
    let mut total = 0.0;
    for (id, e) in chain.edges().iter().enumerate() {
        let w = mu[e.from] * chain.rate(id);
        if w > 0.0 {
            let step = g[e.to] - g[e.from];
            if step > EXP_GUARD {
                return Err(Error::Overflow(step));
            }
            total += w * (1.0 - step.exp());
        }
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct DvSup {
    pub value: f64,
    /// The maximizing potential when the supremum is attained.
    pub maximizer: Option<VertexFn>,
    /// The approximating sequence when μ has degenerate support.
    pub sequence: Option<ApproximatingSequence>,
    /// Objective at each sequence level, `(n, value)`.
    pub sequence_values: Vec<(usize, f64)>,
    pub attained: bool,
    pub iterations: usize,
    pub residual: f64,
    /// Objective at every accepted Newton iterate.
    pub trace: Vec<f64>,
}

/// sup_g −⟨μ, e^{−g} L e^{g}⟩ over bounded g.
pub fn dv_sup(chain: &Chain, mu: &Measure, cfg: &SolverConfig) -> Result<DvSup> {
    let sg = support_graph(chain, mu)?;
    if sg.is_full() {
        return dv_sup_full(chain, mu, &sg, cfg);
    }
    let result = minimize_flow(chain, mu, cfg)?;
    let seq = ApproximatingSequence::new(
        chain.n_states(),
        &result.partition,
        &result.condensation,
        result.class_potentials.clone(),
    );
    let sequence_values = SEQUENCE_LEVELS
        .iter()
        .map(|&n| Ok((n, sequence_objective(chain, mu, &seq.at(n))?)))
        .collect::<Result<Vec<_>>>()?;
    let value = sequence_values
        .iter()
        .map(|v| v.1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DvSup {
        value,
        maximizer: None,
        sequence: Some(seq),
        sequence_values,
        attained: false,
        iterations: result.iterations,
        residual: result.solver_residual,
        trace: Vec::new(),
    })
}

fn dv_sup_full(chain: &Chain, mu: &Measure, sg: &SupportGraph<'_>, cfg: &SolverConfig) -> Result<DvSup> {
    let cp = mutual_reachability_classes(sg);
    debug_assert_eq!(cp.n_classes(), 1);
    let lay = layout(chain, mu, &cp, 0);
    let (solve, potential, trace) = solve_dual(chain, &lay, cfg)?;
    let mut g = vec![0.0; chain.n_states()];
    for (&v, &val) in lay.vertices.iter().zip(&potential) {
        g[v] = val;
    }
    let g = VertexFn::new(g)?;
    Ok(DvSup {
        value: dv_objective(chain, mu, &g)?,
        maximizer: Some(g),
        sequence: None,
        sequence_values: Vec::new(),
        attained: true,
        iterations: solve.iterations,
        residual: solve.residual,
        trace,
    })
}

/// I₁(cμ + (1−c)π), the rate at a full-support mixture with the stationary law.
pub fn mixed_measure_rate(chain: &Chain, mu: &Measure, c: f64, cfg: &SolverConfig) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::OutOfRange(format!("mixing weight {c} not in (0, 1)")));
    }
    let pi = chain.stationary_distribution_with(&cfg.tol)?;
    let mixed = mu.mix(&pi, c)?;
    Ok(minimize_flow(chain, &mixed, cfg)?.rate_inf.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::reversible_rate;
    use approx::assert_abs_diff_eq;

    fn unit_two_state() -> Chain {
        Chain::from_rates(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap()
    }

    fn three_cycle() -> Chain {
        Chain::from_rates(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap()
    }

    fn both_methods() -> [SolverConfig; 2] {
        [
            SolverConfig::default(),
            SolverConfig::default().with_method(FlowMethod::CycleBasis),
        ]
    }

    #[test]
    fn stationary_measure_has_zero_rate() {
        let c = Chain::from_rates(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 0.5), (1, 0, 1.0)]).unwrap();
        let pi = c.stationary_distribution().unwrap();
        for cfg in both_methods() {
            let res = minimize_flow(&c, &pi, &cfg).unwrap();
            assert!(res.rate_inf.to_f64() < 1e-12);
            let q_pi = c.mu_flow(&pi).unwrap();
            for id in 0..c.n_edges() {
                assert_abs_diff_eq!(res.optimal_flow[id], q_pi[id], epsilon = 1e-10);
            }
        }
        let sup = dv_sup(&c, &pi, &SolverConfig::default()).unwrap();
        assert!(sup.value.abs() < 1e-12);
        assert!(sup.maximizer.unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn three_cycle_closed_form() {
        let mu = Measure::new(vec![0.5, 0.3, 0.2]).unwrap();
        let q = 0.03f64.cbrt();
        for cfg in both_methods() {
            let res = minimize_flow(&three_cycle(), &mu, &cfg).unwrap();
            assert_abs_diff_eq!(res.rate_inf.to_f64(), 1.0 - 3.0 * q, epsilon = 1e-10);
            for id in 0..3 {
                assert_abs_diff_eq!(res.optimal_flow[id], q, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn two_state_reversible() {
        let c = unit_two_state();
        let mu = Measure::new(vec![0.75, 0.25]).unwrap();
        let expected = 1.0 - 3f64.sqrt() / 2.0;
        for cfg in both_methods() {
            let res = minimize_flow(&c, &mu, &cfg).unwrap();
            assert_abs_diff_eq!(res.rate_inf.to_f64(), expected, epsilon = 1e-12);
            assert_abs_diff_eq!(res.optimal_flow[0], 3f64.sqrt() / 4.0, epsilon = 1e-12);
            assert_abs_diff_eq!(res.rate_sup, expected, epsilon = 1e-12);
        }
        let sup = dv_sup(&c, &mu, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(sup.value, expected, epsilon = 1e-12);
        let g = sup.maximizer.unwrap();
        assert_abs_diff_eq!(g[1] - g[0], 0.5 * (1.0f64 / 3.0).ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(reversible_rate(&c, &mu).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn class_potential_examples() {
        let tri = three_cycle();
        let mu = Measure::uniform(3);
        let q = tri.mu_flow(&mu).unwrap();
        let p = construct_class_potential(&tri, &mu, &q, &[0, 1, 2]).unwrap();
        assert!(p.max_abs() < 1e-15);

        let c = unit_two_state();
        let mu = Measure::new(vec![0.75, 0.25]).unwrap();
        let s = 3f64.sqrt() / 4.0;
        let q = Flow::new(vec![s, s]).unwrap();
        let p = construct_class_potential(&c, &mu, &q, &[0, 1]).unwrap();
        assert_eq!(p.value(0), Some(0.0));
        assert_abs_diff_eq!(p.value(1).unwrap(), (s / 0.75).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.value(1).unwrap(), -0.5 * 3f64.ln(), epsilon = 1e-15);

        // Q^π is not optimal for μ ≠ π on a class with two independent cycles.
        let c = Chain::from_rates(
            3,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (1, 0, 2.0)],
        )
        .unwrap();
        let pi = c.stationary_distribution().unwrap();
        let mu = Measure::new(vec![0.5, 0.3, 0.2]).unwrap();
        let q = c.mu_flow(&pi).unwrap();
        assert!(matches!(
            construct_class_potential(&c, &mu, &q, &[0, 1, 2]),
            Err(Error::PathDependent(_))
        ));
        assert!(matches!(
            construct_class_potential(&c, &mu, &Flow::zero(&c), &[0, 1, 2]),
            Err(Error::NonPositiveClassFlow(..))
        ));
    }

    #[test]
    fn degenerate_two_state() {
        let c = unit_two_state();
        let mu = Measure::new(vec![1.0, 0.0]).unwrap();
        let res = minimize_flow(&c, &mu, &SolverConfig::default()).unwrap();
        assert_eq!(res.rate_inf, ExtendedReal::Finite(1.0));
        assert_eq!(res.optimal_flow.norm_l1(), 0.0);
        assert_eq!(res.cross_class_mass, 1.0);
        assert!(!res.sup_attained);
        let sup = dv_sup(&c, &mu, &SolverConfig::default()).unwrap();
        assert!(sup.value >= 0.999);
        let seq = sup.sequence.unwrap();
        let v1 = sequence_objective(&c, &mu, &seq.at(1)).unwrap();
        let v10 = sequence_objective(&c, &mu, &seq.at(10)).unwrap();
        assert!(v10 >= v1 - 1e-12);
        assert_abs_diff_eq!(v1, 1.0 - (-1f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn full_support_sequence_is_a_shift() {
        let c = Chain::from_rates(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 0.5), (1, 0, 1.0)]).unwrap();
        let mu = Measure::new(vec![0.2, 0.5, 0.3]).unwrap();
        let res = minimize_flow(&c, &mu, &SolverConfig::default()).unwrap();
        let seq = ApproximatingSequence::new(3, &res.partition, &res.condensation, res.class_potentials.clone());
        let g = seq.at(1000);
        let p = &res.class_potentials[0];
        for v in 0..3 {
            assert_abs_diff_eq!(g[v], p.value(v).unwrap() + 1000.0, epsilon = 1e-9);
        }
        let base = assemble_potential(3, &res.class_potentials);
        assert_abs_diff_eq!(
            dv_objective(&c, &mu, &g).unwrap(),
            dv_objective(&c, &mu, &base).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn mixed_measure() {
        let c = unit_two_state();
        let mu = Measure::new(vec![1.0, 0.0]).unwrap();
        let cfg = SolverConfig::default();
        let rates: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&t| mixed_measure_rate(&c, &mu, t, &cfg).unwrap())
            .collect();
        assert!(rates.windows(2).all(|w| w[0] < w[1]));
        assert!(rates.iter().all(|&r| r < 1.0));
        let pi = c.stationary_distribution().unwrap();
        assert!(mixed_measure_rate(&c, &pi, 0.5, &cfg).unwrap() < 1e-12);
        assert!(mixed_measure_rate(&c, &mu, 1e-6, &cfg).unwrap() < 1e-9);
        assert!(mixed_measure_rate(&c, &mu, 1.0, &cfg).is_err());
        assert!(mixed_measure_rate(&c, &mu, 0.0, &cfg).is_err());
    }
}
