//! Finite continuous-time Markov chains and the elementary objects built on
//! them: measures over states, flows over edges, the generator action,
//! divergence and the stationary distribution.
//!
//! States carry opaque string names but every computation runs on dense
//! indices `0..n`. Edges are stored sorted lexicographically by
//! `(from, to)`, and an edge id is the position in that order; [`Flow`] and
//! [`EdgeFn`] values are indexed by edge id.

use std::collections::{HashMap, VecDeque};
use std::ops::Index;

use nalgebra::{DMatrix, DVector};

use crate::config::{Tolerances, EXP_GUARD, MAX_STATES};
use crate::error::{Error, Result};

/// A directed edge `(from, to)` between dense state indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

/// An irreducible finite chain with strictly positive off-diagonal rates.
#[derive(Debug, Clone)]
pub struct Chain {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    rates: Vec<f64>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    lookup: HashMap<(usize, usize), usize>,
    exit: Vec<f64>,
}

impl Chain {
    /// Builds a chain from named states and `(from, to, rate)` triples.
    ///
    /// Rejects unknown or duplicate states, duplicate edges, self-loops,
    /// non-positive rates and chains whose edge graph is not strongly
    /// connected.
    pub fn new<S, T>(states: &[S], edges: &[(T, T, f64)]) -> Result<Self>
    where
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let names: Vec<String> = states.iter().map(|s| s.as_ref().to_owned()).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateState(name.clone()));
            }
        }
        let mut indexed = Vec::with_capacity(edges.len());
        for (from, to, rate) in edges {
            let (from, to) = (from.as_ref(), to.as_ref());
            let y = *index
                .get(from)
                .ok_or_else(|| Error::UnknownState(from.to_owned()))?;
            let z = *index
                .get(to)
                .ok_or_else(|| Error::UnknownState(to.to_owned()))?;
            indexed.push((y, z, *rate));
        }
        Self::build(names, index, indexed)
    }

    /// Builds a chain on states named `"0"`, `"1"`, … from index triples.
    pub fn from_rates(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        for &(y, z, _) in edges {
            if y >= n {
                return Err(Error::StateOutOfRange(y));
            }
            if z >= n {
                return Err(Error::StateOutOfRange(z));
            }
        }
        Self::build(names, index, edges.to_vec())
    }

    fn build(
        names: Vec<String>,
        index: HashMap<String, usize>,
        mut triples: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if n > MAX_STATES {
            return Err(Error::TooLarge(n, MAX_STATES));
        }
        triples.sort_by_key(|t| (t.0, t.1));
        let mut edges = Vec::with_capacity(triples.len());
        let mut rates = Vec::with_capacity(triples.len());
        let mut lookup = HashMap::with_capacity(triples.len());
        for (y, z, rate) in triples {
            if y == z {
                return Err(Error::SelfLoop(names[y].clone()));
            }
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::InvalidRate {
                    from: names[y].clone(),
                    to: names[z].clone(),
                    rate,
                });
            }
            if lookup.insert((y, z), edges.len()).is_some() {
                return Err(Error::DuplicateEdge(names[y].clone(), names[z].clone()));
            }
            edges.push(Edge { from: y, to: z });
            rates.push(rate);
        }
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        let mut exit = vec![0.0; n];
        for (id, e) in edges.iter().enumerate() {
            out_edges[e.from].push(id);
            in_edges[e.to].push(id);
            exit[e.from] += rates[id];
        }
        let chain = Chain {
            names,
            index,
            edges,
            rates,
            out_edges,
            in_edges,
            lookup,
            exit,
        };
        chain.check_irreducible()?;
        Ok(chain)
    }

    fn check_irreducible(&self) -> Result<()> {
        let n = self.n_states();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                let adj = if forward {
                    &self.out_edges[v]
                } else {
                    &self.in_edges[v]
                };
                for &id in adj {
                    let w = if forward {
                        self.edges[id].to
                    } else {
                        self.edges[id].from
                    };
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            seen
        };
        for seen in [reach(true), reach(false)] {
            if let Some(bad) = seen.iter().position(|s| !s) {
                return Err(Error::NotIrreducible(self.names[bad].clone()));
            }
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.names.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_owned()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn rate(&self, id: usize) -> f64 {
        self.rates[id]
    }

    /// Rate of `(y, z)`, zero when the edge is absent.
    pub fn rate_between(&self, y: usize, z: usize) -> f64 {
        self.edge_id(y, z).map_or(0.0, |id| self.rates[id])
    }

    pub fn edge_id(&self, y: usize, z: usize) -> Option<usize> {
        self.lookup.get(&(y, z)).copied()
    }

    /// Outgoing edge ids of `x`, ordered by target index.
    pub fn out_edges(&self, x: usize) -> &[usize] {
        &self.out_edges[x]
    }

    /// Incoming edge ids of `x`, ordered by source index.
    pub fn in_edges(&self, x: usize) -> &[usize] {
        &self.in_edges[x]
    }

    /// Total exit rate r(x) = Σ_z r(x,z).
    pub fn exit_rate(&self, x: usize) -> Result<f64> {
        self.exit
            .get(x)
            .copied()
            .ok_or(Error::StateOutOfRange(x))
    }

    pub fn exit_rate_of(&self, name: &str) -> Result<f64> {
        self.exit_rate(self.state_index(name)?)
    }

    pub fn exit_rates(&self) -> &[f64] {
        &self.exit
    }

    /// Lf(x) = Σ_y r(x,y) (f(y) − f(x)).
    pub fn apply_generator(&self, f: &VertexFn) -> Result<VertexFn> {
        self.check_vertex_len(f.len())?;
        let mut out = vec![0.0; self.n_states()];
        for (id, e) in self.edges.iter().enumerate() {
            out[e.from] += self.rates[id] * (f[e.to] - f[e.from]);
        }
        Ok(VertexFn(out))
    }

    pub fn stationary_distribution(&self) -> Result<Measure> {
        self.stationary_distribution_with(&Tolerances::default())
    }

    /// Solves the global balance equations with the last row replaced by
    /// the normalization constraint.
    pub fn stationary_distribution_with(&self, tol: &Tolerances) -> Result<Measure> {
        let n = self.n_states();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (id, e) in self.edges.iter().enumerate() {
            // Row x holds inflow − outflow at x.
            a[(e.to, e.from)] += self.rates[id];
            a[(e.from, e.from)] -= self.rates[id];
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::SingularSystem("balance matrix is singular".into()))?;
        let mut pi: Vec<f64> = sol.iter().copied().collect();
        if pi.iter().any(|p| !p.is_finite()) {
            return Err(Error::SingularSystem("non-finite solution".into()));
        }
        let scale = self.exit.iter().fold(1.0_f64, |m, &r| m.max(r));
        if let Some(p) = pi.iter().find(|&&p| p < -tol.residual) {
            return Err(Error::SingularSystem(format!("negative weight {p:e}")));
        }
        for p in &mut pi {
            *p = p.max(0.0);
        }
        let total: f64 = pi.iter().sum();
        for p in &mut pi {
            *p /= total;
        }
        let residual = self.balance_residual(&pi);
        if residual > tol.residual * scale {
            return Err(Error::SingularSystem(format!(
                "balance residual {residual:e} above tolerance"
            )));
        }
        Measure::with_tolerance(pi, tol.normalization)
    }

    /// max_x |Σ_y π(x) r(x,y) − Σ_y π(y) r(y,x)|.
    pub fn balance_residual(&self, pi: &[f64]) -> f64 {
        let mut net = vec![0.0; self.n_states()];
        for (id, e) in self.edges.iter().enumerate() {
            let q = pi[e.from] * self.rates[id];
            net[e.from] += q;
            net[e.to] -= q;
        }
        net.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Q^μ(y,z) = μ(y) r(y,z).
    pub fn mu_flow(&self, mu: &Measure) -> Result<Flow> {
        self.check_vertex_len(mu.len())?;
        Ok(Flow(
            self.edges
                .iter()
                .zip(&self.rates)
                .map(|(e, r)| mu[e.from] * r)
                .collect(),
        ))
    }

    /// (div Q)(y) = outflow − inflow.
    pub fn divergence(&self, q: &Flow) -> Result<VertexFn> {
        self.check_edge_len(q.len())?;
        Ok(VertexFn(self.signed_divergence(q.values())))
    }

    /// Divergence of an arbitrary signed edge vector.
    pub fn signed_divergence(&self, values: &[f64]) -> Vec<f64> {
        let mut div = vec![0.0; self.n_states()];
        for (e, &w) in self.edges.iter().zip(values) {
            div[e.from] += w;
            div[e.to] -= w;
        }
        div
    }

    /// r^F(y) = Σ_z r(y,z) e^{F(y,z)}.
    pub fn tilted_exit_rate(&self, f: &EdgeFn) -> Result<VertexFn> {
        self.check_edge_len(f.len())?;
        let mut out = vec![0.0; self.n_states()];
        for (id, e) in self.edges.iter().enumerate() {
            out[e.from] += self.rates[id] * guarded_exp(f[id])?;
        }
        Ok(VertexFn(out))
    }

    /// Detailed balance on every edge plus a symmetric edge set.
    pub fn is_reversible(&self, pi: &Measure, tol: &Tolerances) -> bool {
        if pi.len() != self.n_states() {
            return false;
        }
        self.edges.iter().enumerate().all(|(id, e)| match self.edge_id(e.to, e.from) {
            Some(back) => {
                (pi[e.from] * self.rates[id] - pi[e.to] * self.rates[back]).abs() <= tol.residual
            }
            None => false,
        })
    }

    /// Same chain with every rate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Chain> {
        let triples: Vec<_> = self
            .edges
            .iter()
            .zip(&self.rates)
            .map(|(e, r)| (e.from, e.to, r * c))
            .collect();
        Self::build(self.names.clone(), self.index.clone(), triples)
    }

    pub(crate) fn check_vertex_len(&self, len: usize) -> Result<()> {
        if len != self.n_states() {
            return Err(Error::Dimension {
                expected: self.n_states(),
                got: len,
            });
        }
        Ok(())
    }

    pub(crate) fn check_edge_len(&self, len: usize) -> Result<()> {
        if len != self.n_edges() {
            return Err(Error::Dimension {
                expected: self.n_edges(),
                got: len,
            });
        }
        Ok(())
    }
}

pub(crate) fn guarded_exp(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("exponent"));
    }
    if x.abs() > EXP_GUARD {
        return Err(Error::Overflow(x));
    }
    Ok(x.exp())
}

/// Nonnegative weights over states summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure(Vec<f64>);

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(weights, Tolerances::default().normalization)
    }

    pub fn with_tolerance(weights: Vec<f64>, tol: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("bad weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(Measure(weights))
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidMeasure("weights do not have positive finite mass".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn point(n: usize, x: usize) -> Result<Self> {
        if x >= n {
            return Err(Error::StateOutOfRange(x));
        }
        let mut w = vec![0.0; n];
        w[x] = 1.0;
        Ok(Measure(w))
    }

    pub fn uniform(n: usize) -> Self {
        Measure(vec![1.0 / n as f64; n])
    }

    /// c·self + (1−c)·other.
    pub fn mix(&self, other: &Measure, c: f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: other.len(),
            });
        }
        Measure::normalized(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| c * a + (1.0 - c) * b)
                .collect(),
        )
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_full_support(&self) -> bool {
        self.0.iter().all(|&w| w > 0.0)
    }

    /// ⟨μ, f⟩.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.0.iter().zip(f).map(|(m, v)| m * v).sum()
    }

    pub fn l1_distance(&self, other: &Measure) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl Index<usize> for Measure {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Nonnegative weights over the edges of a chain, indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow(Vec<f64>);

impl Flow {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidFlow(format!("bad edge weight {v}")));
        }
        Ok(Flow(values))
    }

    pub fn zero(chain: &Chain) -> Self {
        Flow(vec![0.0; chain.n_edges()])
    }

    /// Indicator 1_C of a cycle given as a closed vertex sequence.
    pub fn cycle_indicator(chain: &Chain, cycle: &[usize]) -> Result<Self> {
        let mut values = vec![0.0; chain.n_edges()];
        for pair in cycle.windows(2) {
            let id = chain
                .edge_id(pair[0], pair[1])
                .ok_or_else(|| Error::InvalidFlow(format!("({}, {}) is not an edge", pair[0], pair[1])))?;
            values[id] += 1.0;
        }
        Ok(Flow(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// ‖Q‖₁.
    pub fn norm_l1(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Edge ids with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }

    /// a·self + b·other, rejected if any entry turns negative.
    pub fn combine(&self, a: f64, other: &Flow, b: f64) -> Result<Flow> {
        Flow::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }
}

impl Index<usize> for Flow {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Real-valued function on states.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFn(Vec<f64>);

impl VertexFn {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vertex function"));
        }
        Ok(VertexFn(values))
    }

    pub fn zeros(n: usize) -> Self {
        VertexFn(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        VertexFn(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for VertexFn {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Real-valued function on the edges of a chain, indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFn(Vec<f64>);

impl EdgeFn {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("edge function"));
        }
        Ok(EdgeFn(values))
    }

    pub fn zeros(m: usize) -> Self {
        EdgeFn(vec![0.0; m])
    }

    pub fn constant(m: usize, c: f64) -> Self {
        EdgeFn(vec![c; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn neg(&self) -> EdgeFn {
        EdgeFn(self.0.iter().map(|v| -v).collect())
    }
}

impl Index<usize> for EdgeFn {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
