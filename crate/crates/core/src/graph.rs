//! Discrete geometry of the support graph: the edges charged by a measure,
//! their mutual-reachability classes, the acyclic condensation with a
//! decreasing ordering, cycle decomposition of divergence-free flows and the
//! path-independence test for edge functions.

use std::collections::{BinaryHeap, VecDeque};
use std::cmp::Reverse;

use crate::chain::{Chain, EdgeFn, Flow, Measure, VertexFn};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// The subgraph (V_μ, E_μ) of edges with μ(y) r(y,z) > 0.
#[derive(Debug, Clone)]
pub struct SupportGraph<'a> {
    pub chain: &'a Chain,
    pub mu: &'a Measure,
    vertices: Vec<usize>,
    edges: Vec<usize>,
    vertex_mask: Vec<bool>,
    edge_mask: Vec<bool>,
}

impl<'a> SupportGraph<'a> {
    /// Sorted vertex indices of V_μ.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Sorted chain edge ids of E_μ.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains_vertex(&self, x: usize) -> bool {
        self.vertex_mask[x]
    }

    pub fn contains_edge(&self, id: usize) -> bool {
        self.edge_mask[id]
    }

    /// True when E_μ = E.
    pub fn is_full(&self) -> bool {
        self.edges.len() == self.chain.n_edges()
    }

    /// Oriented edge (y, z) ∈ E_μ, if present.
    fn support_edge(&self, y: usize, z: usize) -> Option<usize> {
        self.chain.edge_id(y, z).filter(|&id| self.edge_mask[id])
    }
}

pub fn support_graph<'a>(chain: &'a Chain, mu: &'a Measure) -> Result<SupportGraph<'a>> {
    chain.check_vertex_len(mu.len())?;
    let mut vertex_mask = vec![false; chain.n_states()];
    let mut edge_mask = vec![false; chain.n_edges()];
    let mut edges = Vec::new();
    for (id, e) in chain.edges().iter().enumerate() {
        // Support is combinatorial: exact positivity, no epsilon.
        if mu[e.from] * chain.rate(id) > 0.0 {
            edge_mask[id] = true;
            edges.push(id);
            vertex_mask[e.from] = true;
            vertex_mask[e.to] = true;
        }
    }
    let vertices = (0..chain.n_states()).filter(|&x| vertex_mask[x]).collect();
    Ok(SupportGraph {
        chain,
        mu,
        vertices,
        edges,
        vertex_mask,
        edge_mask,
    })
}

/// Strongly connected components of a digraph on `0..n` (iterative Tarjan).
/// Components come back with sorted members, ordered by smallest member.
pub fn strongly_connected_components(n: usize, arcs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(y, z) in arcs {
        adj[y].push(z);
    }
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Mutual-reachability classes of (V_μ, E_μ).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPartition {
    /// Sorted members of each class; classes ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Class of each chain state, `None` outside V_μ.
    pub class_of: Vec<Option<usize>>,
    /// Chain edge ids of E_μ internal to each class.
    pub class_edges: Vec<Vec<usize>>,
    /// Edges of E_μ joining different classes: `(edge id, tail class, head class)`.
    pub cross_edges: Vec<(usize, usize, usize)>,
}

impl ClassPartition {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// E_μ minus the union of the class edge sets.
    pub fn residual_edges(&self) -> Vec<usize> {
        self.cross_edges.iter().map(|&(id, _, _)| id).collect()
    }

    /// Reference vertex y* of a class (its smallest member).
    pub fn reference(&self, class: usize) -> usize {
        self.classes[class][0]
    }
}

pub fn mutual_reachability_classes(sg: &SupportGraph<'_>) -> ClassPartition {
    let chain = sg.chain;
    let local: Vec<usize> = {
        let mut l = vec![usize::MAX; chain.n_states()];
        for (i, &v) in sg.vertices().iter().enumerate() {
            l[v] = i;
        }
        l
    };
    let arcs: Vec<(usize, usize)> = sg
        .edges()
        .iter()
        .map(|&id| {
            let e = chain.edge(id);
            (local[e.from], local[e.to])
        })
        .collect();
    let classes: Vec<Vec<usize>> = strongly_connected_components(sg.vertices().len(), &arcs)
        .into_iter()
        .map(|c| c.into_iter().map(|i| sg.vertices()[i]).collect())
        .collect();
    let mut class_of = vec![None; chain.n_states()];
    for (l, class) in classes.iter().enumerate() {
        for &v in class {
            class_of[v] = Some(l);
        }
    }
    let mut class_edges = vec![Vec::new(); classes.len()];
    let mut cross_edges = Vec::new();
    for &id in sg.edges() {
        let e = chain.edge(id);
        let (a, b) = (
            class_of[e.from].expect("tail in V_mu"),
            class_of[e.to].expect("head in V_mu"),
        );
        if a == b {
            class_edges[a].push(id);
        } else {
            cross_edges.push((id, a, b));
        }
    }
    ClassPartition {
        classes,
        class_of,
        class_edges,
        cross_edges,
    }
}

/// The acyclic graph of classes with an ordering `h` decreasing along edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensationGraph {
    pub n_classes: usize,
    /// Distinct class pairs (ℓ, ℓ′) joined by some edge of E_μ.
    pub edges: Vec<(usize, usize)>,
    /// h(ℓ) ∈ {1..|L|}, a bijection with h(ℓ) > h(ℓ′) for every edge.
    pub order: Vec<usize>,
}

impl CondensationGraph {
    pub fn is_valid_order(&self, order: &[usize]) -> bool {
        self.edges.iter().all(|&(a, b)| order[a] > order[b])
    }
}

/// Kahn's algorithm with smallest-index tie breaking gives the topological
/// position ĥ; the returned order is h = |L| − ĥ + 1.
pub fn condensation(cp: &ClassPartition) -> Result<CondensationGraph> {
    let n = cp.n_classes();
    let mut edges: Vec<(usize, usize)> = cp.cross_edges.iter().map(|&(_, a, b)| (a, b)).collect();
    edges.sort_unstable();
    edges.dedup();
    let mut indegree = vec![0usize; n];
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
        indegree[b] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&l| indegree[l] == 0).map(Reverse).collect();
    let mut topo = vec![0usize; n];
    let mut placed = 0;
    while let Some(Reverse(l)) = ready.pop() {
        placed += 1;
        topo[l] = placed;
        for &m in &adj[l] {
            indegree[m] -= 1;
            if indegree[m] == 0 {
                ready.push(Reverse(m));
            }
        }
    }
    if placed != n {
        return Err(Error::CyclicCondensation);
    }
    let order = topo.iter().map(|&t| n - t + 1).collect();
    Ok(CondensationGraph {
        n_classes: n,
        edges,
        order,
    })
}

/// A divergence-free flow written as Σ weight · 1_C over self-avoiding cycles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CycleDecomposition {
    /// Closed vertex sequences (first == last) with positive weights.
    pub cycles: Vec<(Vec<usize>, f64)>,
}

impl CycleDecomposition {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Σ weight · 1_C as a flow on the chain.
    pub fn reconstruct(&self, chain: &Chain) -> Result<Flow> {
        let mut values = vec![0.0; chain.n_edges()];
        for (cycle, w) in &self.cycles {
            for pair in cycle.windows(2) {
                let id = chain.edge_id(pair[0], pair[1]).ok_or_else(|| {
                    Error::InvalidFlow(format!("({}, {}) is not an edge", pair[0], pair[1]))
                })?;
                values[id] += w;
            }
        }
        Flow::new(values)
    }
}

pub fn cycle_decomposition(chain: &Chain, q: &Flow) -> Result<CycleDecomposition> {
    cycle_decomposition_with(chain, q, &Tolerances::default())
}

/// Peels cycles off a divergence-free flow.
///
/// Each round starts at the lexicographically smallest edge with residual
/// weight, walks forward along the smallest-index successor carrying
/// residual weight until a vertex repeats, and subtracts the minimum residual
/// along the closed loop found. That edge is zeroed exactly, so there are at
/// most |E(Q)| rounds.
pub fn cycle_decomposition_with(
    chain: &Chain,
    q: &Flow,
    tol: &Tolerances,
) -> Result<CycleDecomposition> {
    chain.check_edge_len(q.len())?;
    let norm = q.norm_l1();
    let div = chain.divergence(q)?;
    if div.max_abs() > tol.divergence_rel * norm {
        return Err(Error::NonZeroDivergence(div.max_abs()));
    }
    // Residuals at or below this are rounding debris.
    let floor = 1e-14 * norm;
    let mut residual: Vec<f64> = q.values().to_vec();
    let mut cycles = Vec::new();
    let n = chain.n_states();
    let mut position = vec![usize::MAX; n];
    while let Some(start) = (0..residual.len()).find(|&id| residual[id] > floor) {
        let e = chain.edge(start);
        let mut path = vec![e.from, e.to];
        let mut path_edges = vec![start];
        position[e.from] = 0;
        position[e.to] = 1;
        let closed_at = loop {
            let v = *path.last().expect("nonempty path");
            let next = chain
                .out_edges(v)
                .iter()
                .copied()
                .find(|&id| residual[id] > floor);
            let Some(id) = next else {
                break None;
            };
            let w = chain.edge(id).to;
            path_edges.push(id);
            if position[w] != usize::MAX {
                break Some(position[w]);
            }
            position[w] = path.len();
            path.push(w);
        };
        for &v in &path {
            position[v] = usize::MAX;
        }
        match closed_at {
            Some(k) => {
                let loop_edges = &path_edges[k..];
                let mut cycle: Vec<usize> = path[k..].to_vec();
                cycle.push(path[k]);
                let (argmin, weight) = loop_edges
                    .iter()
                    .map(|&id| (id, residual[id]))
                    .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
                for &id in loop_edges {
                    residual[id] -= weight;
                }
                residual[argmin] = 0.0;
                cycles.push((cycle, weight));
            }
            None => {
                // Dead end: the divergence defect left here is below tolerance.
                let last = *path_edges.last().expect("nonempty path");
                residual[last] = 0.0;
            }
        }
    }
    Ok(CycleDecomposition { cycles })
}

/// ∇g(y,z) = g(z) − g(y) on every chain edge.
pub fn gradient(chain: &Chain, g: &VertexFn) -> Result<EdgeFn> {
    chain.check_vertex_len(g.len())?;
    EdgeFn::new(chain.edges().iter().map(|e| g[e.to] - g[e.from]).collect())
}

/// Outcome of the path-independence test on an edge function.
#[derive(Debug, Clone, PartialEq)]
pub enum GradientCheck {
    /// g with ∇g = f on E_μ; zero at each generalized-reachability class's smallest vertex and outside V_μ.
    Potential(VertexFn),
    /// Two generalized paths with common endpoints and different integrals.
    Witness(GradientWitness),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientWitness {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub first_integral: f64,
    pub second_integral: f64,
}

impl GradientWitness {
    pub fn gap(&self) -> f64 {
        (self.first_integral - self.second_integral).abs()
    }

    /// Signed divergence-free edge vector Q_λ on E_μ: +λ along the first
    /// path and −λ along the second, with backward steps charged to the
    /// reversed edge. ⟨f, Q_λ⟩ = λ (∫_first f − ∫_second f).
    pub fn circulation(&self, sg: &SupportGraph<'_>, lambda: f64) -> Vec<f64> {
        let mut q = vec![0.0; sg.chain.n_edges()];
        for (path, sign) in [(&self.first, lambda), (&self.second, -lambda)] {
            for pair in path.windows(2) {
                match sg.support_edge(pair[0], pair[1]) {
                    Some(id) => q[id] += sign,
                    None => {
                        let id = sg
                            .support_edge(pair[1], pair[0])
                            .expect("generalized path step lies in E_mu*");
                        q[id] -= sign;
                    }
                }
            }
        }
        q
    }
}

/// f_*(y,z): f(y,z) on E_μ, −f(z,y) on reversed support edges.
fn f_star(sg: &SupportGraph<'_>, f: &EdgeFn, y: usize, z: usize) -> Option<f64> {
    if let Some(id) = sg.support_edge(y, z) {
        return Some(f[id]);
    }
    sg.support_edge(z, y).map(|id| -f[id])
}

/// ∫_γ f along a generalized path, `None` if some step leaves E_μ*.
pub fn generalized_integral(sg: &SupportGraph<'_>, f: &EdgeFn, path: &[usize]) -> Option<f64> {
    path.windows(2)
        .map(|p| f_star(sg, f, p[0], p[1]))
        .sum()
}

/// Decides whether `f` restricted to E_μ is a gradient.
///
/// A breadth-first spanning forest of the generalized-reachability classes
/// fixes tentative potentials; each support edge is then checked against
/// them, and a violating edge (y,z) yields the witness pair
/// (tree path to y, then (y,z)) vs. (tree path to z).
pub fn is_gradient(sg: &SupportGraph<'_>, f: &EdgeFn) -> Result<GradientCheck> {
    is_gradient_with(sg, f, Tolerances::default().gradient_check)
}

pub fn is_gradient_with(sg: &SupportGraph<'_>, f: &EdgeFn, tol: f64) -> Result<GradientCheck> {
    let chain = sg.chain;
    chain.check_edge_len(f.len())?;
    let n = chain.n_states();
    let mut neighbours = vec![Vec::new(); n];
    for &id in sg.edges() {
        let e = chain.edge(id);
        neighbours[e.from].push(e.to);
        neighbours[e.to].push(e.from);
    }
    for adj in &mut neighbours {
        adj.sort_unstable();
        adj.dedup();
    }
    let mut g = vec![0.0; n];
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for &root in sg.vertices() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &neighbours[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    g[w] = g[v] + f_star(sg, f, v, w).expect("neighbour in E_mu*");
                    queue.push_back(w);
                }
            }
        }
    }
    let tree_path = |mut v: usize| {
        let mut path = vec![v];
        while parent[v] != usize::MAX {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        path
    };
    for &id in sg.edges() {
        let e = chain.edge(id);
        if (g[e.to] - g[e.from] - f[id]).abs() > tol {
            let mut first = tree_path(e.from);
            first.push(e.to);
            let second = tree_path(e.to);
            let first_integral = generalized_integral(sg, f, &first).expect("valid path");
            let second_integral = generalized_integral(sg, f, &second).expect("valid path");
            return Ok(GradientCheck::Witness(GradientWitness {
                first,
                second,
                first_integral,
                second_integral,
            }));
        }
    }
    Ok(GradientCheck::Potential(VertexFn::new(g)?))
}

/// A signed combination of edges with zero divergence: `(edge id, ±1)`.
pub type SignedCycle = Vec<(usize, f64)>;

/// Fundamental cycle basis of the undirected graph underlying `edges`
/// (which must be connected on `vertices`): one signed cycle per edge left
/// out of a breadth-first spanning tree rooted at the smallest vertex.
pub fn fundamental_cycles(chain: &Chain, vertices: &[usize], edges: &[usize]) -> Vec<SignedCycle> {
    let n = chain.n_states();
    if vertices.is_empty() {
        return Vec::new();
    }
    let mut incident = vec![Vec::new(); n];
    for &id in edges {
        let e = chain.edge(id);
        incident[e.from].push(id);
        incident[e.to].push(id);
    }
    let mut parent_edge = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    let root = vertices[0];
    depth[root] = 0;
    let mut in_tree = vec![false; chain.n_edges()];
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &id in &incident[v] {
            let e = chain.edge(id);
            let w = if e.from == v { e.to } else { e.from };
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                parent_edge[w] = id;
                in_tree[id] = true;
                queue.push_back(w);
            }
        }
    }
    // Signed tree step from v toward its parent, oriented in travel direction.
    let up = |v: usize| {
        let id = parent_edge[v];
        let e = chain.edge(id);
        if e.from == v {
            (id, 1.0, e.to)
        } else {
            (id, -1.0, e.from)
        }
    };
    let mut basis = Vec::new();
    for &id in edges {
        if in_tree[id] {
            continue;
        }
        let e = chain.edge(id);
        // Close (y,z) with the tree path z → y.
        let mut cycle = vec![(id, 1.0)];
        let (mut a, mut b) = (e.to, e.from);
        let mut tail_b = Vec::new();
        while a != b {
            if depth[a] >= depth[b] {
                let (tid, s, next) = up(a);
                cycle.push((tid, s));
                a = next;
            } else {
                let (tid, s, next) = up(b);
                tail_b.push((tid, -s));
                b = next;
            }
        }
        cycle.extend(tail_b.into_iter().rev());
        basis.push(cycle);
    }
    basis
}

/// An oriented self-avoiding cycle through edge `id` using only `allowed`
/// edges, closed by a shortest oriented path back to its tail.
pub fn oriented_cycle_through(chain: &Chain, allowed: &[bool], id: usize) -> Option<Vec<usize>> {
    let e = chain.edge(id);
    let n = chain.n_states();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[e.to] = true;
    let mut queue = VecDeque::from([e.to]);
    while let Some(v) = queue.pop_front() {
        if v == e.from {
            let mut back = vec![v];
            let mut u = v;
            while u != e.to {
                u = prev[u];
                back.push(u);
            }
            back.reverse();
            let mut cycle = vec![e.from];
            cycle.extend(back);
            return Some(cycle);
        }
        for &out in chain.out_edges(v) {
            let w = chain.edge(out).to;
            if allowed[out] && !seen[w] {
                seen[w] = true;
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn three_cycle() -> Chain {
        Chain::from_rates(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap()
    }

    fn two_state() -> Chain {
        Chain::from_rates(2, &[(0, 1, 1.0), (1, 0, 2.0)]).unwrap()
    }

    #[test]
    fn support_graph_examples() {
        let tri = three_cycle();
        let full = Measure::uniform(3);
        let sg = support_graph(&tri, &full).unwrap();
        assert!(sg.is_full());
        assert_eq!(sg.vertices(), &[0, 1, 2]);

        let point = Measure::point(3, 0).unwrap();
        let sg = support_graph(&tri, &point).unwrap();
        assert_eq!(sg.edges(), &[tri.edge_id(0, 1).unwrap()]);
        assert_eq!(sg.vertices(), &[0, 1]);

        let c = two_state();
        let mu = Measure::new(vec![1.0, 0.0]).unwrap();
        let sg = support_graph(&c, &mu).unwrap();
        assert_eq!(sg.vertices(), &[0, 1]);
        assert!(sg.contains_vertex(1) && mu[1] == 0.0);
    }

    #[test]
    fn classes_examples() {
        let tri = three_cycle();
        let mu = Measure::uniform(3);
        let cp = mutual_reachability_classes(&support_graph(&tri, &mu).unwrap());
        assert_eq!(cp.classes, vec![vec![0, 1, 2]]);
        assert!(cp.cross_edges.is_empty());

        let c = two_state();
        let mu = Measure::new(vec![1.0, 0.0]).unwrap();
        let cp = mutual_reachability_classes(&support_graph(&c, &mu).unwrap());
        assert_eq!(cp.classes, vec![vec![0], vec![1]]);
        assert!(cp.class_edges.iter().all(|e| e.is_empty()));
        let cond = condensation(&cp).unwrap();
        assert_eq!(cond.edges, vec![(0, 1)]);
        assert_eq!(cond.order, vec![2, 1]);
    }

    #[test]
    fn single_class_order() {
        let cp = ClassPartition {
            classes: vec![vec![0]],
            class_of: vec![Some(0)],
            class_edges: vec![vec![]],
            cross_edges: vec![],
        };
        assert_eq!(condensation(&cp).unwrap().order, vec![1]);
    }

    #[test]
    fn cyclic_condensation_rejected() {
        let cp = ClassPartition {
            classes: vec![vec![0], vec![1]],
            class_of: vec![Some(0), Some(1)],
            class_edges: vec![vec![], vec![]],
            cross_edges: vec![(0, 0, 1), (1, 1, 0)],
        };
        assert_eq!(condensation(&cp), Err(Error::CyclicCondensation));
    }

    #[test]
    fn decomposition_examples() {
        let tri = three_cycle();
        let q = Flow::new(vec![2.0; 3]).unwrap();
        let dec = cycle_decomposition(&tri, &q).unwrap();
        assert_eq!(dec.cycles, vec![(vec![0, 1, 2, 0], 2.0)]);

        let c = two_state();
        let pi = c.stationary_distribution().unwrap();
        let dec = cycle_decomposition(&c, &c.mu_flow(&pi).unwrap()).unwrap();
        assert_eq!(dec.len(), 1);
        assert_abs_diff_eq!(dec.cycles[0].1, 2.0 / 3.0, epsilon = 1e-14);

        let bad = Flow::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(cycle_decomposition(&c, &bad), Err(Error::NonZeroDivergence(_))));
    }

    #[test]
    fn figure_eight() {
        // Two triangles sharing vertex 0.
        let c = Chain::from_rates(
            5,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (0, 3, 1.0), (3, 4, 1.0), (4, 0, 1.0)],
        )
        .unwrap();
        let q = Flow::cycle_indicator(&c, &[0, 1, 2, 0])
            .unwrap()
            .combine(1.0, &Flow::cycle_indicator(&c, &[0, 3, 4, 0]).unwrap(), 3.0)
            .unwrap();
        let dec = cycle_decomposition(&c, &q).unwrap();
        let mut weights: Vec<f64> = dec.cycles.iter().map(|c| c.1).collect();
        weights.sort_by(f64::total_cmp);
        assert_eq!(weights, vec![1.0, 3.0]);
        assert_eq!(dec.reconstruct(&c).unwrap(), q);
    }

    #[test]
    fn gradient_examples() {
        let tri = three_cycle();
        let g = VertexFn::new(vec![0.0, 1.0, 2.0]).unwrap();
        let grad = gradient(&tri, &g).unwrap();
        assert_eq!(grad.values(), &[1.0, 1.0, -2.0]);
        assert!(gradient(&tri, &VertexFn::constant(3, 5.0))
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn is_gradient_examples() {
        let tri = three_cycle();
        let mu = Measure::uniform(3);
        let sg = support_graph(&tri, &mu).unwrap();
        match is_gradient(&sg, &EdgeFn::constant(3, 1.0)).unwrap() {
            GradientCheck::Witness(w) => {
                assert_eq!(w.first[0], w.second[0]);
                assert_eq!(w.first.last(), w.second.last());
                assert_abs_diff_eq!(w.gap(), 3.0, epsilon = 1e-12);
            }
            other => panic!("expected witness, got {other:?}"),
        }

        let c = Chain::from_rates(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let mu = Measure::uniform(2);
        let sg = support_graph(&c, &mu).unwrap();
        let f = EdgeFn::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(
            is_gradient(&sg, &f).unwrap(),
            GradientCheck::Potential(VertexFn::new(vec![0.0, 1.0]).unwrap())
        );
    }

    #[test]
    fn fundamental_cycles_are_divergence_free() {
        let c = Chain::from_rates(
            4,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 3, 1.0), (3, 1, 1.0), (1, 0, 1.0)],
        )
        .unwrap();
        let edges: Vec<usize> = (0..c.n_edges()).collect();
        let basis = fundamental_cycles(&c, &[0, 1, 2, 3], &edges);
        assert_eq!(basis.len(), c.n_edges() - 4 + 1);
        for cycle in basis {
            let mut v = vec![0.0; c.n_edges()];
            for (id, s) in cycle {
                v[id] += s;
            }
            assert!(c.signed_divergence(&v).iter().all(|d| d.abs() < 1e-15));
        }
        let allowed = vec![true; c.n_edges()];
        for id in 0..c.n_edges() {
            let cyc = oriented_cycle_through(&c, &allowed, id).unwrap();
            let ind = Flow::cycle_indicator(&c, &cyc).unwrap();
            assert!(ind[id] == 1.0);
            assert!(c.divergence(&ind).unwrap().max_abs() == 0.0);
        }
    }
}
