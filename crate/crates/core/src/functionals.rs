//! Scalar functionals: the Poisson cost Φ, the joint rate I(μ,Q), its
//! perturbed lower bounds, the Donsker–Varadhan objective and the closed
//! forms available for reversible chains.

use std::fmt;

use crate::chain::{guarded_exp, Chain, EdgeFn, Flow, Measure, VertexFn};
use crate::config::{Tolerances, EXP_GUARD};
use crate::error::{Error, Result};

/// A value in [0, +∞].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    /// Lossy view as `f64`, mapping +∞ to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl std::ops::Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

/// Φ(q,p) = q log(q/p) − (q − p), with Φ(0,p) = p and Φ(q,0) = +∞ for q > 0.
pub fn phi(q: f64, p: f64) -> Result<ExtendedReal> {
    if !(q >= 0.0 && p >= 0.0) {
        return Err(Error::NegativeArgument { q, p });
    }
    if q.is_infinite() || p.is_infinite() {
        return Err(Error::NonFinite("phi argument"));
    }
    Ok(if q == 0.0 {
        ExtendedReal::Finite(p)
    } else if p == 0.0 {
        ExtendedReal::Infinite
    } else {
        ExtendedReal::Finite(phi_positive(q, p))
    })
}

/// Φ on the open quadrant, logs taken separately.
pub(crate) fn phi_positive(q: f64, p: f64) -> f64 {
    let value = q * (q.ln() - p.ln()) - (q - p);
    // Rounding can push the exact zero at q = p slightly negative.
    value.max(0.0)
}

/// Σ_E Φ(Q, Q^μ) without the divergence constraint.
pub fn flow_cost(chain: &Chain, mu: &Measure, q: &Flow) -> Result<ExtendedReal> {
    chain.check_vertex_len(mu.len())?;
    chain.check_edge_len(q.len())?;
    let mut total = ExtendedReal::Finite(0.0);
    for (id, e) in chain.edges().iter().enumerate() {
        total = total + phi(q[id], mu[e.from] * chain.rate(id))?;
        if total.is_infinite() {
            break;
        }
    }
    Ok(total)
}

/// max_x |div Q(x)|.
pub fn divergence_residual(chain: &Chain, q: &Flow) -> Result<f64> {
    Ok(chain.divergence(q)?.max_abs())
}

pub fn joint_rate(chain: &Chain, mu: &Measure, q: &Flow) -> Result<ExtendedReal> {
    joint_rate_with(chain, mu, q, &Tolerances::default())
}

/// I(μ,Q): the flow cost when Q is divergence-free (up to
/// `divergence_rel · max(‖Q‖₁, 1)`), +∞ otherwise.
pub fn joint_rate_with(
    chain: &Chain,
    mu: &Measure,
    q: &Flow,
    tol: &Tolerances,
) -> Result<ExtendedReal> {
    let residual = divergence_residual(chain, q)?;
    if residual > tol.divergence_rel * q.norm_l1().max(1.0) {
        return Ok(ExtendedReal::Infinite);
    }
    flow_cost(chain, mu, q)
}

/// I_{φ,F}(μ,Q) = ⟨φ, div Q⟩ − ⟨μ, r^F − r⟩ + Σ Q F.
pub fn perturbed_rate(
    chain: &Chain,
    mu: &Measure,
    q: &Flow,
    potential: &VertexFn,
    f: &EdgeFn,
) -> Result<f64> {
    chain.check_vertex_len(mu.len())?;
    chain.check_vertex_len(potential.len())?;
    let div = chain.divergence(q)?;
    let tilted = chain.tilted_exit_rate(f)?;
    let divergence_term: f64 = potential
        .values()
        .iter()
        .zip(div.values())
        .map(|(a, b)| a * b)
        .sum();
    let exit_term: f64 = (0..chain.n_states())
        .map(|x| mu[x] * (tilted[x] - chain.exit_rates()[x]))
        .sum();
    let flux_term: f64 = q.values().iter().zip(f.values()).map(|(a, b)| a * b).sum();
    Ok(divergence_term - exit_term + flux_term)
}

/// −⟨μ, e^{−g} L e^{g}⟩ in the expanded form Σ_E μ(y) r(y,z) (1 − e^{g(z)−g(y)}).
pub fn dv_objective(chain: &Chain, mu: &Measure, g: &VertexFn) -> Result<f64> {
    chain.check_vertex_len(mu.len())?;
    chain.check_vertex_len(g.len())?;
    let mut total = 0.0;
    for (id, e) in chain.edges().iter().enumerate() {
        let w = mu[e.from] * chain.rate(id);
        let step = g[e.to] - g[e.from];
        if step.abs() > EXP_GUARD {
            return Err(Error::Overflow(step));
        }
        if w > 0.0 {
            total += w * (1.0 - step.exp());
        }
    }
    Ok(total)
}

/// −⟨μ, e^{−g} L e^{g}⟩ evaluated literally through the generator.
pub fn dv_objective_bracket(chain: &Chain, mu: &Measure, g: &VertexFn) -> Result<f64> {
    let eg = VertexFn::new(
        g.values()
            .iter()
            .map(|&v| guarded_exp(v))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let l = chain.apply_generator(&eg)?;
    Ok(-(0..chain.n_states())
        .map(|x| mu[x] * l[x] / eg[x])
        .sum::<f64>())
}

fn require_reversible(chain: &Chain, tol: &Tolerances) -> Result<()> {
    let pi = chain.stationary_distribution_with(tol)?;
    if chain.is_reversible(&pi, tol) {
        Ok(())
    } else {
        Err(Error::NotReversible)
    }
}

/// ½ Σ_y Σ_z (√(μ(y) r(y,z)) − √(μ(z) r(z,y)))² for reversible chains.
pub fn reversible_rate(chain: &Chain, mu: &Measure) -> Result<f64> {
    chain.check_vertex_len(mu.len())?;
    require_reversible(chain, &Tolerances::default())?;
    let total: f64 = chain
        .edges()
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let back = chain.rate_between(e.to, e.from);
            let d = (mu[e.from] * chain.rate(id)).sqrt() - (mu[e.to] * back).sqrt();
            d * d
        })
        .sum();
    Ok(0.5 * total)
}

/// Q*(y,z) = √(μ(y) μ(z) r(y,z) r(z,y)) for reversible chains.
pub fn reversible_optimal_flow(chain: &Chain, mu: &Measure) -> Result<Flow> {
    chain.check_vertex_len(mu.len())?;
    require_reversible(chain, &Tolerances::default())?;
    Flow::new(
        chain
            .edges()
            .iter()
            .enumerate()
            .map(|(id, e)| {
                (mu[e.from] * mu[e.to] * chain.rate(id) * chain.rate_between(e.to, e.from)).sqrt()
            })
            .collect(),
    )
}
