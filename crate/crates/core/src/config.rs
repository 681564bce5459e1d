//! Numerical tolerances and solver limits, gathered in one place so the CLI
//! can override them.

/// Tolerances used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Probability measures must sum to one within this.
    pub normalization: f64,
    /// Balance-equation residual for the stationary solve and detailed balance.
    pub residual: f64,
    /// Relative divergence tolerance (times `max(‖Q‖₁, 1)`) for a flow to count as divergence-free.
    pub divergence_rel: f64,
    /// Path integrals differing by more than this make an edge function non-gradient.
    pub gradient_check: f64,
    /// Allowed path dependence when building class potentials from an optimal flow.
    pub potential: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            normalization: 1e-12,
            residual: 1e-10,
            divergence_rel: 1e-12,
            gradient_check: 1e-9,
            potential: 1e-8,
        }
    }
}

/// Which algorithm produces the optimal flow in the contraction solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowMethod {
    /// Damped Newton on the concave Donsker–Varadhan objective; the flow is read off the potential.
    /// Falls back to [`FlowMethod::CycleBasis`] if Newton stalls.
    #[default]
    DualNewton,
    /// Newton on the flow cost restricted to the affine space spanned by a fundamental cycle basis.
    CycleBasis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop when the max-norm of the gradient falls below `gradient_tol · max(1, scale)`.
    pub gradient_tol: f64,
    pub max_iter: usize,
    pub method: FlowMethod,
    pub tol: Tolerances,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gradient_tol: 1e-10,
            max_iter: 500,
            method: FlowMethod::default(),
            tol: Tolerances::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_method(mut self, method: FlowMethod) -> Self {
        self.method = method;
        self
    }
}

/// Exponents above this magnitude are rejected before calling `exp`.
pub const EXP_GUARD: f64 = 700.0;

/// Largest state space accepted by the dense stationary solver.
pub const MAX_STATES: usize = 2000;
