//! Newton descent of the flow cost over the cycle space of one class.
//!
//! Iterates stay divergence-free by construction: the start is a sum of
//! oriented cycle indicators and every step is a combination of
//! fundamental cycles. A fraction-to-boundary rule keeps every class edge
//! strictly positive, where the cost is smooth and strictly convex.

use nalgebra::{DMatrix, DVector};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::functionals::phi_positive;

/// A class in local edge indices.
pub(crate) struct CycleProblem {
    /// Reference weights μ(y) r(y,z) > 0, one per class edge.
    pub weights: Vec<f64>,
    /// Strictly positive divergence-free starting flow.
    pub start: Vec<f64>,
    /// Fundamental cycles as `(local edge, ±1)`.
    pub basis: Vec<Vec<(usize, f64)>>,
}

pub(crate) struct PrimalSolution {
    pub flow: Vec<f64>,
    pub iterations: usize,
    /// max over basis cycles of |Σ ± log(Q/w)|.
    pub residual: f64,
}

fn cost(flow: &[f64], weights: &[f64]) -> f64 {
    flow.iter().zip(weights).map(|(&q, &w)| phi_positive(q, w)).sum()
}

fn gradient(problem: &CycleProblem, flow: &[f64]) -> Vec<f64> {
    problem
        .basis
        .iter()
        .map(|cycle| {
            cycle
                .iter()
                .map(|&(e, s)| s * (flow[e].ln() - problem.weights[e].ln()))
                .sum()
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, g| m.max(g.abs()))
}

pub(crate) fn solve(problem: &CycleProblem, cfg: &SolverConfig) -> Result<PrimalSolution> {
    let k = problem.basis.len();
    // Start at the same scale as the reference flow.
    let mean_w = problem.weights.iter().sum::<f64>() / problem.weights.len().max(1) as f64;
    let mean_q = problem.start.iter().sum::<f64>() / problem.start.len().max(1) as f64;
    let mut flow: Vec<f64> = problem.start.iter().map(|q| q * mean_w / mean_q).collect();
    if k == 0 {
        return Ok(PrimalSolution {
            flow,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut value = cost(&flow, &problem.weights);
    let mut grad = gradient(problem, &flow);
    let mut residual = max_abs(&grad);
    let mut iterations = 0;
    let mut polish = 0;
    loop {
        if residual <= cfg.gradient_tol {
            if polish == 2 {
                break;
            }
            polish += 1;
        }
        if iterations >= cfg.max_iter {
            if residual <= cfg.gradient_tol {
                break;
            }
            return Err(Error::NoConvergence {
                solver: "cycle-basis Newton",
                iterations,
                residual,
            });
        }
        iterations += 1;
        let mut hess = DMatrix::<f64>::zeros(k, k);
        // Hessian B^T diag(1/Q) B, assembled edge by edge.
        let mut by_edge: Vec<Vec<(usize, f64)>> = vec![Vec::new(); flow.len()];
        for (c, cycle) in problem.basis.iter().enumerate() {
            for &(e, s) in cycle {
                by_edge[e].push((c, s));
            }
        }
        for (e, entries) in by_edge.iter().enumerate() {
            let inv = 1.0 / flow[e];
            for &(a, sa) in entries {
                for &(b, sb) in entries {
                    hess[(a, b)] += sa * sb * inv;
                }
            }
        }
        let rhs = DVector::from_iterator(k, grad.iter().map(|g| -g));
        let Some(ch) = hess.cholesky() else {
            return Err(Error::NoConvergence {
                solver: "cycle-basis Newton",
                iterations,
                residual,
            });
        };
        let coeffs = ch.solve(&rhs);
        let mut direction = vec![0.0; flow.len()];
        for (c, cycle) in problem.basis.iter().enumerate() {
            for &(e, s) in cycle {
                direction[e] += s * coeffs[c];
            }
        }
        let mut t_max = f64::INFINITY;
        for (q, d) in flow.iter().zip(&direction) {
            if *d < 0.0 {
                t_max = t_max.min(-q / d);
            }
        }
        let mut t = (0.99 * t_max).min(1.0);
        let slope: f64 = -rhs.dot(&coeffs);
        let mut accepted = None;
        while t > 1e-16 {
            let trial: Vec<f64> = flow.iter().zip(&direction).map(|(q, d)| q + t * d).collect();
            if trial.iter().all(|&q| q > 0.0) {
                let v = cost(&trial, &problem.weights);
                // Near the optimum cost differences drown in rounding; fall
                // back to requiring a smaller gradient.
                let flat = slope.abs() <= 1e-13 * value.abs().max(1.0);
                if v <= value + 1e-4 * t * slope
                    || (flat && max_abs(&gradient(problem, &trial)) < residual)
                {
                    accepted = Some((trial, v));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, v)) = accepted else {
            if residual <= cfg.gradient_tol {
                break;
            }
            return Err(Error::NoConvergence {
                solver: "cycle-basis Newton",
                iterations,
                residual,
            });
        };
        let trial_grad = gradient(problem, &trial);
        let trial_residual = max_abs(&trial_grad);
        if residual <= cfg.gradient_tol && trial_residual >= residual {
            break;
        }
        flow = trial;
        value = v;
        grad = trial_grad;
        residual = trial_residual;
    }
    Ok(PrimalSolution {
        flow,
        iterations,
        residual,
    })
}
