//! Damped Newton ascent of the Donsker–Varadhan objective on one class.
//!
//! On a class with edge weights w = μ(y) r(y,z) > 0 the objective
//! Σ w (1 − e^{∇g}) is concave, its gradient at g is div Q with
//! Q = w e^{∇g}, and its Hessian is minus the graph Laplacian weighted by
//! Q. Pinning g at the reference vertex makes the reduced Laplacian
//! positive definite on a strongly connected class.

use nalgebra::{DMatrix, DVector};

use crate::config::{SolverConfig, EXP_GUARD};
use crate::error::{Error, Result};

/// A class as a local problem: vertices `0..n`, vertex 0 is the reference.
pub(crate) struct ClassProblem {
    pub n: usize,
    /// `(tail, head, weight)` in local indices.
    pub arcs: Vec<(usize, usize, f64)>,
}

pub(crate) struct DualSolution {
    pub potential: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Objective value at each accepted iterate, starting from g = 0.
    pub trace: Vec<f64>,
}

impl ClassProblem {
    fn evaluate(&self, g: &[f64]) -> Option<(f64, Vec<f64>)> {
        let mut objective = 0.0;
        let mut flow = Vec::with_capacity(self.arcs.len());
        for &(y, z, w) in &self.arcs {
            let step = g[z] - g[y];
            if step > EXP_GUARD {
                return None;
            }
            let q = w * step.exp();
            objective += w - q;
            flow.push(q);
        }
        Some((objective, flow))
    }

    fn divergence(&self, flow: &[f64]) -> Vec<f64> {
        let mut div = vec![0.0; self.n];
        for (&(y, z, _), &q) in self.arcs.iter().zip(flow) {
            div[y] += q;
            div[z] -= q;
        }
        div
    }

    fn scale(&self) -> f64 {
        self.arcs.iter().map(|a| a.2).sum::<f64>().max(1.0)
    }
}

fn max_abs_reduced(v: &[f64]) -> f64 {
    v.iter().skip(1).fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn solve(problem: &ClassProblem, cfg: &SolverConfig) -> Result<DualSolution> {
    let n = problem.n;
    let mut g = vec![0.0; n];
    if n == 1 {
        return Ok(DualSolution {
            potential: g,
            iterations: 0,
            residual: 0.0,
            trace: vec![0.0],
        });
    }
    let tol = cfg.gradient_tol * problem.scale();
    let (mut objective, mut flow) = problem.evaluate(&g).ok_or(Error::Overflow(0.0))?;
    let mut trace = vec![objective];
    let mut grad = problem.divergence(&flow);
    let mut residual = max_abs_reduced(&grad);
    let mut iterations = 0;
    let mut polish = 0;
    loop {
        if residual <= tol {
            // A couple of extra full steps push the residual to rounding level.
            if polish == 2 {
                break;
            }
            polish += 1;
        }
        if iterations >= cfg.max_iter {
            if residual <= tol {
                break;
            }
            return Err(Error::NoConvergence {
                solver: "dual Newton",
                iterations,
                residual,
            });
        }
        iterations += 1;
        let m = n - 1;
        let mut lap = DMatrix::<f64>::zeros(m, m);
        for (&(y, z, _), &q) in problem.arcs.iter().zip(&flow) {
            if y > 0 {
                lap[(y - 1, y - 1)] += q;
            }
            if z > 0 {
                lap[(z - 1, z - 1)] += q;
            }
            if y > 0 && z > 0 {
                lap[(y - 1, z - 1)] -= q;
                lap[(z - 1, y - 1)] -= q;
            }
        }
        let rhs = DVector::from_iterator(m, grad.iter().skip(1).copied());
        let step = match lap.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => lap.lu().solve(&rhs).ok_or(Error::NoConvergence {
                solver: "dual Newton",
                iterations,
                residual,
            })?,
        };
        let slope: f64 = rhs.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-14 {
            let trial: Vec<f64> = std::iter::once(0.0)
                .chain((0..m).map(|i| g[i + 1] + t * step[i]))
                .collect();
            if let Some((obj, fl)) = problem.evaluate(&trial) {
                // Near the optimum objective differences drown in rounding;
                // fall back to requiring a smaller gradient.
                let flat = slope.abs() <= 1e-13 * objective.abs().max(1.0);
                if obj >= objective + 1e-4 * t * slope
                    || (flat && max_abs_reduced(&problem.divergence(&fl)) < residual)
                {
                    accepted = Some((trial, obj, fl));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, obj, fl)) = accepted else {
            if residual <= tol {
                break;
            }
            return Err(Error::NoConvergence {
                solver: "dual Newton",
                iterations,
                residual,
            });
        };
        let trial_grad = problem.divergence(&fl);
        let trial_residual = max_abs_reduced(&trial_grad);
        if residual <= tol && trial_residual >= residual {
            break;
        }
        g = trial;
        objective = obj;
        flow = fl;
        grad = trial_grad;
        residual = trial_residual;
        trace.push(objective);
    }
    Ok(DualSolution {
        potential: g,
        iterations,
        residual,
        trace,
    })
}
