use serde::{Deserialize, Serialize};

use crate::geometry::ScalarField;
use crate::linalg::{gmres, KrylovConfig};

use super::problem::{ChernYamabeProblem, SolverSolution, TraceRow};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmallDataConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub linear_tolerance: f64,
    /// Iteration is abandoned once `‖u‖_∞` exceeds this.
    pub divergence_cap: f64,
}

impl Default for SmallDataConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            linear_tolerance: 1e-12,
            divergence_cap: 50.0,
        }
    }
}

/// Result of the small-data Newton iteration; divergence is an outcome, not an error.
#[derive(Clone, Debug)]
pub struct SmallDataOutcome {
    pub converged: bool,
    pub solution: Option<SolverSolution>,
    pub iterations: usize,
    /// `max(‖Δ^Ch u + S − λ e^{2u/n}‖_∞, |∫ e^{2u/n} w − 1|)` per iteration.
    pub residual_history: Vec<f64>,
    pub final_lambda: f64,
}

/// Newton on the bordered system `(Δ^Ch u + S − λ e^{2u/n}, ∫ e^{2u/n} w − 1) = 0` for the
/// unknowns `(u, λ)`, starting from `u = 0`, `λ = Γ`. Any sign of `Γ` is accepted.
pub fn small_data_solve(problem: &ChernYamabeProblem, config: &SmallDataConfig) -> SmallDataOutcome {
    let chart = problem.chart();
    let len = chart.len();
    let n = problem.complex_dim() as f64;
    let cell = chart.cell_volume();
    let w = problem.constraint_weight.values();
    let volume: f64 = w.iter().sum::<f64>() * cell;
    let op = &problem.laplacian;

    let residual = |u: &[f64], lambda: f64| -> (Vec<f64>, f64) {
        let lu = op.apply_slice(u);
        let r: Vec<f64> = (0..len)
            .map(|p| lu[p] + problem.scalar.values()[p] - lambda * (2.0 * u[p] / n).exp())
            .collect();
        let c = u.iter().zip(w).map(|(v, wp)| (2.0 * v / n).exp() * wp).sum::<f64>() * cell - 1.0;
        (r, c)
    };
    let measure = |r: &[f64], c: f64| r.iter().fold(c.abs(), |m, x| m.max(x.abs()));

    let mut u = vec![0.0; len];
    let mut lambda = problem.degree;
    let (mut r, mut c) = residual(&u, lambda);
    let mut history = vec![measure(&r, c)];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        let current = *history.last().expect("non-empty");
        if !current.is_finite() || u.iter().any(|v| v.abs() > config.divergence_cap) {
            break;
        }
        if current < config.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let e: Vec<f64> = u.iter().map(|v| (2.0 * v / n).exp()).collect();
        let apply = |x: &[f64]| -> Vec<f64> {
            let (du, dl) = (&x[..len], x[len]);
            let ldu = op.apply_slice(du);
            let mut out: Vec<f64> = (0..len)
                .map(|p| ldu[p] - 2.0 * lambda / n * e[p] * du[p] - dl * e[p])
                .collect();
            out.push((0..len).map(|p| 2.0 / n * e[p] * w[p] * du[p]).sum::<f64>() * cell);
            out
        };
        // Approximate inverse of [[L0, −1], [(2/n)⟨w, ·⟩, 0]]: the constant part of the
        // u-equation fixes δλ, the constraint fixes the constant in δu.
        let precondition = |x: &[f64]| -> Vec<f64> {
            let (ru, rl) = (&x[..len], x[len]);
            let mean = ru.iter().sum::<f64>() / len as f64;
            let centered: Vec<f64> = ru.iter().map(|v| v - mean).collect();
            let mut du = op.precondition(&centered, |k| if k == 0 { 1.0 } else { 0.0 });
            let wdu = du.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() * cell;
            let shift = (0.5 * n * rl - wdu) / volume;
            for v in du.iter_mut() {
                *v += shift;
            }
            du.push(-mean);
            du
        };
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        rhs.push(-c);
        let step = gmres(
            apply,
            precondition,
            &rhs,
            None,
            KrylovConfig {
                tolerance: config.linear_tolerance,
                restart: 80,
                max_iterations: 800,
                absolute_tolerance: 0.0,
            },
        );
        for (a, d) in u.iter_mut().zip(&step.solution[..len]) {
            *a += d;
        }
        lambda += step.solution[len];
        let next = residual(&u, lambda);
        r = next.0;
        c = next.1;
        history.push(measure(&r, c));
    }
    if !converged {
        converged = history.last().is_some_and(|v| *v < config.tolerance);
    }

    let solution = converged.then(|| {
        let f = ScalarField::from_vec_unchecked(chart, u.clone());
        let trace = history
            .iter()
            .enumerate()
            .map(|(i, res)| TraceRow {
                t: i as f64,
                residual: *res,
                f_sup: f64::NAN,
                functional: None,
                lower_margin: None,
                upper_margin: None,
                iterations: i,
            })
            .collect();
        problem.finish(&f, lambda, trace, iterations, 0, 0.0)
    });
    SmallDataOutcome {
        converged,
        solution,
        iterations,
        residual_history: history,
        final_lambda: lambda,
    }
}
