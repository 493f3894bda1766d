use crate::error::{Error, Result};
use crate::geometry::{integrate_density, ScalarField};
use crate::linalg::{gmres, KrylovConfig};

use super::problem::{ChernYamabeProblem, SolverSolution, TraceRow};

/// Tolerance on `|Γ|` for the zero-degree solve.
pub const DEGREE_TOLERANCE: f64 = 1e-8;

/// Solves `Δ^Ch u = rhs` for `rhs` with `∫ rhs · w = 0`, fixing `∫ u · w = 0`.
///
/// The system `Δ^Ch u + σ·⟨w, u⟩/⟨w, 1⟩ = rhs` is nonsingular (the kernel of `Δ^Ch`
/// is the constants and `w` spans the kernel of its transpose) and is solved by GMRES
/// preconditioned with the averaged constant-coefficient operator.
///
/// `scale` is the magnitude of the data the right-hand side was computed from; residuals
/// below roundoff at that scale count as converged.
pub(crate) fn solve_weighted_poisson(
    problem: &ChernYamabeProblem,
    rhs: &ScalarField,
    scale: f64,
) -> Result<(ScalarField, usize)> {
    let chart = problem.chart();
    let w = problem.constraint_weight.values();
    let wsum: f64 = w.iter().sum();
    let sigma = 1.0;
    let op = &problem.laplacian;
    let apply = |u: &[f64]| -> Vec<f64> {
        let m = u.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / wsum;
        op.apply_slice(u).into_iter().map(|v| v + sigma * m).collect()
    };
    let precondition = |r: &[f64]| op.precondition(r, |k| if k == 0 { sigma } else { 0.0 });
    let out = gmres(
        apply,
        precondition,
        rhs.values(),
        None,
        KrylovConfig {
            tolerance: 1e-12,
            absolute_tolerance: 1e-14 * (chart.len() as f64).sqrt() * scale,
            restart: 80,
            max_iterations: 2000,
        },
    );
    if !out.converged {
        return Err(Error::NoConvergence {
            what: "linear Chern-Laplacian solve",
            iterations: out.iterations,
            residual: out.relative_residual,
        });
    }
    Ok((ScalarField::new(chart, out.solution)?, out.iterations))
}

/// Removes the `w`-weighted mean from `rhs` so that it lies in the image of `Δ^Ch`.
fn project_out_kernel(problem: &ChernYamabeProblem, rhs: &ScalarField) -> ScalarField {
    let w = &problem.constraint_weight;
    let mean = integrate_density(rhs, w) / integrate_density(&ScalarField::constant(rhs.chart(), 1.0), w);
    rhs.shift(-mean)
}

/// Zero-degree case: solves `Δ^Ch f = −S` and normalizes, so the new metric has `S^Ch ≡ 0`.
pub fn solve_zero_degree(problem: &ChernYamabeProblem) -> Result<SolverSolution> {
    let gamma = integrate_density(&problem.scalar, &problem.constraint_weight);
    if gamma.abs() > DEGREE_TOLERANCE {
        return Err(Error::DegreeMismatch { mean: gamma });
    }
    let rhs = project_out_kernel(problem, &problem.scalar.scale(-1.0));
    let (f, iterations) = solve_weighted_poisson(problem, &rhs, problem.scalar.sup_norm())?;
    let mut solution = problem.finish(&f, 0.0, Vec::new(), iterations, 0, 0.0);
    solution.trace.push(TraceRow {
        t: 1.0,
        residual: solution.residual,
        f_sup: solution.f.sup_norm(),
        functional: None,
        lower_margin: None,
        upper_margin: None,
        iterations,
    });
    Ok(solution)
}

/// Negative degree: the normalized potential `u` with `S^Ch(e^{2u/n} ω_p) = Γ·e^{−2(u+p)/n}`,
/// pointwise negative. It solves `Δ^Ch u = −S + Γ e^{−2p/n}` (`p` the base potential).
pub fn negativize(problem: &ChernYamabeProblem) -> Result<ScalarField> {
    let gamma = problem.degree;
    if gamma >= 0.0 {
        return Err(Error::Sign(format!("negativize needs a negative degree, got {gamma}")));
    }
    let n = problem.complex_dim() as f64;
    let target = problem.base_potential.map(|p| gamma * (-2.0 * p / n).exp());
    let rhs = project_out_kernel(problem, &target.sub(&problem.scalar));
    let (u, _) = solve_weighted_poisson(problem, &rhs, problem.scalar.sup_norm() + target.sup_norm())?;
    Ok(u.shift(problem.normalization_shift(&u)))
}
