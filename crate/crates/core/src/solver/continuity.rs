use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::linalg::{gmres, norm, KrylovConfig};

use super::problem::{ChernYamabeProblem, SolverSolution, TraceRow};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuityConfig {
    /// Number of uniform steps in `t ∈ [0, 1]`.
    pub steps: usize,
    /// Maximum step halvings while trying to reach the next parameter value.
    pub max_halvings: usize,
    /// Newton stops once `‖F‖_∞` is below this.
    pub newton_tolerance: f64,
    pub max_newton_iterations: usize,
    /// Relative GMRES tolerance for each Newton correction.
    pub linear_tolerance: f64,
    /// Discrete slack allowed on the a-priori envelope.
    pub bound_slack: f64,
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        Self {
            steps: 20,
            max_halvings: 8,
            newton_tolerance: 1e-9,
            max_newton_iterations: 50,
            linear_tolerance: 1e-10,
            bound_slack: 1e-8,
        }
    }
}

/// Uniform envelope for `e^{2f/n}` along the continuity path
/// `Δ^Ch f + tS − λ e^{2f/n} + λ(1−t) = 0`, `t ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriBounds {
    pub lower: f64,
    pub upper: f64,
}

impl AprioriBounds {
    /// Envelope for `f` itself: `(n/2) ln lower ≤ f ≤ (n/2) ln upper`.
    pub fn potential_interval(&self, n: usize) -> (f64, f64) {
        let h = 0.5 * n as f64;
        (h * self.lower.ln(), h * self.upper.ln())
    }

    /// `(min e^{2f/n} − lower, upper − max e^{2f/n})`; negative entries are violations.
    pub fn margins(&self, f: &ScalarField, n: usize) -> (f64, f64) {
        let e_min = (2.0 * f.min() / n as f64).exp();
        let e_max = (2.0 * f.max() / n as f64).exp();
        (e_min - self.lower, self.upper - e_max)
    }
}

/// Bounds from evaluating the path equation at extremal points of `f`:
/// upper `(max S + λ)/λ`, lower `min{min(−S), −λ}/(−λ)`.
pub fn apriori_bounds(scalar: &ScalarField, lambda: f64) -> Result<AprioriBounds> {
    if lambda >= 0.0 {
        return Err(Error::Sign(format!("a-priori bounds need λ < 0, got {lambda}")));
    }
    let smax = scalar.max();
    if smax >= 0.0 {
        return Err(Error::Sign(format!("a-priori bounds need S < 0 pointwise, max S = {smax}")));
    }
    Ok(AprioriBounds {
        lower: (-smax).min(-lambda) / (-lambda),
        upper: (smax + lambda) / lambda,
    })
}

pub(crate) struct NewtonOutcome {
    pub f: ScalarField,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// `F_t(f) = Δ^Ch f + tS − λ e^{2f/n} + λ(1 − t)`.
fn path_residual(problem: &ChernYamabeProblem, t: f64, lambda: f64, f: &[f64]) -> Vec<f64> {
    let n = problem.complex_dim() as f64;
    let lf = problem.laplacian.apply_slice(f);
    lf.iter()
        .zip(f)
        .zip(problem.scalar.values())
        .map(|((l, fv), s)| l + t * s - lambda * (2.0 * fv / n).exp() + lambda * (1.0 - t))
        .collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton for `F_t(f) = 0` with Jacobian `Dv = Δ^Ch v − (2λ/n) e^{2f/n} v`.
pub(crate) fn newton(
    problem: &ChernYamabeProblem,
    t: f64,
    lambda: f64,
    start: &ScalarField,
    config: &ContinuityConfig,
) -> NewtonOutcome {
    let n = problem.complex_dim() as f64;
    let op = &problem.laplacian;
    let mut f = start.values().to_vec();
    let mut r = path_residual(problem, t, lambda, &f);
    let mut iterations = 0;
    loop {
        let res = sup(&r);
        if !res.is_finite() {
            break;
        }
        if res < config.newton_tolerance {
            return NewtonOutcome {
                f: ScalarField::new(problem.chart(), f).expect("finite iterate"),
                iterations,
                residual: res,
                converged: true,
            };
        }
        if iterations >= config.max_newton_iterations {
            break;
        }
        iterations += 1;
        let mult: Vec<f64> = f.iter().map(|v| -2.0 * lambda / n * (2.0 * v / n).exp()).collect();
        let mean_mult = mult.iter().sum::<f64>() / mult.len() as f64;
        let apply = |v: &[f64]| -> Vec<f64> {
            op.apply_slice(v).into_iter().zip(v).zip(&mult).map(|((l, x), m)| l + m * x).collect()
        };
        let precondition = |v: &[f64]| {
            op.precondition(v, |k| {
                if mean_mult > 1e-12 {
                    mean_mult
                } else if k == 0 {
                    1.0
                } else {
                    0.0
                }
            })
        };
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let step = gmres(
            apply,
            precondition,
            &neg,
            None,
            KrylovConfig {
                tolerance: config.linear_tolerance,
                restart: 60,
                max_iterations: 600,
                absolute_tolerance: 0.0,
            },
        );
        // backtracking on the Euclidean residual norm
        let r0 = norm(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<f64> = f.iter().zip(&step.solution).map(|(a, d)| a + alpha * d).collect();
            let rt = path_residual(problem, t, lambda, &trial);
            let rn = norm(&rt);
            if rn.is_finite() && rn <= (1.0 - 1e-4 * alpha) * r0 {
                f = trial;
                r = rt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    NewtonOutcome {
        residual: sup(&r),
        f: ScalarField::from_vec_unchecked(problem.chart(), f),
        iterations,
        converged: false,
    }
}

/// Continuity method from `(t, f) = (0, 0)` to `t = 1` for `λ < 0` and pointwise negative `S`.
pub fn continuity_solve(problem: &ChernYamabeProblem, config: &ContinuityConfig) -> Result<SolverSolution> {
    let lambda = problem.lambda;
    let bounds = apriori_bounds(&problem.scalar, lambda)
        .map_err(|e| Error::Sign(format!("{e}; run negativize first")))?;
    let n = problem.complex_dim();
    let nominal = 1.0 / config.steps.max(1) as f64;

    let mut f = ScalarField::zeros(problem.chart());
    let mut t = 0.0;
    let mut dt = nominal;
    let mut halvings = 0;
    let mut trace = Vec::new();
    let mut total_iterations = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;

    while t < 1.0 {
        let target = if t + dt > 1.0 - 1e-12 { 1.0 } else { t + dt };
        let out = newton(problem, target, lambda, &f, config);
        total_iterations += out.iterations;
        if !out.converged {
            halvings += 1;
            if halvings > config.max_halvings {
                return Err(Error::Continuation {
                    last_good_t: t,
                    attempted_t: target,
                });
            }
            dt *= 0.5;
            continue;
        }
        t = target;
        f = out.f;
        halvings = 0;
        dt = (2.0 * dt).min(nominal);
        let (lo, hi) = bounds.margins(&f, n);
        let violation = (-lo).max(-hi);
        if violation > config.bound_slack {
            violations += 1;
        }
        worst = worst.max(violation.max(0.0));
        trace.push(TraceRow {
            t,
            residual: out.residual,
            f_sup: f.sup_norm(),
            functional: None,
            lower_margin: Some(lo),
            upper_margin: Some(hi),
            iterations: out.iterations,
        });
    }
    Ok(problem.finish(&f, lambda, trace, total_iterations, violations, worst))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub seeds: usize,
    /// Largest `‖f_i − f_j‖_∞` between normalized solutions from random starts.
    pub max_pairwise_deviation: f64,
    /// `(n/2) ln(λ'/λ)` for `λ' = 2λ`.
    pub offset_expected: f64,
    /// Mean of `f_λ − f_{2λ}` before normalization.
    pub offset_observed: f64,
    /// `‖f_λ − f_{2λ} − offset_expected‖_∞`.
    pub offset_error: f64,
}

impl UniquenessReport {
    pub fn consistent(&self, tolerance: f64) -> bool {
        self.max_pairwise_deviation < tolerance && self.offset_error < tolerance
    }
}

/// Smooth random field with a handful of low Fourier modes.
pub fn random_smooth_field(chart: &crate::geometry::GridChart, seed: u64, amplitude: f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = chart.real_dim();
    let periods = chart.periods().to_vec();
    let modes: Vec<(Vec<f64>, f64, f64)> = (0..6)
        .map(|_| {
            let k: Vec<f64> = (0..d).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    ScalarField::from_fn(chart, |x| {
        amplitude
            * modes
                .iter()
                .map(|(k, a, ph)| {
                    let arg: f64 = k.iter().zip(x).zip(&periods).map(|((ki, xi), l)| ki * xi / l).sum();
                    a * (std::f64::consts::TAU * arg + ph).cos()
                })
                .sum::<f64>()
            / 6.0
    })
}

/// Solves at `t = 1` from `seeds` random starts and checks agreement, then checks the
/// constant-offset relation between the solutions for `λ` and `2λ`.
pub fn uniqueness_probe(
    problem: &ChernYamabeProblem,
    seeds: usize,
    base_seed: u64,
    config: &ContinuityConfig,
) -> Result<UniquenessReport> {
    if problem.lambda >= 0.0 {
        return Err(Error::Sign("uniqueness probe needs λ < 0".into()));
    }
    let chart = problem.chart();
    let mut solutions = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let start = random_smooth_field(chart, base_seed.wrapping_add(s as u64), 0.5);
        let out = newton(problem, 1.0, problem.lambda, &start, config);
        if !out.converged {
            return Err(Error::NoConvergence {
                what: "Newton from a random start",
                iterations: out.iterations,
                residual: out.residual,
            });
        }
        solutions.push(problem.finish(&out.f, problem.lambda, Vec::new(), out.iterations, 0, 0.0).f);
    }
    let mut max_dev = 0.0f64;
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            max_dev = max_dev.max(solutions[i].sub(&solutions[j]).sup_norm());
        }
    }

    let n = problem.complex_dim() as f64;
    let one = continuity_solve(problem, config)?;
    let two = continuity_solve(&problem.with_lambda(2.0 * problem.lambda), config)?;
    let diff = one.unnormalized_f().sub(&two.unnormalized_f());
    let expected = 0.5 * n * 2f64.ln();
    Ok(UniquenessReport {
        seeds,
        max_pairwise_deviation: max_dev,
        offset_expected: expected,
        offset_observed: diff.mean(),
        offset_error: diff.shift(-expected).sup_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridChart;
    use std::f64::consts::PI;

    #[test]
    fn bounds_match_direct_substitution() {
        let c = GridChart::new(2, 8).unwrap();
        let b = apriori_bounds(&ScalarField::constant(&c, -1.0), -1.0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 2.0));
        let s = ScalarField::from_fn(&c, |x| -1.25 - 0.75 * (2.0 * PI * x[0]).cos());
        let b = apriori_bounds(&s, -1.0).unwrap();
        assert!((b.upper - 1.5).abs() < 1e-15 && (b.lower - 0.5).abs() < 1e-15);
        assert!(apriori_bounds(&s, 1.0).is_err());
    }

    #[test]
    fn constant_negative_curvature_is_a_fixed_point() {
        let c = GridChart::new(2, 8).unwrap();
        let p = ChernYamabeProblem::synthetic(ScalarField::constant(&c, -1.0), Some(-1.0)).unwrap();
        let sol = continuity_solve(&p, &ContinuityConfig::default()).unwrap();
        assert!(sol.f.sup_norm() < 1e-14);
        assert_eq!(sol.bound_violations, 0);
    }

    #[test]
    fn varying_negative_curvature_becomes_constant() {
        let c = GridChart::new(2, 16).unwrap();
        let s = ScalarField::from_fn(&c, |x| -1.0 + 0.3 * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos());
        let p = ChernYamabeProblem::synthetic(s, None).unwrap();
        let sol = continuity_solve(&p, &ContinuityConfig::default()).unwrap();
        assert!(sol.residual < 1e-8);
        assert!((sol.lambda - p.degree).abs() < 1e-10);
        let sc = p.conformal_scalar(&sol.f);
        assert!(sc.shift(-sol.lambda).sup_norm() < 1e-7);
        assert_eq!(sol.bound_violations, 0);
        let report = uniqueness_probe(&p, 3, 7, &ContinuityConfig::default()).unwrap();
        assert!(report.consistent(1e-8), "{report:?}");
    }
}
