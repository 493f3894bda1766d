use crate::geometry::ops::gradient_norm_sq;
use crate::geometry::{gradient, hodge_laplacian, integrate_density, pairing_1forms, HermitianMetricField, OneFormField, ScalarField};

use super::problem::ChernYamabeProblem;

/// `ℱ(f) = ½ ∫ |df|² dμ + ∫ S f dμ` on the working metric.
pub fn functional_f(problem: &ChernYamabeProblem, f: &ScalarField) -> f64 {
    let grad = gradient_norm_sq(f, &problem.metric);
    let density = grad.scale(0.5).add(&problem.scalar.mul(f));
    integrate_density(&density, &problem.measure)
}

fn exp_integral(problem: &ChernYamabeProblem, f: &ScalarField) -> (ScalarField, f64) {
    let n = problem.complex_dim() as f64;
    let e = f.map(|v| (2.0 * v / n).exp());
    let z = integrate_density(&e, &problem.measure);
    (e, z)
}

/// `ℱ*(f) = ℱ(f)/n − (λ/2) log ∫ e^{2f/n} dμ`.
///
/// With this weight on the logarithm the Euler-Lagrange equation is
/// `Δ f + S = λ e^{2f/n} / ∫ e^{2f/n} dμ` and `ℱ*(f + c) = ℱ*(f)` when `λ = Γ`.
pub fn functional_fstar(problem: &ChernYamabeProblem, f: &ScalarField, lambda: f64) -> f64 {
    let n = problem.complex_dim() as f64;
    let (_, z) = exp_integral(problem, f);
    functional_f(problem, f) / n - 0.5 * lambda * z.ln()
}

/// `L²(dμ)` gradient of [`functional_fstar`]: `(Δ_d f + S − λ e^{2f/n}/Z)/n`.
pub fn fstar_gradient(problem: &ChernYamabeProblem, f: &ScalarField, lambda: f64) -> ScalarField {
    let n = problem.complex_dim() as f64;
    let (e, z) = exp_integral(problem, f);
    hodge_laplacian(f, &problem.metric)
        .add(&problem.scalar)
        .sub(&e.scale(lambda / z))
        .scale(1.0 / n)
}

/// Euler-Lagrange residual `Δ^Ch f + S − λ e^{2f/n}/∫ e^{2f/n} dμ`; on a balanced base it is
/// `n` times the gradient of `ℱ*`.
pub fn el_gradient(problem: &ChernYamabeProblem, f: &ScalarField, lambda: f64) -> ScalarField {
    let (e, z) = exp_integral(problem, f);
    problem.laplacian.apply(f).add(&problem.scalar).sub(&e.scale(lambda / z))
}

/// Warning emitted when the variational interpretation does not apply.
pub fn functional_warning(problem: &ChernYamabeProblem) -> Option<String> {
    (!problem.balanced).then(|| {
        "base metric is not balanced: the equation is not the Euler-Lagrange equation of ℱ".to_string()
    })
}

/// `∫ h (dg, θ) dμ − ∫ g (dh, θ) dμ`, which vanishes for all pairs exactly when `θ = 0`.
pub fn alpha_form_asymmetry(metric: &HermitianMetricField, lee: &OneFormField, h: &ScalarField, g: &ScalarField) -> f64 {
    let rho = metric.measure_density();
    let a = h.mul(&pairing_1forms(&gradient(g), lee, metric));
    let b = g.mul(&pairing_1forms(&gradient(h), lee, metric));
    integrate_density(&a.sub(&b), &rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridChart;
    use std::f64::consts::PI;

    fn problem() -> ChernYamabeProblem {
        let c = GridChart::new(2, 8).unwrap();
        let s = ScalarField::from_fn(&c, |x| -0.5 + 0.4 * (2.0 * PI * x[0]).cos());
        ChernYamabeProblem::synthetic(s, None).unwrap()
    }

    #[test]
    fn constants_pick_up_the_degree() {
        let p = problem();
        let c = p.chart().clone();
        assert_eq!(functional_f(&p, &ScalarField::zeros(&c)), 0.0);
        let v = functional_f(&p, &ScalarField::constant(&c, 0.7));
        assert!((v - 0.7 * p.degree).abs() < 1e-14);
    }

    #[test]
    fn fstar_is_shift_invariant_at_the_degree() {
        let p = problem();
        let f = ScalarField::from_fn(p.chart(), |x| 0.3 * (2.0 * PI * x[2]).sin());
        let a = functional_fstar(&p, &f, p.degree);
        let b = functional_fstar(&p, &f.shift(1.3), p.degree);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_central_difference() {
        let p = problem();
        let f = ScalarField::from_fn(p.chart(), |x| 0.3 * (2.0 * PI * x[2]).sin());
        let v = ScalarField::from_fn(p.chart(), |x| (2.0 * PI * (x[0] + x[1])).cos());
        let g = fstar_gradient(&p, &f, -0.5);
        let exact = integrate_density(&g.mul(&v), &p.measure);
        let eps = 1e-4;
        let fd = (functional_fstar(&p, &f.add(&v.scale(eps)), -0.5) - functional_fstar(&p, &f.sub(&v.scale(eps)), -0.5))
            / (2.0 * eps);
        assert!((fd - exact).abs() < 1e-7);
    }
}
