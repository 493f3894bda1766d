//! Acceptance criteria 1–10. Every criterion prints one `PASS`/`FAIL` line (written
//! straight to stdout so it is visible without `--nocapture`) and then asserts.
//! Expected values are computed here from closed forms, not taken from the library.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use chern_yamabe::bifurcation::kernel_families;
use chern_yamabe::chern::{chern_laplacian, chern_laplacian_via_lee, chern_scalar, gauduchon_degree, lee_form};
use chern_yamabe::geometry::{c2_norm, hodge_laplacian, integrate_density, GridChart, HermitianMetricField, ScalarField};
use chern_yamabe::models::{
    hopf_degree, hopf_sample_points, hopf_scalar_check, product_degree_sign, random_perturbed_metric,
};
use chern_yamabe::solver::continuity::random_smooth_field;
use chern_yamabe::solver::{
    alpha_form_asymmetry, continuity_solve, fstar_gradient, functional_fstar, run_flow,
    small_data_solve, solve_zero_degree, uniqueness_probe, ChernYamabeProblem, ContinuityConfig, FlowConfig,
    FlowTermination, SmallDataConfig,
};
use num_complex::Complex64;
use num_rational::Rational64;

// Pinned tolerances.
const C2_SYMBOLIC: f64 = 1e-8;
const C2_FINITE_DIFFERENCE: f64 = 1e-5;
const C3_IDENTITY: f64 = 1e-6;
const C4_CONFORMAL_LAW: f64 = 1e-8;
const C5_CURVATURE: f64 = 1e-7;
const C5_DEGREE: f64 = 1e-8;
const C5_AGREEMENT: f64 = 1e-8;
const C6_RESIDUAL: f64 = 1e-6;
const C6_CONSTANT: f64 = 1e-6;
const C6_SLACK: f64 = 1e-8;
const C6_UNIQUENESS: f64 = 1e-6;
const C6_OFFSET: f64 = 1e-8;
const C7_MATCH: f64 = 1e-5;
const C7_MONOTONE_SLACK: f64 = 1e-10;
const C8_BALANCED: f64 = 1e-10;
const C8_WITNESS: f64 = 1e-4;
/// One decade in ε must gain two decades in error (ideal ratio 100).
const C8_DECAY_RATIO: (f64, f64) = (50.0, 200.0);
const C9_TORUS_DEGREE: f64 = 1e-8;
const C9_HOPF_RELATIVE: f64 = 1e-6;
const C10_RESIDUAL: f64 = 1e-7;

fn report(criterion: u32, pass: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "acceptance criterion {criterion:>2}: {} ({:.2} s) {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn chart(res: usize) -> GridChart {
    GridChart::new(2, res).unwrap()
}

/// `S = −1 + 0.35 · φ/‖φ‖_∞` for a seeded smooth `φ`: pointwise negative, oscillation ≤ 0.7.
fn negative_scalar(c: &GridChart, seed: u64) -> ScalarField {
    let phi = random_smooth_field(c, seed, 1.0);
    let s = phi.sup_norm();
    phi.scale(0.35 / s).shift(-1.0)
}

/// `S = φ − mean(φ)` for a seeded smooth `φ`: zero degree on the flat unit torus.
fn zero_mean_scalar(c: &GridChart, seed: u64) -> ScalarField {
    let phi = random_smooth_field(c, seed, 1.0);
    phi.shift(-phi.mean())
}

#[test]
fn criterion_01_bifurcation_exactness() {
    let t = Instant::now();
    let k = kernel_families(Rational64::new(1, 4), 5).unwrap();
    let mut got: Vec<([u32; 3], u64, i64)> = k
        .families
        .iter()
        .map(|f| (f.triple, f.dimension, f.multiplier.to_integer()))
        .collect();
    got.sort();
    // (2j+1) products and 8 + μ₁ + μ₂ − 8μ₃ with μ = j(j+1)
    let mut expected = vec![([2, 1, 0], 5 * 3, 8 + 6 + 2), ([1, 2, 0], 3 * 5, 8 + 2 + 6), ([0, 0, 1], 3, 8 - 16)];
    expected.sort();
    let integral = k.families.iter().all(|f| f.multiplier.is_integer() && f.multiplier != Rational64::from_integer(0));
    let elapsed = t.elapsed();
    let pass = got == expected && k.total_dimension == 33 && integral && elapsed < Duration::from_secs(1);
    report(1, pass, elapsed, &format!("families {got:?}, total {}", k.total_dimension));
    assert!(pass);
}

#[test]
fn criterion_02_hopf_constancy() {
    let t = Instant::now();
    let rep = hopf_scalar_check(100, 2024).unwrap();
    // oracle: for h = |z|⁻² I, −h^{i j̄} ∂_i∂_j̄ log det h = 2|z|²(n/|z|² − 1/|z|²) = 2
    let oracle = 2.0;
    let elapsed = t.elapsed();
    let pass = (rep.mean - oracle).abs() < C2_SYMBOLIC
        && rep.max_deviation_symbolic < C2_SYMBOLIC
        && rep.max_deviation_finite_difference < C2_FINITE_DIFFERENCE
        && rep.stencil_spacing == 1e-2
        && elapsed < Duration::from_secs(1);
    report(
        2,
        pass,
        elapsed,
        &format!(
            "max |S−2|: symbolic {:.1e}, 8th-order FD {:.1e}",
            rep.max_deviation_symbolic, rep.max_deviation_finite_difference
        ),
    );
    assert!(pass);
    // the samples lie in the fundamental annulus
    assert!(hopf_sample_points(100, 2024).iter().all(|z| {
        let r = z.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        (1.0..=2.0).contains(&r)
    }));
}

#[test]
fn criterion_03_lee_form_identity() {
    let t = Instant::now();
    let c = chart(16);
    let mut worst = 0.0f64;
    for m in 0..20u64 {
        let metric = random_perturbed_metric(&c, 0.3, 1000 + m).unwrap();
        let lee = lee_form(&metric).unwrap();
        for j in 0..5u64 {
            let f = random_smooth_field(&c, 50_000 + 10 * m + j, 1.0);
            let direct = chern_laplacian(&metric, &f);
            let via = chern_laplacian_via_lee(&metric, &lee, &f);
            worst = worst.max(direct.sub(&via).sup_norm() / (1.0 + c2_norm(&f)));
        }
    }
    let elapsed = t.elapsed();
    let pass = worst < C3_IDENTITY && elapsed < Duration::from_secs(120);
    report(3, pass, elapsed, &format!("max ‖Δ^Ch f − Δ_d f − (df,θ)‖/(1+‖f‖_C²) = {worst:.1e} over 20×5"));
    assert!(pass);
}

#[test]
fn criterion_04_conformal_law() {
    let t = Instant::now();
    let c = chart(16);
    let n = 2.0;
    let mut worst = 0.0f64;
    for k in 0..20u64 {
        let metric = random_perturbed_metric(&c, 0.3, 2000 + k).unwrap();
        let f = random_smooth_field(&c, 60_000 + k, 1.0);
        let lhs = chern_scalar(&metric.conformal_rescale(&f));
        let rhs = chern_scalar(&metric)
            .add(&chern_laplacian(&metric, &f))
            .zip_map(&f, |v, fv| v * (-2.0 * fv / n).exp());
        worst = worst.max(lhs.sub(&rhs).sup_norm() / rhs.sup_norm());
    }
    let elapsed = t.elapsed();
    let pass = worst < C4_CONFORMAL_LAW && elapsed < Duration::from_secs(60);
    report(4, pass, elapsed, &format!("max relative error {worst:.1e} over 20 pairs"));
    assert!(pass);
}

#[test]
fn criterion_05_zero_degree_solve() {
    let t = Instant::now();
    let c = chart(16);
    let mut worst_s = 0.0f64;
    let mut worst_degree = 0.0f64;
    let mut worst_lambda = 0.0f64;
    let mut worst_agreement = 0.0f64;
    for k in 0..3u64 {
        let potential = random_smooth_field(&c, 70_000 + k, 1.0);
        let inst = gauduchon_degree(&HermitianMetricField::conformally_flat(&potential).unwrap()).unwrap();
        worst_degree = worst_degree.max(inst.degree.abs());
        let problem = ChernYamabeProblem::from_instance(&inst, None).unwrap();
        // second run from a different representative of the same class
        let u = random_smooth_field(&c, 80_000 + k, 0.5);
        let moved = problem.rebased(&u);
        let a = solve_zero_degree(&problem).unwrap();
        let b = solve_zero_degree(&moved).unwrap();
        worst_lambda = worst_lambda.max(a.lambda.abs()).max(b.lambda.abs());
        // curvature of the resulting metric, recomputed from scratch
        let final_metric = problem.metric.conformal_rescale(&a.f);
        worst_s = worst_s.max(chern_scalar(&final_metric).sup_norm());
        // both runs must produce the same metric: e^{2f_a/n} η = e^{2(u + f_b)/n} η
        worst_agreement = worst_agreement.max(a.f.sub(&u.add(&b.f)).sup_norm());
    }
    let elapsed = t.elapsed();
    let pass = worst_s < C5_CURVATURE
        && worst_degree < C5_DEGREE
        && worst_lambda < C5_DEGREE
        && worst_agreement < C5_AGREEMENT
        && elapsed < Duration::from_secs(30);
    report(
        5,
        pass,
        elapsed,
        &format!("‖S‖ {worst_s:.1e}, |Γ| {worst_degree:.1e}, |λ| {worst_lambda:.1e}, two-run gap {worst_agreement:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_negative_continuity() {
    let t = Instant::now();
    let c = chart(8);
    let n = 2.0;
    let config = ContinuityConfig::default();
    assert_eq!(config.bound_slack, C6_SLACK);
    let flat = HermitianMetricField::flat(&c, 0.5).unwrap();
    let (mut residual, mut constant, mut margin, mut uniq, mut offset) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut violations = 0;
    for k in 0..10u64 {
        let s = negative_scalar(&c, 90_000 + k);
        assert!(s.max() < 0.0);
        let problem = ChernYamabeProblem::synthetic(s.clone(), None).unwrap();
        // λ is the weighted mean of S (unit flat measure)
        assert!((problem.lambda - s.mean()).abs() < 1e-14);
        let sol = continuity_solve(&problem, &config).unwrap();
        residual = residual.max(sol.residual);
        // curvature of the normalized metric, with the Laplacian evaluated in divergence form
        let curv = s.add(&hodge_laplacian(&sol.f, &flat)).zip_map(&sol.f, |v, f| v * (-2.0 * f / n).exp());
        constant = constant.max(curv.shift(-sol.lambda).sup_norm());
        violations += sol.bound_violations;
        for row in &sol.trace {
            margin = margin.min(row.lower_margin.unwrap_or(0.0)).min(row.upper_margin.unwrap_or(0.0));
        }
        if k < 2 {
            let u = uniqueness_probe(&problem, 5, 7 + k, &config).unwrap();
            uniq = uniq.max(u.max_pairwise_deviation);
            // f_λ − f_{2λ} = (n/2) ln 2: shifting f by c multiplies the right-hand side by e^{2c/n}
            offset = offset.max((u.offset_observed - 0.5 * n * 2f64.ln()).abs()).max(u.offset_error);
        }
    }
    let elapsed = t.elapsed();
    let pass = residual < C6_RESIDUAL
        && constant < C6_CONSTANT
        && violations == 0
        && margin >= -C6_SLACK
        && uniq < C6_UNIQUENESS
        && offset < C6_OFFSET
        && elapsed < Duration::from_secs(300);
    report(
        6,
        pass,
        elapsed,
        &format!(
            "residual {residual:.1e}, |S−λ| {constant:.1e}, envelope margin {margin:.1e}, uniqueness {uniq:.1e}, offset {offset:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_flow_consistency() {
    let t = Instant::now();
    let c = chart(8);
    let mut gap = 0.0f64;
    for k in 0..5u64 {
        let problem = ChernYamabeProblem::synthetic(negative_scalar(&c, 100_000 + k), None).unwrap();
        let sol = continuity_solve(&problem, &ContinuityConfig::default()).unwrap();
        let tr = run_flow(
            &problem,
            None,
            &FlowConfig {
                time_step: 0.05,
                horizon: 80.0,
                ..Default::default()
            },
        );
        assert_eq!(tr.termination, FlowTermination::Converged);
        gap = gap.max(tr.final_f.sub(&sol.unnormalized_f()).sup_norm());
    }
    // balanced base, f₀ = 0, zero degree: ℱ(f_t) ≤ 0 on (0, 0.1] and non-increasing
    let mut positive = f64::NEG_INFINITY;
    let mut increase = f64::NEG_INFINITY;
    for k in 0..3u64 {
        let problem = ChernYamabeProblem::synthetic(zero_mean_scalar(&c, 110_000 + k), None).unwrap();
        assert!(problem.balanced);
        let tr = run_flow(
            &problem,
            None,
            &FlowConfig {
                time_step: 0.005,
                horizon: 0.1,
                ..Default::default()
            },
        );
        for row in tr.rows.iter().filter(|r| r.t > 0.0 && r.t <= 0.1 + 1e-12) {
            positive = positive.max(row.functional.unwrap());
        }
        for w in tr.functional_values().windows(2) {
            increase = increase.max(w[1] - w[0]);
        }
        assert!((tr.times().last().unwrap() - 0.1).abs() < 1e-9 || tr.termination == FlowTermination::Converged);
    }
    let elapsed = t.elapsed();
    let pass = gap < C7_MATCH && positive <= 0.0 && increase <= C7_MONOTONE_SLACK && elapsed < Duration::from_secs(300);
    report(
        7,
        pass,
        elapsed,
        &format!("flow vs continuity {gap:.1e}, max ℱ on (0,0.1] {positive:.1e}, max increase {increase:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_variational_structure() {
    let t = Instant::now();
    let c = chart(8);
    // constant-coefficient metrics are Kähler, hence balanced
    let mut balanced_worst = 0.0f64;
    for k in 0..50u64 {
        let a = 0.3 * ((k as f64) * 0.37).sin();
        let metric = HermitianMetricField::from_fn(&c, |_| {
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(a, 0.2 * a),
                Complex64::new(a, -0.2 * a),
                Complex64::new(1.5, 0.0),
            ]
        })
        .unwrap();
        let lee = lee_form(&metric).unwrap();
        let h = random_smooth_field(&c, 120_000 + 2 * k, 1.0);
        let g = random_smooth_field(&c, 120_001 + 2 * k, 1.0);
        balanced_worst = balanced_worst.max(alpha_form_asymmetry(&metric, &lee, &h, &g).abs());
    }
    // Gauduchon but not balanced: projected random metric
    let inst = gauduchon_degree(&random_perturbed_metric(&c, 0.3, 5).unwrap()).unwrap();
    assert!(inst.report.balanced_residual > 1e-4);
    let mut witness = 0.0f64;
    for k in 0..10u64 {
        let h = random_smooth_field(&c, 130_000 + 2 * k, 1.0);
        let g = random_smooth_field(&c, 130_001 + 2 * k, 1.0);
        witness = witness.max(alpha_form_asymmetry(&inst.gauduchon, &inst.lee, &h, &g).abs());
    }
    // gradient of ℱ* against central differences: error ∝ ε². Directions are skewed
    // (v = e^φ − mean) so that the third derivative along v, hence the ε² term, is visible.
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut largest_error = 0.0f64;
    for k in 0..20u64 {
        let problem = ChernYamabeProblem::synthetic(negative_scalar(&c, 140_000 + k), None).unwrap();
        let f = random_smooth_field(&c, 141_000 + k, 1.0);
        let phi = random_smooth_field(&c, 142_000 + k, 1.5).map(f64::exp);
        let v = phi.shift(-phi.mean()).scale(5.0);
        let lambda = problem.lambda;
        let exact = integrate_density(&fstar_gradient(&problem, &f, lambda).mul(&v), &problem.measure);
        let err = |eps: f64| {
            let fd = (functional_fstar(&problem, &f.add(&v.scale(eps)), lambda)
                - functional_fstar(&problem, &f.sub(&v.scale(eps)), lambda))
                / (2.0 * eps);
            (fd - exact).abs()
        };
        let (e3, e4) = (err(1e-3), err(1e-4));
        min_ratio = min_ratio.min(e3 / e4);
        max_ratio = max_ratio.max(e3 / e4);
        largest_error = largest_error.max(e3);
    }
    let elapsed = t.elapsed();
    // quadratic decay: one decade in ε gains two decades in error
    let pass = balanced_worst < C8_BALANCED
        && witness > C8_WITNESS
        && min_ratio > C8_DECAY_RATIO.0
        && max_ratio < C8_DECAY_RATIO.1
        && elapsed < Duration::from_secs(120);
    report(
        8,
        pass,
        elapsed,
        &format!("balanced {balanced_worst:.1e}, witness {witness:.1e}, FD error at ε=1e-3 ≤ {largest_error:.1e}, error ratio 1e-3/1e-4 in [{min_ratio:.1}, {max_ratio:.1}] over 20 pairs"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_degree_invariants() {
    let t = Instant::now();
    let c = chart(12);
    let mut torus = 0.0f64;
    let metrics = vec![
        HermitianMetricField::flat(&c, 1.0).unwrap(),
        HermitianMetricField::conformally_flat(&ScalarField::from_fn(&c, |x| 0.3 * (2.0 * PI * x[0]).cos())).unwrap(),
        random_perturbed_metric(&c, 0.3, 11).unwrap(),
        random_perturbed_metric(&c, 0.3, 12).unwrap(),
    ];
    for m in &metrics {
        torus = torus.max(gauduchon_degree(m).unwrap().degree.abs());
    }

    let hopf = hopf_degree();
    let stated = 2.0 * (2.0 * PI * PI * 2f64.ln()).sqrt();
    let hopf_rel = (hopf.degree - stated).abs() / stated;

    let mut threshold_exact = true;
    for (gamma, genus) in [(1.0, 2u32), (7.3985, 2), (0.37, 5), (12.5, 3)] {
        let got = product_degree_sign(gamma, genus, 1.0).unwrap().threshold;
        threshold_exact &= got == 4.0 * PI * (genus as f64 - 1.0) / gamma;
    }
    let elapsed = t.elapsed();
    let pass = torus < C9_TORUS_DEGREE && hopf_rel < C9_HOPF_RELATIVE && threshold_exact && elapsed < Duration::from_secs(30);
    report(
        9,
        pass,
        elapsed,
        &format!(
            "torus |Γ| {torus:.1e}; Hopf Γ {:.6} vs stated {stated:.6} (rel {hopf_rel:.1e}); threshold exact {threshold_exact}",
            hopf.degree
        ),
    );
    assert!(torus < C9_TORUS_DEGREE && threshold_exact);
    assert!(
        hopf_rel < C9_HOPF_RELATIVE,
        "Hopf degree {} differs from the stated value {stated}; the stated value pairs S = 2 with the \
         volume of det h dLeb instead of ω²/2!, see the decisions ledger",
        hopf.degree
    );
}

#[test]
fn criterion_09_hopf_degree_scale_invariant_oracle() {
    // The degree ∫ S dμ / V^{1/2} does not change under ω ↦ cω, so any consistent
    // normalization gives S = 2 with V = 4 · 2π² ln 2, i.e. Γ = 4π √(2 ln 2).
    let hopf = hopf_degree();
    let oracle = 4.0 * PI * (2.0 * 2f64.ln()).sqrt();
    let rel = (hopf.degree - oracle).abs() / oracle;
    let lebesgue = 2.0 * (2.0 * PI * PI * 2f64.ln()).sqrt();
    let pass = rel < C9_HOPF_RELATIVE && (hopf.lebesgue_degree - lebesgue).abs() / lebesgue < C9_HOPF_RELATIVE;
    report(9, pass, Duration::ZERO, &format!("(consistent-normalization oracle) Hopf Γ = {:.10} vs 4π√(2 ln 2) = {oracle:.10}", hopf.degree));
    assert!(pass);
}

#[test]
fn criterion_10_small_data_newton() {
    let t = Instant::now();
    let c = chart(8);
    let mut worst = 0.0f64;
    let mut positive = true;
    for k in 0..3u64 {
        let phi = random_smooth_field(&c, 150_000 + k, 1.0);
        let s = phi.scale(0.005 / phi.sup_norm()).shift(0.004);
        assert!(s.sup_norm() <= 0.01 && s.mean() > 0.0);
        let problem = ChernYamabeProblem::synthetic(s.clone(), None).unwrap();
        let out = small_data_solve(&problem, &SmallDataConfig::default());
        let Some(sol) = out.solution else {
            report(10, false, t.elapsed(), "Newton did not converge");
            panic!("no convergence: {:?}", out.residual_history);
        };
        // residual of Δf + S = λ e^{2f/n} recomputed in divergence form on the flat metric
        let flat = HermitianMetricField::flat(&c, 0.5).unwrap();
        let res = hodge_laplacian(&sol.f, &flat)
            .add(&s)
            .sub(&sol.f.map(|v| sol.lambda * v.exp()));
        worst = worst.max(res.sup_norm());
        positive &= sol.lambda > 0.0;
    }
    let elapsed = t.elapsed();
    let pass = worst < C10_RESIDUAL && positive && elapsed < Duration::from_secs(60);
    report(10, pass, elapsed, &format!("max residual {worst:.1e}, positive constant {positive}"));
    assert!(pass);
}
