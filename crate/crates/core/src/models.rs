//! Concrete geometry instances: flat, conformally flat and randomly perturbed torus
//! metrics, prescribed-curvature problems, pointwise checks on the Hopf surface
//! `(ℂ² \ {0}) / ⟨z ↦ 2z⟩` and the degree-sign formula for products with curves.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chern::{gauduchon_degree, ConformalInstance};
use crate::error::{Error, Result};
use crate::geometry::chart_point::hopf_metric;
use crate::geometry::{ChartPointSample, GridChart, HermitianMetricField, ScalarField};
use crate::solver::ChernYamabeProblem;

/// Largest `‖S‖_∞` accepted by a synthetic recipe declared `small`.
pub const SMALL_DATA_BOUND: f64 = 0.01;

/// Grid on which a recipe is instantiated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub complex_dim: usize,
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<f64>>,
}

impl ChartSpec {
    pub fn build(&self) -> Result<GridChart> {
        match &self.periods {
            Some(p) => GridChart::with_periods(self.complex_dim, self.resolution, p.clone()),
            None => GridChart::new(self.complex_dim, self.resolution),
        }
    }
}

/// One term `a · cos(2π Σ kᵢ xᵢ / Lᵢ + φ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub amplitude: f64,
    pub wavevector: Vec<i32>,
    #[serde(default)]
    pub phase: f64,
}

/// `c + Σ terms`, a real trigonometric polynomial on the torus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<FourierTerm>,
}

impl FourierSpec {
    pub fn evaluate(&self, chart: &GridChart) -> Result<ScalarField> {
        for t in &self.terms {
            if t.wavevector.len() != chart.real_dim() {
                return Err(Error::InvalidParameter(format!(
                    "wavevector {:?} needs {} components",
                    t.wavevector,
                    chart.real_dim()
                )));
            }
        }
        let periods = chart.periods().to_vec();
        Ok(ScalarField::from_fn(chart, |x| {
            self.constant
                + self
                    .terms
                    .iter()
                    .map(|t| {
                        let arg: f64 = t
                            .wavevector
                            .iter()
                            .zip(x)
                            .zip(&periods)
                            .map(|((k, xi), l)| *k as f64 * xi / l)
                            .sum();
                        t.amplitude * (2.0 * PI * arg + t.phase).cos()
                    })
                    .sum::<f64>()
        }))
    }
}

/// Sign the prescribed curvature of a synthetic recipe is declared to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignDeclaration {
    /// `S < 0` pointwise.
    Negative,
    /// `∫ S dμ = 0`.
    Zero,
    /// `‖S‖_∞ ≤ 0.01`.
    Small,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelKind {
    Flat {
        #[serde(default = "one")]
        scale: f64,
    },
    ConformalFlat {
        potential: FourierSpec,
    },
    RandomPerturbed {
        amplitude: f64,
        seed: u64,
    },
    HopfChart {
        #[serde(default = "hundred")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    SyntheticS {
        scalar: FourierSpec,
        sign: SignDeclaration,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn hundred() -> usize {
    100
}

/// A reproducible description of a model: the same recipe always yields the same instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricRecipe {
    /// Ignored by the pointwise Hopf model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
    pub model: ModelKind,
}

impl MetricRecipe {
    fn grid(&self) -> Result<GridChart> {
        self.chart
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("this recipe needs a chart".into()))?
            .build()
    }

    /// The metric of a geometric torus recipe.
    pub fn metric(&self) -> Result<HermitianMetricField> {
        let chart = self.grid()?;
        match &self.model {
            ModelKind::Flat { scale } => HermitianMetricField::flat(&chart, *scale),
            ModelKind::ConformalFlat { potential } => HermitianMetricField::conformally_flat(&potential.evaluate(&chart)?),
            ModelKind::RandomPerturbed { amplitude, seed } => random_perturbed_metric(&chart, *amplitude, *seed),
            _ => Err(Error::InvalidParameter("recipe does not describe a torus metric".into())),
        }
    }
}

/// Hermitian-matrix-valued trigonometric polynomial
/// `P(x) = Σ_t cos(2π k_t·x) A_t + sin(2π k_t·x) B_t` with `Σ|k_t| ≤ 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    pub complex_dim: usize,
    pub wavevectors: Vec<Vec<i32>>,
    /// Row-major `n×n` Hermitian blocks.
    pub cos_coeffs: Vec<Vec<Complex64>>,
    pub sin_coeffs: Vec<Vec<Complex64>>,
}

impl TrigPolynomial {
    /// Seeded polynomial with `terms` terms and coefficient entries in `[−1, 1]`.
    pub fn random(complex_dim: usize, terms: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 2 * complex_dim;
        let mut wavevectors = Vec::with_capacity(terms);
        let mut cos_coeffs = Vec::with_capacity(terms);
        let mut sin_coeffs = Vec::with_capacity(terms);
        for _ in 0..terms {
            let mut k = vec![0i32; dim];
            let a = rng.gen_range(0..dim);
            k[a] = rng.gen_range(1..=2);
            if k[a] == 1 && dim > 1 && rng.gen_bool(0.5) {
                let b = (a + rng.gen_range(1..dim)) % dim;
                k[b] = if rng.gen_bool(0.5) { 1 } else { -1 };
            }
            wavevectors.push(k);
            cos_coeffs.push(random_hermitian(&mut rng, complex_dim));
            sin_coeffs.push(random_hermitian(&mut rng, complex_dim));
        }
        Self {
            complex_dim,
            wavevectors,
            cos_coeffs,
            sin_coeffs,
        }
    }

    /// `Σ_t ‖A_t‖_F + ‖B_t‖_F`, an upper bound for the operator norm of `P(x)` everywhere.
    pub fn norm_bound(&self) -> f64 {
        let fro = |m: &Vec<Complex64>| m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        self.cos_coeffs.iter().chain(&self.sin_coeffs).map(fro).sum()
    }

    pub fn evaluate(&self, x: &[f64], periods: &[f64]) -> Vec<Complex64> {
        let nn = self.complex_dim * self.complex_dim;
        let mut out = vec![Complex64::default(); nn];
        for (t, k) in self.wavevectors.iter().enumerate() {
            let arg: f64 = 2.0 * PI * k.iter().zip(x).zip(periods).map(|((k, x), l)| *k as f64 * x / l).sum::<f64>();
            let (s, c) = arg.sin_cos();
            for e in 0..nn {
                out[e] += self.cos_coeffs[t][e] * c + self.sin_coeffs[t][e] * s;
            }
        }
        out
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::default(); n * n];
    for i in 0..n {
        m[i * n + i] = Complex64::new(rng.gen_range(-1.0..=1.0), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            m[i * n + j] = z;
            m[j * n + i] = z.conj();
        }
    }
    m
}

/// `h = I + A·P(x)` with `P` a seeded [`TrigPolynomial`] of four terms and
/// `A = min(amplitude, 0.8 / bound(P))`, so every eigenvalue of `h` is at least `0.2`.
pub fn random_perturbed_metric(chart: &GridChart, amplitude: f64, seed: u64) -> Result<HermitianMetricField> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("perturbation amplitude {amplitude} must be non-negative")));
    }
    let n = chart.complex_dim();
    let poly = TrigPolynomial::random(n, 4, seed);
    let a = amplitude.min(0.8 / poly.norm_bound());
    let periods = chart.periods().to_vec();
    HermitianMetricField::from_fn(chart, |x| {
        let mut block = poly.evaluate(x, &periods);
        for (e, v) in block.iter_mut().enumerate() {
            *v *= a;
            if e % (n + 1) == 0 {
                *v += 1.0;
            }
        }
        block
    })
}

/// Synthetic prescribed-curvature problem on the flat torus, with its sign declaration checked.
pub fn synthetic_problem(scalar: ScalarField, sign: SignDeclaration, lambda: Option<f64>) -> Result<ChernYamabeProblem> {
    match sign {
        SignDeclaration::Negative if scalar.max() >= 0.0 => {
            return Err(Error::Sign(format!("declared negative but max S = {}", scalar.max())))
        }
        SignDeclaration::Zero if scalar.mean().abs() > 1e-8 => {
            return Err(Error::Sign(format!("declared zero degree but mean S = {}", scalar.mean())))
        }
        SignDeclaration::Small if scalar.sup_norm() > SMALL_DATA_BOUND => {
            return Err(Error::Sign(format!(
                "declared small but ‖S‖_∞ = {} exceeds {SMALL_DATA_BOUND}",
                scalar.sup_norm()
            )))
        }
        _ => {}
    }
    ChernYamabeProblem::synthetic(scalar, lambda)
}

/// What a recipe instantiates to.
#[derive(Clone)]
pub enum ModelInstance {
    Geometric(Box<ConformalInstance>),
    Synthetic(Box<ChernYamabeProblem>),
    Hopf { scalar: HopfScalarReport, degree: HopfDegreeReport },
}

pub fn make_instance(recipe: &MetricRecipe) -> Result<ModelInstance> {
    match &recipe.model {
        ModelKind::Flat { .. } | ModelKind::ConformalFlat { .. } | ModelKind::RandomPerturbed { .. } => {
            Ok(ModelInstance::Geometric(Box::new(gauduchon_degree(&recipe.metric()?)?)))
        }
        ModelKind::SyntheticS { scalar, sign, lambda } => {
            let s = scalar.evaluate(&recipe.grid()?)?;
            Ok(ModelInstance::Synthetic(Box::new(synthetic_problem(s, *sign, *lambda)?)))
        }
        ModelKind::HopfChart { samples, seed } => Ok(ModelInstance::Hopf {
            scalar: hopf_scalar_check(*samples, *seed)?,
            degree: hopf_degree(),
        }),
    }
}

/// Chern scalar curvature `−tr(h⁻¹ ∂∂̄ log det h)` of the Hopf metric with the exact
/// Hessian `∂_i∂̄_j log|z|² = δ_ij/|z|² − z̄_i z_j/|z|⁴` and `log det h = −n log|z|²`.
pub fn hopf_scalar_symbolic(z: &[Complex64]) -> f64 {
    let n = z.len();
    let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let hess = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        -(n as f64) * (Complex64::new(delta / r2, 0.0) - z[i].conj() * z[j] / (r2 * r2))
    });
    trace_against_inverse(&hopf_metric(z), &hess)
}

/// `−Σ (h⁻¹)_{ji} H_{ij}`.
fn trace_against_inverse(h: &DMatrix<Complex64>, hess: &DMatrix<Complex64>) -> f64 {
    let inv = h.clone().try_inverse().expect("metric is invertible");
    -(inv * hess).trace().re
}

const D1: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];
const D2: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Chern scalar curvature of a pointwise metric `h(z)` from 8th-order central differences
/// of `log det h` in the real coordinates `z_k = x_k + i y_k`.
pub fn scalar_finite_difference(metric: impl Fn(&[Complex64]) -> DMatrix<Complex64>, z: &[Complex64], spacing: f64) -> f64 {
    let n = z.len();
    let real: Vec<f64> = z.iter().flat_map(|c| [c.re, c.im]).collect();
    let f = |x: &[f64]| -> f64 {
        let zz: Vec<Complex64> = x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        metric(&zz).determinant().re.ln()
    };
    let m = 2 * n;
    let mut hess = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let mut acc = 0.0;
            if a == b {
                for (s, w) in D2.iter().enumerate() {
                    let mut x = real.clone();
                    x[a] += (s as f64 - 4.0) * spacing;
                    acc += w * f(&x);
                }
            } else {
                for (s, ws) in D1.iter().enumerate() {
                    for (t, wt) in D1.iter().enumerate() {
                        if *ws == 0.0 || *wt == 0.0 {
                            continue;
                        }
                        let mut x = real.clone();
                        x[a] += (s as f64 - 4.0) * spacing;
                        x[b] += (t as f64 - 4.0) * spacing;
                        acc += ws * wt * f(&x);
                    }
                }
            }
            hess[a * m + b] = acc / (spacing * spacing);
            hess[b * m + a] = hess[a * m + b];
        }
    }
    // ∂_i∂̄_j = ¼(∂x_i − i∂y_i)(∂x_j + i∂y_j)
    let r = |a: usize, b: usize| hess[a * m + b];
    let complex = DMatrix::from_fn(n, n, |i, j| {
        let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
        Complex64::new(r(xi, xj) + r(yi, yj), r(xi, yj) - r(yi, xj)) * 0.25
    });
    trace_against_inverse(&metric(z), &complex)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfScalarReport {
    pub samples: usize,
    pub seed: u64,
    /// Mean of the symbolic evaluations.
    pub mean: f64,
    /// `max |S − 2|` with exact derivatives.
    pub max_deviation_symbolic: f64,
    /// `max |S − 2|` with 8th-order finite differences.
    pub max_deviation_finite_difference: f64,
    pub stencil_spacing: f64,
    /// `max |S(z) − S(z/2)|` over the sample (deck transformation).
    pub deck_max_difference: f64,
}

/// Uniform radius in `[1, 2]` and uniform direction on the unit sphere of `ℂ²`.
pub fn hopf_sample_points(samples: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let v = loop {
                let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (0.1..=1.0).contains(&norm) {
                    break v.map(|x| x / norm);
                }
            };
            let r = rng.gen_range(1.0..=2.0);
            vec![Complex64::new(r * v[0], r * v[1]), Complex64::new(r * v[2], r * v[3])]
        })
        .collect()
}

/// Evaluates `S^Ch` of the Hopf metric `|z|⁻² ω₀` at seeded points of the fundamental
/// annulus `1 ≤ |z| ≤ 2`, with exact and with finite-difference derivatives.
pub fn hopf_scalar_check(samples: usize, seed: u64) -> Result<HopfScalarReport> {
    if samples < 10 {
        return Err(Error::InvalidParameter(format!("need at least 10 samples, got {samples}")));
    }
    let spacing = 1e-2;
    let mut sum = 0.0;
    let mut dev_sym: f64 = 0.0;
    let mut dev_fd: f64 = 0.0;
    let mut deck: f64 = 0.0;
    for z in hopf_sample_points(samples, seed) {
        let point = ChartPointSample::hopf(z, Some(spacing))?;
        let s = hopf_scalar_symbolic(&point.z);
        let fd = scalar_finite_difference(hopf_metric, &point.z, spacing);
        let half: Vec<Complex64> = point.z.iter().map(|c| c / 2.0).collect();
        sum += s;
        dev_sym = dev_sym.max((s - 2.0).abs());
        dev_fd = dev_fd.max((fd - 2.0).abs());
        deck = deck.max((s - hopf_scalar_symbolic(&half)).abs());
    }
    Ok(HopfScalarReport {
        samples,
        seed,
        mean: sum / samples as f64,
        max_deviation_symbolic: dev_sym,
        max_deviation_finite_difference: dev_fd,
        stencil_spacing: spacing,
        deck_max_difference: deck,
    })
}

/// Gauss-Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfDegreeReport {
    /// Volume of the fundamental annulus for `dμ = ω²/2! = 4 det h dLeb`.
    pub volume: f64,
    /// `Γ = ∫ S dμ / V^{1/2}` with that measure.
    pub degree: f64,
    /// Lebesgue volume `∫ det h dLeb` (no factor `2ⁿ`).
    pub lebesgue_volume: f64,
    /// `∫ S det h dLeb / (∫ det h dLeb)^{1/2}`.
    pub lebesgue_degree: f64,
    pub quadrature_order: usize,
}

/// Degree of the Hopf class by radial Gauss-Legendre quadrature over `1 ≤ |z| ≤ 2`.
///
/// The Hopf metric is Gauduchon and everything is `U(2)`-invariant, so
/// `∫ F dLeb = ∫₁² F(r) · 2π² r³ dr` with `det h = r⁻⁴`; the degree of the unit-volume
/// representative is `∫ S dμ / V^{(n−1)/n}`.
pub fn hopf_degree() -> HopfDegreeReport {
    let order = 32;
    let (x, w) = gauss_legendre(order);
    let (mut vol, mut total) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let r = 1.5 + 0.5 * xi;
        let z = [Complex64::new(r, 0.0), Complex64::new(0.0, 0.0)];
        let det_h = r.powi(-4);
        let shell = 2.0 * PI * PI * r.powi(3) * 0.5 * wi;
        vol += det_h * shell;
        total += hopf_scalar_symbolic(&z) * det_h * shell;
    }
    HopfDegreeReport {
        volume: 4.0 * vol,
        degree: 4.0 * total / (4.0 * vol).sqrt(),
        lebesgue_volume: vol,
        lebesgue_degree: total / vol.sqrt(),
        quadrature_order: order,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductDegreeSign {
    /// `sgn(γδ + 4π(1 − g))`.
    pub sign: i8,
    /// `δ* = 4π(g − 1)/γ`; the sign is positive exactly for `δ > δ*`.
    pub threshold: f64,
}

/// Sign of the degree of `X × Σ_g` with the curve scaled by `δ`, where `γ > 0` is the
/// degree of `X` and `Σ_g` carries total curvature `4π(1 − g)` (Gauss-Bonnet).
pub fn product_degree_sign(gamma: f64, genus: u32, delta: f64) -> Result<ProductDegreeSign> {
    if !(gamma > 0.0) {
        return Err(Error::Sign(format!("the degree of the first factor must be positive, got {gamma}")));
    }
    if genus < 2 {
        return Err(Error::InvalidParameter(format!("genus must be at least 2, got {genus}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("δ must be positive, got {delta}")));
    }
    let value = gamma * delta + 4.0 * PI * (1.0 - genus as f64);
    let sign = if value > 0.0 {
        1
    } else if value < 0.0 {
        -1
    } else {
        0
    };
    Ok(ProductDegreeSign {
        sign,
        threshold: 4.0 * PI * (genus as f64 - 1.0) / gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chern::chern_scalar;
    use crate::geometry::integrate_density;
    use crate::solver::{continuity_solve, ContinuityConfig};

    fn chart_spec(resolution: usize) -> Option<ChartSpec> {
        Some(ChartSpec {
            complex_dim: 2,
            resolution,
            periods: None,
        })
    }

    #[test]
    fn random_metrics_are_uniformly_positive_and_reproducible() {
        let c = GridChart::new(2, 8).unwrap();
        for seed in 0..5 {
            let m = random_perturbed_metric(&c, 10.0, seed).unwrap();
            assert!(m.min_eigenvalue() >= 0.2 - 1e-12);
            let again = random_perturbed_metric(&c, 10.0, seed).unwrap();
            assert_eq!(m.matrices(), again.matrices());
        }
    }

    #[test]
    fn flat_and_conformally_flat_tori_have_zero_degree() {
        let flat = MetricRecipe {
            chart: chart_spec(8),
            model: ModelKind::Flat { scale: 1.0 },
        };
        let ModelInstance::Geometric(inst) = make_instance(&flat).unwrap() else { panic!() };
        assert!(inst.degree.abs() < 1e-8);

        let conf = MetricRecipe {
            chart: chart_spec(16),
            model: ModelKind::ConformalFlat {
                potential: FourierSpec {
                    constant: 0.0,
                    terms: vec![FourierTerm {
                        amplitude: 0.3,
                        wavevector: vec![1, 0, 0, 0],
                        phase: 0.0,
                    }],
                },
            },
        };
        let f = ScalarField::from_fn(&conf.grid().unwrap(), |x| 0.3 * (2.0 * PI * x[0]).cos());
        let ModelInstance::Geometric(inst) = make_instance(&conf).unwrap() else { panic!() };
        assert!(inst.degree.abs() < 1e-8);
        let s = chern_scalar(&inst.base);
        assert!(s.sup_norm() > 1e-2);
        // S(e^{2f/n}ω₀)·e^{2(n−1)f/n} dμ(e^{2f/n}ω₀) = Δ^Ch_0 f dμ₀ integrates to zero
        let weight = inst.base.measure_density().zip_map(&f, |r, v| r * (-v).exp());
        assert!(integrate_density(&s, &weight).abs() < 1e-10);
    }

    #[test]
    fn synthetic_recipes_check_their_sign() {
        let neg = MetricRecipe {
            chart: chart_spec(8),
            model: ModelKind::SyntheticS {
                scalar: FourierSpec {
                    constant: -1.0,
                    terms: vec![FourierTerm {
                        amplitude: 0.4,
                        wavevector: vec![0, 1, 0, 0],
                        phase: 0.3,
                    }],
                },
                sign: SignDeclaration::Negative,
                lambda: None,
            },
        };
        let ModelInstance::Synthetic(p) = make_instance(&neg).unwrap() else { panic!() };
        assert!(p.synthetic);
        assert!(continuity_solve(&p, &ContinuityConfig::default()).is_ok());
        let mut wrong = neg.clone();
        if let ModelKind::SyntheticS { sign, .. } = &mut wrong.model {
            *sign = SignDeclaration::Small;
        }
        assert!(matches!(make_instance(&wrong), Err(Error::Sign(_))));
    }

    #[test]
    fn recipes_roundtrip_and_reject_unknown_keys() {
        let r = MetricRecipe {
            chart: chart_spec(8),
            model: ModelKind::RandomPerturbed { amplitude: 0.2, seed: 7 },
        };
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<MetricRecipe>(&text).unwrap(), r);
        let bad = r#"{"model": {"kind": "flat", "scael": 2.0}}"#;
        assert!(serde_json::from_str::<MetricRecipe>(bad).is_err());
    }

    #[test]
    fn hopf_curvature_is_two() {
        let rep = hopf_scalar_check(100, 3).unwrap();
        assert!(rep.max_deviation_symbolic < 1e-8);
        assert!(rep.max_deviation_finite_difference < 1e-5);
        assert!(rep.deck_max_difference < 1e-12);
        assert!(hopf_scalar_check(5, 0).is_err());
    }

    #[test]
    fn finite_differences_recover_a_flat_metric() {
        let flat = |z: &[Complex64]| DMatrix::from_diagonal_element(z.len(), z.len(), Complex64::new(1.0, 0.0));
        let z = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5)];
        assert!(scalar_finite_difference(flat, &z, 1e-2).abs() < 1e-10);
    }

    #[test]
    fn hopf_degree_by_quadrature() {
        let rep = hopf_degree();
        let ln2 = 2f64.ln();
        assert!((rep.lebesgue_volume - 2.0 * PI * PI * ln2).abs() < 1e-12);
        assert!((rep.lebesgue_degree - 2.0 * (2.0 * PI * PI * ln2).sqrt()).abs() < 1e-12);
        assert!((rep.degree - 4.0 * PI * (2.0 * ln2).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((integral - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn product_sign_examples() {
        assert_eq!(product_degree_sign(1.0, 2, 4.0 * PI).unwrap().sign, 0);
        let t = product_degree_sign(7.3985, 2, 1.0).unwrap().threshold;
        assert!((t - 4.0 * PI / 7.3985).abs() < 1e-15);
        assert!((t - 1.6985).abs() < 1e-4);
        assert_eq!(product_degree_sign(1.0, 3, 30.0).unwrap().sign, 1);
        assert!(product_degree_sign(0.0, 2, 1.0).is_err());
    }
}
