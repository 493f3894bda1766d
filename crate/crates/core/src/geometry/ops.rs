use num_complex::Complex64;

use super::field::{pairwise_sum, OneFormField, ScalarField};
use super::metric::HermitianMetricField;
use super::spectral::{apply_symbol, gradient, spectrum_complex};

/// `∫ f dμ_ω`, with `dμ_ω = 2^n det h · dx` and a fixed pairwise reduction order.
pub fn integrate(field: &ScalarField, metric: &HermitianMetricField) -> f64 {
    assert_eq!(field.chart(), metric.chart(), "fields live on different charts");
    let scale = 2f64.powi(metric.complex_dim() as i32);
    let terms: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(p, v)| v * scale * metric.det(p))
        .collect();
    pairwise_sum(&terms) * field.chart().cell_volume()
}

/// `∫ f · density dx` for an explicit Lebesgue density.
pub fn integrate_density(field: &ScalarField, density: &ScalarField) -> f64 {
    assert_eq!(field.chart(), density.chart(), "fields live on different charts");
    let terms: Vec<f64> = field.values().iter().zip(density.values()).map(|(a, b)| a * b).collect();
    pairwise_sum(&terms) * field.chart().cell_volume()
}

/// Pointwise `(a, b)_ω` for the real metric `g = R(2h)`.
pub fn pairing_1forms(a: &OneFormField, b: &OneFormField, metric: &HermitianMetricField) -> ScalarField {
    let chart = metric.chart();
    assert_eq!(a.chart(), chart);
    assert_eq!(b.chart(), chart);
    let d = chart.real_dim();
    let values = (0..chart.len())
        .map(|p| {
            let gi = metric.real_metric_inverse(p);
            let (x, y) = (a.at(p), b.at(p));
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += x[i] * gi[i * d + j] * y[j];
                }
            }
            s
        })
        .collect();
    ScalarField::from_vec_unchecked(chart, values)
}

/// Hodge-de Rham Laplacian on functions, `Δ_d f = -ρ^{-1} ∂_a(ρ g^{ab} ∂_b f)`
/// with `ρ = 2^n det h`; non-negative at maxima.
pub fn hodge_laplacian(f: &ScalarField, metric: &HermitianMetricField) -> ScalarField {
    let chart = metric.chart();
    assert_eq!(f.chart(), chart);
    let d = chart.real_dim();
    let df = gradient(f);
    let rho = metric.measure_density();
    // flux_a = ρ g^{ab} ∂_b f
    let mut flux: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); chart.len()]; d];
    for p in 0..chart.len() {
        let gi = metric.real_metric_inverse(p);
        let grad = df.at(p);
        let r = rho.values()[p];
        for a in 0..d {
            let mut s = 0.0;
            for b in 0..d {
                s += gi[a * d + b] * grad[b];
            }
            flux[a][p] = Complex64::new(r * s, 0.0);
        }
    }
    let mut div = vec![0.0; chart.len()];
    for (a, fa) in flux.iter().enumerate() {
        let spec = spectrum_complex(chart, fa);
        let da = apply_symbol(chart, &spec, |i| Complex64::new(0.0, chart.angular_wavenumber(i, a)));
        for (acc, v) in div.iter_mut().zip(da) {
            *acc += v.re;
        }
    }
    let values = div.iter().zip(rho.values()).map(|(dv, r)| -dv / r).collect();
    ScalarField::from_vec_unchecked(chart, values)
}

/// Pointwise `|df|²_ω`.
pub fn gradient_norm_sq(f: &ScalarField, metric: &HermitianMetricField) -> ScalarField {
    let df = gradient(f);
    pairing_1forms(&df, &df, metric)
}
