//! Fourier pseudospectral differentiation on a [`GridChart`].
//!
//! Real derivatives use the symbol `i·2πk/period` with the Nyquist mode
//! dropped, which keeps every first-order operator skew-adjoint for the
//! plain grid sum. Complex derivatives follow `∂_j = (∂_x - i∂_y)/2` and
//! `∂_{\bar j} = (∂_x + i∂_y)/2`.

use num_complex::Complex64;

use super::chart::GridChart;
use super::field::{ComplexField, OneFormField, ScalarField};

pub fn spectrum(field: &ScalarField) -> Vec<Complex64> {
    let mut data = field.to_complex();
    field.chart().forward(&mut data);
    data
}

pub fn spectrum_complex(chart: &GridChart, values: &[Complex64]) -> Vec<Complex64> {
    let mut data = values.to_vec();
    chart.forward(&mut data);
    data
}

/// Applies a Fourier multiplier to a precomputed spectrum and returns physical values.
pub fn apply_symbol(
    chart: &GridChart,
    spec: &[Complex64],
    symbol: impl Fn(usize) -> Complex64,
) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = spec.iter().enumerate().map(|(i, c)| c * symbol(i)).collect();
    chart.inverse(&mut out);
    out
}

fn real_values(values: Vec<Complex64>) -> Vec<f64> {
    values.into_iter().map(|c| c.re).collect()
}

/// Derivative along real axis `axis` (0-based over `x^1, y^1, ...`).
pub fn real_derivative(field: &ScalarField, axis: usize) -> ScalarField {
    let chart = field.chart();
    let spec = spectrum(field);
    real_derivative_from_spectrum(chart, &spec, axis)
}

pub fn real_derivative_from_spectrum(chart: &GridChart, spec: &[Complex64], axis: usize) -> ScalarField {
    let out = apply_symbol(chart, spec, |i| Complex64::new(0.0, chart.angular_wavenumber(i, axis)));
    ScalarField::from_vec_unchecked(chart, real_values(out))
}

/// `∂_j f` or, with `conjugate`, `∂_{\bar j} f`; `index` is 1-based as in `z^1, ..., z^n`.
pub fn spectral_derivative(field: &ScalarField, index: usize, conjugate: bool) -> ComplexField {
    let chart = field.chart();
    assert!(index >= 1 && index <= chart.complex_dim(), "complex index out of range");
    let spec = spectrum(field);
    let out = apply_symbol(chart, &spec, |i| chart.complex_symbol(i, index - 1, conjugate));
    ComplexField::from_vec_unchecked(chart, out)
}

/// Exterior derivative of a function in the real basis.
pub fn gradient(field: &ScalarField) -> OneFormField {
    let chart = field.chart();
    let spec = spectrum(field);
    let axes: Vec<ScalarField> = (0..chart.real_dim())
        .map(|a| real_derivative_from_spectrum(chart, &spec, a))
        .collect();
    OneFormField::from_axes(&axes)
}

/// Point-major complex Hessian `M[p][i][j] = ∂_i ∂_{\bar j} f` of a real field.
///
/// Only the upper triangle is transformed; the lower one is mirrored, which is
/// exact for real input.
pub fn complex_hessian(field: &ScalarField) -> Vec<Complex64> {
    let chart = field.chart();
    let spec = spectrum(field);
    complex_hessian_from_spectrum(chart, &spec)
}

pub fn complex_hessian_from_spectrum(chart: &GridChart, spec: &[Complex64]) -> Vec<Complex64> {
    let n = chart.complex_dim();
    let len = chart.len();
    let mut out = vec![Complex64::default(); len * n * n];
    for i in 0..n {
        for j in i..n {
            let vals = apply_symbol(chart, spec, |k| {
                chart.complex_symbol(k, i, false) * chart.complex_symbol(k, j, true)
            });
            for (p, v) in vals.into_iter().enumerate() {
                out[p * n * n + i * n + j] = v;
                if i != j {
                    out[p * n * n + j * n + i] = v.conj();
                } else {
                    out[p * n * n + i * n + i] = Complex64::new(v.re, 0.0);
                }
            }
        }
    }
    out
}

/// `‖f‖_∞ + max_a ‖∂_a f‖_∞ + max_{a,b} ‖∂_a ∂_b f‖_∞` in the real coordinates.
pub fn c2_norm(field: &ScalarField) -> f64 {
    let chart = field.chart();
    let spec = spectrum(field);
    let dims = chart.real_dim();
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    for a in 0..dims {
        first = first.max(real_derivative_from_spectrum(chart, &spec, a).sup_norm());
        for b in a..dims {
            let out = apply_symbol(chart, &spec, |i| {
                Complex64::new(-chart.angular_wavenumber(i, a) * chart.angular_wavenumber(i, b), 0.0)
            });
            second = second.max(ScalarField::from_vec_unchecked(chart, real_values(out)).sup_norm());
        }
    }
    field.sup_norm() + first + second
}

/// Warning text when a field declared band-limited at `band` cannot be
/// represented (or multiplied once without aliasing) on this chart.
pub fn band_limit_warning(chart: &GridChart, band: usize) -> Option<String> {
    let max = chart.max_resolved_band();
    (band > max).then(|| {
        format!(
            "declared band limit {band} exceeds the resolved band {max} at resolution {}",
            chart.resolution()
        )
    })
}

/// Fraction of spectral energy carried by modes with `max_a |k_a| > band`.
pub fn spectral_tail(field: &ScalarField, band: usize) -> f64 {
    let chart = field.chart();
    let spec = spectrum(field);
    let dims = chart.real_dim();
    let res = chart.resolution();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (idx, c) in spec.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        let mut rem = idx;
        let mut kmax = 0usize;
        for _ in 0..dims {
            let i = rem % res;
            rem /= res;
            kmax = kmax.max(i.min(res - i));
        }
        if kmax > band {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}
