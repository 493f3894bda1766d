use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::forms::ExteriorAlgebra;
use crate::geometry::ops::pairing_1forms;
use crate::geometry::spectral::{apply_symbol, gradient, spectrum_complex};
use crate::geometry::{hodge_laplacian, GridChart, HermitianMetricField, OneFormField, ScalarField};

use super::laplacian::ChernLaplacian;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pointwise `Δ^Ch f = −2 h^{i\bar j} ∂_i∂_{\bar j} f`.
pub fn chern_laplacian(metric: &HermitianMetricField, f: &ScalarField) -> ScalarField {
    ChernLaplacian::from_metric(metric).apply(f)
}

/// `Δ_d f + (df, θ)_ω` for a precomputed Lee form `θ`.
pub fn chern_laplacian_via_lee(metric: &HermitianMetricField, lee: &OneFormField, f: &ScalarField) -> ScalarField {
    let drift = pairing_1forms(&gradient(f), lee, metric);
    hodge_laplacian(f, metric).add(&drift)
}

/// Chern scalar curvature `S^Ch = h^{i\bar j}(−∂_i∂_{\bar j} log det h) = ½ Δ^Ch log det h`.
pub fn chern_scalar(metric: &HermitianMetricField) -> ScalarField {
    ChernLaplacian::from_metric(metric).apply(&metric.log_det()).scale(0.5)
}

/// Pointwise `e^{2f/n} h`.
pub fn conformal_rescale(metric: &HermitianMetricField, f: &ScalarField) -> HermitianMetricField {
    metric.conformal_rescale(f)
}

/// Coefficient fields of `ω^{n−1}` in the real basis `e_{2k} = dx^k, e_{2k+1} = dy^k`,
/// one field per mask of degree `2n−2`.
fn omega_power_real(metric: &HermitianMetricField) -> (Vec<usize>, Vec<Vec<f64>>) {
    let chart = metric.chart();
    let n = chart.complex_dim();
    let alg = ExteriorAlgebra::new(2 * n);
    // basis 2-forms i dz^k ∧ dz̄^l with dz = e_{2k} + i e_{2k+1}
    let mut blocks = Vec::with_capacity(n * n);
    for k in 0..n {
        let mut dz = alg.zero();
        dz[1 << (2 * k)] = Complex64::new(1.0, 0.0);
        dz[1 << (2 * k + 1)] = I;
        for l in 0..n {
            let mut dzb = alg.zero();
            dzb[1 << (2 * l)] = Complex64::new(1.0, 0.0);
            dzb[1 << (2 * l + 1)] = -I;
            let b: Vec<Complex64> = alg.wedge(&dz, &dzb).into_iter().map(|c| c * I).collect();
            blocks.push(b);
        }
    }
    let masks = alg.basis(2 * n - 2);
    let mut coeffs = vec![vec![0.0; chart.len()]; masks.len()];
    for p in 0..chart.len() {
        let h = metric.matrix(p);
        let mut omega = alg.zero();
        for (kl, b) in blocks.iter().enumerate() {
            for (o, bb) in omega.iter_mut().zip(b) {
                *o += h[kl] * bb;
            }
        }
        for o in omega.iter_mut() {
            *o = Complex64::new(o.re, 0.0);
        }
        let pw = alg.power(&omega, n - 1);
        for (mi, &m) in masks.iter().enumerate() {
            coeffs[mi][p] = pw[m].re;
        }
    }
    (masks, coeffs)
}

/// `dω^{n−1}` as coefficient fields indexed by the missing generator `b`
/// (the mask is `full ^ (1 << b)`), plus the `ω^{n−1}` data it came from.
fn d_omega_power(metric: &HermitianMetricField) -> (Vec<usize>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let chart = metric.chart();
    let m = chart.real_dim();
    let full = (1usize << m) - 1;
    let (masks, coeffs) = omega_power_real(metric);
    let mut d = vec![vec![0.0; chart.len()]; m];
    for (mask, c) in masks.iter().zip(&coeffs) {
        let complex: Vec<Complex64> = c.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let spec = spectrum_complex(chart, &complex);
        for a in 0..m {
            if mask & (1 << a) != 0 {
                continue;
            }
            let sign = ExteriorAlgebra::wedge_sign(1 << a, *mask).expect("disjoint");
            let target = full ^ (mask | (1 << a));
            let b = target.trailing_zeros() as usize;
            let da = apply_symbol(chart, &spec, |k| Complex64::new(0.0, chart.angular_wavenumber(k, a)));
            for (acc, v) in d[b].iter_mut().zip(da) {
                *acc += sign * v.re;
            }
        }
    }
    (masks, coeffs, d)
}

/// Lee form `θ` with `dω^{n−1} = θ ∧ ω^{n−1}`, solved pointwise in the real basis.
pub fn lee_form(metric: &HermitianMetricField) -> Result<OneFormField> {
    let chart = metric.chart();
    let m = chart.real_dim();
    let full = (1usize << m) - 1;
    let (masks, coeffs, d) = d_omega_power(metric);
    let mut out = vec![0.0; chart.len() * m];
    for p in 0..chart.len() {
        // column a: e_a ∧ ω^{n−1}, row b: coefficient of the mask missing b
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for (mask, c) in masks.iter().zip(&coeffs) {
            for a in 0..m {
                if mask & (1 << a) != 0 {
                    continue;
                }
                let sign = ExteriorAlgebra::wedge_sign(1 << a, *mask).expect("disjoint");
                let b = (full ^ (mask | (1 << a))).trailing_zeros() as usize;
                mat[(b, a)] += sign * c[p];
            }
        }
        let rhs = DVector::from_iterator(m, (0..m).map(|b| d[b][p]));
        let theta = mat.lu().solve(&rhs).ok_or(Error::SingularSystem { index: p })?;
        out[p * m..(p + 1) * m].copy_from_slice(theta.as_slice());
    }
    OneFormField::new(chart, out)
}

fn unit_volume_factor(metric: &HermitianMetricField) -> f64 {
    let n = metric.complex_dim() as f64;
    metric.volume().powf(-(n - 1.0) / n)
}

fn l2(chart: &GridChart, fields: &[Vec<f64>]) -> f64 {
    let s: f64 = fields.iter().flat_map(|f| f.iter()).map(|v| v * v).sum();
    (s * chart.cell_volume()).sqrt()
}

/// `‖i∂∂̄ω^{n−1}‖` and `‖dω^{n−1}‖` (Lebesgue L² of coefficient fields,
/// normalized as if `ω` had unit volume).
pub fn gauduchon_residual(metric: &HermitianMetricField) -> (f64, f64) {
    let chart = metric.chart();
    let scale = unit_volume_factor(metric);
    let balanced = l2(chart, &d_omega_power(metric).2) * scale;
    let top = i_ddbar_top(metric);
    let s: f64 = top.iter().map(|c| c.norm_sqr()).sum();
    let gauduchon = (s * chart.cell_volume()).sqrt() * scale;
    (gauduchon, balanced)
}

/// Top-degree coefficient of `i∂∂̄ω^{n−1}` in the complex basis `dz^1..dz^n, dz̄^1..dz̄^n`.
fn i_ddbar_top(metric: &HermitianMetricField) -> Vec<Complex64> {
    let chart = metric.chart();
    let n = chart.complex_dim();
    let alg = ExteriorAlgebra::new(2 * n);
    let full = (1usize << (2 * n)) - 1;
    let holo = (1usize << n) - 1;
    let masks: Vec<usize> = alg
        .basis(2 * n - 2)
        .into_iter()
        .filter(|m| (m & holo).count_ones() as usize == n - 1)
        .collect();
    let mut coeffs = vec![vec![Complex64::default(); chart.len()]; masks.len()];
    for p in 0..chart.len() {
        let h = metric.matrix(p);
        let mut omega = alg.zero();
        for k in 0..n {
            for l in 0..n {
                omega[(1 << k) | (1 << (n + l))] += I * h[k * n + l];
            }
        }
        let pw = alg.power(&omega, n - 1);
        for (mi, &m) in masks.iter().enumerate() {
            coeffs[mi][p] = pw[m];
        }
    }
    let mut top = vec![Complex64::default(); chart.len()];
    for (mask, c) in masks.iter().zip(&coeffs) {
        let missing = full ^ mask;
        let k = (missing & holo).trailing_zeros() as usize;
        let l = (missing >> n).trailing_zeros() as usize;
        let sign = ExteriorAlgebra::wedge_sign((1 << k) | (1 << (n + l)), *mask).expect("disjoint");
        let spec = spectrum_complex(chart, c);
        let dd = apply_symbol(chart, &spec, |q| {
            chart.complex_symbol(q, k, false) * chart.complex_symbol(q, l, true)
        });
        for (t, v) in top.iter_mut().zip(dd) {
            *t += I * v * sign;
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn chart(n: usize, res: usize) -> GridChart {
        GridChart::new(n, res).unwrap()
    }

    fn wavy(chart: &GridChart, amp: f64) -> ScalarField {
        ScalarField::from_fn(chart, |x| amp * (2.0 * PI * x[0]).cos() + 0.5 * amp * (2.0 * PI * (x[1] - x[2])).sin())
    }

    #[test]
    fn flat_metric_has_zero_curvature_lee_and_residuals() {
        let c = chart(2, 8);
        let m = HermitianMetricField::flat(&c, 1.3).unwrap();
        assert!(chern_scalar(&m).sup_norm() < 1e-12);
        assert!(lee_form(&m).unwrap().sup_norm() < 1e-12);
        let (g, b) = gauduchon_residual(&m);
        assert!(g < 1e-12 && b < 1e-12);
    }

    #[test]
    fn conformal_lee_form_is_scaled_differential() {
        for n in [2usize, 3] {
            let c = chart(n, if n == 2 { 16 } else { 8 });
            let f = wavy(&c, 0.05);
            let m = HermitianMetricField::flat(&c, 1.0).unwrap().conformal_rescale(&f);
            let theta = lee_form(&m).unwrap();
            let expect = gradient(&f).scale(2.0 * (n as f64 - 1.0) / n as f64);
            let err = theta
                .components()
                .iter()
                .zip(expect.components())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            // 8^6 grid for n = 3 resolves e^{2f/n} less well than 16^4
            let tol = if n == 2 { 1e-8 } else { 1e-6 };
            assert!(err < tol, "n = {n}: {err}");
            let (g, b) = gauduchon_residual(&m);
            assert!(g > 1e-4 && b > 1e-4);
        }
    }

    #[test]
    fn conformally_flat_curvature_matches_law() {
        let c = chart(2, 16);
        let f = wavy(&c, 0.3);
        let flat = HermitianMetricField::flat(&c, 1.0).unwrap();
        let s = chern_scalar(&flat.conformal_rescale(&f));
        let rhs = chern_laplacian(&flat, &f).zip_map(&f, |l, fv| (-fv).exp() * l);
        let err = s.sub(&rhs).sup_norm();
        assert!(err < 1e-10 * rhs.sup_norm().max(1.0), "{err}");
    }

    #[test]
    fn operator_identity_on_conformal_metric() {
        let c = chart(2, 16);
        let m = HermitianMetricField::flat(&c, 1.0).unwrap().conformal_rescale(&wavy(&c, 0.1));
        let theta = lee_form(&m).unwrap();
        let f = ScalarField::from_fn(&c, |x| (2.0 * PI * (x[0] + 2.0 * x[3])).sin());
        let a = chern_laplacian(&m, &f);
        let b = chern_laplacian_via_lee(&m, &theta, &f);
        assert!(a.sub(&b).sup_norm() < 1e-6 * a.sup_norm());
    }
}
