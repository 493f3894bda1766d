use num_complex::Complex64;

use super::chart::GridChart;
use crate::error::{Error, Result};

/// Deterministic pairwise (tree) summation.
///
/// The split points depend only on the slice length, so the result is
/// bit-identical across runs regardless of how the inputs were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// One real value per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    chart: GridChart,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(chart: &GridChart, values: Vec<f64>) -> Result<Self> {
        if values.len() != chart.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, chart has {} points",
                values.len(),
                chart.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field contains non-finite values".into()));
        }
        Ok(Self {
            chart: chart.clone(),
            values,
        })
    }

    pub(crate) fn from_vec_unchecked(chart: &GridChart, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), chart.len());
        Self {
            chart: chart.clone(),
            values,
        }
    }

    pub fn constant(chart: &GridChart, value: f64) -> Self {
        Self::from_vec_unchecked(chart, vec![value; chart.len()])
    }

    pub fn zeros(chart: &GridChart) -> Self {
        Self::constant(chart, 0.0)
    }

    /// Samples `f` at the real coordinates of every grid point.
    pub fn from_fn(chart: &GridChart, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..chart.len()).map(|i| f(&chart.coordinates(i))).collect();
        Self::from_vec_unchecked(chart, values)
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec_unchecked(&self.chart, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.chart, other.chart, "fields live on different charts");
        Self::from_vec_unchecked(
            &self.chart,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lebesgue mean over the chart.
    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }
}

/// Complex values per grid point, produced by complex derivatives.
#[derive(Clone, Debug)]
pub struct ComplexField {
    chart: GridChart,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub(crate) fn from_vec_unchecked(chart: &GridChart, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), chart.len());
        Self {
            chart: chart.clone(),
            values,
        }
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn real_part(&self) -> ScalarField {
        ScalarField::from_vec_unchecked(&self.chart, self.values.iter().map(|v| v.re).collect())
    }

    pub fn imag_part(&self) -> ScalarField {
        ScalarField::from_vec_unchecked(&self.chart, self.values.iter().map(|v| v.im).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Real 1-form with `2n` components per point in the basis `(dx^1, dy^1, ..., dx^n, dy^n)`.
#[derive(Clone, Debug)]
pub struct OneFormField {
    chart: GridChart,
    /// Point-major: `components[point * 2n + axis]`.
    components: Vec<f64>,
}

impl OneFormField {
    pub fn new(chart: &GridChart, components: Vec<f64>) -> Result<Self> {
        if components.len() != chart.len() * chart.real_dim() {
            return Err(Error::InvalidParameter("one-form component count must be 2n per point".into()));
        }
        Ok(Self {
            chart: chart.clone(),
            components,
        })
    }

    pub fn zeros(chart: &GridChart) -> Self {
        Self {
            chart: chart.clone(),
            components: vec![0.0; chart.len() * chart.real_dim()],
        }
    }

    /// Constant coefficients `coeffs` (length 2n) at every point.
    pub fn constant(chart: &GridChart, coeffs: &[f64]) -> Self {
        assert_eq!(coeffs.len(), chart.real_dim());
        let mut components = Vec::with_capacity(chart.len() * coeffs.len());
        for _ in 0..chart.len() {
            components.extend_from_slice(coeffs);
        }
        Self {
            chart: chart.clone(),
            components,
        }
    }

    /// Assembles a 1-form from one scalar field per real axis.
    pub fn from_axes(axes: &[ScalarField]) -> Self {
        let chart = axes[0].chart().clone();
        let dims = chart.real_dim();
        assert_eq!(axes.len(), dims);
        let mut components = vec![0.0; chart.len() * dims];
        for (a, field) in axes.iter().enumerate() {
            assert_eq!(field.chart(), &chart);
            for (p, v) in field.values().iter().enumerate() {
                components[p * dims + a] = *v;
            }
        }
        Self { chart, components }
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn at(&self, point: usize) -> &[f64] {
        let d = self.chart.real_dim();
        &self.components[point * d..(point + 1) * d]
    }

    pub fn at_mut(&mut self, point: usize) -> &mut [f64] {
        let d = self.chart.real_dim();
        &mut self.components[point * d..(point + 1) * d]
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn axis(&self, axis: usize) -> ScalarField {
        let d = self.chart.real_dim();
        ScalarField::from_vec_unchecked(
            &self.chart,
            (0..self.chart.len()).map(|p| self.components[p * d + axis]).collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            chart: self.chart.clone(),
            components: self.components.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn pairwise_sum_is_order_stable() {
        let v: Vec<f64> = (0..4096).map(|i| ((i * 7919) % 1009) as f64 * 1e-3).collect();
        assert_eq!(pairwise_sum(&v).to_bits(), pairwise_sum(&v.clone()).to_bits());
    }

    #[test]
    fn rejects_non_finite_values() {
        let chart = GridChart::new(2, 8).unwrap();
        let mut v = vec![0.0; chart.len()];
        v[3] = f64::NAN;
        assert!(ScalarField::new(&chart, v).is_err());
    }
}
