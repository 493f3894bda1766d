use num_complex::Complex64;

use crate::geometry::spectral::{complex_hessian_from_spectrum, spectrum, spectrum_complex};
use crate::geometry::{GridChart, HermitianMetricField, ScalarField};

/// The Chern Laplacian `Δ^Ch = −2 h^{i\bar j} ∂_i ∂_{\bar j}` as a reusable discrete operator.
///
/// Writing `c_{ij} = −2 (h^{-1})_{ji}`, the operator is `L f = Σ c_{ij} ∂_i∂_{\bar j} f`.
/// Constant-coefficient operators act as a single Fourier multiplier; variable ones
/// evaluate the complex Hessian spectrally and contract pointwise.
#[derive(Clone, Debug)]
pub struct ChernLaplacian {
    chart: GridChart,
    /// Point-major `n×n` coefficients, `None` when they are constant.
    coeffs: Option<Vec<Complex64>>,
    /// Grid average of the coefficients.
    mean: Vec<Complex64>,
    /// Fourier symbol of the averaged operator (real, non-negative).
    symbol: Vec<f64>,
}

fn contract_symbol(chart: &GridChart, c: &[Complex64], k: usize) -> f64 {
    let n = chart.complex_dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let sym = chart.complex_symbol(k, i, false) * chart.complex_symbol(k, j, true);
            s += (c[i * n + j] * sym).re;
        }
    }
    s
}

impl ChernLaplacian {
    pub fn from_metric(metric: &HermitianMetricField) -> Self {
        let chart = metric.chart().clone();
        let n = chart.complex_dim();
        let nn = n * n;
        let mut coeffs = vec![Complex64::default(); chart.len() * nn];
        for p in 0..chart.len() {
            let inv = metric.inverse(p);
            for i in 0..n {
                for j in 0..n {
                    coeffs[p * nn + i * n + j] = inv[j * n + i] * -2.0;
                }
            }
        }
        Self::from_coefficients(chart, coeffs, metric.is_constant())
    }

    /// Constant-coefficient operator of the flat metric `scale · I`, i.e. `−(2/scale) Σ ∂_j∂_{\bar j}`.
    pub fn flat(chart: &GridChart, scale: f64) -> Self {
        let n = chart.complex_dim();
        let mut c = vec![Complex64::default(); n * n];
        for i in 0..n {
            c[i * n + i] = Complex64::new(-2.0 / scale, 0.0);
        }
        let symbol = (0..chart.len()).map(|k| contract_symbol(chart, &c, k)).collect();
        Self {
            chart: chart.clone(),
            coeffs: None,
            mean: c,
            symbol,
        }
    }

    fn from_coefficients(chart: GridChart, coeffs: Vec<Complex64>, constant: bool) -> Self {
        let nn = chart.complex_dim().pow(2);
        let len = chart.len() as f64;
        let mut mean = vec![Complex64::default(); nn];
        for block in coeffs.chunks(nn) {
            for (m, c) in mean.iter_mut().zip(block) {
                *m += c;
            }
        }
        if constant {
            mean.copy_from_slice(&coeffs[..nn]);
        } else {
            for m in mean.iter_mut() {
                *m /= len;
            }
        }
        let symbol = (0..chart.len()).map(|k| contract_symbol(&chart, &mean, k)).collect();
        Self {
            chart,
            coeffs: (!constant).then_some(coeffs),
            mean,
            symbol,
        }
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_none()
    }

    /// Fourier symbol of the averaged constant-coefficient operator.
    pub fn mean_symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// The operator `φ · L` for a positive pointwise factor `φ`.
    pub fn scaled_pointwise(&self, factor: &ScalarField) -> Self {
        assert_eq!(factor.chart(), &self.chart);
        let nn = self.chart.complex_dim().pow(2);
        let mut coeffs = Vec::with_capacity(self.chart.len() * nn);
        for (p, &phi) in factor.values().iter().enumerate() {
            let block = match &self.coeffs {
                Some(c) => &c[p * nn..(p + 1) * nn],
                None => &self.mean[..],
            };
            coeffs.extend(block.iter().map(|c| c * phi));
        }
        Self::from_coefficients(self.chart.clone(), coeffs, false)
    }

    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        assert_eq!(f.chart(), &self.chart);
        ScalarField::from_vec_unchecked(&self.chart, self.apply_slice(f.values()))
    }

    pub fn apply_slice(&self, f: &[f64]) -> Vec<f64> {
        let chart = &self.chart;
        let field = ScalarField::from_vec_unchecked(chart, f.to_vec());
        let spec = spectrum(&field);
        match &self.coeffs {
            None => self.multiplier(&spec, |k| self.symbol[k]),
            Some(coeffs) => {
                let n = chart.complex_dim();
                let nn = n * n;
                let hess = complex_hessian_from_spectrum(chart, &spec);
                (0..chart.len())
                    .map(|p| {
                        let c = &coeffs[p * nn..(p + 1) * nn];
                        let m = &hess[p * nn..(p + 1) * nn];
                        c.iter().zip(m).map(|(a, b)| (a * b).re).sum()
                    })
                    .collect()
            }
        }
    }

    /// Transpose for the plain grid sum: `L^T w = Σ ∂_i∂_{\bar j}(c_{ij} w)`.
    pub fn apply_transpose_slice(&self, w: &[f64]) -> Vec<f64> {
        let chart = &self.chart;
        let Some(coeffs) = &self.coeffs else {
            // constant coefficients: the symbol is real and even, so L is symmetric
            return self.apply_slice(w);
        };
        let n = chart.complex_dim();
        let nn = n * n;
        let mut acc = vec![Complex64::default(); chart.len()];
        for i in 0..n {
            for j in i..n {
                let prod: Vec<Complex64> = w
                    .iter()
                    .enumerate()
                    .map(|(p, wp)| coeffs[p * nn + i * n + j] * wp)
                    .collect();
                let spec = spectrum_complex(chart, &prod);
                // ∂_j∂_{\bar i}(c_{ji} w) is the conjugate of ∂_i∂_{\bar j}(c_{ij} w)
                let weight = if i == j { 1.0 } else { 2.0 };
                for (k, (a, s)) in acc.iter_mut().zip(&spec).enumerate() {
                    let sym = chart.complex_symbol(k, i, false) * chart.complex_symbol(k, j, true);
                    *a += s * sym * weight;
                }
            }
        }
        chart.inverse(&mut acc);
        acc.into_iter().map(|c| c.re).collect()
    }

    pub fn apply_transpose(&self, w: &ScalarField) -> ScalarField {
        assert_eq!(w.chart(), &self.chart);
        ScalarField::from_vec_unchecked(&self.chart, self.apply_transpose_slice(w.values()))
    }

    fn multiplier(&self, spec: &[Complex64], symbol: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut out: Vec<Complex64> = spec.iter().enumerate().map(|(k, c)| c * symbol(k)).collect();
        self.chart.inverse(&mut out);
        out.into_iter().map(|c| c.re).collect()
    }

    /// Applies the Fourier multiplier `1/(p(k) + shift(k))` where `p` is the averaged symbol.
    ///
    /// Modes with a vanishing denominator (the unresolved Nyquist modes, which every
    /// derivative annihilates) are mapped to zero, so iterates stay in the resolved subspace.
    pub fn precondition(&self, r: &[f64], shift: impl Fn(usize) -> f64) -> Vec<f64> {
        let field = ScalarField::from_vec_unchecked(&self.chart, r.to_vec());
        let spec = spectrum(&field);
        self.multiplier(&spec, |k| {
            let d = self.symbol[k] + shift(k);
            if d == 0.0 {
                0.0
            } else {
                1.0 / d
            }
        })
    }
}
