use nalgebra::DMatrix;
use num_complex::Complex64;

use super::chart::GridChart;
use super::field::ScalarField;
use crate::error::{Error, Result};

/// Positive Hermitian matrix `h_{i\bar j}` at every grid point.
///
/// The associated form is `ω = i h_{i\bar j} dz^i ∧ d\bar z^j`, its volume
/// density is `2^n det h` against Lebesgue measure, and the underlying real
/// metric is the realification of `2h` (see [`HermitianMetricField::real_metric_inverse`]).
/// Inverses and determinants are computed once on construction.
#[derive(Clone, Debug)]
pub struct HermitianMetricField {
    chart: GridChart,
    matrices: Vec<Complex64>,
    inverses: Vec<Complex64>,
    dets: Vec<f64>,
}

impl HermitianMetricField {
    /// Builds a metric from point-major `n×n` blocks. Only the upper triangle
    /// and the real part of the diagonal are read; the rest is mirrored.
    pub fn new(chart: &GridChart, mut matrices: Vec<Complex64>) -> Result<Self> {
        let n = chart.complex_dim();
        if matrices.len() != chart.len() * n * n {
            return Err(Error::InvalidParameter("metric needs n*n entries per point".into()));
        }
        let mut inverses = vec![Complex64::default(); matrices.len()];
        let mut dets = vec![0.0; chart.len()];
        for p in 0..chart.len() {
            let block = &mut matrices[p * n * n..(p + 1) * n * n];
            for i in 0..n {
                block[i * n + i] = Complex64::new(block[i * n + i].re, 0.0);
                for j in (i + 1)..n {
                    block[j * n + i] = block[i * n + j].conj();
                }
            }
            if block.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::Positivity { index: p, value: f64::NAN });
            }
            let (det, inv) = match hermitian_det_inverse(block, n) {
                Some(r) => r,
                None => {
                    return Err(Error::Positivity {
                        index: p,
                        value: min_eigenvalue(&DMatrix::from_row_slice(n, n, block)),
                    })
                }
            };
            dets[p] = det;
            inverses[p * n * n..(p + 1) * n * n].copy_from_slice(&inv);
        }
        Ok(Self {
            chart: chart.clone(),
            matrices,
            inverses,
            dets,
        })
    }

    /// Samples `f(coords)` (an `n×n` row-major block) at every grid point.
    pub fn from_fn(chart: &GridChart, mut f: impl FnMut(&[f64]) -> Vec<Complex64>) -> Result<Self> {
        let n = chart.complex_dim();
        let mut data = Vec::with_capacity(chart.len() * n * n);
        for p in 0..chart.len() {
            let block = f(&chart.coordinates(p));
            assert_eq!(block.len(), n * n);
            data.extend(block);
        }
        Self::new(chart, data)
    }

    /// `scale · I` everywhere.
    pub fn flat(chart: &GridChart, scale: f64) -> Result<Self> {
        let n = chart.complex_dim();
        Self::from_fn(chart, |_| identity_block(n, scale))
    }

    /// `e^{2f/n} · identity`.
    pub fn conformally_flat(potential: &ScalarField) -> Result<Self> {
        let chart = potential.chart();
        let flat = Self::flat(chart, 1.0)?;
        Ok(flat.conformal_rescale(potential))
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn complex_dim(&self) -> usize {
        self.chart.complex_dim()
    }

    pub fn matrix(&self, point: usize) -> &[Complex64] {
        let nn = self.complex_dim().pow(2);
        &self.matrices[point * nn..(point + 1) * nn]
    }

    pub fn inverse(&self, point: usize) -> &[Complex64] {
        let nn = self.complex_dim().pow(2);
        &self.inverses[point * nn..(point + 1) * nn]
    }

    pub fn matrices(&self) -> &[Complex64] {
        &self.matrices
    }

    pub fn inverses(&self) -> &[Complex64] {
        &self.inverses
    }

    pub fn det(&self, point: usize) -> f64 {
        self.dets[point]
    }

    pub fn log_det(&self) -> ScalarField {
        ScalarField::from_vec_unchecked(&self.chart, self.dets.iter().map(|d| d.ln()).collect())
    }

    /// Density of `dμ_ω = ω^n/n!` against Lebesgue measure: `2^n det h`.
    pub fn measure_density(&self) -> ScalarField {
        let scale = 2f64.powi(self.complex_dim() as i32);
        ScalarField::from_vec_unchecked(&self.chart, self.dets.iter().map(|d| scale * d).collect())
    }

    pub fn volume(&self) -> f64 {
        crate::geometry::ops::integrate(&ScalarField::constant(&self.chart, 1.0), self)
    }

    /// Pointwise `e^{2f/n} h`. Inverses and determinants are rescaled directly.
    pub fn conformal_rescale(&self, potential: &ScalarField) -> Self {
        assert_eq!(potential.chart(), &self.chart);
        let n = self.complex_dim();
        let nn = n * n;
        let mut out = self.clone();
        for (p, &f) in potential.values().iter().enumerate() {
            let phi = (2.0 * f / n as f64).exp();
            for k in 0..nn {
                out.matrices[p * nn + k] *= phi;
                out.inverses[p * nn + k] /= phi;
            }
            out.dets[p] *= phi.powi(n as i32);
        }
        out
    }

    /// Constant rescaling `c · h`, `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0);
        let n = self.complex_dim() as f64;
        self.conformal_rescale(&ScalarField::constant(&self.chart, 0.5 * n * c.ln()))
    }

    /// Dual real metric `g^{-1}` at a point, `2n×2n` row-major in the
    /// interleaved real frame. With `g = R(2h)` where `R(p+iq) = [[p, q], [-q, p]]`
    /// is multiplicative, `g^{-1} = R(h^{-1})/2`.
    pub fn real_metric_inverse(&self, point: usize) -> Vec<f64> {
        realify(self.inverse(point), self.complex_dim(), 0.5)
    }

    /// Real metric `g = R(2h)` at a point.
    pub fn real_metric(&self, point: usize) -> Vec<f64> {
        realify(self.matrix(point), self.complex_dim(), 2.0)
    }

    /// Smallest eigenvalue of `h` over the grid.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.complex_dim();
        (0..self.chart.len())
            .map(|p| min_eigenvalue(&DMatrix::from_row_slice(n, n, self.matrix(p))))
            .fold(f64::INFINITY, f64::min)
    }

    /// True if every point carries the same matrix.
    pub fn is_constant(&self) -> bool {
        let nn = self.complex_dim().pow(2);
        let first = &self.matrices[..nn];
        self.matrices
            .chunks(nn)
            .all(|b| b.iter().zip(first).all(|(a, c)| (a - c).norm() <= 1e-14 * (1.0 + c.norm())))
    }
}

/// Cholesky factorization `A = L L*`; `None` unless `A` is positive definite.
/// Returns `det A` and `A^{-1}` (row-major).
fn hermitian_det_inverse(a: &[Complex64], n: usize) -> Option<(f64, Vec<Complex64>)> {
    let mut l = vec![Complex64::default(); n * n];
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / djj;
        }
    }
    let det = (0..n).map(|i| l[i * n + i].re.powi(2)).product();
    // A^{-1} = L^{-*} L^{-1}; solve column by column.
    let mut inv = vec![Complex64::default(); n * n];
    for c in 0..n {
        let mut y = vec![Complex64::default(); n];
        for i in 0..n {
            let mut s = if i == c { Complex64::new(1.0, 0.0) } else { Complex64::default() };
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        let mut x = vec![Complex64::default(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i].conj() * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        for i in 0..n {
            inv[i * n + c] = x[i];
        }
    }
    Some((det, inv))
}

pub fn identity_block(n: usize, scale: f64) -> Vec<Complex64> {
    let mut m = vec![Complex64::default(); n * n];
    for i in 0..n {
        m[i * n + i] = Complex64::new(scale, 0.0);
    }
    m
}

fn realify(block: &[Complex64], n: usize, scale: f64) -> Vec<f64> {
    let d = 2 * n;
    let mut g = vec![0.0; d * d];
    for k in 0..n {
        for l in 0..n {
            let a = block[k * n + l] * scale;
            g[(2 * k) * d + 2 * l] = a.re;
            g[(2 * k) * d + 2 * l + 1] = a.im;
            g[(2 * k + 1) * d + 2 * l] = -a.im;
            g[(2 * k + 1) * d + 2 * l + 1] = a.re;
        }
    }
    g
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrors_upper_triangle() {
        let chart = GridChart::new(2, 8).unwrap();
        let m = HermitianMetricField::from_fn(&chart, |_| {
            vec![
                Complex64::new(2.0, 0.3),
                Complex64::new(0.1, 0.2),
                Complex64::new(9.0, 9.0),
                Complex64::new(1.5, 0.0),
            ]
        })
        .unwrap();
        let b = m.matrix(0);
        assert_eq!(b[0], Complex64::new(2.0, 0.0));
        assert_eq!(b[2], Complex64::new(0.1, -0.2));
    }

    #[test]
    fn rejects_indefinite_metric() {
        let chart = GridChart::new(2, 8).unwrap();
        let err = HermitianMetricField::from_fn(&chart, |x| {
            let d = if x[0] > 0.5 { -0.1 } else { 1.0 };
            vec![Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default(), Complex64::new(d, 0.0)]
        })
        .unwrap_err();
        assert_eq!(err.reason(), "positivity_violation");
    }

    #[test]
    fn identity_measure_is_two_to_the_n() {
        let chart = GridChart::new(2, 8).unwrap();
        let m = HermitianMetricField::flat(&chart, 1.0).unwrap();
        assert!(m.measure_density().values().iter().all(|&v| v == 4.0));
        assert_eq!(m.real_metric_inverse(0)[0], 0.5);
    }

    #[test]
    fn realification_inverts() {
        let chart = GridChart::new(2, 8).unwrap();
        let m = HermitianMetricField::from_fn(&chart, |_| {
            vec![
                Complex64::new(1.3, 0.0),
                Complex64::new(0.2, -0.4),
                Complex64::default(),
                Complex64::new(0.9, 0.0),
            ]
        })
        .unwrap();
        let g = m.real_metric(0);
        let gi = m.real_metric_inverse(0);
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| g[i * 4 + k] * gi[k * 4 + j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        // sqrt(det g) = 2^n det h
        let gm = nalgebra::DMatrix::from_row_slice(4, 4, &g);
        assert!((gm.determinant().sqrt() - 4.0 * m.det(0)).abs() < 1e-12);
    }
}
