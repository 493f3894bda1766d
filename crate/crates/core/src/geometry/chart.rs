use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic grid on the real torus underlying `C^n / lattice`.
///
/// Real axes are interleaved as `(x^1, y^1, ..., x^n, y^n)` and grid points are
/// stored row-major with axis 0 varying slowest. The chart owns the FFT plans,
/// so clones are cheap and all fields built on it share one set of plans.
#[derive(Clone)]
pub struct GridChart {
    inner: Arc<ChartInner>,
}

struct ChartInner {
    complex_dim: usize,
    resolution: usize,
    periods: Vec<f64>,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `2π k / period` per (point, axis), Nyquist row zeroed.
    angular: Vec<f64>,
}

impl GridChart {
    /// Unit-period chart.
    pub fn new(complex_dim: usize, resolution: usize) -> Result<Self> {
        Self::with_periods(complex_dim, resolution, vec![1.0; 2 * complex_dim])
    }

    pub fn with_periods(complex_dim: usize, resolution: usize, periods: Vec<f64>) -> Result<Self> {
        if complex_dim < 1 {
            return Err(Error::InvalidChart("complex dimension must be positive".into()));
        }
        if resolution < 8 || resolution % 2 != 0 {
            return Err(Error::InvalidChart(format!(
                "resolution {resolution} must be even and at least 8"
            )));
        }
        if periods.len() != 2 * complex_dim || periods.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidChart("need 2n positive periods".into()));
        }
        let dims = 2 * complex_dim;
        let len = resolution
            .checked_pow(dims as u32)
            .filter(|&l| l <= 1 << 24)
            .ok_or_else(|| Error::InvalidChart("grid too large".into()))?;

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(resolution);
        let inverse = planner.plan_fft_inverse(resolution);

        let freq = |i: usize| -> f64 {
            if i == resolution / 2 {
                0.0
            } else if i < resolution / 2 {
                i as f64
            } else {
                i as f64 - resolution as f64
            }
        };
        let mut angular = vec![0.0; len * dims];
        for idx in 0..len {
            let mut rem = idx;
            for axis in (0..dims).rev() {
                let i = rem % resolution;
                rem /= resolution;
                angular[idx * dims + axis] = 2.0 * std::f64::consts::PI * freq(i) / periods[axis];
            }
        }

        Ok(Self {
            inner: Arc::new(ChartInner {
                complex_dim,
                resolution,
                periods,
                len,
                forward,
                inverse,
                angular,
            }),
        })
    }

    pub fn complex_dim(&self) -> usize {
        self.inner.complex_dim
    }

    pub fn real_dim(&self) -> usize {
        2 * self.inner.complex_dim
    }

    pub fn resolution(&self) -> usize {
        self.inner.resolution
    }

    pub fn periods(&self) -> &[f64] {
        &self.inner.periods
    }

    /// Number of grid points, `resolution^(2n)`.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        self.inner.len == 0
    }

    /// Lebesgue volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        let n = self.inner.resolution as f64;
        self.inner.periods.iter().map(|p| p / n).product()
    }

    pub fn total_volume(&self) -> f64 {
        self.inner.periods.iter().product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.inner.resolution.pow((self.real_dim() - 1 - axis) as u32)
    }

    /// Real coordinates of grid point `index`, ordered `(x^1, y^1, ..., x^n, y^n)`.
    pub fn coordinates(&self, index: usize) -> Vec<f64> {
        let dims = self.real_dim();
        let res = self.inner.resolution;
        let mut out = vec![0.0; dims];
        let mut rem = index;
        for axis in (0..dims).rev() {
            out[axis] = (rem % res) as f64 * self.inner.periods[axis] / res as f64;
            rem /= res;
        }
        out
    }

    /// `2π k_axis / period_axis` for the Fourier mode stored at `index`.
    #[inline]
    pub fn angular_wavenumber(&self, index: usize, axis: usize) -> f64 {
        self.inner.angular[index * self.real_dim() + axis]
    }

    /// Symbol of `∂_j` (or `∂_{\bar j}` when `conjugate`) at Fourier index `index`.
    #[inline]
    pub fn complex_symbol(&self, index: usize, j: usize, conjugate: bool) -> Complex64 {
        let kx = self.angular_wavenumber(index, 2 * j);
        let ky = self.angular_wavenumber(index, 2 * j + 1);
        // d/dx -> i kx ; ∂ = (d/dx - i d/dy)/2 ; ∂̄ = (d/dx + i d/dy)/2
        if conjugate {
            Complex64::new(-ky, kx) * 0.5
        } else {
            Complex64::new(ky, kx) * 0.5
        }
    }

    /// In-place forward transform over all real axes (unnormalized).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// In-place inverse transform over all real axes, normalized by `1/len`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / self.inner.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.inner.len, "buffer does not match chart");
        let fft = if inverse { &self.inner.inverse } else { &self.inner.forward };
        let res = self.inner.resolution;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut buffer = Vec::new();
        for axis in 0..self.real_dim() {
            let stride = self.stride(axis);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = stride * res;
            buffer.resize(block, Complex64::default());
            for start in (0..self.inner.len).step_by(block) {
                let chunk = &mut data[start..start + block];
                for offset in 0..stride {
                    for i in 0..res {
                        buffer[offset * res + i] = chunk[i * stride + offset];
                    }
                }
                fft.process_with_scratch(&mut buffer, &mut scratch);
                for offset in 0..stride {
                    for i in 0..res {
                        chunk[i * stride + offset] = buffer[offset * res + i];
                    }
                }
            }
        }
    }

    /// Highest wavenumber per axis that is represented without aliasing in a
    /// product of two fields of the given band limit.
    pub fn max_resolved_band(&self) -> usize {
        self.inner.resolution / 2 - 1
    }
}

impl PartialEq for GridChart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.complex_dim == other.inner.complex_dim
                && self.inner.resolution == other.inner.resolution
                && self.inner.periods == other.inner.periods)
    }
}

impl fmt::Debug for GridChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridChart")
            .field("complex_dim", &self.inner.complex_dim)
            .field("resolution", &self.inner.resolution)
            .field("periods", &self.inner.periods)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_odd_resolution() {
        assert!(GridChart::new(2, 6).is_err());
        assert!(GridChart::new(2, 9).is_err());
        assert!(GridChart::new(2, 8).is_ok());
    }

    #[test]
    fn point_count_and_cell_volume() {
        let chart = GridChart::new(2, 8).unwrap();
        assert_eq!(chart.len(), 8usize.pow(4));
        assert!((chart.cell_volume() * chart.len() as f64 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coordinates_follow_row_major_order() {
        let chart = GridChart::new(2, 8).unwrap();
        assert_eq!(chart.coordinates(1), vec![0.0, 0.0, 0.0, 0.125]);
        assert_eq!(chart.coordinates(8usize.pow(3)), vec![0.125, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn transform_roundtrip() {
        let chart = GridChart::new(2, 8).unwrap();
        let orig: Vec<Complex64> = (0..chart.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        chart.forward(&mut data);
        chart.inverse(&mut data);
        let err = orig
            .iter()
            .zip(&data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
