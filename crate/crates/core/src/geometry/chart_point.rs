use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of a non-periodic chart together with the metric matrix there.
///
/// Used for the Hopf fundamental annulus `1 ≤ |z| ≤ 2` in `C^2 \ {0}`, where
/// everything is evaluated pointwise rather than on a grid.
#[derive(Clone, Debug)]
pub struct ChartPointSample {
    pub z: Vec<Complex64>,
    pub metric: DMatrix<Complex64>,
    pub stencil_spacing: Option<f64>,
}

impl ChartPointSample {
    /// Sample of the standard Hopf metric `h = |z|^{-2} I` on the fundamental annulus.
    pub fn hopf(z: Vec<Complex64>, stencil_spacing: Option<f64>) -> Result<Self> {
        let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(1.0..=2.0).contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "|z| = {r} lies outside the fundamental annulus [1, 2]"
            )));
        }
        let metric = hopf_metric(&z);
        Ok(Self {
            z,
            metric,
            stencil_spacing,
        })
    }

    pub fn radius(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `h(z) = |z|^{-2} I`.
pub fn hopf_metric(z: &[Complex64]) -> DMatrix<Complex64> {
    let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    DMatrix::from_diagonal_element(z.len(), z.len(), Complex64::new(1.0 / r2, 0.0))
}
