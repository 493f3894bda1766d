use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{integrate, FieldDocument, HermitianMetricField, OneFormField, ScalarField};
use crate::linalg::{dot, gmres, norm, KrylovConfig};

use super::forms::{chern_scalar, gauduchon_residual, lee_form};
use super::laplacian::ChernLaplacian;

/// Settings for [`gauduchon_project_with`].
#[derive(Clone, Copy, Debug)]
pub struct ProjectionConfig {
    /// Weight of the mean projector added to the adjoint operator.
    pub shift: f64,
    /// Target for `‖L^T w‖ / ‖w‖`, the kernel residual.
    pub tolerance: f64,
    /// Upper bound on the total number of Krylov iterations.
    pub max_iterations: usize,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            shift: 1.0,
            tolerance: 1e-10,
            max_iterations: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GauduchonReport {
    pub iterations: usize,
    /// `‖i∂∂̄η^{n−1}‖` of the returned metric.
    pub gauduchon_residual: f64,
    /// `‖dη^{n−1}‖` of the returned metric.
    pub balanced_residual: f64,
    /// Rayleigh quotient of the adjoint at the computed kernel element (ideally 0).
    pub kernel_eigenvalue: f64,
    /// `min v / max v` for the kernel function `v`.
    pub positivity_margin: f64,
    /// `‖i∂∂̄ω^{n−1}‖` of the input metric.
    pub input_residual: f64,
}

/// Finds the unit-volume Gauduchon metric `η` conformal to `ω`.
pub fn gauduchon_project(metric: &HermitianMetricField) -> Result<(HermitianMetricField, GauduchonReport)> {
    gauduchon_project_with(metric, ProjectionConfig::default()).map(|(eta, _, report)| (eta, report))
}

/// Like [`gauduchon_project`], additionally returning the potential `g` with `η = e^{−2g/n} ω`.
///
/// The kernel of the adjoint `(Δ^Ch)^*` (with respect to `dμ_ω`) is spanned by a positive
/// function `v`. On the grid, `w = ρ v` spans the kernel of the transpose `L^T`; it is found
/// by solving `L^T w + σ·mean(w) = 1`, whose unique solution is the kernel element with
/// mean `1/σ`. Iterative refinement on that system continues until the kernel residual
/// reaches the tolerance. Then `η^{n−1} = v ω^{n−1}`, rescaled to unit volume.
pub fn gauduchon_project_with(
    metric: &HermitianMetricField,
    config: ProjectionConfig,
) -> Result<(HermitianMetricField, ScalarField, GauduchonReport)> {
    let chart = metric.chart();
    let n = chart.complex_dim();
    if n < 2 {
        return Err(Error::InvalidParameter("Gauduchon projection needs complex dimension ≥ 2".into()));
    }
    let len = chart.len();
    let op = ChernLaplacian::from_metric(metric);
    let sigma = config.shift;
    let apply = |w: &[f64]| -> Vec<f64> {
        let mean = w.iter().sum::<f64>() / len as f64;
        op.apply_transpose_slice(w).into_iter().map(|v| v + sigma * mean).collect()
    };
    let precondition = |r: &[f64]| op.precondition(r, |k| if k == 0 { sigma } else { 0.0 });
    let ones = vec![1.0; len];

    let mut w = vec![1.0 / sigma; len];
    let mut iterations = 0;
    loop {
        let ltw = op.apply_transpose_slice(&w);
        let residual = norm(&ltw) / norm(&w);
        if residual <= config.tolerance {
            break;
        }
        if iterations >= config.max_iterations {
            return Err(Error::NoConvergence {
                what: "Gauduchon projection",
                iterations,
                residual,
            });
        }
        let aw = apply(&w);
        let r: Vec<f64> = ones.iter().zip(&aw).map(|(a, b)| a - b).collect();
        let out = gmres(
            apply,
            precondition,
            &r,
            None,
            KrylovConfig {
                tolerance: 1e-13,
                restart: 80,
                max_iterations: config.max_iterations - iterations,
                absolute_tolerance: 0.0,
            },
        );
        iterations += out.iterations.max(1);
        for (wi, d) in w.iter_mut().zip(&out.solution) {
            *wi += d;
        }
        if !out.converged && out.relative_residual > 0.5 {
            // stagnating; let the outer check decide once more, then give up
            let ltw = op.apply_transpose_slice(&w);
            let res = norm(&ltw) / norm(&w);
            if res > config.tolerance {
                return Err(Error::NoConvergence {
                    what: "Gauduchon projection",
                    iterations,
                    residual: res,
                });
            }
        }
    }

    let ltw = op.apply_transpose_slice(&w);
    let kernel_eigenvalue = dot(&w, &ltw) / dot(&w, &w);
    let rho = metric.measure_density();
    let v: Vec<f64> = w.iter().zip(rho.values()).map(|(a, r)| a / r).collect();
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if vmin <= 0.0 {
        return Err(Error::KernelSign { min: vmin, max: vmax });
    }

    // η = φ ω with φ = v^{1/(n−1)}, i.e. potential −(n/2) ln φ before volume normalization
    let nf = n as f64;
    let raw = ScalarField::new(
        chart,
        v.iter().map(|vi| -0.5 * nf * vi.ln() / (nf - 1.0)).collect(),
    )?;
    let unnormalized = metric.conformal_rescale(&raw.scale(-1.0));
    let volume = unnormalized.volume();
    let potential = raw.shift(0.5 * volume.ln());
    let eta = metric.conformal_rescale(&potential.scale(-1.0));

    let (gauduchon, balanced) = gauduchon_residual(&eta);
    let report = GauduchonReport {
        iterations,
        gauduchon_residual: gauduchon,
        balanced_residual: balanced,
        kernel_eigenvalue,
        positivity_margin: vmin / vmax,
        input_residual: gauduchon_residual(metric).0,
    };
    Ok((eta, potential, report))
}

/// Everything needed to pose the constant Chern scalar curvature problem in the
/// conformal class of `base`, expressed on its unit-volume Gauduchon representative.
#[derive(Clone, Debug)]
pub struct ConformalInstance {
    pub base: HermitianMetricField,
    pub gauduchon: HermitianMetricField,
    /// `S^Ch(η)`.
    pub scalar: ScalarField,
    /// Lee form of `η`.
    pub lee: OneFormField,
    /// Lebesgue density of `dμ_η`.
    pub measure: ScalarField,
    /// `g` with `η = e^{−2g/n} ω`.
    pub potential: ScalarField,
    /// `Γ = ∫ S^Ch(η) dμ_η`.
    pub degree: f64,
    pub report: GauduchonReport,
}

/// Projects to the Gauduchon representative and evaluates its curvature data and degree.
pub fn gauduchon_degree(metric: &HermitianMetricField) -> Result<ConformalInstance> {
    let (_, potential, report) = gauduchon_project_with(metric, ProjectionConfig::default())?;
    ConformalInstance::assemble(metric.clone(), potential, report)
}

impl ConformalInstance {
    fn assemble(base: HermitianMetricField, potential: ScalarField, report: GauduchonReport) -> Result<Self> {
        let gauduchon = base.conformal_rescale(&potential.scale(-1.0));
        let scalar = chern_scalar(&gauduchon);
        let lee = lee_form(&gauduchon)?;
        let measure = gauduchon.measure_density();
        let degree = integrate(&scalar, &gauduchon);
        Ok(Self {
            base,
            gauduchon,
            scalar,
            lee,
            measure,
            potential,
            degree,
            report,
        })
    }

    pub fn complex_dim(&self) -> usize {
        self.base.complex_dim()
    }

    /// Recomputes `∫ S^Ch(η) dμ_η` from the stored representative.
    pub fn recompute_degree(&self) -> f64 {
        integrate(&chern_scalar(&self.gauduchon), &self.gauduchon)
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            version: 1,
            base: FieldDocument::from_metric(&self.base),
            potential: FieldDocument::from_scalar(&self.potential),
            degree: self.degree,
            report: self.report.clone(),
        }
    }

    /// Rebuilds the instance from its stored base metric and potential.
    pub fn from_document(doc: &InstanceDocument) -> Result<Self> {
        if doc.version != 1 {
            return Err(Error::Format(format!("unsupported instance version {}", doc.version)));
        }
        let base = doc.base.to_metric()?;
        let potential = doc.potential.to_scalar()?;
        if potential.chart() != base.chart() {
            return Err(Error::ChartMismatch);
        }
        Self::assemble(base, potential, doc.report.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InstanceDocument = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_document(&doc)
    }
}

/// Serialized form of a [`ConformalInstance`]; derived fields are recomputed on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub version: u32,
    pub base: FieldDocument,
    pub potential: FieldDocument,
    pub degree: f64,
    pub report: GauduchonReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chern::forms::chern_laplacian;
    use crate::geometry::GridChart;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn perturbed(chart: &GridChart) -> HermitianMetricField {
        HermitianMetricField::from_fn(chart, |x| {
            let a = 0.25 * (2.0 * PI * x[0]).cos() + 0.1 * (2.0 * PI * (x[1] + x[3])).sin();
            let b = Complex64::new(0.15 * (2.0 * PI * x[2]).sin(), 0.1 * (2.0 * PI * x[1]).cos());
            vec![
                Complex64::new(1.0 + a, 0.0),
                b,
                b.conj(),
                Complex64::new(1.0 - 0.5 * a, 0.0),
            ]
        })
        .unwrap()
    }

    #[test]
    fn kahler_input_is_only_rescaled() {
        let chart = GridChart::new(2, 8).unwrap();
        let m = HermitianMetricField::flat(&chart, 2.0).unwrap();
        let (eta, report) = gauduchon_project(&m).unwrap();
        assert!((eta.volume() - 1.0).abs() < 1e-12);
        let c = 1.0 / m.volume().sqrt();
        for p in 0..chart.len() {
            assert!((eta.matrix(p)[0].re - 2.0 * c).abs() < 1e-12);
        }
        assert!((report.positivity_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conformally_flat_class_recovers_flat_representative() {
        let chart = GridChart::new(2, 16).unwrap();
        let f = ScalarField::from_fn(&chart, |x| 0.2 * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[3]).cos());
        let m = HermitianMetricField::flat(&chart, 1.0).unwrap().conformal_rescale(&f);
        let (_, g, _) = gauduchon_project_with(&m, ProjectionConfig::default()).unwrap();
        // η = e^{−2g/n} e^{2f/n} I must be constant, so g − f is constant
        let diff = g.sub(&f);
        assert!(diff.max() - diff.min() < 1e-8);
    }

    #[test]
    fn projection_kills_the_residual_and_gives_zero_degree() {
        let chart = GridChart::new(2, 8).unwrap();
        let m = perturbed(&chart);
        let inst = gauduchon_degree(&m).unwrap();
        assert!(inst.report.input_residual > 1e-3);
        assert!(inst.report.gauduchon_residual < 1e-6 * inst.report.input_residual);
        assert!(inst.report.balanced_residual > 1e-4);
        assert!(inst.degree.abs() < 1e-8, "{}", inst.degree);
        assert!((inst.gauduchon.volume() - 1.0).abs() < 1e-10);
        // ∫ Δ^Ch_η f dμ_η = 0
        let f = ScalarField::from_fn(&chart, |x| (2.0 * PI * (x[0] - x[2])).sin() + (2.0 * PI * x[1]).cos());
        assert!(integrate(&chern_laplacian(&inst.gauduchon, &f), &inst.gauduchon).abs() < 1e-8);
        assert!((inst.recompute_degree() - inst.degree).abs() < 1e-10);
    }

    #[test]
    fn degree_is_scale_invariant_and_instances_roundtrip() {
        let chart = GridChart::new(2, 8).unwrap();
        let m = perturbed(&chart);
        let a = gauduchon_degree(&m).unwrap();
        let b = gauduchon_degree(&m.scaled(3.0)).unwrap();
        assert!((a.degree - b.degree).abs() < 1e-8);
        let back = ConformalInstance::from_json(&a.to_json()).unwrap();
        assert!((back.degree - a.degree).abs() < 1e-10);
        assert_eq!(back.potential.values(), a.potential.values());
    }
}
