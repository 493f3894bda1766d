use serde::{Deserialize, Serialize};

use crate::chern::{ChernLaplacian, ConformalInstance};
use crate::error::{Error, Result};
use crate::geometry::{integrate_density, GridChart, HermitianMetricField, OneFormField, ScalarField};

/// Balanced residual below which a base metric is treated as balanced.
pub const BALANCED_TOLERANCE: f64 = 1e-8;

/// The equation `Δ^Ch f + S = λ e^{2f/n}` on a working metric `ω_p = e^{2p/n} η`,
/// with the normalization `∫ e^{2(f+p)/n} dμ_η = 1`.
///
/// The working metric starts as the Gauduchon representative `η` (`p = 0`) and changes
/// only through [`ChernYamabeProblem::rebased`]. Synthetic problems carry a prescribed
/// `S` together with the flat unit-volume metric `½·I`, whose Chern Laplacian is the
/// negative Euclidean Laplacian.
#[derive(Clone, Debug)]
pub struct ChernYamabeProblem {
    pub metric: HermitianMetricField,
    pub laplacian: ChernLaplacian,
    pub scalar: ScalarField,
    /// Lebesgue density of `dμ` of the working metric.
    pub measure: ScalarField,
    /// Lebesgue density `e^{2p/n} ρ_η` of the normalization constraint.
    pub constraint_weight: ScalarField,
    /// `p` with working metric `e^{2p/n} η`.
    pub base_potential: ScalarField,
    /// Lee form of the working metric.
    pub lee: OneFormField,
    pub lambda: f64,
    /// Gauduchon degree `Γ = ∫ S^Ch(η) dμ_η` (the weighted mean of `S` for synthetic data).
    pub degree: f64,
    pub synthetic: bool,
    pub balanced: bool,
}

/// One row of a solver or flow trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Continuation parameter or flow time.
    pub t: f64,
    pub residual: f64,
    pub f_sup: f64,
    pub functional: Option<f64>,
    /// `min e^{2f/n} − lower bound` (negative means violation).
    pub lower_margin: Option<f64>,
    /// `upper bound − max e^{2f/n}` (negative means violation).
    pub upper_margin: Option<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SolverSolution {
    /// Normalized conformal potential relative to the working metric.
    pub f: ScalarField,
    /// Normalized constant curvature.
    pub lambda: f64,
    /// `‖Δ^Ch f + S − λ e^{2f/n}‖_∞`.
    pub residual: f64,
    /// `|∫ e^{2f/n} w − 1|`.
    pub constraint_defect: f64,
    /// Constant `c` added by the normalization; the raw solution is `f − c` with `λ e^{2c/n}`.
    pub normalization_shift: f64,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub bound_violations: usize,
    pub max_bound_violation: f64,
}

impl SolverSolution {
    pub fn unnormalized_f(&self) -> ScalarField {
        self.f.shift(-self.normalization_shift)
    }

    pub fn unnormalized_lambda(&self, n: usize) -> f64 {
        self.lambda * (2.0 * self.normalization_shift / n as f64).exp()
    }
}

impl ChernYamabeProblem {
    /// Problem on the Gauduchon representative of an instance; `λ` defaults to `Γ`.
    pub fn from_instance(instance: &ConformalInstance, lambda: Option<f64>) -> Result<Self> {
        let degree = instance.degree;
        let lambda = lambda.unwrap_or(degree);
        if degree.abs() > 1e-8 && lambda * degree <= 0.0 {
            return Err(Error::Sign(format!(
                "λ = {lambda} must share the sign of the Gauduchon degree {degree}"
            )));
        }
        let chart = instance.gauduchon.chart();
        Ok(Self {
            metric: instance.gauduchon.clone(),
            laplacian: ChernLaplacian::from_metric(&instance.gauduchon),
            scalar: instance.scalar.clone(),
            measure: instance.measure.clone(),
            constraint_weight: instance.measure.clone(),
            base_potential: ScalarField::zeros(chart),
            lee: instance.lee.clone(),
            lambda,
            degree,
            synthetic: false,
            balanced: instance.report.balanced_residual < BALANCED_TOLERANCE,
        })
    }

    /// Prescribed-curvature problem on the flat unit-volume torus; `λ` defaults to the mean of `S`.
    pub fn synthetic(scalar: ScalarField, lambda: Option<f64>) -> Result<Self> {
        let chart = scalar.chart().clone();
        if chart.periods().iter().any(|p| (p - 1.0).abs() > 0.0) {
            return Err(Error::InvalidParameter("synthetic problems live on the unit torus".into()));
        }
        let metric = HermitianMetricField::flat(&chart, 0.5)?;
        let measure = ScalarField::constant(&chart, 1.0);
        let degree = integrate_density(&scalar, &measure);
        Ok(Self {
            laplacian: ChernLaplacian::flat(&chart, 0.5),
            metric,
            scalar,
            constraint_weight: measure.clone(),
            measure,
            base_potential: ScalarField::zeros(&chart),
            lee: OneFormField::zeros(&chart),
            lambda: lambda.unwrap_or(degree),
            degree,
            synthetic: true,
            balanced: true,
        })
    }

    pub fn chart(&self) -> &GridChart {
        self.scalar.chart()
    }

    pub fn complex_dim(&self) -> usize {
        self.chart().complex_dim()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    /// Moves the working metric to `e^{2u/n} ω_p`, transforming `S`, `Δ^Ch` and the measures.
    pub fn rebased(&self, u: &ScalarField) -> Self {
        let n = self.complex_dim() as f64;
        let inv = u.map(|v| (-2.0 * v / n).exp());
        let lu = self.laplacian.apply(u);
        let scalar = self.scalar.add(&lu).mul(&inv);
        Self {
            metric: self.metric.conformal_rescale(u),
            laplacian: self.laplacian.scaled_pointwise(&inv),
            scalar,
            measure: self.measure.zip_map(u, |r, v| r * (2.0 * v).exp()),
            constraint_weight: self.constraint_weight.zip_map(u, |r, v| r * (2.0 * v / n).exp()),
            base_potential: self.base_potential.add(u),
            lee: crate::chern::lee_form(&self.metric.conformal_rescale(u)).unwrap_or_else(|_| self.lee.clone()),
            lambda: self.lambda,
            degree: self.degree,
            synthetic: self.synthetic,
            balanced: self.balanced && u.max() - u.min() == 0.0,
        }
    }

    /// `Δ^Ch f + S − λ e^{2f/n}`.
    pub fn residual_field(&self, f: &ScalarField, lambda: f64) -> ScalarField {
        let n = self.complex_dim() as f64;
        let lf = self.laplacian.apply(f);
        let rhs = f.map(|v| lambda * (2.0 * v / n).exp());
        lf.add(&self.scalar).sub(&rhs)
    }

    /// `S^Ch(e^{2f/n} ω_p) = e^{−2f/n}(S + Δ^Ch f)`.
    pub fn conformal_scalar(&self, f: &ScalarField) -> ScalarField {
        let n = self.complex_dim() as f64;
        self.laplacian.apply(f).add(&self.scalar).zip_map(f, |s, v| s * (-2.0 * v / n).exp())
    }

    /// `∫ e^{2f/n} w`.
    pub fn constraint_integral(&self, f: &ScalarField) -> f64 {
        let n = self.complex_dim() as f64;
        integrate_density(&f.map(|v| (2.0 * v / n).exp()), &self.constraint_weight)
    }

    /// Shift `c = −(n/2) ln ∫ e^{2f/n} w` enforcing the normalization.
    pub fn normalization_shift(&self, f: &ScalarField) -> f64 {
        -0.5 * self.complex_dim() as f64 * self.constraint_integral(f).ln()
    }

    /// Normalizes a raw solution of `Δ^Ch f + S = λ e^{2f/n}` and assembles the report.
    pub(crate) fn finish(
        &self,
        raw: &ScalarField,
        raw_lambda: f64,
        trace: Vec<TraceRow>,
        iterations: usize,
        bound_violations: usize,
        max_bound_violation: f64,
    ) -> SolverSolution {
        let n = self.complex_dim() as f64;
        let c = self.normalization_shift(raw);
        let f = raw.shift(c);
        let lambda = raw_lambda * (-2.0 * c / n).exp();
        SolverSolution {
            residual: self.residual_field(&f, lambda).sup_norm(),
            constraint_defect: (self.constraint_integral(&f) - 1.0).abs(),
            f,
            lambda,
            normalization_shift: c,
            trace,
            iterations,
            bound_violations,
            max_bound_violation,
        }
    }
}
