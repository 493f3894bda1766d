use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::spectral::spectrum;
use crate::geometry::ScalarField;

use super::functional::functional_f;
use super::problem::{ChernYamabeProblem, TraceRow};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub time_step: f64,
    pub horizon: f64,
    /// Stop once `‖Δ^Ch f + S − λ e^{2f/n}‖_∞` falls below this.
    pub tolerance: f64,
    /// Blow-up is declared when `‖f‖_∞` exceeds this.
    pub blowup_cap: f64,
    /// Keep every `snapshot_every`-th state (plus the first and last).
    pub snapshot_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            time_step: 0.01,
            horizon: 10.0,
            tolerance: 1e-9,
            blowup_cap: 50.0,
            snapshot_every: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowTermination {
    Converged,
    Horizon,
    /// `‖f‖_∞` exceeded the cap or became non-finite; a smaller step may help if the
    /// residual grew from the first steps on.
    BlowUp,
}

#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub snapshots: Vec<(f64, ScalarField)>,
    pub termination: FlowTermination,
    pub final_f: ScalarField,
    pub note: Option<String>,
}

impl FlowTrace {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn functional_values(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.functional).collect()
    }
}

/// Integrates `∂f/∂t = −Δ^Ch f − S + λ e^{2f/n}` by exponential Euler on the averaged
/// constant-coefficient symbol `σ(k)`:
/// `f̂ ← e^{−σΔt} f̂ + (1 − e^{−σΔt})/σ · N̂`, with `N = −(Δ^Ch − L₀) f − S + λ e^{2f/n}`.
/// The scheme is exact for linear problems with constant coefficients and its fixed
/// points are exactly the discrete solutions.
pub fn run_flow(problem: &ChernYamabeProblem, initial: Option<&ScalarField>, config: &FlowConfig) -> FlowTrace {
    let chart = problem.chart();
    let n = problem.complex_dim() as f64;
    let lambda = problem.lambda;
    let dt = config.time_step;
    let op = &problem.laplacian;
    let symbol = op.mean_symbol();
    let decay: Vec<f64> = symbol.iter().map(|s| (-s * dt).exp()).collect();
    let phi: Vec<f64> = symbol
        .iter()
        .zip(&decay)
        .map(|(s, e)| if *s == 0.0 { dt } else { (1.0 - e) / s })
        .collect();

    let mut f = initial.cloned().unwrap_or_else(|| ScalarField::zeros(chart));
    let record = |t: f64, f: &ScalarField, residual: f64| TraceRow {
        t,
        residual,
        f_sup: f.sup_norm(),
        functional: problem.balanced.then(|| functional_f(problem, f)),
        lower_margin: None,
        upper_margin: None,
        iterations: 0,
    };
    let mut t = 0.0;
    let mut residual = problem.residual_field(&f, lambda).sup_norm();
    let mut rows = vec![record(t, &f, residual)];
    let mut snapshots = vec![(t, f.clone())];
    let mut step = 0usize;
    let first_residual = residual;

    let termination = loop {
        if residual < config.tolerance {
            break FlowTermination::Converged;
        }
        if !f.sup_norm().is_finite() || f.sup_norm() > config.blowup_cap || !residual.is_finite() {
            break FlowTermination::BlowUp;
        }
        if t >= config.horizon - 1e-12 {
            break FlowTermination::Horizon;
        }
        let lf = op.apply(&f);
        let l0f = {
            let spec = spectrum(&f);
            let mut out: Vec<Complex64> = spec.iter().zip(symbol).map(|(c, s)| c * s).collect();
            chart.inverse(&mut out);
            out
        };
        let nonlinear: Vec<f64> = (0..chart.len())
            .map(|p| {
                let fv = f.values()[p];
                -(lf.values()[p] - l0f[p].re) - problem.scalar.values()[p] + lambda * (2.0 * fv / n).exp()
            })
            .collect();
        let fs = spectrum(&f);
        let ns = spectrum(&ScalarField::from_vec_unchecked(chart, nonlinear));
        let mut next: Vec<Complex64> = (0..chart.len()).map(|k| fs[k] * decay[k] + ns[k] * phi[k]).collect();
        chart.inverse(&mut next);
        f = ScalarField::from_vec_unchecked(chart, next.into_iter().map(|c| c.re).collect());
        step += 1;
        t = step as f64 * dt;
        residual = problem.residual_field(&f, lambda).sup_norm();
        rows.push(record(t, &f, residual));
        if step % config.snapshot_every.max(1) == 0 {
            snapshots.push((t, f.clone()));
        }
    };
    if snapshots.last().map(|s| s.0) != Some(t) {
        snapshots.push((t, f.clone()));
    }
    let note = (termination == FlowTermination::BlowUp && rows.len() > 1 && rows[1].residual > first_residual)
        .then(|| format!("residual grew from the first step; try a time step below {dt}"));
    FlowTrace {
        rows,
        snapshots,
        termination,
        final_f: f,
        note,
    }
}
