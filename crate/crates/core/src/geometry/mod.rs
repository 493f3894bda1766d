//! Discrete complex tori: grids, fields, spectral calculus, metrics and integration.

pub mod chart;
pub mod chart_point;
pub mod field;
pub mod forms;
pub mod metric;
pub mod ops;
pub mod serial;
pub mod spectral;

pub use chart::GridChart;
pub use chart_point::ChartPointSample;
pub use field::{pairwise_sum, ComplexField, OneFormField, ScalarField};
pub use metric::HermitianMetricField;
pub use ops::{hodge_laplacian, integrate, integrate_density, pairing_1forms};
pub use serial::{FieldDocument, FieldHeader, FieldKind};
pub use spectral::{band_limit_warning, c2_norm, gradient, spectral_derivative};
