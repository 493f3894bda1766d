//! Chern-geometric operators: Chern Laplacian, scalar curvature, Lee form,
//! Gauduchon residuals and projection, and the Gauduchon degree.

pub mod forms;
pub mod gauduchon;
pub mod laplacian;

pub use forms::{chern_laplacian, chern_laplacian_via_lee, chern_scalar, conformal_rescale, gauduchon_residual, lee_form};
pub use gauduchon::{
    gauduchon_degree, gauduchon_project, gauduchon_project_with, ConformalInstance, GauduchonReport,
    InstanceDocument, ProjectionConfig,
};
pub use laplacian::ChernLaplacian;
