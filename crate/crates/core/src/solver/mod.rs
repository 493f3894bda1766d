//! Solution procedures for `Δ^Ch f + S = λ e^{2f/n}`: the linear zero-degree solve,
//! the continuity method for negative degree, the parabolic flow, the variational
//! functional, and uniqueness and small-data probes.

pub mod continuity;
pub mod flow;
pub mod functional;
pub mod linear;
pub mod problem;
pub mod small_data;

pub use continuity::{apriori_bounds, continuity_solve, uniqueness_probe, AprioriBounds, ContinuityConfig, UniquenessReport};
pub use flow::{run_flow, FlowConfig, FlowTermination, FlowTrace};
pub use functional::{alpha_form_asymmetry, el_gradient, fstar_gradient, functional_f, functional_fstar, functional_warning};
pub use linear::{negativize, solve_zero_degree};
pub use problem::{ChernYamabeProblem, SolverSolution, TraceRow};
pub use small_data::{small_data_solve, SmallDataConfig, SmallDataOutcome};
