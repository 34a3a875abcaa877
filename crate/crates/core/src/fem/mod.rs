//! P1 finite elements for the coupled system, its adjoint and its transported form.

pub mod assembly;
pub mod coefficients;
pub mod data;
pub mod eigen;
pub mod export;
pub mod quadrature;
pub mod solve;

pub use assembly::{assemble, DiscreteSystem};
pub use coefficients::{certify, check_admissibility, Admissibility, CoefficientSet};
pub use data::{BoundaryData, FieldPair, ScalarMap, Sources};
pub use eigen::poincare_constant;
pub use solve::{
    h1_seminorm, l2_error_against, l2_norm, relative_l2_difference, solve_adjoint, solve_dirichlet, solve_forward, solve_pullback, solve_with_load,
    PullbackSolution,
};
