use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid obstacle shape: {0}")]
    InvalidShape(String),

    #[error("clearance violation: {0}")]
    Clearance(String),

    #[error("invalid deformation field: {0}")]
    InvalidDeformation(String),

    #[error("mesh tangled: triangle {triangle} has signed area {area:.3e}")]
    MeshTangled { triangle: usize, area: f64 },

    #[error("orientation reversal: det(m') = {det:.3e} at triangle {triangle}")]
    OrientationReversal { triangle: usize, det: f64 },

    #[error("mesh generation failed: {0}")]
    Meshing(String),

    #[error("linear solver failed: {reason} (relative residual {residual:.3e} after {refinements} refinement steps)")]
    Solver {
        reason: String,
        residual: f64,
        refinements: usize,
    },

    #[error("eigen-iteration did not converge after {iterations} iterations (last change {last_change:.3e})")]
    EigenNotConverged { iterations: usize, last_change: f64 },

    #[error("observation arc is empty")]
    EmptyGamma,

    #[error("mismatched traces: {0}")]
    MismatchedTraces(String),

    #[error("sample point ({x:.6}, {y:.6}) lies outside the mesh")]
    PointOutsideMesh { x: f64, y: f64 },

    #[error("step collapse: no feasible shape update after {halvings} halvings")]
    StepCollapse { halvings: usize },

    #[error("regime unresolved: {valid} samples above the noise floor, need at least {required}")]
    RegimeUnresolved { valid: usize, required: usize },

    #[error("fixed-point iteration diverged: {0}")]
    FixedPointDivergence(String),

    #[error("gradient vanishes at the weight center")]
    GradientVanishes,

    #[error("weighted integral underflow: {0}")]
    Underflow(String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),
}
