use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {min} cells, got {cells}")]
    TooFewCells { cells: usize, min: usize },
    #[error("grading exponent must be finite and >= 1, got {0}")]
    Grading(f64),
    #[error("grid nodes not strictly increasing at index {index}")]
    Degenerate { index: usize },
    #[error("expected {expected} nodal values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("profile value at r=0 must be 0, got {0}")]
    OriginNotPinned(f64),
    #[error("non-finite profile value at node {0}")]
    NonFinite(usize),
    #[error("profiles live on different grids")]
    GridMismatch,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("coupling mu must be finite, got {0}")]
    Mu(f64),
    #[error("magneto-elastic constant lambda must be finite, got {0}")]
    Lambda(f64),
    #[error("mu = {mu} is inconsistent with lambda = {lambda} (mu must equal lambda^2/2)")]
    Inconsistent { mu: f64, lambda: f64 },
    #[error("tolerance must be finite and positive, got {0}")]
    Tolerance(f64),
    #[error("iteration cap must be positive")]
    MaxIterations,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("inverse iteration did not converge after {iterations} iterations (last Rayleigh quotient {rayleigh})")]
    NotConverged { iterations: usize, rayleigh: f64 },
    #[error("stiffness matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("requested {requested} eigenpairs but the grid only has {available} unknowns")]
    TooManyPairs { requested: usize, available: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BifurcationError {
    #[error("cubic coefficient must be positive, got {0}")]
    NonPositiveCubic(f64),
    #[error("invalid mu range [{lo}, {hi}] with {steps} steps")]
    Range { lo: f64, hi: f64, steps: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldsError {
    #[error("point ({x}, {y}) lies outside the unit disk")]
    OutsideDisk { x: f64, y: f64 },
}

/// Crate-wide error.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Bifurcation(#[from] BifurcationError),
    #[error(transparent)]
    Fields(#[from] FieldsError),
}
