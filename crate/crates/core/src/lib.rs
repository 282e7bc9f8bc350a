//! Radially symmetric magneto-elastic disk: discrete energy, linearized
//! eigenproblem, minimization, bifurcation branches and physical fields.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instances.

pub mod bifurcation;
pub mod eigen;
pub mod error;
pub mod fields;
pub mod grid;
pub mod linalg;
pub mod operators;
pub mod profile;
pub mod scalar;
pub mod solver;

pub use bifurcation::{
    cbar, predicted_amplitude, trace_branches, BifurcationDiagram, Branch, BranchPoint,
    DiagramConfig,
};
pub use eigen::{smallest_eigenpair, EigenPair};
pub use error::Error;
pub use fields::{magnetization_at, reconstruct_w, Displacement, FieldSample, MagnetizationField};
pub use grid::RadialGrid;
pub use operators::{energy, euler_residual, fold, gradient, ModelParams};
pub use profile::Profile;
pub use scalar::Scalar;
pub use solver::{minimize, minimize_with, Seed, SolveOptions, SolveReport};

/// Version of this crate, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Grid64 = RadialGrid<f64>;
pub type Profile64 = Profile<f64>;
pub type Params64 = ModelParams<f64>;
pub type EigenPair64 = EigenPair<f64>;
pub type SolveReport64 = SolveReport<f64>;
pub type Diagram64 = BifurcationDiagram<f64>;
pub type Grid32 = RadialGrid<f32>;
pub type Profile32 = Profile<f32>;
pub type Params32 = ModelParams<f32>;
