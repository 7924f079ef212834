//! Geodesic metric networks and Hamilton–Jacobi equations on them.
//!
//! The crate is organised bottom-up:
//!
//! - [`metric`]: embedded networks, exact intrinsic distances, fields on
//!   refined node sets and discrete local slopes.
//! - [`spaces`]: prefractals built from iterated function systems (Vicsek,
//!   Sierpiński, Koch), lattice lines, the Y-junction and its meshed tubes.
//! - [`hausdorff`]: sampled Hausdorff distances and an empirical checker for
//!   convergence of intrinsic distances along a sequence of spaces.
//! - [`solvers`]: eikonal, discounted and Hopf–Lax solvers plus a
//!   squared-distance viscosity checker.
//! - [`stability`]: semilimits and convergence reports across a sequence of
//!   spaces.

pub mod error;
pub mod hausdorff;
pub mod metric;
pub mod solvers;
pub mod spaces;
pub mod stability;

pub use error::{Error, Result};
pub use hausdorff::{
    check_h2, hausdorff_distance, sample, H2Options, H2Report, H2Row, SampleCloud, SpaceSequence, Verdict,
};
pub use metric::{
    distance_field, intrinsic_distance, local_slope, manhattan_distance, AmbientMetric, AmbientPoint, Edge,
    MetricNetwork, NetPoint, NodeGraph, ScalarField,
};
pub use solvers::{
    hopf_lax_evolve, solve_discounted, solve_eikonal, viscosity_check, Forcing, HamiltonianSpec, Mode,
    Violation,
};
pub use spaces::{Space, SpaceDescriptor};
pub use stability::{ConvergenceReport, StabilityExperiment};
