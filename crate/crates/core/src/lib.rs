//! Entropy-stable nodal DG spectral element solver for the 2D shallow water
//! equations on curvilinear quadrilateral meshes with wetting and drying.

pub mod bench;
pub mod config;
pub mod dg;
pub mod error;
pub mod fluxes;
pub mod kernels;
pub mod mesh;
pub mod operators1d;
pub mod output;
pub mod physics;
pub mod positivity;
pub mod real;
pub mod scenarios;
pub mod timeloop;
pub mod viscosity;

pub use error::{Result, SweError};
pub mod validate;
