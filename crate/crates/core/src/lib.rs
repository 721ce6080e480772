//! Boundary control of quantum graphs.
//!
//! Metric graphs with self-adjoint vertex conditions, gauge maps between
//! quasi-δ and magnetic δ-type systems, finite element assembly, time
//! propagation and controllability tooling for the resulting bilinear systems.

pub mod error;
pub mod linalg;
pub mod sparse;
pub mod graph;
pub mod extensions;
pub mod gauge;
pub mod assembly;
pub mod propagation;
pub mod control;
pub mod io;

pub use error::{Error, Result};
