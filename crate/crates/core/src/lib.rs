//! Lie point symmetries of scalar evolution equations `u_t = F(x, u, u_x, ...)`.
//!
//! The pipeline runs from a PDE written in a small infix DSL through
//! prolongation and the determining equations to a basis of infinitesimal
//! generators, then classifies the resulting Lie algebra (structure
//! constants, adjoint action, one-dimensional optimal system) and reduces the
//! PDE to ODEs along chosen generators. A verification layer checks candidate
//! solutions exactly and numerically.

pub mod algebra;
pub mod determine;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod optimal;
pub mod presets;
pub mod prolong;
pub mod reduce;
pub mod repro;
pub mod verify;

pub use error::{Error, Result};
