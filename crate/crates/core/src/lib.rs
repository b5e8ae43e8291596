//! Exact and numerical tools for K2 symbols on curves cut out by `lambda * prod L_{i,j} = 1`,
//! where the `L_{i,j}` are groups of parallel affine lines.

pub mod arith;
pub mod canonical;
pub mod cli;
pub mod config;
pub mod error;
pub mod models;
pub mod numerics;
pub mod regulator;
pub mod symbols;
pub mod tame;

pub use arith::{Embedding, ExactScalar, Rational};
pub use config::{IntersectionPoint, LineConfiguration, LineGroup, LineId, Parameter};
pub use error::{Error, Result};
