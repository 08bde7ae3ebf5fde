//! Densities of Singer cycles in GL_n(q), certified limiting constants,
//! ensemble averages and empirical distribution functions.

pub mod acceptance;
pub mod arith;
pub mod constants;
pub mod context;
pub mod distribution;
pub mod ensembles;
pub mod error;
pub mod rational;
pub mod singer;

pub use context::{Context, Limits};
pub use error::{Error, Result};
