//! Lifted supermodular inequalities for rank-one quadratics with indicator variables.
//!
//! The crate covers the projected set function `g_α`, the hull of its
//! epigraph, closed-form lifted cuts with their separation routines,
//! conic templates for the cuts, a relaxation solver and a small
//! portfolio benchmark.

pub mod conic_ir;
pub mod core_types;
pub mod discrete_hull;
pub mod error;
pub mod experiments;
pub mod lifted_cuts;
pub mod oracles;
pub mod relaxation_solver;
pub mod set_function;
pub mod suites;

pub use error::{Error, Result};
