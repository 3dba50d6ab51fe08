//! Numerical exterior calculus on the Lie algebroid of quasi-periodic paths
//! over a matrix Lie group, with the forms, connections and Chern–Simons
//! constructions that live on it.
//!
//! Everything is evaluated pointwise: a form is a closure taking a base point
//! and a list of sections, and derivatives are Richardson-extrapolated central
//! differences along right-trivialized group directions.

pub mod error;
pub mod lie;
pub mod path;
pub mod algebroid;
pub mod forms;
pub mod atiyah;
pub mod context;
pub mod sampling;
pub mod lifting;
pub mod obstruction;
pub mod bott;
pub mod chern_simons;
pub mod higher;
pub mod fusion;
pub mod pullback;

pub use context::Context;
pub use error::{Error, Result};

/// Dense real matrix (group elements and Lie algebra matrices).
pub type Matrix = nalgebra::DMatrix<f64>;
/// Coefficient vector in a Lie algebra basis.
pub type Vector = nalgebra::DVector<f64>;
