//! Crossing counts of Pólya walk excursions: exact laws, Monte Carlo
//! estimates, and the harness comparing them.

pub mod analytic;
pub mod chart;
pub mod crossing;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod pmf;
pub mod walk;

pub use error::{Error, Result};
pub use lattice::{LatticeVector, Rational};
pub use pmf::Pmf;
