//! Numerical toolkit for k-contact Hamiltonian field theories: chart-level
//! differential calculus, structure checks, Reeb frames, field-equation
//! residuals, a small PDE solver for the model systems, and symmetry tools.

pub mod chart;
pub mod error;
pub mod kcontact;
pub mod models;
pub mod pde;
pub mod symmetry;

pub use error::{Error, Result};
