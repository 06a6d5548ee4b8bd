//! Energetics of second-order structured deformations.
//!
//! Discrete cellwise-polynomial fields, energy densities and their
//! hypothesis checks, explicit approximating constructions, the initial
//! energy, bracketed estimates of the four relaxed cell formulas, and the
//! assembled relaxed energy.

pub mod app;
pub mod assembly;
pub mod cellformulas;
pub mod constructions;
pub mod densities;
pub mod energy;
pub mod error;
pub mod example_tr;
pub mod fields;
pub mod quadrature;
pub mod tensor;

pub use error::{Error, Result};
