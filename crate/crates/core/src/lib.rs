//! Numerical solver and verification harness for p-Laplacian evolution
//! equations with a nonlocal source, gradient terms, reaction and absorption.
//!
//! - [`model`]: parameters, domains, standing assumptions, regime classifier
//! - [`analytic`]: explicit blow-up sub-solution and global super-solution
//! - [`solver`]: finite-difference method of lines with adaptive explicit steps
//! - [`blowup`]: blow-up time extrapolation
//! - [`harness`]: comparison, blow-up and boundedness experiments

pub mod analytic;
pub mod blowup;
pub mod error;
pub mod harness;
pub mod model;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use model::{classify_regime, validate, DomainSpec, ProblemParams, RegimeTag, RegimeVerdict};
