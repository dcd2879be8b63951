//! Standing waves of the NLS equation on star graphs with a delta vertex:
//! index counts of the linearized operators by shooting, a finite-element
//! inertia cross-check, and perturbed dynamics.

// `!(x > 0.0)` deliberately treats NaN as failing the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod export;
pub mod fem;
pub mod grid;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod roots;
pub mod shooting;
pub mod spectral;
pub mod star;
pub mod stationary;
pub mod sweep;

pub use error::{Error, Result};
pub use grid::SweepGrid;
pub use params::{rescale, validate, BranchParams, GraphConfig, ToleranceSet};
