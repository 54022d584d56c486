//! Discrete spherical averages on `Z^d`, their Fourier multipliers, and
//! order-interval maximal norms of matrix-valued fields on finite tori.

// `!(x <= tol)` is the idiom for checks that NaN must fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoff;
pub mod decomposition;
pub mod error;
pub mod gauss;
pub mod lattice;
pub mod multiplier;
pub mod ncmax;
pub mod pilot;
pub mod quadrature;
pub mod survey;
pub mod torus;

pub use error::{Error, Result};
pub use lattice::SphereSpec;
pub use multiplier::TorusPoint;
pub use torus::TorusField;

/// Values frozen from pilot runs, embedded at build time.
pub const PILOT_TABLE: &str = include_str!("../data/pilot.txt");
