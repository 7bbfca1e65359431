//! High-precision q-series toolkit.
//!
//! The crate evaluates q-Pochhammer products, basic hypergeometric series
//! (generic `r phi s`, the terminating very-well-poised balanced `10 phi 9`
//! and the very-well-poised `8 phi 7`), the three-term recurrence they
//! satisfy, and a family of continued fractions whose values are ratios of
//! those series. Every identity is certified numerically by residual checks
//! in [`verify`], and [`cli`] wraps the checks in a command-line report.
//!
//! All scalars are [`rug::Complex`] values at a caller-chosen precision.

pub mod cli;
pub mod contfrac;
pub mod error;
pub mod hyperq;
pub mod qcore;
pub mod recurrence;
pub mod report;
pub mod sample;
pub mod verify;

pub use error::QError;
pub use qcore::{HPComplex, QContext};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QError>;
