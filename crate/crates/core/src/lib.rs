//! Critical numbers of parastatistics and integer partitions.
//!
//! The crate computes the critical number of parts k0(n) for the planar,
//! one-dimensional and fractional-dimension cases, counts and samples
//! partitions exactly to test condensate concentration, and applies the
//! same threshold machinery to debt portfolios and flicker-noise series.

pub mod condensate;
pub mod debt;
pub mod error;
pub mod flicker;
pub mod partitions;
pub mod quadrature;
pub mod rng;
pub mod solver;
pub mod special;
pub mod thresholds;

pub use error::{Error, ErrorKind, Result};
