//! Directional and maximal directional Hilbert transforms on periodic grids,
//! geometric cell covers of direction sets, and certificate trees for
//! operator-norm upper bounds built from almost-orthogonality.
//!
//! The crate is `no_std` and only needs `alloc`. FFT backends, file formats
//! and the command line live in the `mdht` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod certifier;
pub mod directions;
pub mod error;
pub mod geometry;
pub mod probe;
pub mod rational;
pub mod spectral;

pub use directions::{DirectionSet, GrowthSchedule};
pub use error::{Error, Result};
pub use rational::Rational;
