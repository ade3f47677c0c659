//! Classical emulation and verification of quantum lattice-Boltzmann
//! algorithms for the advection-diffusion equation.
//!
//! The crate is organised bottom-up:
//!
//! * [`ops`]: matrix-free structured operators, norms, unitary completion.
//! * [`lattice`], [`classical`]: velocity sets, grids and the reference
//!   collide-and-stream solver.
//! * [`marching`]: the compact one-step map on `[ωf; (1−ω)φ]`.
//! * [`encoding`]: block-encodings, their algebra, and the LBM tower.
//! * [`dilation`]: the counter-register time marcher and singular value
//!   amplification.
//! * [`qlsa`]: the global lower-bidiagonal system and its conditioning.
//! * [`gauss`]: Gaussian hill benchmarks.
//! * [`complexity`], [`report`], [`verify`]: query counts, CSV output and
//!   randomised invariant suites.

pub mod classical;
pub mod complexity;
pub mod dilation;
pub mod encoding;
pub mod error;
pub mod gauss;
pub mod lattice;
pub mod marching;
pub mod ops;
pub mod qlsa;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use ops::{PermutationMap, StructuredOperator, C64};
