//! Numerical study of Fourier-transform decay for measures carried by convex
//! hypersurfaces, and of the lattice-point counting consequences.
//!
//! The crate is organized around three pipelines that share a common surface
//! catalog:
//!
//! * geometry: support minima, slab (cap) measures, dyadic slab sums, maximal
//!   slab profiles and power-law fits;
//! * oscillatory: deterministic panel quadrature for surface-measure Fourier
//!   transforms on graph patches, carved patches, and closed bodies;
//! * lattice: exact integer-point counts of dilated bodies and discrepancy
//!   exponents.
//!
//! The `checks` module ties the first two together (ratio sweeps over
//! direction × frequency grids) and `experiment` exposes every pipeline as a
//! named, config-driven run for the CLI.

pub mod checks;
pub mod experiment;
pub mod geometry;
pub mod lattice;
pub(crate) mod linalg;
pub mod oscillatory;
pub mod surface;

/// Crate-wide error type. Variants mirror the ways a caller can leave the
/// supported domain rather than implementation failures, which panic.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid direction: {0}")]
    Direction(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unknown catalog name: {0}")]
    UnknownName(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
