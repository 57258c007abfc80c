//! Bi-stochastic balancing and structural analysis of origin-destination
//! flow matrices.
//!
//! The pipeline this library supports: load a square non-negative flow
//! matrix ([`flowmatrix`]), scale it doubly stochastic by one of two
//! balancing routes ([`bistochastic`]), then study the result either through
//! threshold digraphs, components, and the descending-threshold hierarchy
//! ([`graphcluster`]) or through its leading eigenvalues ([`spectral`]).
//! [`io`] holds the CSV and binary wire formats.
//!
//! Parallel sections reduce in fixed order, so outputs are bit-identical
//! across thread counts.

pub mod bistochastic;
pub mod dense;
pub mod error;
pub mod flowmatrix;
pub mod graphcluster;
pub mod io;
pub mod spectral;

pub use dense::Dense;
pub use error::{Error, Result};
pub use flowmatrix::{FlowMatrix, FlowRecord, RegionId};
