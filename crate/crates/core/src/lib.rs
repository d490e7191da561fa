//! Numerical laboratory for particles responding linearly to random-phase
//! background-field modes.
//!
//! The crate builds single-particle response functions from a level system and
//! a Hermitian response matrix, checks the bracket and commutator identities
//! they satisfy, extends them to two identical particles sharing one field,
//! and follows the consequences through field-induced covariances, entangled
//! states, exchange parity and the exclusion bound for half-integer spins.

pub mod bipartite;
pub mod covariance;
pub mod error;
pub mod field;
pub mod phase;
pub mod report;
pub mod response;
pub mod scenario;
pub mod spin;
pub mod stats;
pub mod suite;

pub use error::{Error, Result};
