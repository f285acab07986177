//! Covering families of 6-subsets in the Johnson metric.
//!
//! The toolkit builds explicit families of 6-element blocks over `[60]` (and
//! `[2m]`) such that every 6-subset of the ground set meets some block in at
//! least 3 elements, verifies that property exhaustively over all C(n, 6)
//! subsets, computes the sphere-covering lower bound, shrinks families by
//! redundancy pruning and search, and answers trio-coverage queries.

pub mod bounds;
pub mod cli;
pub mod constructions;
pub mod core;
pub mod files;
pub mod optimizer;
pub mod verifier;

pub use crate::core::{binomial, Block, CoreError, Family, Params};
