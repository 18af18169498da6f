//! Capacity-achieving input distributions of constrained channels, the cone
//! geometry around the optimal set, and certified constants for the decay of
//! mutual information away from it.

pub mod divergence;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod special;
pub mod quadrature;
pub mod quantum;
pub mod capacity;
pub mod constants;
pub mod corpus;
pub mod pipeline;
pub mod certify;
pub mod serde_ext;
pub mod spec_file;
pub mod report;
pub mod cli;

pub use error::{Error, Result};
