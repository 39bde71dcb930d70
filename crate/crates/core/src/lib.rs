pub mod adversaries;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod lowerbound;
pub mod regularity;
pub mod rng;

pub use error::{Error, Result};
