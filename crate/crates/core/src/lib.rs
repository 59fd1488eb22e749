pub mod coder;
pub mod context;
pub mod corpus;
pub mod dictionary;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod report;
pub mod transform;

pub use error::{Error, Result};
