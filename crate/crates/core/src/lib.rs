pub mod benchmarking;
pub mod budget;
pub mod cli;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod model;
pub mod operators;
pub mod pulses;

pub use error::{Error, Result};
