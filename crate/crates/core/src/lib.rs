pub mod cli;
pub mod config;
pub mod distributions;
pub mod error;
pub mod filters;
pub mod fock;
pub mod grid;
pub mod mechanics;
pub mod model;
pub mod sampler;
pub mod validate;

pub use error::{Error, Result};
