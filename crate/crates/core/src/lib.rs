pub mod error;
pub mod frozen;
pub mod io;
pub mod lattice;
pub mod macro_model;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
