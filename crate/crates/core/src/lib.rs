pub mod augment;
pub mod ctc;
pub mod dropout;
pub mod error;
pub mod features;
pub mod harness;
mod io_util;
pub mod linalg;
pub mod network;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
