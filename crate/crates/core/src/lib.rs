pub mod error;
pub mod experiments;
pub mod gates;
pub mod phase;
pub mod quantum;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};
