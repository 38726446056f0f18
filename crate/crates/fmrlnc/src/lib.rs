pub mod coding;
pub mod error;
pub mod field;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
