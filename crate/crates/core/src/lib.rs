pub mod cosmofluid;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod io;
pub mod paperlab;
pub mod tensor;

pub use error::{Error, Result};
