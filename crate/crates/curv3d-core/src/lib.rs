pub mod classify;
pub mod counting;
pub mod error;
pub mod expr;
pub mod frames;
pub mod gf;
pub mod invariants;
pub mod jet;
pub mod scalar;
pub mod tensor;

pub use error::{CurvError, Result};
