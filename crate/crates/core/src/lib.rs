//! Memory-structure analysis for linear sequence models: dilated
//! convolutional and recurrent hypothesis classes, the tensor spectrum of a
//! target's representation, and the approximation bounds built on it.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod models;
pub mod sequence;
pub mod svg;
pub mod tensor;

pub use error::{Error, Result};
pub use sequence::{Scalar, Sequence};
pub use tensor::{Spectrum, Tensor};
