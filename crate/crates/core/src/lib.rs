pub mod cli;
pub mod error;
pub mod fit;
pub mod jet;
pub mod kernel;
pub mod number_theory;
pub mod pde;
pub mod quad;
pub mod scaled;
pub mod spectral;
pub mod synthesis;
pub mod unreachable;
pub mod verify;

pub use error::{Error, Result};
