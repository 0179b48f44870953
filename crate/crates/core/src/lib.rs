pub mod checks;
pub mod error;
pub mod fredholm;
pub mod idpii;
pub mod kernels;
pub mod mc;
pub mod specfun;
pub mod tails;

pub use error::{EdgeError, Result};
