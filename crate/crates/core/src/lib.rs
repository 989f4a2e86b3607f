pub mod calculus;
pub mod diffpoly;
pub mod error;
pub mod falsifier;
pub mod gamma;
pub mod intpoly;
pub mod padic;

pub use error::{Error, Result};
pub use gamma::GammaEvaluator;
pub use intpoly::IntPolynomial;
pub use padic::{PadicNumber, Prime};
