pub mod certificate;
pub mod construction;
pub mod division;
pub mod driver;
pub mod error;
pub mod operator;
pub mod poly;
pub mod presets;
pub mod scalar;

pub use error::{Error, Result};
pub use poly::{Poly, QPoly};
pub use scalar::{BigComplex, BigReal, QComplex};
