//! Scalars: big-float reals and complexes at a thread-local precision, plus
//! exact Gaussian rationals for the exact test mode.

mod complex;
pub mod ctx;
mod exact;
mod real;

pub use complex::BigComplex;
pub use ctx::{precision, scoped_precision, set_precision, with_precision, DEFAULT_PRECISION};
pub use exact::QComplex;
pub use real::BigReal;

/// The field operations polynomial algebra needs from its coefficients.
pub trait Field: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_i64(v: i64) -> Self;
}

impl Field for BigComplex {
    fn zero() -> Self {
        BigComplex::zero()
    }
    fn one() -> Self {
        BigComplex::one()
    }
    fn is_zero(&self) -> bool {
        BigComplex::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        BigComplex::from_i64(v)
    }
}
