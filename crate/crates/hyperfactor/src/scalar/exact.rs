use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{BigComplex, BigReal};

/// Gaussian rational a + bi with exact arithmetic; the scalar of exact test mode.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl QComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        QComplex { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    pub fn real(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Exact value of a big-float complex (both parts are dyadic rationals).
    pub fn from_big(z: &BigComplex) -> Self {
        Self::new(z.re.to_rational(), z.im.to_rational())
    }

    /// Rounds to the working precision.
    pub fn to_big(&self) -> BigComplex {
        BigComplex::new(BigReal::from_rational(&self.re), BigReal::from_rational(&self.im))
    }

    /// max(|re|, |im|), a cheap exact magnitude proxy within √2 of |z|.
    pub fn max_part(&self) -> BigRational {
        let a = self.re.abs();
        let b = self.im.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    /// Height used by enumerations: max of |numerators| and denominators.
    pub fn height(&self) -> BigInt {
        let parts = [self.re.numer().abs(), self.re.denom().clone(), self.im.numer().abs(), self.im.denom().clone()];
        parts.into_iter().max().unwrap()
    }
}

impl fmt::Debug for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl super::Field for QComplex {
    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn sub(&self, o: &Self) -> Self {
        Self::new(&self.re - &o.re, &self.im - &o.im)
    }
    fn mul(&self, o: &Self) -> Self {
        Self::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
    fn div(&self, o: &Self) -> Self {
        let d = o.norm_sqr();
        let n = self.mul(&o.conj());
        Self::new(n.re / &d, n.im / &d)
    }
    fn neg(&self) -> Self {
        Self::new(-self.re.clone(), -self.im.clone())
    }
    fn from_i64(v: i64) -> Self {
        Self::from_ints(v, 0)
    }
}
