use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::real::BigReal;

/// Complex number with big-float parts at the working precision.
#[derive(Clone, PartialEq)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> Self {
        BigComplex { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigReal::zero(), BigReal::zero())
    }

    pub fn one() -> Self {
        Self::new(BigReal::one(), BigReal::zero())
    }

    pub fn i() -> Self {
        Self::new(BigReal::zero(), BigReal::one())
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Self::new(BigReal::from_f64(re), BigReal::from_f64(im))
    }

    pub fn from_real(re: BigReal) -> Self {
        Self::new(re, BigReal::zero())
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_real(BigReal::from_i64(v))
    }

    /// r·e^{iθ}.
    pub fn from_polar(r: &BigReal, theta: &BigReal) -> Self {
        Self::new(r * &theta.cos(), r * &theta.sin())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> BigReal {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> BigReal {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr().sqrt()
    }

    /// |z| rounded so that it is never below the true modulus.
    pub fn abs_upper(&self) -> BigReal {
        self.abs().inflate(4)
    }

    /// Cheap modulus estimate in f64 log2 terms (max(|re|,|im|) within √2).
    pub fn log2_abs(&self) -> f64 {
        let a = self.re.log2_abs();
        let b = self.im.log2_abs();
        let hi = a.max(b);
        if hi == f64::NEG_INFINITY {
            return hi;
        }
        let lo = a.min(b);
        hi + 0.5 * (1.0 + (2f64).powf(2.0 * (lo - hi))).log2()
    }

    pub fn arg(&self) -> BigReal {
        BigReal::atan2(&self.im, &self.re)
    }

    pub fn scale(&self, s: &BigReal) -> Self {
        Self::new(&self.re * s, &self.im * s)
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        Self::new(&self.re / &d, -(&self.im / &d))
    }

    pub fn powi(&self, n: usize) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// e^z.
    pub fn exp(&self) -> Self {
        Self::from_polar(&self.re.exp(), &self.im)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn rounded(&self) -> Self {
        Self::new(self.re.rounded(), self.im.rounded())
    }

    /// a·b + c with a single temporary.
    pub fn mul_add(&self, b: &Self, c: &Self) -> Self {
        let re = &self.re * &b.re - &self.im * &b.im + &c.re;
        let im = &self.re * &b.im + &self.im * &b.re + &c.im;
        Self::new(re, im)
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} {} {:?}i)", self.re, if self.im.is_negative() { "-" } else { "+" }, self.im.abs())
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = f.precision().unwrap_or(8);
        write!(f, "{}{}{}i", self.re.to_decimal(d), if self.im.is_negative() { "-" } else { "+" }, self.im.abs().to_decimal(d))
    }
}

impl Add<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        BigComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        BigComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        if self.im.is_zero() && rhs.im.is_zero() {
            return BigComplex::from_real(&self.re * &rhs.re);
        }
        BigComplex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn div(self, rhs: &BigComplex) -> BigComplex {
        if rhs.im.is_zero() {
            return BigComplex::new(&self.re / &rhs.re, &self.im / &rhs.re);
        }
        // Smith's algorithm keeps intermediate magnitudes tame.
        if rhs.re.abs() >= rhs.im.abs() {
            let t = &rhs.im / &rhs.re;
            let d = &rhs.re + &(&rhs.im * &t);
            BigComplex::new(
                (&self.re + &(&self.im * &t)) / &d,
                (&self.im - &(&self.re * &t)) / &d,
            )
        } else {
            let t = &rhs.re / &rhs.im;
            let d = &(&rhs.re * &t) + &rhs.im;
            BigComplex::new(
                (&(&self.re * &t) + &self.im) / &d,
                (&(&self.im * &t) - &self.re) / &d,
            )
        }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: &BigComplex) -> BigComplex {
                (&self).$m(rhs)
            }
        }
        impl $tr<BigComplex> for &BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                self.$m(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-&self.re, -&self.im)
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_f64() {
        let a = BigComplex::from_f64(1.5, -2.0);
        let b = BigComplex::from_f64(-0.25, 3.0);
        let close = |z: BigComplex, re: f64, im: f64| {
            let (x, y) = z.to_f64();
            assert!((x - re).abs() < 1e-13 && (y - im).abs() < 1e-13, "{x} {y} vs {re} {im}");
        };
        close(&a * &b, 1.5 * -0.25 + 6.0, 4.5 + 0.5);
        let q = &a / &b;
        close(&q * &b, 1.5, -2.0);
        close(a.recip() * &a, 1.0, 0.0);
        close(a.powi(3), (&a * &a * &a).re.to_f64(), (&a * &a * &a).im.to_f64());
    }

    #[test]
    fn modulus_and_argument() {
        let z = BigComplex::from_f64(3.0, 4.0);
        assert_eq!(z.abs().to_f64(), 5.0);
        assert!(z.abs_upper() >= z.abs());
        assert!((z.log2_abs() - 5f64.log2()).abs() < 1e-12);
        assert!((BigComplex::from_f64(0.0, -1.0).arg().to_f64() + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
