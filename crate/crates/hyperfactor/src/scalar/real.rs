use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Radix, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::ctx::{precision, with_consts, RM};

/// Real number at the thread's working precision.
#[derive(Clone)]
pub struct BigReal(pub(crate) BigFloat);

const WORD_BITS: i64 = 64;

impl BigReal {
    pub fn zero() -> Self {
        BigReal(BigFloat::from_word(0, precision()))
    }

    pub fn one() -> Self {
        BigReal(BigFloat::from_word(1, precision()))
    }

    pub fn from_f64(v: f64) -> Self {
        BigReal(BigFloat::from_f64(v, precision()))
    }

    pub fn from_i64(v: i64) -> Self {
        BigReal(BigFloat::from_i64(v, precision()))
    }

    pub fn from_u64(v: u64) -> Self {
        BigReal(BigFloat::from_u64(v, precision()))
    }

    /// `num / den`, rounded once.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        if v.is_zero() {
            return Self::zero();
        }
        let digits = v.magnitude().to_u64_digits();
        let sign = if v.is_negative() { Sign::Neg } else { Sign::Pos };
        let e = (digits.len() as i64 * WORD_BITS) as i32;
        let mut x = BigFloat::from_words(&digits, sign, e);
        x.set_precision(precision(), RM).expect("precision");
        BigReal(x)
    }

    pub fn from_rational(v: &BigRational) -> Self {
        Self::from_bigint(v.numer()) / Self::from_bigint(v.denom())
    }

    /// Exact dyadic value of this float.
    pub fn to_rational(&self) -> BigRational {
        match self.0.as_raw_parts() {
            None => panic!("non-finite value has no rational form"),
            Some((m, _, s, e, _)) => {
                if m.iter().all(|w| *w == 0) {
                    return BigRational::zero();
                }
                let mag = BigUint::from_slice(
                    &m.iter().flat_map(|w| [*w as u32, (*w >> 32) as u32]).collect::<Vec<_>>(),
                );
                let shift = e as i64 - WORD_BITS * m.len() as i64;
                let mut num = BigInt::from(mag);
                if s == Sign::Neg {
                    num = -num;
                }
                let two = BigInt::from(2u8);
                if shift >= 0 {
                    BigRational::from_integer(num * num_traits::pow(two, shift as usize))
                } else {
                    BigRational::new(num, num_traits::pow(two, (-shift) as usize))
                }
            }
        }
    }

    /// Nearest f64, saturating to ±inf or 0 outside the f64 range.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let (m, e) = self.mant_exp();
        if m == 0.0 {
            return 0.0;
        }
        if e > 1100 {
            return m.signum() * f64::INFINITY;
        }
        if e < -1100 {
            return 0.0;
        }
        m * 2f64.powi(e as i32)
    }

    /// Splits into (m, e) with value = m·2^e and 0.5 ≤ |m| < 1 (m = 0 for zero).
    pub fn mant_exp(&self) -> (f64, i64) {
        match self.0.as_raw_parts() {
            None => (f64::NAN, 0),
            Some((m, _, s, e, _)) => {
                let Some(&top) = m.last() else {
                    return (0.0, 0);
                };
                if top == 0 {
                    return (0.0, 0);
                }
                let next = if m.len() > 1 { m[m.len() - 2] } else { 0 };
                let mut v = top as f64 / 2f64.powi(64) + next as f64 / 2f64.powi(128);
                if s == Sign::Neg {
                    v = -v;
                }
                (v, e as i64)
            }
        }
    }

    /// log2 |x|; -inf for zero.
    pub fn log2_abs(&self) -> f64 {
        let (m, e) = self.mant_exp();
        if m == 0.0 {
            f64::NEG_INFINITY
        } else {
            m.abs().log2() + e as f64
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        BigReal(self.0.abs())
    }

    pub fn sqrt(&self) -> Self {
        BigReal(self.0.sqrt(precision(), RM))
    }

    pub fn exp(&self) -> Self {
        let p = precision();
        BigReal(with_consts(|cc| self.0.exp(p, RM, cc)))
    }

    pub fn ln(&self) -> Self {
        let p = precision();
        BigReal(with_consts(|cc| self.0.ln(p, RM, cc)))
    }

    pub fn sin(&self) -> Self {
        let p = precision();
        BigReal(with_consts(|cc| self.0.sin(p, RM, cc)))
    }

    pub fn cos(&self) -> Self {
        let p = precision();
        BigReal(with_consts(|cc| self.0.cos(p, RM, cc)))
    }

    pub fn pi() -> Self {
        let p = precision();
        BigReal(with_consts(|cc| cc.pi(p, RM)))
    }

    /// Euler's number.
    pub fn e() -> Self {
        let p = precision();
        BigReal(with_consts(|cc| cc.e(p, RM)))
    }

    /// Angle of (x, y) in (-π, π].
    pub fn atan2(y: &Self, x: &Self) -> Self {
        let p = precision();
        if x.is_zero() {
            if y.is_zero() {
                return Self::zero();
            }
            let half = Self::pi() * Self::from_ratio(1, 2);
            return if y.is_negative() { -half } else { half };
        }
        let base = BigReal(with_consts(|cc| (y / x).0.atan(p, RM, cc)));
        if !x.is_negative() {
            base
        } else if y.is_negative() {
            base - Self::pi()
        } else {
            base + Self::pi()
        }
    }

    pub fn powi(&self, n: usize) -> Self {
        BigReal(self.0.powi(n, precision(), RM))
    }

    /// x^y for x > 0.
    pub fn powf(&self, y: &Self) -> Self {
        (self.ln() * y).exp()
    }

    /// Multiplies by 2^k exactly.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut x = self.0.clone();
        let e = x.exponent().expect("finite") as i64 + k;
        x.set_exponent(e as i32);
        BigReal(x)
    }

    pub fn recip(&self) -> Self {
        BigReal(self.0.reciprocal(precision(), RM))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Rounds to the current working precision.
    pub fn rounded(&self) -> Self {
        let mut x = self.0.clone();
        x.set_precision(precision(), RM).expect("precision");
        BigReal(x)
    }

    /// Inflates a nonnegative bound by (1 + terms·2^(1-P)) so that rounding in
    /// the `terms` operations that produced it cannot make it too small.
    pub fn inflate(&self, terms: usize) -> Self {
        let slack = Self::from_u64(terms as u64 + 2).ldexp(1 - precision() as i64);
        self * &(Self::one() + slack)
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let t = s.trim();
        if t.is_empty() {
            return Err("empty number".into());
        }
        let ok = t
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
        if !ok {
            return Err(format!("not a decimal number: {t:?}"));
        }
        let p = precision();
        let v = with_consts(|cc| BigFloat::parse(t, Radix::Dec, p, RM, cc));
        if v.is_nan() || v.is_inf() {
            return Err(format!("not a finite decimal number: {t:?}"));
        }
        Ok(BigReal(v))
    }

    /// Decimal string with `digits` significant digits (round half up on the
    /// exact binary expansion).
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let full = with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).expect("finite value");
        round_decimal(&full, digits.max(1))
    }

    /// Significant decimal digits that make decimal strings round-trip at `bits`.
    pub fn roundtrip_digits(bits: usize) -> usize {
        (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
    }
}

/// Rounds a string of the form `[-]d.ddd[e±x]` to `digits` significant digits.
fn round_decimal(s: &str, digits: usize) -> String {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (ip, fp) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let mut ds: Vec<u8> = ip.bytes().chain(fp.bytes()).map(|b| b - b'0').collect();
    // decimal exponent of the first digit
    let mut e10 = exp + ip.len() as i64 - 1;
    let lead = ds.iter().position(|d| *d != 0).unwrap_or(0);
    ds.drain(..lead);
    e10 -= lead as i64;
    if ds.len() > digits {
        let up = ds[digits] >= 5;
        ds.truncate(digits);
        if up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.truncate(digits);
                    e10 += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
    }
    while ds.len() > 1 && *ds.last().unwrap() == 0 {
        ds.pop();
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push((b'0' + ds[0]) as char);
    if ds.len() > 1 {
        out.push('.');
        out.extend(ds[1..].iter().map(|d| (b'0' + d) as char));
    }
    if e10 != 0 {
        out.push_str(&format!("e{e10}"));
    }
    out
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(20))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(f.precision().unwrap_or(12)))
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                BigReal(self.0.$m(&rhs.0, precision(), RM))
            }
        }
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                (&self).$m(rhs)
            }
        }
        impl $tr<BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                self.$m(&rhs)
            }
        }
    };
}

real_binop!(Add, add);
real_binop!(Sub, sub);
real_binop!(Mul, mul);
real_binop!(Div, div);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -&self
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        let mut x = self.0.clone();
        x.inv_sign();
        BigReal(x)
    }
}

impl From<f64> for BigReal {
    fn from(v: f64) -> Self {
        BigReal::from_f64(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ctx::with_precision;

    #[test]
    fn rational_round_trip_is_exact() {
        let x = BigReal::from_ratio(1, 3);
        let q = x.to_rational();
        assert_eq!(BigReal::from_rational(&q), x);
        assert!((q - BigRational::new(1.into(), 3.into())).abs() < BigRational::new(1.into(), BigInt::from(2).pow(250)));
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(round_decimal("1.2345e+3", 3), "1.23e3");
        assert_eq!(round_decimal("9.996e-2", 3), "1e-1");
        assert_eq!(round_decimal("-0.000123456", 4), "-1.235e-4");
        assert_eq!(round_decimal("12", 5), "1.2e1");
    }

    #[test]
    fn decimal_round_trip_at_precision() {
        for bits in [128usize, 256, 512] {
            with_precision(bits, || {
                let x = BigReal::from_ratio(-22, 7).exp();
                let s = x.to_decimal(BigReal::roundtrip_digits(bits));
                assert_eq!(BigReal::parse(&s).unwrap(), x, "{bits} bits: {s}");
            });
        }
    }

    #[test]
    fn f64_views() {
        let x = BigReal::from_f64(-6.5);
        assert_eq!(x.to_f64(), -6.5);
        assert!((BigReal::from_f64(1024.0).log2_abs() - 10.0).abs() < 1e-12);
        assert_eq!(BigReal::from_f64(3.0).ldexp(4).to_f64(), 48.0);
    }

    #[test]
    fn atan2_quadrants() {
        let a = |y: f64, x: f64| BigReal::atan2(&y.into(), &x.into()).to_f64();
        assert!((a(1.0, -1.0) - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-14);
        assert!((a(-1.0, -1.0) + 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-14);
        assert!((a(0.0, -1.0) - std::f64::consts::PI).abs() < 1e-14);
        assert!((a(-2.0, 0.0) + std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn bigint_conversion() {
        let v = BigInt::from(3u8).pow(100) * -1;
        let r = BigReal::from_bigint(&v);
        assert_eq!(r.to_rational(), BigRational::from_integer(v));
    }
}
