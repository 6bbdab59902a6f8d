//! Dense univariate polynomials over a [`Field`], ascending coefficient order.

mod norm;
mod roots;

use std::fmt;

use crate::scalar::{BigComplex, BigReal, Field, QComplex};

pub use norm::{coeff_upper, default_samples, disk_norm, DiskNormEstimate};
pub use roots::{roots, roots_with, RootOptions, RootReport};

/// A polynomial c_0 + c_1 z + ⋯ with no trailing zero coefficients.
#[derive(Clone, PartialEq)]
pub struct Poly<C: Field = BigComplex> {
    coeffs: Vec<C>,
}

/// Exact-mode polynomial over Gaussian rationals.
pub type QPoly = Poly<QComplex>;

impl<C: Field> Poly<C> {
    /// Builds a polynomial, dropping trailing coefficients that are exactly zero.
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// c·z^k.
    pub fn monomial(c: C, k: usize) -> Self {
        let mut v = vec![C::zero(); k];
        v.push(c);
        Self::new(v)
    }

    /// The polynomial z.
    pub fn z() -> Self {
        Self::monomial(C::one(), 1)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Coefficient of z^i (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial (degree −∞).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of stored coefficients (degree + 1, or 0).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.len().max(o.len());
        Self::new((0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.len().max(o.len());
        Self::new((0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C::zero(); self.len() + o.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    /// Multiplies by z^k.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![C::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(v)
    }

    /// Keeps the terms of degree ≤ d.
    pub fn truncate(&self, d: usize) -> Self {
        Self::new(self.coeffs.iter().take(d + 1).cloned().collect())
    }

    /// Horner evaluation.
    pub fn eval(&self, z: &C) -> C {
        let mut acc = C::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z).add(c);
        }
        acc
    }

    /// p'.
    pub fn differentiate(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.mul(&C::from_i64(i as i64)))
                .collect(),
        )
    }

    /// ∫_0^z p(w) dw.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(C::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            v.push(c.div(&C::from_i64(i as i64 + 1)));
        }
        Self::new(v)
    }

    /// Euclidean division: returns (q, r) with g = f·q + r and deg r < deg f.
    ///
    /// # Panics
    /// If `f` is the zero polynomial.
    pub fn divide(g: &Self, f: &Self) -> (Self, Self) {
        let m = f.degree().expect("division by the zero polynomial");
        let Some(dg) = g.degree() else {
            return (Self::zero(), Self::zero());
        };
        if dg < m {
            return (Self::zero(), g.clone());
        }
        let lead = f.coeffs[m].clone();
        let mut rem = g.coeffs.clone();
        let mut q = vec![C::zero(); dg - m + 1];
        for t in (0..=dg - m).rev() {
            let qt = rem[t + m].div(&lead);
            if !qt.is_zero() {
                for i in 0..m {
                    rem[t + i] = rem[t + i].sub(&qt.mul(&f.coeffs[i]));
                }
            }
            rem[t + m] = C::zero();
            q[t] = qt;
        }
        rem.truncate(m);
        (Self::new(q), Self::new(rem))
    }

    /// p(z + a) by repeated synthetic division (Taylor shift).
    pub fn taylor_shift(&self, a: &C) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = c[j + 1].mul(a);
                c[j] = c[j].add(&t);
            }
        }
        Self::new(c)
    }

    /// Product of the given polynomials, balanced to limit work.
    pub fn product(mut ps: Vec<Self>) -> Self {
        if ps.is_empty() {
            return Self::one();
        }
        while ps.len() > 1 {
            let mut next = Vec::with_capacity(ps.len().div_ceil(2));
            let mut it = ps.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.mul(&b)),
                    None => next.push(a),
                }
            }
            ps = next;
        }
        ps.pop().unwrap()
    }

    /// Maps coefficients into another field.
    pub fn map<D: Field>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

impl Poly<BigComplex> {
    pub fn from_f64(coeffs: &[(f64, f64)]) -> Self {
        Self::new(coeffs.iter().map(|&(re, im)| BigComplex::from_f64(re, im)).collect())
    }

    pub fn from_real_f64(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&re| BigComplex::from_f64(re, 0.0)).collect())
    }

    /// ∏ (z − root_i), scaled by `lead`.
    pub fn from_roots(lead: &BigComplex, roots: &[BigComplex]) -> Self {
        let factors = roots
            .iter()
            .map(|r| Self::new(vec![-r, BigComplex::one()]))
            .collect();
        Self::product(factors).scale(lead)
    }

    /// ∏ (1 − z/a_i), the normalised product used for factor lists.
    pub fn from_unit_factors(zeros: &[BigComplex]) -> Self {
        let factors = zeros
            .iter()
            .map(|a| Self::new(vec![BigComplex::one(), -a.recip()]))
            .collect();
        Self::product(factors)
    }

    /// max_i |c_i| (0 for the zero polynomial).
    pub fn max_abs_coeff(&self) -> BigReal {
        self.coeffs.iter().map(|c| c.abs()).fold(BigReal::zero(), BigReal::max)
    }

    /// log2 of the largest coefficient magnitude.
    pub fn max_log2_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.log2_abs()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Polynomial with coefficients |c_i|.
    pub fn abs_coeffs(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| BigComplex::from_real(c.abs_upper())).collect())
    }

    pub fn to_exact(&self) -> QPoly {
        self.map(QComplex::from_big)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Rounds every coefficient to the current working precision.
    pub fn rounded(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.rounded()).collect())
    }

    /// Largest coefficientwise distance |a_i − b_i|.
    pub fn max_abs_diff(&self, o: &Self) -> BigReal {
        self.sub(o).max_abs_coeff()
    }
}

impl QPoly {
    pub fn to_big(&self) -> Poly<BigComplex> {
        self.map(|c| c.to_big())
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| QComplex::from_ints(c, 0)).collect())
    }
}

impl<C: Field> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{c:?}·z^{i}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(c: &[i64]) -> QPoly {
        QPoly::from_ints(c)
    }

    #[test]
    fn eval_examples() {
        let c = |re: f64, im: f64| BigComplex::from_f64(re, im);
        let p = Poly::from_real_f64(&[0.0, 0.0, 1.0]);
        assert_eq!(p.eval(&c(2.0, 0.0)).to_f64(), (4.0, 0.0));
        assert!(Poly::<BigComplex>::zero().eval(&c(3.0, 1.0)).is_zero());
        let p = Poly::from_real_f64(&[1.0, 1.0, 1.0]);
        assert_eq!(p.eval(&c(0.0, 1.0)).to_f64(), (0.0, 1.0));
    }

    #[test]
    fn calculus_examples() {
        assert_eq!(q(&[0, 0, 1]).differentiate(), q(&[0, 2]));
        assert_eq!(q(&[5]).differentiate(), QPoly::zero());
        assert_eq!(q(&[0, 1, 0, 3]).differentiate(), q(&[1, 0, 9]));
        assert_eq!(q(&[1]).antiderivative(), q(&[0, 1]));
        let z3 = QPoly::monomial(QComplex::one(), 3);
        assert_eq!(z3.antiderivative(), QPoly::monomial(QComplex::ratio(1, 4), 4));
    }

    #[test]
    fn division_examples() {
        let (qq, r) = QPoly::divide(&q(&[0, 0, 0, 1]), &q(&[-1, 0, 1]));
        assert_eq!((qq, r), (q(&[0, 1]), q(&[0, 1])));
        let f = q(&[3, -1, 2]);
        assert_eq!(QPoly::divide(&f, &f), (QPoly::one(), QPoly::zero()));
        assert_eq!(QPoly::divide(&q(&[1, 1]), &f), (QPoly::zero(), q(&[1, 1])));
    }

    #[test]
    fn degree_of_zero_is_below_everything() {
        assert_eq!(QPoly::zero().degree(), None);
        assert!(QPoly::zero().degree() < Some(0));
        assert_eq!(q(&[1, 2, 0, 0]).degree(), Some(1));
    }

    #[test]
    fn taylor_shift_matches_binomial() {
        // (z+1)^2 = z^2 + 2z + 1
        assert_eq!(q(&[0, 0, 1]).taylor_shift(&QComplex::from_ints(1, 0)), q(&[1, 2, 1]));
        assert_eq!(q(&[0, 1]).taylor_shift(&QComplex::from_ints(5, 0)), q(&[5, 1]));
    }

    #[test]
    fn unit_factor_product() {
        let p = Poly::from_unit_factors(&[BigComplex::from_f64(2.0, 0.0), BigComplex::from_f64(-4.0, 0.0)]);
        // (1 - z/2)(1 + z/4) = 1 - z/4 - z^2/8
        let want = Poly::from_real_f64(&[1.0, -0.25, -0.125]);
        assert!(p.max_abs_diff(&want).to_f64() < 1e-70);
    }
}
