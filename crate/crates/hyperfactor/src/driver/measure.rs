//! Rigorous residual measurement: coefficient upper bounds plus explicit
//! rounding allowances, shared by the driver and the verifier.

use crate::operator::DiffOperator;
use crate::poly::{coeff_upper, default_samples, disk_norm, Poly};
use crate::scalar::{with_precision, BigComplex, BigReal};

/// Upper bound of a computed disk norm, the rounding allowance that separates
/// it from the exact value, and (when needed) a sampled lower bound.
#[derive(Clone, Debug)]
pub struct Measured {
    pub upper: BigReal,
    pub lower: Option<BigReal>,
    pub error: BigReal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Pass,
    Fail,
    /// Rounding error is too large to decide at this precision.
    Undecided,
}

impl Measured {
    /// Rigorous upper bound on the exact norm.
    pub fn bound(&self) -> BigReal {
        &self.upper + &self.error
    }

    /// Strict comparison against `tol`.
    ///
    /// Passes when upper + error < tol; fails outright when the sampled lower
    /// bound minus the error still reaches tol. In between, the gap is blamed
    /// on rounding if the error is at least tol/16, otherwise on the slack of
    /// the coefficient bound (which no precision can remove).
    pub fn decide(&mut self, value: &Poly, radius: &BigReal, tol: &BigReal, samples: Option<usize>) -> Decision {
        if self.bound() < *tol {
            return Decision::Pass;
        }
        let s = samples.unwrap_or_else(|| default_samples(value.len())).next_power_of_two();
        let lower = disk_norm(value, radius, s).lower;
        let decisive = &lower - &self.error >= *tol;
        self.lower = Some(lower);
        if decisive {
            Decision::Fail
        } else if &self.error * &BigReal::from_u64(16) >= *tol {
            Decision::Undecided
        } else {
            Decision::Fail
        }
    }
}

/// 2^{1-bits}.
pub fn unit(bits: usize) -> BigReal {
    BigReal::one().ldexp(1 - bits as i64)
}

/// ∏ (1 + z/|a_i|) at 64 bits, which dominates ∏ (1 − z/a_i) coefficientwise.
pub fn abs_product(zeros: &[BigComplex]) -> Poly {
    with_precision(64, || {
        let neg: Vec<BigComplex> = zeros.iter().map(|a| BigComplex::from_real(-a.abs_upper())).collect();
        Poly::from_unit_factors(&neg).abs_coeffs()
    })
}

/// Coefficientwise rounding bound for a product of `count` linear factors
/// whose absolute product is `abs`, computed with unit roundoff 2^{1-bits}.
pub fn product_error(abs: &Poly, count: usize, bits: usize) -> Poly {
    with_precision(64, || {
        let s = BigComplex::from_real(&unit(bits) * &BigReal::from_u64(4 * count as u64 + 8));
        abs.scale(&s)
    })
}

/// T^n g − p on |z| ≤ radius, with the rounding allowance for the
/// computation and for the error `g_err` already present in g.
pub fn measure(op: &DiffOperator, n: usize, g: &Poly, g_err: &Poly, p: Option<&Poly>, radius: &BigReal, bits: usize) -> (Poly, Measured) {
    let mut value = op.apply_n(n, g);
    let mut error = op.apply_n_error_bound(n, g, Some(g_err), radius, bits);
    if let Some(p) = p {
        value = value.sub(p);
        let sub = &(&coeff_upper(&value, radius) + &coeff_upper(p, radius)) * &unit(bits);
        error = error + sub.ldexp(2);
    }
    let upper = coeff_upper(&value, radius);
    (value, Measured { upper, lower: None, error })
}
