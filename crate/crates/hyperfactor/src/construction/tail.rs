//! The double Taylor product E_M(−x)·E_N(x) and its tail 1 − E_M(−x)E_N(x).
//!
//! Expanding the product directly cancels catastrophically (terms of size
//! ~2^k summing to O(1)), so the float path uses the closed form
//!
//!   a_0 = 1, a_k = 0 (1 ≤ k ≤ M),
//!   a_k = (−1)^M / (M!·(k−1−M)!·k)                           (M < k ≤ N),
//!   a_k = (−1)^M / (M!·(k−1−M)!·k) − (−1)^{k−N−1} / (N!·(k−N−1)!·k)   (N < k ≤ N+M),
//!
//! which follows from Σ_{i≤M} (−1)^i C(k,i) = (−1)^M C(k−1,M).

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::poly::{coeff_upper, Poly, QPoly};
use crate::scalar::{BigComplex, BigReal, QComplex};

/// Coefficients a_k (in the variable x) of E_M(−x)E_N(x) for k ≤ N+M.
pub fn product_coeffs(m: usize, n: usize) -> Vec<BigReal> {
    assert!(m < n, "need M < N");
    let top = n + m;
    let mut inv_fact = Vec::with_capacity(top + 1);
    inv_fact.push(BigReal::one());
    for k in 1..=top {
        let prev: &BigReal = &inv_fact[k - 1];
        inv_fact.push(prev / &BigReal::from_u64(k as u64));
    }
    let sign = |e: usize| if e.is_multiple_of(2) { BigReal::one() } else { -BigReal::one() };
    let mut a = vec![BigReal::zero(); top + 1];
    a[0] = BigReal::one();
    for (k, ak) in a.iter_mut().enumerate().skip(m + 1) {
        let kinv = BigReal::from_u64(k as u64).recip();
        let mut v = &(&sign(m) * &(&inv_fact[m] * &inv_fact[k - 1 - m])) * &kinv;
        if k > n {
            v = v - &(&sign(k - n - 1) * &(&inv_fact[n] * &inv_fact[k - n - 1])) * &kinv;
        }
        *ak = v;
    }
    a
}

/// 1 − E_M(−rz)E_N(rz) as a polynomial in z.
pub fn tail_poly(m: usize, n: usize, r: &BigComplex) -> Poly {
    let a = product_coeffs(m, n);
    let mut rk = BigComplex::one();
    let mut out = Vec::with_capacity(a.len());
    for (k, ak) in a.iter().enumerate() {
        if k == 0 {
            out.push(BigComplex::zero());
        } else {
            out.push(if ak.is_zero() { BigComplex::zero() } else { -rk.scale(ak) });
        }
        rk = &rk * r;
    }
    Poly::new(out)
}

/// E_M(−x)E_N(x) expanded by exact multiplication.
pub fn product_exact(m: usize, n: usize) -> QPoly {
    let e = |deg: usize, sign: i64| {
        let mut fact = BigInt::from(1);
        let mut v = Vec::with_capacity(deg + 1);
        for i in 0..=deg {
            if i > 0 {
                fact *= i;
            }
            let s = if sign < 0 && i % 2 == 1 { -1 } else { 1 };
            v.push(QComplex::real(BigRational::new(BigInt::from(s), fact.clone())));
        }
        QPoly::new(v)
    };
    e(m, -1).mul(&e(n, 1))
}

/// Lemma-4 bound e^M / M^{σM/2} together with the measured ‖1 − E_M E_N‖_R.
#[derive(Clone, Debug)]
pub struct TailBound {
    pub bound: BigReal,
    pub measured_upper: BigReal,
}

pub fn taylor_tail_bound(m: usize, n: usize, r: &BigComplex, radius: &BigReal, sigma: f64) -> Result<TailBound> {
    if m >= n {
        return Err(Error::Precondition("Lemma 4 needs M < N".into()));
    }
    if !(0.0 < sigma && sigma < 1.0) {
        return Err(Error::Precondition("Lemma 4 needs 0 < sigma < 1".into()));
    }
    let mr = BigReal::from_u64(m as u64);
    if m < 1 || *radius >= mr.powf(&BigReal::from_f64(1.0 - sigma)) {
        return Err(Error::Precondition("Lemma 4 needs R < M^(1-sigma)".into()));
    }
    let lhs = mr.powf(&BigReal::from_f64(0.5 * sigma));
    let rhs = &(&BigReal::from_u64(4) * &r.abs()) * &BigReal::e();
    if lhs <= rhs {
        return Err(Error::Precondition("Lemma 4 needs M^(sigma/2) > 4|r|e".into()));
    }
    let bound = &mr.exp() / &mr.powf(&BigReal::from_f64(0.5 * sigma * m as f64));
    let measured_upper = coeff_upper(&tail_poly(m, n, r), radius);
    Ok(TailBound { bound, measured_upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_exact_product() {
        for (m, n) in [(0usize, 1usize), (2, 5), (3, 4), (4, 9)] {
            let exact = product_exact(m, n);
            let closed = product_coeffs(m, n);
            assert_eq!(exact.len(), closed.len());
            for (k, c) in closed.iter().enumerate() {
                let e = BigReal::from_rational(&exact.coeff(k).re);
                assert!((c - &e).abs().to_f64() < 1e-70, "M={m} N={n} k={k}");
            }
        }
    }

    #[test]
    fn hypothesis_gate() {
        let r = BigComplex::from_f64(1.0, 0.0);
        assert!(taylor_tail_bound(20, 30, &r, &BigReal::one(), 0.2).is_err());
    }
}
