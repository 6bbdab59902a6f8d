//! Differential operators T = φ(D) acting on polynomials.
//!
//! Symbol data is held exactly (Gaussian rationals) and materialised at the
//! current working precision, so raising precision never inherits rounding
//! from an earlier, coarser run.

use crate::error::{Error, Result};
use crate::poly::{coeff_upper, Poly};
use crate::scalar::{with_precision, BigComplex, BigReal, QComplex};

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    /// φ(z) = a_0 + a_1 z + ⋯ + a_d z^d.
    TaylorPoly { coeffs: Vec<QComplex> },
    /// φ(z) = λ e^{az}, i.e. T f(z) = λ f(z + a).
    ScaledTranslation { lambda: QComplex, shift: QComplex },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOperator {
    kind: OperatorKind,
}

impl DiffOperator {
    /// Polynomial symbol. Trailing zeros are dropped; the symbol must be nonzero.
    pub fn polynomial(mut coeffs: Vec<QComplex>) -> Result<Self> {
        use crate::scalar::Field;
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::Input("the zero symbol does not define an operator".into()));
        }
        Ok(DiffOperator { kind: OperatorKind::TaylorPoly { coeffs } })
    }

    /// Convenience for small integer symbols, e.g. `[2, 1]` for 2I + D.
    pub fn from_ints(coeffs: &[i64]) -> Result<Self> {
        Self::polynomial(coeffs.iter().map(|&c| QComplex::from_ints(c, 0)).collect())
    }

    /// λ e^{aD}; both λ and a must be nonzero.
    pub fn translation(lambda: QComplex, shift: QComplex) -> Result<Self> {
        use crate::scalar::Field;
        if lambda.is_zero() {
            return Err(Error::Input("translation needs lambda != 0".into()));
        }
        if shift.is_zero() {
            return Err(Error::Input("translation needs a != 0 (a = 0 is scalar)".into()));
        }
        Ok(DiffOperator { kind: OperatorKind::ScaledTranslation { lambda, shift } })
    }

    /// D.
    pub fn differentiation() -> Self {
        Self::from_ints(&[0, 1]).unwrap()
    }

    /// f(z) ↦ f(z + 1).
    pub fn unit_translation() -> Self {
        Self::translation(QComplex::from_ints(1, 0), QComplex::from_ints(1, 0)).unwrap()
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// True for multiples of the identity.
    pub fn is_scalar(&self) -> bool {
        match &self.kind {
            OperatorKind::TaylorPoly { coeffs } => coeffs.len() <= 1,
            OperatorKind::ScaledTranslation { .. } => false,
        }
    }

    pub fn ensure_nonscalar(&self) -> Result<()> {
        if self.is_scalar() {
            Err(Error::Input("operator is a scalar multiple of the identity; it has no hypercyclic vectors".into()))
        } else {
            Ok(())
        }
    }

    /// True exactly for translations (φ has no zeros).
    pub fn zero_free(&self) -> bool {
        matches!(self.kind, OperatorKind::ScaledTranslation { .. })
    }

    /// Index of the first nonzero symbol coefficient.
    pub fn j_index(&self) -> usize {
        use crate::scalar::Field;
        match &self.kind {
            OperatorKind::TaylorPoly { coeffs } => coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0),
            OperatorKind::ScaledTranslation { .. } => 0,
        }
    }

    /// Exact a_j for polynomial symbols.
    pub fn exact_coeff(&self, j: usize) -> Option<QComplex> {
        use crate::scalar::Field;
        match &self.kind {
            OperatorKind::TaylorPoly { coeffs } => Some(coeffs.get(j).cloned().unwrap_or_else(QComplex::zero)),
            OperatorKind::ScaledTranslation { .. } => None,
        }
    }

    /// a_j at working precision (λ a^j / j! for translations).
    pub fn symbol_coeff(&self, j: usize) -> BigComplex {
        match &self.kind {
            OperatorKind::TaylorPoly { coeffs } => coeffs.get(j).map(|c| c.to_big()).unwrap_or_else(BigComplex::zero),
            OperatorKind::ScaledTranslation { lambda, shift } => {
                let mut v = lambda.to_big();
                let a = shift.to_big();
                for i in 1..=j {
                    v = (&v * &a).scale(&BigReal::from_u64(i as u64).recip());
                }
                v
            }
        }
    }

    /// Degree of a polynomial symbol (None for translations).
    pub fn symbol_degree(&self) -> Option<usize> {
        match &self.kind {
            OperatorKind::TaylorPoly { coeffs } => Some(coeffs.len() - 1),
            OperatorKind::ScaledTranslation { .. } => None,
        }
    }

    /// The symbol φ as a polynomial (polynomial kind only).
    pub fn symbol_poly(&self) -> Option<Poly> {
        match &self.kind {
            OperatorKind::TaylorPoly { coeffs } => Some(Poly::new(coeffs.iter().map(|c| c.to_big()).collect())),
            OperatorKind::ScaledTranslation { .. } => None,
        }
    }

    /// λ and a at working precision (translation kind only).
    pub fn translation_params(&self) -> Option<(BigComplex, BigComplex)> {
        match &self.kind {
            OperatorKind::ScaledTranslation { lambda, shift } => Some((lambda.to_big(), shift.to_big())),
            OperatorKind::TaylorPoly { .. } => None,
        }
    }

    /// Exponential-type constants (α, β) with |a_j| ≤ α β^j / j!.
    pub fn type_constants(&self) -> (BigReal, BigReal) {
        let two = BigReal::from_u64(2);
        match &self.kind {
            OperatorKind::ScaledTranslation { lambda, shift } => {
                let l = lambda.to_big().abs_upper();
                let a = shift.to_big().abs_upper();
                (&two * &l.max(BigReal::one()), &two * &a.max(BigReal::one()))
            }
            OperatorKind::TaylorPoly { coeffs } => {
                let mut b = BigReal::one();
                let mut fact = BigReal::one();
                for (j, c) in coeffs.iter().enumerate().skip(1) {
                    fact = &fact * &BigReal::from_u64(j as u64);
                    let v = &c.to_big().abs_upper() * &fact;
                    if !v.is_zero() {
                        b = b.max(v.powf(&BigReal::from_u64(j as u64).recip()).inflate(8));
                    }
                }
                let beta = &two * &b;
                let mut a = BigReal::one();
                let mut fact = BigReal::one();
                let mut bp = BigReal::one();
                for (j, c) in coeffs.iter().enumerate() {
                    if j > 0 {
                        fact = &fact * &BigReal::from_u64(j as u64);
                        bp = &bp * &beta;
                    }
                    a = a.max((&(&c.to_big().abs_upper() * &fact) / &bp).inflate(8));
                }
                (&two * &a, beta)
            }
        }
    }

    /// Checks |a_j| ≤ α β^j / j! on the finite support (trivially true for translations).
    pub fn type_bound_holds(&self) -> bool {
        let (alpha, beta) = self.type_constants();
        let Some(d) = self.symbol_degree() else { return true };
        let mut fact = BigReal::one();
        (0..=d).all(|j| {
            if j > 0 {
                fact = &fact * &BigReal::from_u64(j as u64);
            }
            self.symbol_coeff(j).abs() <= &(&alpha * &beta.powi(j)) / &fact
        })
    }

    /// T p.
    pub fn apply(&self, p: &Poly) -> Poly {
        match &self.kind {
            OperatorKind::TaylorPoly { .. } => apply_symbol(&self.symbol_poly().unwrap(), p),
            OperatorKind::ScaledTranslation { .. } => {
                let (l, a) = self.translation_params().unwrap();
                p.taylor_shift(&a).scale(&l)
            }
        }
    }

    /// Σ_{j ≤ deg p} a_j D^j p, valid for every kind (the D-series form).
    pub fn apply_series(&self, p: &Poly) -> Poly {
        let Some(d) = p.degree() else { return Poly::zero() };
        let sym = Poly::new((0..=d).map(|j| self.symbol_coeff(j)).collect());
        apply_symbol(&sym, p)
    }

    /// T^n p. Polynomial symbols use φ^n truncated at deg p; translations use
    /// λ^n p(z + na).
    pub fn apply_n(&self, n: usize, p: &Poly) -> Poly {
        let Some(d) = p.degree() else { return Poly::zero() };
        if n == 0 {
            return p.clone();
        }
        match &self.kind {
            OperatorKind::TaylorPoly { .. } => {
                let psi = truncated_power(&self.symbol_poly().unwrap(), n, d);
                apply_symbol(&psi, p)
            }
            OperatorKind::ScaledTranslation { .. } => {
                let (l, a) = self.translation_params().unwrap();
                let na = a.scale(&BigReal::from_u64(n as u64));
                p.taylor_shift(&na).scale(&l.powi(n))
            }
        }
    }

    /// Upper bound on ‖computed T^n p − exact T^n p‖_R from rounding, given
    /// that `p` itself carries coefficientwise errors bounded by `p_err`.
    ///
    /// Uses |φ|^n(D) applied to |p| (or to |p| + p_err), evaluated at 64 bits.
    pub fn apply_n_error_bound(&self, n: usize, p: &Poly, p_err: Option<&Poly>, r: &BigReal, precision_bits: usize) -> BigReal {
        let d = p.degree().unwrap_or(0);
        with_precision(64, || {
            let r = r.rounded();
            let abs_p = p.abs_coeffs();
            let abs_sym = self.abs_symbol(d);
            let work = (n * (abs_sym.len() + 2) + d + 16) as u64;
            let u = BigReal::one().ldexp(1 - precision_bits as i64);
            let mut bound = &coeff_upper(&abs_apply_n(&abs_sym, n, d, &abs_p, self), &r) * &(&u * &BigReal::from_u64(4 * work));
            if let Some(e) = p_err {
                bound = bound + coeff_upper(&abs_apply_n(&abs_sym, n, d, e, self), &r);
            }
            bound.inflate(64)
        })
    }

    /// |a_j| for j ≤ d as a real polynomial.
    fn abs_symbol(&self, d: usize) -> Poly {
        let top = match self.symbol_degree() {
            Some(s) => s.min(d.max(s)),
            None => d,
        };
        Poly::new((0..=top).map(|j| BigComplex::from_real(self.symbol_coeff(j).abs_upper())).collect())
    }
}

/// |φ|^n(D) applied to a nonnegative-coefficient polynomial.
fn abs_apply_n(abs_sym: &Poly, n: usize, d: usize, q: &Poly, op: &DiffOperator) -> Poly {
    match op.kind() {
        OperatorKind::TaylorPoly { .. } => apply_symbol(&truncated_power(abs_sym, n, d), q),
        OperatorKind::ScaledTranslation { .. } => {
            let (l, a) = op.translation_params().unwrap();
            let na = BigComplex::from_real(a.abs_upper() * BigReal::from_u64(n as u64));
            q.taylor_shift(&na).scale(&BigComplex::from_real(l.abs_upper().powi(n)))
        }
    }
}

/// Σ_j s_j D^j p.
pub fn apply_symbol(sym: &Poly, p: &Poly) -> Poly {
    let Some(d) = p.degree() else { return Poly::zero() };
    let pc = p.coeffs();
    let mut out = vec![BigComplex::zero(); d + 1];
    for (j, s) in sym.coeffs().iter().enumerate() {
        if j > d {
            break;
        }
        if s.is_zero() {
            continue;
        }
        // D^j z^i = i!/(i-j)! z^{i-j}
        let mut ff = BigReal::one();
        for t in 0..j {
            ff = &ff * &BigReal::from_u64((j - t) as u64);
        }
        for i in j..=d {
            if i > j {
                ff = &(&ff * &BigReal::from_u64(i as u64)) / &BigReal::from_u64((i - j) as u64);
            }
            if !pc[i].is_zero() {
                out[i - j] = &out[i - j] + &(s * &pc[i]).scale(&ff);
            }
        }
    }
    Poly::new(out)
}

/// φ^n truncated to degree ≤ d, by binary powering.
fn truncated_power(phi: &Poly, n: usize, d: usize) -> Poly {
    let mut acc = Poly::one();
    let mut base = phi.truncate(d);
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&base).truncate(d);
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(&base).truncate(d);
        }
    }
    acc
}

/// Lemma-1 factorisation of the degree-m truncation of φ: a_0 ∏ (1 − z/α_i).
#[derive(Clone, Debug)]
pub struct TruncatedSymbol {
    pub degree_cap: usize,
    pub a0: BigComplex,
    pub roots: Vec<BigComplex>,
}

pub fn truncated_symbol(t: &DiffOperator, m: usize) -> Result<TruncatedSymbol> {
    let a0 = t.symbol_coeff(0);
    if a0.is_zero() {
        return Err(Error::Precondition("truncated_symbol needs a_0 != 0 (J = 0)".into()));
    }
    let trunc = Poly::new((0..=m).map(|j| t.symbol_coeff(j)).collect());
    let roots = if trunc.degree().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        crate::poly::roots(&trunc)?.into_iter().map(|r| r.root).collect()
    };
    Ok(TruncatedSymbol { degree_cap: m, a0, roots })
}

impl TruncatedSymbol {
    /// S p = (1/a_0) ∏_i (Σ_{j≤m} (D/α_i)^j) p.
    pub fn apply_inverse(&self, p: &Poly) -> Poly {
        let m = self.degree_cap;
        let mut cur = p.clone();
        for alpha in &self.roots {
            let inv = alpha.recip();
            let mut term = cur.clone();
            let mut acc = cur.clone();
            for _ in 0..m {
                term = term.differentiate().scale(&inv);
                if term.is_zero() {
                    break;
                }
                acc = acc.add(&term);
            }
            cur = acc;
        }
        cur.scale(&self.a0.recip())
    }
}

/// Lemma-1 right inverse: T(Sp) = p with deg Sp = deg p.
pub fn right_inverse_s(t: &DiffOperator, p: &Poly) -> Result<Poly> {
    let m = p.degree().unwrap_or(0);
    Ok(truncated_symbol(t, m)?.apply_inverse(p))
}

/// S^n p for J = 0, factoring the truncated symbol once.
pub fn right_inverse_s_pow(t: &DiffOperator, n: usize, p: &Poly) -> Result<Poly> {
    let m = p.degree().unwrap_or(0);
    let ts = truncated_symbol(t, m)?;
    let mut cur = p.clone();
    for _ in 0..n {
        cur = ts.apply_inverse(&cur);
    }
    Ok(cur)
}

/// For φ(z) = z^k ψ(z) (k = J ≥ 1): A^{kn} S̃^n p with S̃ the right inverse of ψ(D).
pub fn right_inverse_sn_zero_case(t: &DiffOperator, n: usize, p: &Poly) -> Result<Poly> {
    let k = t.j_index();
    let OperatorKind::TaylorPoly { coeffs } = t.kind() else {
        return Err(Error::Precondition("the antiderivative path needs a polynomial symbol".into()));
    };
    if k == 0 {
        return Err(Error::Precondition("the antiderivative path needs J >= 1".into()));
    }
    let psi = DiffOperator::polynomial(coeffs[k..].to_vec())?;
    let mut cur = right_inverse_s_pow(&psi, n, p)?;
    for _ in 0..k * n {
        cur = cur.antiderivative();
    }
    Ok(cur)
}

/// μ(m+1)α^n(nβ+R)^m with μ = max|p_j|.
pub fn growth_bound(t: &DiffOperator, p: &Poly, r: &BigReal, n: usize) -> BigReal {
    let m = p.degree().unwrap_or(0);
    let mu = p.coeffs().iter().map(|c| c.abs_upper()).fold(BigReal::zero(), BigReal::max);
    let (alpha, beta) = t.type_constants();
    let base = &(&BigReal::from_u64(n as u64) * &beta) + r;
    // Slack covers both this product and the rounding in coeff_upper.
    (&(&mu * &BigReal::from_u64(m as u64 + 1)) * &(&alpha.powi(n) * &base.powi(m))).inflate(2 * n + 4 * m + 24)
}

/// Lemma-1 constants for (T, p) and the translation-case growth constant κ.
#[derive(Clone, Debug)]
pub struct GrowthConstants {
    pub m: usize,
    /// max{1, max|p_j|}.
    pub mu: BigReal,
    /// max{1, |α_i|^{-1}}.
    pub r_inv: BigReal,
    pub gamma: BigReal,
    /// C = γ³.
    pub c: BigReal,
    /// κ = (m+1)(β+R_ref)^m C α e^m.
    pub kappa: BigReal,
}

pub fn coefficient_bound_c(t: &DiffOperator, p: &Poly, r_ref: &BigReal) -> Result<GrowthConstants> {
    let m = p.degree().unwrap_or(0);
    let ts = truncated_symbol(t, m)?;
    let mu = p.max_abs_coeff().max(BigReal::one());
    let r_inv = ts.roots.iter().map(|a| a.abs().recip()).fold(BigReal::one(), BigReal::max);
    let mut fact = BigReal::one();
    for i in 2..=m + 1 {
        fact = &fact * &BigReal::from_u64(i as u64);
    }
    let rm = &r_inv * &BigReal::from_u64(m as u64);
    let term = &(&fact * &rm.powi(m)) * &mu;
    let e_m = BigReal::from_u64(m as u64).exp();
    let inner = BigReal::one().max(ts.a0.abs().recip()).max(term).max(e_m.clone());
    let gamma = (&BigReal::from_u64(2) * &inner).inflate(4 * m + 16);
    let c = gamma.powi(3).inflate(8);
    let (alpha, beta) = t.type_constants();
    let kappa = (&(&BigReal::from_u64(m as u64 + 1) * &(&beta + r_ref).powi(m)) * &(&(&c * &alpha) * &e_m)).inflate(4 * m + 16);
    Ok(GrowthConstants { m, mu, r_inv, gamma, c, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn near(a: &Poly, b: &Poly) -> bool {
        a.max_abs_diff(b).to_f64() < 1e-60
    }

    #[test]
    fn apply_examples() {
        let d = DiffOperator::differentiation();
        assert!(near(&d.apply(&Poly::from_real_f64(&[0.0, 0.0, 1.0])), &Poly::from_real_f64(&[0.0, 2.0])));
        let sh = DiffOperator::unit_translation();
        assert!(near(&sh.apply(&Poly::from_real_f64(&[0.0, 0.0, 1.0])), &Poly::from_real_f64(&[1.0, 2.0, 1.0])));
        let t = DiffOperator::from_ints(&[2, 1]).unwrap();
        assert!(near(&t.apply(&Poly::from_real_f64(&[0.0, 1.0])), &Poly::from_real_f64(&[1.0, 2.0])));
    }

    #[test]
    fn apply_n_examples() {
        let d = DiffOperator::differentiation();
        let z3 = Poly::from_real_f64(&[0.0, 0.0, 0.0, 1.0]);
        assert!(near(&d.apply_n(3, &z3), &Poly::from_real_f64(&[6.0])));
        assert!(d.apply_n(4, &z3).is_zero());
        let sh = DiffOperator::unit_translation();
        assert!(near(&sh.apply_n(5, &Poly::from_real_f64(&[0.0, 1.0])), &Poly::from_real_f64(&[5.0, 1.0])));
        assert!(near(&sh.apply_n(0, &z3), &z3));
    }

    #[test]
    fn type_constants_for_d() {
        let (a, b) = DiffOperator::differentiation().type_constants();
        assert!((a.to_f64() - 2.0).abs() < 1e-12 && (b.to_f64() - 2.0).abs() < 1e-12);
        assert!(DiffOperator::from_ints(&[3, -5, 7, 1]).unwrap().type_bound_holds());
    }

    #[test]
    fn truncated_symbol_examples() {
        let t = DiffOperator::from_ints(&[1, -1]).unwrap();
        let ts = truncated_symbol(&t, 1).unwrap();
        assert_eq!(ts.roots.len(), 1);
        assert!((&ts.roots[0] - &BigComplex::one()).abs().to_f64() < 1e-60);
        let t = DiffOperator::from_ints(&[2]).unwrap();
        let ts = truncated_symbol(&t, 3).unwrap();
        assert!(ts.roots.is_empty() && ts.a0.re.to_f64() == 2.0);
        assert!(truncated_symbol(&DiffOperator::differentiation(), 2).is_err());
    }

    #[test]
    fn right_inverse_examples() {
        let t = DiffOperator::from_ints(&[1, -1]).unwrap();
        let s = right_inverse_s(&t, &Poly::from_real_f64(&[0.0, 1.0])).unwrap();
        assert!(near(&s, &Poly::from_real_f64(&[1.0, 1.0])));
        let t = DiffOperator::from_ints(&[2]).unwrap();
        let s = right_inverse_s(&t, &Poly::from_real_f64(&[0.0, 0.0, 1.0])).unwrap();
        assert!(near(&s, &Poly::from_real_f64(&[0.0, 0.0, 0.5])));
    }

    #[test]
    fn zero_case_examples() {
        let d = DiffOperator::differentiation();
        let s = right_inverse_sn_zero_case(&d, 4, &Poly::one()).unwrap();
        assert!(near(&s, &Poly::monomial(BigComplex::from_real(BigReal::from_ratio(1, 24)), 4)));
        let d2 = DiffOperator::from_ints(&[0, 0, 1]).unwrap();
        let s = right_inverse_sn_zero_case(&d2, 1, &Poly::z()).unwrap();
        assert!(near(&s, &Poly::monomial(BigComplex::from_real(BigReal::from_ratio(1, 6)), 3)));
        assert!(right_inverse_sn_zero_case(&DiffOperator::from_ints(&[1, 1]).unwrap(), 1, &Poly::z()).is_err());
    }

    #[test]
    fn growth_bound_examples() {
        let d = DiffOperator::differentiation();
        let b = growth_bound(&d, &Poly::z(), &BigReal::one(), 1);
        assert!((b.to_f64() - 12.0).abs() < 1e-9);
    }

    #[test]
    fn coefficient_bound_for_two_identity() {
        let t = DiffOperator::from_ints(&[2]).unwrap();
        let g = coefficient_bound_c(&t, &Poly::z(), &BigReal::one()).unwrap();
        let e = std::f64::consts::E;
        assert!((g.gamma.to_f64() - 2.0 * e).abs() < 1e-9);
        assert!((g.c.to_f64() - 8.0 * e.powi(3)).abs() < 1e-7);
    }

    #[test]
    fn translation_series_agrees_with_shift() {
        let t = DiffOperator::translation(QComplex::ratio(3, 2), QComplex::from_ints(-1, 2)).unwrap();
        let p = Poly::from_f64(&[(1.0, 0.0), (0.5, -1.0), (0.0, 2.0), (3.0, 0.25)]);
        assert!(t.apply(&p).max_abs_diff(&t.apply_series(&p)).to_f64() < 1e-60);
    }
}
