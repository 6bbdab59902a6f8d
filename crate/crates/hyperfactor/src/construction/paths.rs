//! The two ways a stage target is produced.
//!
//! With φ(0) ≠ 0 the target is h_n − f, where h_n blends S^n p into f through
//! a truncated-exponential annihilator. With φ(0) = 0 the target is S_n p,
//! built from repeated antiderivatives, and T^n((q+1)f) = p holds exactly.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::operator::{coefficient_bound_c, right_inverse_s_pow, right_inverse_sn_zero_case, DiffOperator};
use crate::poly::Poly;
use crate::scalar::{BigComplex, BigReal};

use super::{choose_r, tail::tail_poly, ConstructionConfig};

/// Produces the polynomial g_n that is divided by f to give q_n.
pub trait StagePath: Send + Sync {
    fn name(&self) -> &'static str;
    /// g_n for the given stage inputs.
    fn target(&self, t: &DiffOperator, f: &Poly, p: &Poly, n: usize, cfg: &ConstructionConfig) -> Result<Poly>;
    /// Smallest admissible n for an f of degree `m`.
    fn min_n(&self, m: usize) -> usize;
    /// Lemma-3 constant, when the path uses one.
    fn r(&self) -> Option<&BigComplex> {
        None
    }
}

/// φ(0) ≠ 0: g_n = h_n − f = (S^n p − f)·(1 − E_M(−rz)E_N(rz)).
pub struct AnnihilatorPath {
    pub r: BigComplex,
}

impl StagePath for AnnihilatorPath {
    fn name(&self) -> &'static str {
        "annihilator"
    }
    fn target(&self, t: &DiffOperator, f: &Poly, p: &Poly, n: usize, cfg: &ConstructionConfig) -> Result<Poly> {
        h_minus_f(f, p, &self.r, n, t, cfg)
    }
    fn min_n(&self, m: usize) -> usize {
        m + 1
    }
    fn r(&self) -> Option<&BigComplex> {
        Some(&self.r)
    }
}

/// φ(0) = 0: g_n = S_n p = A^{Jn} S̃^n p.
pub struct AntiderivativePath;

impl StagePath for AntiderivativePath {
    fn name(&self) -> &'static str {
        "antiderivative"
    }
    fn target(&self, t: &DiffOperator, _f: &Poly, p: &Poly, n: usize, _cfg: &ConstructionConfig) -> Result<Poly> {
        right_inverse_sn_zero_case(t, n, p)
    }
    fn min_n(&self, m: usize) -> usize {
        m.max(1)
    }
}

/// ⌊n^e⌋ with a guard against pow rounding just below an integer.
pub(crate) fn floor_pow(n: usize, e: f64) -> usize {
    let v = (n as f64).powf(e);
    let f = v.floor();
    if v - f > 1.0 - 1e-9 {
        f as usize + 1
    } else {
        f as usize
    }
}

pub(crate) fn h_minus_f(f: &Poly, p: &Poly, r: &BigComplex, n: usize, t: &DiffOperator, cfg: &ConstructionConfig) -> Result<Poly> {
    let m = f.degree().unwrap_or(0);
    if t.j_index() != 0 {
        return Err(Error::Precondition("h_n needs phi(0) != 0".into()));
    }
    if p.degree().unwrap_or(0) >= m && !p.is_zero() {
        return Err(Error::Precondition(format!("need deg p < deg f = {m}")));
    }
    if n <= m {
        return Err(Error::Precondition(format!("need n > deg f = {m}, got n = {n}")));
    }
    let s = right_inverse_s_pow(t, n, p)?;
    let big_m = n - m - 1;
    let big_n = floor_pow(n, cfg.exp_outer).max(big_m + 1);
    Ok(s.sub(f).mul(&tail_poly(big_m, big_n, r)))
}

type PathBuilder = fn(&DiffOperator, &Poly, &BigReal) -> Result<Box<dyn StagePath>>;

/// Name → path constructor. The constructor receives (T, p, R_ref).
pub fn path_registry() -> BTreeMap<&'static str, PathBuilder> {
    let mut m: BTreeMap<&'static str, PathBuilder> = BTreeMap::new();
    m.insert("annihilator", |t, p, r_ref| {
        let gc = coefficient_bound_c(t, p, r_ref)?;
        Ok(Box::new(AnnihilatorPath { r: choose_r(t, &gc)? }))
    });
    m.insert("antiderivative", |t, _, _| {
        if t.j_index() == 0 {
            return Err(Error::Precondition("the antiderivative path needs phi(0) = 0".into()));
        }
        Ok(Box::new(AntiderivativePath))
    });
    m
}

/// The path matching T's first nonzero symbol index.
pub fn path_for(t: &DiffOperator, p: &Poly, r_ref: &BigReal) -> Result<Box<dyn StagePath>> {
    t.ensure_nonscalar()?;
    let name = if t.j_index() == 0 { "annihilator" } else { "antiderivative" };
    path_registry()[name](t, p, r_ref)
}
