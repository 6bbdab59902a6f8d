//! The target sequence p_1, p_2, … and the first stage polynomial q_1.
//!
//! p_1 = a_J and p_2 = 1. From k = 3 on, targets run through a fixed
//! enumeration of nonzero polynomials with Gaussian-rational coefficients.
//! Height h contributes every polynomial of degree ≤ h − 1 whose coefficients
//! are (a + bi)/c with |a|, |b|, c ≤ h. Within a height, polynomials are
//! ordered by degree, then lexicographically (constant term first) by the
//! coefficient key (c, |a| + |b|, a, b) of each reduced coefficient.
//! Anything already listed at a lower height is skipped. Every Gaussian-
//! rational polynomial eventually appears, so the sequence is dense.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Signed;

use crate::operator::{DiffOperator, OperatorKind};
use crate::poly::QPoly;
use crate::scalar::{BigComplex, BigReal, Field, QComplex};
use crate::Poly;

/// a_J, the first nonzero symbol coefficient, exactly.
pub fn first_coefficient(t: &DiffOperator) -> QComplex {
    match t.kind() {
        OperatorKind::TaylorPoly { coeffs } => coeffs[t.j_index()].clone(),
        OperatorKind::ScaledTranslation { lambda, .. } => lambda.clone(),
    }
}

type Key = (BigInt, BigInt, BigInt, BigInt);

fn key(z: &QComplex) -> Key {
    let c = z.re.denom().lcm(z.im.denom());
    let a = (&z.re * BigRational::from_integer(c.clone())).to_integer();
    let b = (&z.im * BigRational::from_integer(c.clone())).to_integer();
    (c, a.abs() + b.abs(), a, b)
}

fn values(h: i64) -> Vec<QComplex> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in 1..=h {
        for a in -h..=h {
            for b in -h..=h {
                let z = QComplex::new(BigRational::new(a.into(), c.into()), BigRational::new(b.into(), c.into()));
                if seen.insert(z.clone()) {
                    out.push(z);
                }
            }
        }
    }
    out.sort_by_key(key);
    out
}

/// Lazily generated enumeration; `get(i)` is the i-th element (0-based).
#[derive(Default)]
pub struct TargetEnumeration {
    listed: Vec<QPoly>,
    seen: HashSet<Vec<QComplex>>,
    height: i64,
}

impl TargetEnumeration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, i: usize) -> &QPoly {
        while self.listed.len() <= i {
            self.height += 1;
            self.extend_height();
        }
        &self.listed[i]
    }

    fn extend_height(&mut self) {
        let h = self.height;
        let vals = values(h);
        let zero_idx = vals.iter().position(|v| v.is_zero()).unwrap();
        for deg in 0..h as usize {
            // Odometer over coefficient indices, constant term most significant.
            let mut idx = vec![0usize; deg + 1];
            loop {
                if idx[deg] != zero_idx {
                    let coeffs: Vec<QComplex> = idx.iter().map(|&i| vals[i].clone()).collect();
                    if self.seen.insert(coeffs.clone()) {
                        self.listed.push(QPoly::new(coeffs));
                    }
                }
                let mut pos = deg as isize;
                while pos >= 0 {
                    let p = pos as usize;
                    idx[p] += 1;
                    if idx[p] < vals.len() {
                        break;
                    }
                    idx[p] = 0;
                    pos -= 1;
                }
                if pos < 0 {
                    break;
                }
            }
        }
    }
}

/// p_k, exactly.
pub fn dense_sequence(t: &DiffOperator, k: usize) -> QPoly {
    assert!(k >= 1, "targets are indexed from 1");
    match k {
        1 => QPoly::constant(first_coefficient(t)),
        2 => QPoly::one(),
        _ => {
            let mut e = TargetEnumeration::new();
            e.get(k - 3).clone()
        }
    }
}

/// First `count` targets p_1..p_count.
pub fn dense_prefix(t: &DiffOperator, count: usize) -> Vec<QPoly> {
    let mut e = TargetEnumeration::new();
    (1..=count)
        .map(|k| match k {
            1 => QPoly::constant(first_coefficient(t)),
            2 => QPoly::one(),
            _ => e.get(k - 3).clone(),
        })
        .collect()
}

/// q_1 = bz with b = 1/(|a_0| + |a_1|) when φ(0) ≠ 0, otherwise z^J/J!.
pub fn initial_q1(t: &DiffOperator) -> Poly {
    let j = t.j_index();
    if j == 0 {
        let b = (t.symbol_coeff(0).abs() + t.symbol_coeff(1).abs()).recip();
        Poly::new(vec![BigComplex::zero(), BigComplex::from_real(b)])
    } else {
        let mut fact = BigReal::one();
        for i in 2..=j {
            fact = &fact * &BigReal::from_u64(i as u64);
        }
        Poly::monomial(BigComplex::from_real(fact.recip()), j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_targets() {
        let d = DiffOperator::differentiation();
        assert_eq!(dense_sequence(&d, 1), QPoly::one());
        assert_eq!(dense_sequence(&d, 2), QPoly::one());
        let p = dense_prefix(&d, 12);
        for (i, pk) in p.iter().enumerate() {
            assert!(!pk.is_zero());
            assert!(pk.degree().unwrap() <= i);
        }
        assert_eq!(p[2], QPoly::constant(QComplex::from_ints(-1, 0)));
    }

    #[test]
    fn enumeration_has_no_repeats() {
        let mut e = TargetEnumeration::new();
        let all: Vec<QPoly> = (0..400).map(|i| e.get(i).clone()).collect();
        let set: HashSet<Vec<QComplex>> = all.iter().map(|p| p.coeffs().to_vec()).collect();
        assert_eq!(set.len(), all.len());
    }
}
