//! Remainder control through interpolation at the zeros of the divisor.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{precision, BigComplex, BigReal};

/// V^{-1} for the Vandermonde matrix at f's zeros, and ω = ‖V^{-1}‖_∞.
#[derive(Clone, Debug)]
pub struct RemainderBound {
    pub omega: BigReal,
    pub zeros: Vec<BigComplex>,
    pub m: usize,
    inverse: Vec<Vec<BigComplex>>,
}

/// Whether two zeros are closer than the simple-zero threshold 2^{-P/4}·scale.
pub fn too_close(a: &BigComplex, b: &BigComplex, scale: &BigReal) -> bool {
    let thr = scale.ldexp(-(precision() as i64) / 4);
    (a - b).abs() <= thr
}

pub fn remainder_bound_constant(zeros: &[BigComplex]) -> Result<RemainderBound> {
    let m = zeros.len();
    let scale = zeros.iter().map(|z| z.abs()).fold(BigReal::one(), BigReal::max);
    for i in 0..m {
        for j in 0..i {
            if too_close(&zeros[i], &zeros[j], &scale) {
                return Err(Error::Precondition(format!("zeros {j} and {i} are not distinct")));
            }
        }
    }
    // [V | I] → [I | V^{-1}] with partial pivoting.
    let mut a: Vec<Vec<BigComplex>> = zeros
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let mut row = Vec::with_capacity(2 * m);
            let mut p = BigComplex::one();
            for _ in 0..m {
                row.push(p.clone());
                p = &p * z;
            }
            row.extend((0..m).map(|k| if k == i { BigComplex::one() } else { BigComplex::zero() }));
            row
        })
        .collect();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        if a[piv][col].is_zero() {
            return Err(Error::Precondition("Vandermonde matrix is singular".into()));
        }
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for k in 0..2 * m {
            a[col][k] = &a[col][k] * &inv;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in 0..2 * m {
                    let t = &f * &a[col][k];
                    a[r][k] = &a[r][k] - &t;
                }
            }
        }
    }
    let inverse: Vec<Vec<BigComplex>> = a.into_iter().map(|row| row[m..].to_vec()).collect();
    let omega = inverse
        .iter()
        .map(|row| row.iter().fold(BigReal::zero(), |s, x| s + x.abs()))
        .fold(BigReal::zero(), BigReal::max);
    Ok(RemainderBound { omega, zeros: zeros.to_vec(), m, inverse })
}

impl RemainderBound {
    /// Row i of V^{-1}.
    pub fn inverse_row(&self, i: usize) -> &[BigComplex] {
        &self.inverse[i]
    }
}

/// The unique r with deg r < m and r(α_i) = g(α_i).
pub fn remainder_via_interpolation(g: &Poly, bound: &RemainderBound) -> Poly {
    let vals: Vec<BigComplex> = bound.zeros.iter().map(|z| g.eval(z)).collect();
    Poly::new(
        bound
            .inverse
            .iter()
            .map(|row| row.iter().zip(&vals).fold(BigComplex::zero(), |s, (a, v)| &s + &(a * v)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let b = remainder_bound_constant(&[BigComplex::from_f64(1.0, 0.0), BigComplex::from_f64(-1.0, 0.0)]).unwrap();
        assert!((b.omega.to_f64() - 1.0).abs() < 1e-60);
        assert!((b.inverse_row(1)[1].re.to_f64() + 0.5).abs() < 1e-60);
        let r = remainder_via_interpolation(&Poly::monomial(BigComplex::one(), 3), &b);
        assert!(r.max_abs_diff(&Poly::z()).to_f64() < 1e-60);
    }

    #[test]
    fn single_zero() {
        let b = remainder_bound_constant(&[BigComplex::from_f64(2.0, 0.0)]).unwrap();
        assert_eq!(b.omega.to_f64(), 1.0);
    }

    #[test]
    fn repeated_zero_rejected() {
        let z = BigComplex::from_f64(2.0, 1.0);
        assert!(remainder_bound_constant(&[z.clone(), z]).is_err());
    }

    #[test]
    fn low_degree_reproduced() {
        let zs: Vec<BigComplex> = [1.0, 2.0, 3.0].iter().map(|&x| BigComplex::from_f64(x, 0.0)).collect();
        let b = remainder_bound_constant(&zs).unwrap();
        let g = Poly::from_f64(&[(0.5, 1.0), (-2.0, 0.0)]);
        assert!(remainder_via_interpolation(&g, &b).max_abs_diff(&g).to_f64() < 1e-60);
    }
}
