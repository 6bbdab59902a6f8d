use hyperfactor::division::{remainder_bound_constant, remainder_via_interpolation};
use hyperfactor::poly::{coeff_upper, Poly};
use hyperfactor::scalar::{with_precision, BigComplex, BigReal};
use proptest::prelude::*;

const P: usize = 256;

fn zeros() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..=6).prop_filter("distinct, nonzero zeros", |v| {
        v.iter().all(|a| a.0.hypot(a.1) > 0.1) && v.iter().enumerate().all(|(i, a)| v[..i].iter().all(|b| (a.0 - b.0).hypot(a.1 - b.1) > 0.05))
    })
}

fn dividend() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn interpolation_remainder_matches_division(zs in zeros(), g in dividend()) {
        with_precision(P, || {
            let alphas: Vec<BigComplex> = zs.iter().map(|&(x, y)| BigComplex::from_f64(x, y)).collect();
            let f = Poly::from_unit_factors(&alphas);
            let g = Poly::from_f64(&g);
            let (_, rem) = Poly::divide(&g, &f);
            let bound = remainder_bound_constant(&alphas).unwrap();
            let interp = remainder_via_interpolation(&g, &bound);
            prop_assert!(interp.degree().unwrap_or(0) < alphas.len());
            let scale = rem.max_abs_coeff().max(g.max_abs_coeff()).max(BigReal::one());
            let rel = &interp.max_abs_diff(&rem) / &scale;
            prop_assert!(rel.log2_abs() <= -((P - 40) as f64), "relative gap 2^{}", rel.log2_abs());

            let r = &alphas.iter().map(|a| a.abs()).fold(BigReal::zero(), BigReal::max) + &BigReal::one();
            let cap = &bound.omega * &coeff_upper(&g, &r);
            for c in rem.coeffs() {
                prop_assert!(c.abs() <= cap);
            }
            Ok(())
        })?;
    }
}

/// V = [[1, 1], [1, −1]] has V^{-1} = ½[[1, 1], [1, −1]], so ω = 1.
#[test]
fn omega_for_plus_minus_one() {
    with_precision(P, || {
        let b = remainder_bound_constant(&[BigComplex::from_f64(1.0, 0.0), BigComplex::from_f64(-1.0, 0.0)]).unwrap();
        assert!((b.omega.to_f64() - 1.0).abs() < 1e-60);
    });
}

#[test]
fn repeated_zeros_are_rejected() {
    with_precision(P, || {
        let a = BigComplex::from_f64(2.0, 1.0);
        assert!(remainder_bound_constant(&[a.clone(), a]).is_err());
    });
}
