//! Two-sided estimates of the disk norm ‖p‖_R = max_{|z|≤R} |p(z)|.

use std::cell::RefCell;
use std::collections::HashMap;

use super::Poly;
use crate::scalar::{precision, BigComplex, BigReal};

/// Sampled lower bound and coefficient upper bound for ‖p‖_R.
#[derive(Clone, Debug)]
pub struct DiskNormEstimate {
    pub radius: BigReal,
    pub lower: BigReal,
    pub upper: BigReal,
    pub samples: usize,
}

/// Σ |c_i| R^i, inflated to cover rounding so it never undershoots.
pub fn coeff_upper(p: &Poly, r: &BigReal) -> BigReal {
    let mut acc = BigReal::zero();
    for c in p.coeffs().iter().rev() {
        acc = &acc * r + c.abs();
    }
    acc.inflate(3 * p.len() + 8)
}

/// Default number of circle samples for a polynomial of degree `deg`.
pub fn default_samples(deg: usize) -> usize {
    (4 * deg + 64).max(256)
}

/// Disk-norm estimate on |z| = R.
///
/// `lower` is the sampled maximum minus a rounding allowance, so it is a true
/// lower bound; `upper` is [`coeff_upper`]. Power-of-two sample counts go
/// through an FFT, others through Horner evaluation at each point.
pub fn disk_norm(p: &Poly, r: &BigReal, samples: usize) -> DiskNormEstimate {
    assert!(samples >= 1, "at least one sample");
    let upper = coeff_upper(p, r);
    let values = if samples.is_power_of_two() {
        circle_values_fft(p, r, samples)
    } else {
        circle_values_horner(p, r, samples)
    };
    let sampled = values.iter().map(|v| v.abs()).fold(BigReal::zero(), BigReal::max);
    let log_s = (samples as f64).log2().ceil() as u64;
    let allowance = (&upper * &BigReal::from_u64(8 * log_s + 4 * p.len() as u64 + 16))
        .ldexp(-(precision() as i64));
    let mut lower = sampled - allowance;
    if lower.is_negative() {
        lower = BigReal::zero();
    }
    // Mathematically lower ≤ ‖p‖_R ≤ upper; clamp rounding jitter for monomials.
    if lower > upper {
        lower = upper.clone();
    }
    DiskNormEstimate { radius: r.clone(), lower, upper, samples }
}

fn circle_values_horner(p: &Poly, r: &BigReal, samples: usize) -> Vec<BigComplex> {
    let two_pi = BigReal::pi().ldexp(1);
    (0..samples)
        .map(|k| {
            let theta = &two_pi * &BigReal::from_ratio(k as i64, samples as i64);
            p.eval(&BigComplex::from_polar(r, &theta))
        })
        .collect()
}

fn circle_values_fft(p: &Poly, r: &BigReal, s: usize) -> Vec<BigComplex> {
    // Fold c_i R^i modulo s, then evaluate the DFT at ω^k, ω = e^{2πi/s}.
    let mut a = vec![BigComplex::zero(); s];
    let mut rp = BigReal::one();
    for (i, c) in p.coeffs().iter().enumerate() {
        a[i % s] = &a[i % s] + &c.scale(&rp);
        rp = &rp * r;
    }
    fft(&mut a);
    a
}

thread_local! {
    static TWIDDLES: RefCell<HashMap<(usize, usize), std::rc::Rc<Vec<BigComplex>>>> = RefCell::new(HashMap::new());
}

fn twiddles(s: usize) -> std::rc::Rc<Vec<BigComplex>> {
    let key = (s, precision());
    if let Some(t) = TWIDDLES.with(|m| m.borrow().get(&key).cloned()) {
        return t;
    }
    let two_pi = BigReal::pi().ldexp(1);
    let w: Vec<BigComplex> = (0..s / 2)
        .map(|k| BigComplex::from_polar(&BigReal::one(), &(&two_pi * &BigReal::from_ratio(k as i64, s as i64))))
        .collect();
    let w = std::rc::Rc::new(w);
    TWIDDLES.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() > 32 {
            m.clear();
        }
        m.insert(key, w.clone());
    });
    w
}

/// In-place radix-2 DFT: a_k ← Σ_j a_j ω^{jk}, ω = e^{2πi/n}.
fn fft(a: &mut [BigComplex]) {
    let n = a.len();
    if n <= 1 {
        return;
    }
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let w = twiddles(n);
    let mut len = 2;
    while len <= n {
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let t = &a[start + k + len / 2] * &w[k * step];
                let u = a[start + k].clone();
                a[start + k] = &u + &t;
                a[start + k + len / 2] = &u - &t;
            }
        }
        len <<= 1;
    }
}
