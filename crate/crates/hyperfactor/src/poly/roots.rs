//! Simultaneous root finding (Aberth–Ehrlich).
//!
//! A fast pass in a wide-exponent double type locates every root to roughly
//! machine precision (or to the polynomial's noise floor), then the same
//! iteration runs at the working precision to polish. Starting points come
//! from the Newton polygon of the coefficient magnitudes, which places one
//! circle per annulus of roots instead of a single Cauchy-radius circle.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Poly;
use crate::error::{Error, Result};
use crate::scalar::{precision, BigComplex, BigReal};

#[derive(Clone, Debug)]
pub struct RootOptions {
    /// Sweep budget for the working-precision pass.
    pub max_sweeps: usize,
    /// Sweep budget for the fast pass.
    pub fast_sweeps: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { max_sweeps: 200, fast_sweeps: 400 }
    }
}

/// One approximate zero and its relative residual |p(z)| / Σ|c_i||z|^i.
#[derive(Clone, Debug)]
pub struct RootReport {
    pub root: BigComplex,
    pub residual: f64,
}

/// All deg(p) zeros of a nonconstant polynomial with the default budget.
pub fn roots(p: &Poly) -> Result<Vec<RootReport>> {
    roots_with(p, &RootOptions::default())
}

pub fn roots_with(p: &Poly, opts: &RootOptions) -> Result<Vec<RootReport>> {
    let deg = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::Precondition("roots of a constant polynomial".into())),
    };
    let c = p.coeffs();
    let zeros_at_origin = c.iter().take_while(|x| x.is_zero()).count();
    let core = &c[zeros_at_origin..];
    let d = deg - zeros_at_origin;
    let mut out: Vec<BigComplex> = vec![BigComplex::zero(); zeros_at_origin];
    if d == 1 {
        out.push(-(&core[0] / &core[1]));
    } else if d > 1 {
        out.extend(aberth_full(core, opts)?);
    }
    Ok(out.into_iter().map(|z| RootReport { residual: relative_residual(c, &z), root: z }).collect())
}

fn relative_residual(c: &[BigComplex], z: &BigComplex) -> f64 {
    let mut v = BigComplex::zero();
    let mut s = BigReal::zero();
    let az = z.abs();
    for k in c.iter().rev() {
        v = v.mul_add(z, k);
        s = &s * &az + k.abs();
    }
    if s.is_zero() {
        return 0.0;
    }
    2f64.powf(v.abs().log2_abs() - s.log2_abs())
}

fn aberth_full(c: &[BigComplex], opts: &RootOptions) -> Result<Vec<BigComplex>> {
    let d = c.len() - 1;
    let wc: Vec<Wide> = c.iter().map(Wide::from_big).collect();
    let logs: Vec<f64> = wc.iter().map(|w| w.log2_abs()).collect();
    let mut z = initial_points(&logs);
    let mut frozen = vec![false; d];
    aberth(&wc, &logs, &mut z, &mut frozen, -48.0, 53.0, opts.fast_sweeps);

    let p = precision() as f64;
    let mut zb: Vec<BigComplex> = z.iter().map(|w| w.to_big()).collect();
    let mut frozen = vec![false; d];
    let done = aberth(c, &logs, &mut zb, &mut frozen, 8.0 - p, p, opts.max_sweeps);
    if !done {
        // Clustered roots converge linearly; accept them if the residual sits
        // at the noise floor of the working precision.
        let floor = 24.0 + 2.0 * (d as f64).log2() - p;
        for (i, zi) in zb.iter().enumerate() {
            if !frozen[i] && relative_residual(c, zi).log2() > floor {
                return Err(Error::NonConvergence { degree: d, sweeps: opts.max_sweeps });
            }
        }
    }
    Ok(zb)
}

/// Starting approximations from the upper convex hull of (i, log2|c_i|).
fn initial_points(logs: &[f64]) -> Vec<Wide> {
    let d = logs.len() - 1;
    let pts: Vec<(usize, f64)> = logs.iter().copied().enumerate().filter(|(_, l)| l.is_finite()).collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (x2 as f64 - x1 as f64) * (pt.1 - y1) - (y2 - y1) * (pt.0 as f64 - x1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut z = Vec::with_capacity(d);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let ((ka, la), (kb, lb)) = (w[0], w[1]);
        let n = kb - ka;
        let log_r = (la - lb) / n as f64;
        for j in 0..n {
            let theta = 2.0 * std::f64::consts::PI * (j as f64 / n as f64 + ka as f64 / d as f64) + sigma;
            z.push(Wide::from_polar(log_r, theta));
        }
    }
    z
}

trait Num: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self> {
    fn zero() -> Self;
    fn one() -> Self;
    fn log2_abs(&self) -> f64;
    fn is_zero(&self) -> bool;
    /// z·(1 + tiny) nudge used when the derivative vanishes.
    fn nudge(&self, i: usize) -> Self;
}

/// Runs Gauss–Seidel Aberth sweeps; returns true when every root froze.
///
/// A root freezes when its correction drops below `tol_log2` relative to its
/// modulus, or when |p(z)| is at the rounding floor for `bits` of precision.
fn aberth<N: Num>(c: &[N], logs: &[f64], z: &mut [N], frozen: &mut [bool], tol_log2: f64, bits: f64, max_sweeps: usize) -> bool {
    let d = z.len();
    let noise_slack = (d as f64).log2() + 4.0;
    for _ in 0..max_sweeps {
        let mut active = false;
        for i in 0..d {
            if frozen[i] {
                continue;
            }
            let (pv, dp) = horner2(c, &z[i]);
            let lz = z[i].log2_abs();
            let scale = logs
                .iter()
                .enumerate()
                .map(|(k, l)| l + k as f64 * if lz.is_finite() { lz } else { -1e9 })
                .fold(f64::NEG_INFINITY, f64::max)
                + (d as f64 + 1.0).log2();
            if pv.is_zero() || pv.log2_abs() <= scale - bits + noise_slack {
                frozen[i] = true;
                continue;
            }
            if dp.is_zero() {
                z[i] = z[i].nudge(i);
                active = true;
                continue;
            }
            let w = pv / dp;
            let mut s = N::zero();
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let diff = z[i].clone() - zj.clone();
                    if !diff.is_zero() {
                        s = s + N::one() / diff;
                    }
                }
            }
            let denom = N::one() - w.clone() * s;
            let delta = if denom.is_zero() { w } else { w / denom };
            let ld = delta.log2_abs();
            z[i] = z[i].clone() - delta;
            if ld <= z[i].log2_abs() + tol_log2 {
                frozen[i] = true;
            } else {
                active = true;
            }
        }
        if !active {
            return true;
        }
    }
    frozen.iter().all(|f| *f)
}

fn horner2<N: Num>(c: &[N], z: &N) -> (N, N) {
    let mut p = N::zero();
    let mut dp = N::zero();
    for k in c.iter().rev() {
        dp = dp * z.clone() + p.clone();
        p = p * z.clone() + k.clone();
    }
    (p, dp)
}

impl Num for BigComplex {
    fn zero() -> Self {
        BigComplex::zero()
    }
    fn one() -> Self {
        BigComplex::one()
    }
    fn log2_abs(&self) -> f64 {
        BigComplex::log2_abs(self)
    }
    fn is_zero(&self) -> bool {
        BigComplex::is_zero(self)
    }
    fn nudge(&self, i: usize) -> Self {
        let eps = BigReal::one().ldexp(-(precision() as i64) / 3);
        let rot = BigComplex::from_polar(&eps, &BigReal::from_f64(i as f64 + 0.5));
        self + &(self * &rot) + BigComplex::from_real(eps)
    }
}

/// Complex double with a separate binary exponent: (re + i·im)·2^e.
///
/// Keeps f64 speed without overflow for coefficients like 1/n! at n ~ 10^3.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Wide {
    re: f64,
    im: f64,
    e: i64,
}

fn pow2(k: i64) -> f64 {
    f64::from_bits(((1023 + k) as u64) << 52)
}

impl Wide {
    fn norm(re: f64, im: f64, e: i64) -> Self {
        let m = re.abs().max(im.abs());
        if m == 0.0 || !m.is_finite() {
            return Wide { re: if m.is_finite() { 0.0 } else { re }, im: if m.is_finite() { 0.0 } else { im }, e: 0 };
        }
        let k = ((m.to_bits() >> 52) & 0x7ff) as i64 - 1023;
        let s = pow2(-k);
        Wide { re: re * s, im: im * s, e: e + k }
    }

    pub(crate) fn from_big(z: &BigComplex) -> Self {
        let (mr, er) = z.re.mant_exp();
        let (mi, ei) = z.im.mant_exp();
        match (mr == 0.0, mi == 0.0) {
            (true, true) => Wide { re: 0.0, im: 0.0, e: 0 },
            (false, true) => Self::norm(mr, 0.0, er),
            (true, false) => Self::norm(0.0, mi, ei),
            (false, false) => {
                let e = er.max(ei);
                let sh = |m: f64, x: i64| if e - x > 1000 { 0.0 } else { m * pow2(x - e) };
                Self::norm(sh(mr, er), sh(mi, ei), e)
            }
        }
    }

    pub(crate) fn to_big(self) -> BigComplex {
        BigComplex::new(BigReal::from_f64(self.re).ldexp(self.e), BigReal::from_f64(self.im).ldexp(self.e))
    }

    fn from_polar(log2_r: f64, theta: f64) -> Self {
        let e = log2_r.floor();
        let m = 2f64.powf(log2_r - e);
        Self::norm(m * theta.cos(), m * theta.sin(), e as i64)
    }
}

impl Add for Wide {
    type Output = Wide;
    fn add(self, o: Wide) -> Wide {
        if o.re == 0.0 && o.im == 0.0 {
            return self;
        }
        if self.re == 0.0 && self.im == 0.0 {
            return o;
        }
        let (a, b) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = a.e - b.e;
        if d > 60 {
            return a;
        }
        let s = pow2(-d);
        Wide::norm(a.re + b.re * s, a.im + b.im * s, a.e)
    }
}

impl Neg for Wide {
    type Output = Wide;
    fn neg(self) -> Wide {
        Wide { re: -self.re, im: -self.im, e: self.e }
    }
}

impl Sub for Wide {
    type Output = Wide;
    fn sub(self, o: Wide) -> Wide {
        self + (-o)
    }
}

impl Mul for Wide {
    type Output = Wide;
    fn mul(self, o: Wide) -> Wide {
        Wide::norm(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re, self.e + o.e)
    }
}

impl Div for Wide {
    type Output = Wide;
    fn div(self, o: Wide) -> Wide {
        let den = o.re * o.re + o.im * o.im;
        let re = (self.re * o.re + self.im * o.im) / den;
        let im = (self.im * o.re - self.re * o.im) / den;
        Wide::norm(re, im, self.e - o.e)
    }
}

impl Num for Wide {
    fn zero() -> Self {
        Wide { re: 0.0, im: 0.0, e: 0 }
    }
    fn one() -> Self {
        Wide { re: 1.0, im: 0.0, e: 0 }
    }
    fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            0.5 * (self.re * self.re + self.im * self.im).log2() + self.e as f64
        }
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn nudge(&self, i: usize) -> Self {
        let t = i as f64 + 0.5;
        *self * Wide::norm(1.0 + 1e-6 * t.cos(), 1e-6 * t.sin(), 0) + Wide::norm(1e-6, 0.0, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(rs: &[RootReport]) -> Vec<f64> {
        let mut v: Vec<f64> = rs.iter().map(|r| r.root.re.to_f64()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn quadratic() {
        let rs = roots(&Poly::from_real_f64(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(sorted_re(&rs), vec![-1.0, 1.0]);
        assert!(rs.iter().all(|r| r.residual < 1e-70));
    }

    #[test]
    fn cubic_to_working_precision() {
        let p = Poly::from_real_f64(&[-24.0, 26.0, -9.0, 1.0]);
        let rs = roots(&p).unwrap();
        for (got, want) in sorted_re(&rs).iter().zip([2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        for r in &rs {
            let err = (&r.root - &BigComplex::from_f64(r.root.re.to_f64().round(), 0.0)).abs();
            assert!(err.log2_abs() < -(precision() as f64 - 32.0));
        }
    }

    #[test]
    fn zero_roots_are_exact() {
        let rs = roots(&Poly::from_real_f64(&[0.0, 0.0, -2.0, 1.0])).unwrap();
        assert_eq!(rs.iter().filter(|r| r.root.is_zero()).count(), 2);
    }

    #[test]
    fn wide_round_trip() {
        let z = BigComplex::from_f64(3.5e-200, -1.25e100);
        let w = Wide::from_big(&z);
        let back = w.to_big();
        assert!(((&back - &z).abs() / z.abs()).to_f64() < 1e-15);
        let t = Wide::from_big(&BigComplex::from_f64(0.75, 0.0));
        assert!((t.log2_abs() - 0.75f64.log2()).abs() < 1e-15);
    }
}
