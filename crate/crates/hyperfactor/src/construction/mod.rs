//! Stage polynomials q_n with T^n((q_n + 1) f) ≈ p, their zeros, and the
//! orderings that keep partial products of the zeros' linear factors near 1.

pub mod ordering;
pub mod paths;
pub mod tail;

use crate::division::too_close;
use crate::error::{Error, Result};
use crate::operator::{DiffOperator, GrowthConstants, OperatorKind};
use crate::poly::{coeff_upper, roots, Poly};
use crate::scalar::{precision, BigComplex, BigReal};

pub use ordering::{order_with, order_zeros, ordering_by_name, OrderOutcome, OrderingParams, ZeroOrdering};
pub use paths::{path_for, path_registry, AnnihilatorPath, AntiderivativePath, StagePath};
pub use tail::{product_coeffs, product_exact, tail_poly, taylor_tail_bound, TailBound};

#[derive(Clone, Debug)]
pub struct ConstructionConfig {
    /// N = ⌊n^exp_outer⌋ terms in the inner exponential.
    pub exp_outer: f64,
    /// Zeros are expected outside |z| = n^exp_zero_radius.
    pub exp_zero_radius: f64,
    /// deg q_n < n^exp_degree_cap (reported, not enforced).
    pub exp_degree_cap: f64,
    /// Relative spread for repeated zeros; `None` means 2^{-P/4}.
    pub perturbation_scale: Option<f64>,
    /// Circle samples for lower disk-norm estimates; `None` picks from degree.
    pub norm_samples: Option<usize>,
    /// Registered zero-ordering strategy.
    pub ordering: String,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            exp_outer: 1.2,
            exp_zero_radius: 0.7,
            exp_degree_cap: 1.3,
            perturbation_scale: None,
            norm_samples: None,
            ordering: "confinement".into(),
        }
    }
}

impl ConstructionConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.exp_zero_radius && self.exp_zero_radius < 1.0 && 1.0 < self.exp_outer && self.exp_outer < self.exp_degree_cap;
        if !ok {
            return Err(Error::Input("need 0 < exp_zero_radius < 1 < exp_outer < exp_degree_cap".into()));
        }
        if let Some(s) = self.perturbation_scale {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::Input("perturbation_scale must lie in (0, 1)".into()));
            }
        }
        ordering_by_name(&self.ordering, &OrderingParams::default())?;
        Ok(())
    }

    pub fn perturbation(&self) -> BigReal {
        match self.perturbation_scale {
            Some(s) => BigReal::from_f64(s),
            None => BigReal::one().ldexp(-(precision() as i64) / 4),
        }
    }
}

/// Lemma-3 constant r.
///
/// Polynomial symbols: the zero of φ of least modulus (ties by least
/// principal argument). Translations λe^{aD}: r = −sign(Re a)·2^j for the
/// least j ≥ 1 with |e^{−ra}| > max{|λrae|κ, e^3}; on the imaginary axis
/// r = −2^j·conj(a)/|a| instead, so that −ra is real and positive.
pub fn choose_r(t: &DiffOperator, gc: &GrowthConstants) -> Result<BigComplex> {
    t.ensure_nonscalar()?;
    if t.j_index() != 0 {
        return Err(Error::Precondition("r is only used when phi(0) != 0".into()));
    }
    match t.kind() {
        OperatorKind::TaylorPoly { .. } => {
            let sym = t.symbol_poly().unwrap();
            let zs: Vec<BigComplex> = roots(&sym)?.into_iter().map(|r| r.root).collect();
            let tol = BigReal::one().ldexp(-(precision() as i64) / 2);
            let best = zs
                .into_iter()
                .reduce(|a, b| {
                    let (ma, mb) = (a.abs(), b.abs());
                    let gap = &(&ma - &mb).abs() / &ma.clone().max(mb.clone());
                    if gap > tol {
                        if mb < ma {
                            b
                        } else {
                            a
                        }
                    } else if b.arg() < a.arg() {
                        b
                    } else {
                        a
                    }
                })
                .unwrap();
            Ok(best)
        }
        OperatorKind::ScaledTranslation { .. } => {
            let (lambda, a) = t.translation_params().unwrap();
            let abs_a = a.abs();
            let dir = if a.re.is_zero() {
                a.conj().scale(&abs_a.recip())
            } else if a.re.is_negative() {
                BigComplex::from_i64(-1)
            } else {
                BigComplex::one()
            };
            let floor = BigReal::from_u64(3);
            let log_const = &(&lambda.abs().ln() + &abs_a.ln()) + &(&BigReal::one() + &gc.kappa.ln());
            for j in 1..4096 {
                let mag = BigReal::one().ldexp(j);
                let r = -dir.scale(&mag);
                let growth = -(&r * &a).re;
                let need = (&log_const + &mag.ln()).max(floor.clone());
                if growth > need {
                    return Ok(r);
                }
            }
            Err(Error::Precondition("no admissible r below 2^4096".into()))
        }
    }
}

/// h_n = S^n p + (f − S^n p)·E_{n−m−1}(−rz)·E_{⌊n^1.2⌋}(rz), with m = deg f.
pub fn build_h_n(f: &Poly, p: &Poly, r: &BigComplex, n: usize, t: &DiffOperator) -> Result<Poly> {
    Ok(f.add(&paths::h_minus_f(f, p, r, n, t, &ConstructionConfig::default())?))
}

/// Quotient data before zero extraction; cheap enough to screen many n.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub n: usize,
    pub r: Option<BigComplex>,
    /// h_n − f or S_n p.
    pub target: Poly,
    /// Recentred quotient, q(0) = 0 exactly.
    pub q: Poly,
    pub remainder: Poly,
}

/// Builds g_n along `path`, divides by f and recentres.
pub fn quotient_candidate(path: &dyn StagePath, t: &DiffOperator, f: &Poly, p: &Poly, n: usize, cfg: &ConstructionConfig) -> Result<Candidate> {
    let m = f.degree().ok_or_else(|| Error::Precondition("f must be nonzero".into()))?;
    if f.coeff(0).is_zero() {
        return Err(Error::Precondition("f(0) must be nonzero".into()));
    }
    if !p.is_zero() && p.degree().unwrap() >= m {
        return Err(Error::Precondition(format!("need deg p < deg f = {m}")));
    }
    if n < path.min_n(m) {
        return Err(Error::Precondition(format!("n = {n} is below the admissible minimum {}", path.min_n(m))));
    }
    let target = path.target(t, f, p, n, cfg)?;
    let (q, remainder) = Poly::divide(&target, f);
    Ok(Candidate { n, r: path.r().cloned(), target, q: recentre(q), remainder })
}

/// q − q(0), with the constant coefficient set to an exact zero.
pub fn recentre(q: Poly) -> Poly {
    let mut c = q.into_coeffs();
    if let Some(c0) = c.first_mut() {
        *c0 = BigComplex::zero();
    }
    Poly::new(c)
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    /// Upper bound of ‖q_n‖ on |z| ≤ n^0.7.
    pub q_norm_zero_radius: BigReal,
    pub q1_abs: BigReal,
    pub min_zero_modulus: BigReal,
    pub max_zero_modulus: BigReal,
    pub prefix_sum_max: BigReal,
    pub prefix_sum_bound: BigReal,
    pub prefix_product_max: BigReal,
    /// max|∏(1 − z/a) − (q+1)| / max|q+1|.
    pub reconstruction_error: BigReal,
    pub degree_in_window: bool,
    pub perturbed: usize,
    pub ordering: &'static str,
}

#[derive(Clone, Debug)]
pub struct StageWork {
    pub n: usize,
    pub r: Option<BigComplex>,
    /// h_n on the annihilator path, S_n p on the antiderivative path.
    pub h_n: Option<Poly>,
    pub s_n_p: Option<Poly>,
    pub q_n: Poly,
    pub r_n: Poly,
    pub zeros_ordered: Vec<BigComplex>,
    pub diagnostics: Diagnostics,
}

/// Extracts, separates and orders the zeros of q + 1, measuring prefix
/// products on |z| ≤ `radius` against `budget` when given.
pub fn finish_candidate(cand: Candidate, f: &Poly, cfg: &ConstructionConfig, radius: &BigReal, budget: Option<&BigReal>) -> Result<StageWork> {
    let Candidate { n, r, target, q, remainder } = cand;
    let deg = q.degree().filter(|&d| d >= 1).ok_or_else(|| Error::Precondition("q_n vanished after recentring".into()))?;
    let qp1 = q.add(&Poly::one());
    let raw: Vec<BigComplex> = roots(&qp1)?.into_iter().map(|r| r.root).collect();
    let scale = cfg.perturbation();
    let zeros = perturb_repeated_zeros(&raw, &scale);
    let perturbed = raw.iter().zip(&zeros).filter(|(a, b)| a != b).count();
    let q_n = if perturbed > 0 { recentre(Poly::from_unit_factors(&zeros).sub(&Poly::one())) } else { q };

    let params = OrderingParams { radius: radius.to_f64(), ..OrderingParams::default() };
    let primary = ordering_by_name(&cfg.ordering, &params)?;
    let mut outcome = order_with(primary.as_ref(), &zeros, None);
    let mut check = prefix_product_check(&outcome.ordered, radius, budget.cloned().as_ref());
    if let (Ok((false, dev)), Some(_)) = (&check, budget) {
        if outcome.strategy != "power-sum" {
            let alt = order_with(ordering_by_name("power-sum", &params)?.as_ref(), &zeros, None);
            let alt_check = prefix_product_check(&alt.ordered, radius, budget);
            if let Ok((_, alt_dev)) = &alt_check {
                if alt_dev < dev {
                    outcome = alt;
                    check = alt_check;
                }
            }
        }
    }
    let prefix_product_max = match check {
        Ok((_, dev)) => dev,
        Err(_) => BigReal::from_f64(f64::INFINITY),
    };

    let recon = Poly::from_unit_factors(&outcome.ordered);
    let q_plus = q_n.add(&Poly::one());
    let reconstruction_error = &recon.max_abs_diff(&q_plus) / &q_plus.max_abs_coeff();
    let zero_radius = BigReal::from_f64((n as f64).powf(cfg.exp_zero_radius));
    let window = (n as f64).powf(cfg.exp_degree_cap);
    let (min_m, max_m) = outcome.ordered.iter().map(|z| z.abs()).fold((BigReal::from_f64(f64::INFINITY), BigReal::zero()), |(lo, hi), v| (lo.min(v.clone()), hi.max(v)));
    let (h_n, s_n_p) = if r.is_some() { (Some(f.add(&target)), None) } else { (None, Some(target)) };
    let diagnostics = Diagnostics {
        q_norm_zero_radius: coeff_upper(&q_n, &zero_radius),
        q1_abs: q_n.coeff(1).abs(),
        min_zero_modulus: min_m,
        max_zero_modulus: max_m,
        prefix_sum_bound: &outcome.t * &BigReal::from_u64(5).sqrt(),
        prefix_sum_max: outcome.prefix_max.clone(),
        prefix_product_max,
        reconstruction_error,
        degree_in_window: deg >= n.min(deg) && (deg as f64) < window,
        perturbed,
        ordering: outcome.strategy,
    };
    Ok(StageWork { n, r, h_n, s_n_p, q_n, r_n: remainder, zeros_ordered: outcome.ordered, diagnostics })
}

/// Full stage construction with the default path for T.
pub fn build_q_n(t: &DiffOperator, f: &Poly, p: &Poly, n: usize, cfg: &ConstructionConfig, r_ref: &BigReal) -> Result<StageWork> {
    let path = path_for(t, p, r_ref)?;
    let cand = quotient_candidate(path.as_ref(), t, f, p, n, cfg)?;
    finish_candidate(cand, f, cfg, r_ref, None)
}

/// Spreads clusters of (nearly) equal zeros on small circles about their centroid.
pub fn perturb_repeated_zeros(zeros: &[BigComplex], scale: &BigReal) -> Vec<BigComplex> {
    let n = zeros.len();
    let max_mod = zeros.iter().map(|z| z.abs()).fold(BigReal::one(), BigReal::max);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..i {
            if too_close(&zeros[i], &zeros[j], &max_mod) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut out = zeros.to_vec();
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        clusters.entry(root).or_default().push(i);
    }
    let two_pi = &BigReal::pi() * &BigReal::from_u64(2);
    for members in clusters.values().filter(|m| m.len() > 1) {
        let c = members.len();
        let centroid = members.iter().fold(BigComplex::zero(), |s, &i| &s + &zeros[i]).scale(&BigReal::from_u64(c as u64).recip());
        let rad = scale * &centroid.abs();
        for (j, &i) in members.iter().enumerate() {
            let theta = &(&two_pi * &BigReal::from_u64(j as u64)) / &BigReal::from_u64(c as u64);
            out[i] = &centroid + &BigComplex::from_polar(&rad, &theta);
        }
    }
    out
}

/// Max over prefixes of ‖1 − ∏_{j≤J}(1 − z/a_j)‖_R (coefficient upper bound),
/// and whether every prefix is within `eps` (vacuous when `eps` is `None`).
pub fn prefix_product_check(zeros: &[BigComplex], radius: &BigReal, eps: Option<&BigReal>) -> Result<(bool, BigReal)> {
    if let Some(z) = zeros.iter().find(|z| z.abs() <= *radius) {
        return Err(Error::Precondition(format!("zero of modulus {:.4e} inside the disk of radius {:.4e}", z.abs().to_f64(), radius.to_f64())));
    }
    let mut prod = vec![BigComplex::one()];
    let mut worst = BigReal::zero();
    for a in zeros {
        let inv = a.recip();
        prod.push(BigComplex::zero());
        for i in (1..prod.len()).rev() {
            let t = &prod[i - 1] * &inv;
            prod[i] = &prod[i] - &t;
        }
        let mut dev = prod.clone();
        dev[0] = BigComplex::zero();
        worst = worst.max(coeff_upper(&Poly::new(dev), radius));
    }
    let ok = eps.is_none_or(|e| worst <= *e);
    Ok((ok, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::coefficient_bound_c;
    use crate::scalar::QComplex;

    #[test]
    fn choose_r_examples() {
        let one = Poly::one();
        let t = DiffOperator::from_ints(&[1, -1]).unwrap();
        let gc = coefficient_bound_c(&t, &one, &BigReal::one()).unwrap();
        assert!((&choose_r(&t, &gc).unwrap() - &BigComplex::one()).abs().to_f64() < 1e-60);
        let t = DiffOperator::from_ints(&[4, 0, -1]).unwrap();
        assert!((&choose_r(&t, &gc).unwrap() - &BigComplex::from_i64(2)).abs().to_f64() < 1e-60);
        let t = DiffOperator::unit_translation();
        let mut gc10 = gc.clone();
        gc10.kappa = BigReal::from_u64(10);
        assert_eq!(choose_r(&t, &gc10).unwrap().to_f64(), (-8.0, 0.0));
        let t = DiffOperator::translation(QComplex::from_ints(1, 0), QComplex::from_ints(0, 1)).unwrap();
        let r = choose_r(&t, &gc10).unwrap();
        assert!(r.re.to_f64().abs() < 1e-60 && r.im.to_f64() > 0.0);
    }

    #[test]
    fn perturb_examples() {
        let two = BigComplex::from_i64(2);
        let out = perturb_repeated_zeros(&[two.clone(), two], &BigReal::from_f64(1e-6));
        assert!((out[0].re.to_f64() - (2.0 + 2e-6)).abs() < 1e-15);
        assert!((out[1].re.to_f64() - (2.0 - 2e-6)).abs() < 1e-15);
        let d = vec![BigComplex::from_i64(1), BigComplex::from_i64(3)];
        assert_eq!(perturb_repeated_zeros(&d, &BigReal::from_f64(1e-6)), d);
    }

    #[test]
    fn prefix_examples() {
        let (ok, dev) = prefix_product_check(&[], &BigReal::one(), Some(&BigReal::zero())).unwrap();
        assert!(ok && dev.is_zero());
        let a = BigComplex::from_f64(1e6, 0.0);
        let (ok, dev) = prefix_product_check(&[a], &BigReal::one(), Some(&BigReal::from_f64(2e-6))).unwrap();
        assert!(ok && (dev.to_f64() - 1e-6).abs() < 1e-12);
        assert!(prefix_product_check(&[BigComplex::from_f64(0.5, 0.0)], &BigReal::one(), None).is_err());
    }

    #[test]
    fn h_n_degree() {
        let t = DiffOperator::from_ints(&[1, -1]).unwrap();
        let f = Poly::from_real_f64(&[1.0, -0.5]);
        for n in 2..12 {
            let h = build_h_n(&f, &Poly::one(), &BigComplex::one(), n, &t).unwrap();
            assert_eq!(h.degree().unwrap(), paths::floor_pow(n, 1.2) + n - 1);
        }
    }

    #[test]
    fn antiderivative_example() {
        let t = DiffOperator::differentiation();
        let f = Poly::from_real_f64(&[1.0, -1.0]);
        let p = Poly::from_real_f64(&[0.5]);
        let cand = quotient_candidate(&AntiderivativePath, &t, &f, &p, 3, &ConstructionConfig::default()).unwrap();
        let c = BigComplex::from_real(BigReal::from_ratio(-1, 12));
        let want = Poly::new(vec![BigComplex::zero(), c.clone(), c]);
        assert!(cand.q.max_abs_diff(&want).to_f64() < 1e-60);
        assert!(cand.q.coeff(0).is_zero());
    }
}
