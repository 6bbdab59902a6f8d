//! The stage-by-stage induction that produces f = ∏ (1 − z/a_i).
//!
//! Stage k picks n_k > n_{k-1} and q_k so that f_k = (q_k + 1) f_{k-1}
//! satisfies, on |z| ≤ k:
//!
//! - (a) ‖q_k‖_k < k^{-2}, and every zero of q_k + 1 lies beyond the zeros of q_{k-1} + 1;
//! - (b) ‖T^{n_k} f_k − p_k‖_k < 2^{-k} (for every operator in play);
//! - (c) |q_k'(0)| < 1/k;
//! - (d) q_k(0) = 0 and q_k + 1 has simple zeros;
//! - (e) every prefix of the ordered zeros has ‖1 − ∏(1 − z/a)‖_k < 1/(‖f_{k-1}‖_{k-1} 2^{k-1});
//!
//! plus deg q_k > k and ‖T^{n_j} f_k − T^{n_j} f_{k-1}‖_k < 2^{-k} for j < k.
//! All quantities are measured on f_k rebuilt from the emitted zeros.

mod measure;
pub mod sequence;
mod verify;

use log::{debug, info};

use crate::construction::{finish_candidate, order_zeros, path_for, quotient_candidate, ConstructionConfig, StageWork};
use crate::division::{remainder_bound_constant, too_close};
use crate::error::{Error, Result};
use crate::operator::DiffOperator;
use crate::poly::{coeff_upper, roots, Poly, QPoly};
use crate::scalar::{precision, with_precision, BigComplex, BigReal};

pub use measure::{abs_product, measure, product_error, unit, Decision, Measured};
pub use sequence::{dense_prefix, dense_sequence, first_coefficient, initial_q1, TargetEnumeration};
pub use verify::{rebuild_partials, verify_certificate, StageClaim, TelescopeRow, VerifyReport, VerifyRow};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub stages: usize,
    /// Largest admissible n_k (absolute, not per-stage).
    pub n_max: usize,
    pub precision_bits: usize,
    pub precision_ceiling: usize,
    /// Circle samples for lower bounds; `None` picks from degree.
    pub samples: Option<usize>,
    pub allow_best_effort: bool,
    pub construction: ConstructionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            stages: 6,
            n_max: 300,
            precision_bits: 256,
            precision_ceiling: 4096,
            samples: None,
            allow_best_effort: false,
            construction: ConstructionConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 {
            return Err(Error::Input("need at least one stage".into()));
        }
        if self.precision_bits < 64 || self.precision_ceiling < self.precision_bits {
            return Err(Error::Input("need 64 <= precision_bits <= precision_ceiling".into()));
        }
        self.construction.validate()
    }
}

/// One operator's property-(b) measurement.
#[derive(Clone, Debug)]
pub struct OperatorResidual {
    pub operator: usize,
    pub measured: Measured,
}

/// ‖T_i^{n_j} f_k − T_i^{n_j} f_{k-1}‖_k.
#[derive(Clone, Debug)]
pub struct ContinuityEntry {
    pub operator: usize,
    /// Stage index j (1-based) whose n_j is applied.
    pub stage: usize,
    pub n_j: usize,
    pub measured: Measured,
}

/// Property-(b) values of one search candidate, computed from q before its zeros are extracted.
#[derive(Clone, Debug)]
pub struct TrendPoint {
    pub n: usize,
    pub residuals: Vec<BigReal>,
}

#[derive(Clone, Debug)]
pub struct StageRecord {
    pub k: usize,
    pub n_k: usize,
    pub deg_qk: usize,
    /// max over operators of the rigorous upper bound on ‖T^{n_k} f_k − p_k‖_k.
    pub residual_k: BigReal,
    pub residuals: Vec<OperatorResidual>,
    /// For each j < k, max over operators.
    pub continuity_residuals: Vec<BigReal>,
    pub continuity: Vec<ContinuityEntry>,
    pub q_norm: BigReal,
    pub q1_abs: BigReal,
    pub min_zero_modulus: BigReal,
    pub max_zero_modulus: BigReal,
    pub prev_max_zero_modulus: BigReal,
    pub prefix_product_max: BigReal,
    pub prefix_budget: BigReal,
    pub prefix_sum_max: BigReal,
    pub prefix_sum_bound: BigReal,
    pub certified: bool,
    pub failed_clauses: Vec<String>,
    pub precision_used: usize,
    pub precision_exhausted: bool,
    pub path: String,
    pub r: Option<BigComplex>,
    pub ordering: String,
    pub trend: Vec<TrendPoint>,
    pub diagnostics: StageDiagnostics,
}

/// Quantities reported but not required for certification.
#[derive(Clone, Debug, Default)]
pub struct StageDiagnostics {
    pub q1_below_inv_n: bool,
    pub zeros_beyond_n_pow: bool,
    pub degree_in_window: bool,
    pub reconstruction_error: f64,
    pub remainder_norm: f64,
    /// Vandermonde constant at the zeros of f_{k-1}, when deg f_{k-1} ≤ 12.
    pub omega: Option<f64>,
    pub perturbed: usize,
    pub candidates_tried: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactorList {
    pub factors: Vec<BigComplex>,
    /// d_0 = 0 < d_1 < …, d_k = deg f_k.
    pub stage_offsets: Vec<usize>,
}

impl FactorList {
    pub fn block(&self, k: usize) -> &[BigComplex] {
        &self.factors[self.stage_offsets[k - 1]..self.stage_offsets[k]]
    }

    pub fn stages(&self) -> usize {
        self.stage_offsets.len().saturating_sub(1)
    }
}

pub struct RunState {
    pub operators: Vec<DiffOperator>,
    pub config: RunConfig,
    pub records: Vec<StageRecord>,
    pub factor_list: FactorList,
    /// f_k rebuilt from the emitted zeros.
    pub f_partial: Poly,
    /// 64-bit ∏(1 + z/|a_i|) over the emitted zeros.
    f_abs: Poly,
    /// Lowest precision any emitted block was multiplied at.
    min_bits: usize,
    targets: Vec<QPoly>,
    /// Set when a stage fails without best-effort continuation.
    pub halted: bool,
    pub precision_schedule: Vec<usize>,
}

struct Eval {
    n: usize,
    bits: usize,
    trend: Option<Vec<BigReal>>,
    failed: Vec<String>,
    undecided: bool,
    finished: Option<Finished>,
}

struct Finished {
    work: StageWork,
    path: String,
    f_k: Poly,
    f_abs: Poly,
    residuals: Vec<OperatorResidual>,
    continuity: Vec<ContinuityEntry>,
    q_norm: BigReal,
    q1_abs: BigReal,
    prefix_total: BigReal,
    budget: BigReal,
}

impl Eval {
    fn certified(&self) -> bool {
        self.failed.is_empty() && !self.undecided && self.finished.is_some()
    }
}

fn pow2(e: i64) -> BigReal {
    BigReal::one().ldexp(e)
}

/// Candidate n values: step 1 up to n_prev + 32, then ×1.5, always ending at n_max.
pub fn candidate_ns(n_prev: usize, min_n: usize, n_max: usize) -> Vec<usize> {
    let start = (n_prev + 1).max(min_n);
    let mut out: Vec<usize> = (start..start + 32).collect();
    let mut x = (start + 31) as f64;
    while x < n_max as f64 {
        x = (x * 1.5).ceil();
        out.push(x as usize);
    }
    out.push(n_max);
    out.retain(|&n| n >= min_n && n <= n_max && n > n_prev);
    out.sort_unstable();
    out.dedup();
    out
}

impl RunState {
    pub fn new(operators: Vec<DiffOperator>, config: RunConfig) -> Result<Self> {
        config.validate()?;
        if operators.is_empty() {
            return Err(Error::Input("at least one operator is required".into()));
        }
        for t in &operators {
            t.ensure_nonscalar()?;
        }
        let targets = dense_prefix(&operators[0], config.stages);
        Ok(RunState {
            operators,
            config,
            records: Vec::new(),
            factor_list: FactorList { factors: Vec::new(), stage_offsets: vec![0] },
            f_partial: Poly::one(),
            f_abs: with_precision(64, Poly::one),
            min_bits: usize::MAX,
            targets,
            halted: false,
            precision_schedule: Vec::new(),
        })
    }

    pub fn target(&self, k: usize) -> Poly {
        self.targets[k - 1].to_big()
    }

    pub fn targets(&self) -> &[QPoly] {
        &self.targets
    }

    fn f_err(&self) -> Poly {
        product_error(&self.f_abs, self.factor_list.factors.len(), self.min_bits.min(precision()))
    }

    /// Runs stages until K is reached or a stage halts the run.
    pub fn run(&mut self) -> Result<()> {
        for k in 1..=self.config.stages {
            if self.halted {
                break;
            }
            self.run_stage(k)?;
        }
        Ok(())
    }

    pub fn all_certified(&self) -> bool {
        self.records.len() == self.config.stages && self.records.iter().all(|r| r.certified)
    }

    pub fn precision_exhausted(&self) -> bool {
        self.records.iter().any(|r| r.precision_exhausted && !r.certified)
    }

    pub fn run_stage(&mut self, k: usize) -> Result<()> {
        if k != self.records.len() + 1 {
            return Err(Error::Precondition(format!("stage {k} requested after {} stages", self.records.len())));
        }
        let bits = self.precision_schedule.last().copied().unwrap_or(self.config.precision_bits);
        if k == 1 {
            let rec = with_precision(bits, || self.stage_one(bits))?;
            self.precision_schedule.push(bits);
            self.records.push(rec);
            return Ok(());
        }
        self.search(k, bits)
    }

    fn emit(&mut self, zeros: Vec<BigComplex>, f_k: Poly, f_abs: Poly, bits: usize) {
        self.factor_list.factors.extend(zeros);
        self.factor_list.stage_offsets.push(self.factor_list.factors.len());
        self.f_partial = f_k;
        self.f_abs = f_abs;
        self.min_bits = self.min_bits.min(bits);
    }

    fn stage_one(&mut self, bits: usize) -> Result<StageRecord> {
        let t = &self.operators[0];
        let q1 = initial_q1(t);
        let zs: Vec<BigComplex> = roots(&q1.add(&Poly::one()))?.into_iter().map(|r| r.root).collect();
        let t_bound = zs.iter().map(|z| z.recip().abs()).fold(BigReal::zero(), BigReal::max);
        let outcome = order_zeros(&zs, &t_bound);
        let zeros = outcome.ordered;
        let block_abs = abs_product(&zeros);
        let f1 = Poly::from_unit_factors(&zeros);
        let f_err = product_error(&block_abs, zeros.len(), bits);
        let p1 = self.target(1);
        let one = BigReal::one();
        let (value, mut m) = measure(t, 1, &f1, &f_err, Some(&p1), &one, bits);
        // The stage-1 bound is the identity b‖a_0 z + a_1‖_1 = 1 when φ(0) ≠ 0,
        // so it is met with equality; accept values within rounding of it.
        let d = m.decide(&value, &one, &one, self.config.samples);
        let within = match d {
            Decision::Pass => true,
            _ => m.upper <= &one + &(&one * &pow2(-(bits as i64) / 2)),
        };
        let q1_rebuilt = f1.sub(&Poly::one());
        let (_, dev) = crate::construction::prefix_product_check(&zeros, &BigReal::zero(), None)?;
        let (min_m, max_m) = modulus_range(&zeros);
        let mut failed = Vec::new();
        if !within {
            failed.push("b".to_string());
        }
        info!("stage 1: n=1 deg={} residual={:.3e}", zeros.len(), m.bound().to_f64());
        let residual_k = m.bound();
        let rec = StageRecord {
            k: 1,
            n_k: 1,
            deg_qk: zeros.len(),
            residual_k,
            residuals: vec![OperatorResidual { operator: 0, measured: m }],
            continuity_residuals: Vec::new(),
            continuity: Vec::new(),
            q_norm: coeff_upper(&q1_rebuilt, &one),
            q1_abs: q1_rebuilt.coeff(1).abs(),
            min_zero_modulus: min_m,
            max_zero_modulus: max_m,
            prev_max_zero_modulus: BigReal::zero(),
            prefix_product_max: dev,
            prefix_budget: one.clone(),
            prefix_sum_max: outcome.prefix_max,
            prefix_sum_bound: &outcome.t * &BigReal::from_u64(5).sqrt(),
            certified: failed.is_empty(),
            failed_clauses: failed,
            precision_used: bits,
            precision_exhausted: false,
            path: "initial".into(),
            r: None,
            ordering: outcome.strategy.into(),
            trend: Vec::new(),
            diagnostics: StageDiagnostics { degree_in_window: true, candidates_tried: 1, ..Default::default() },
        };
        self.emit(zeros, f1, block_abs, bits);
        Ok(rec)
    }

    fn search(&mut self, k: usize, start_bits: usize) -> Result<()> {
        let n_prev = self.records.last().unwrap().n_k;
        let m = self.f_partial.degree().unwrap_or(0);
        let min_n = if self.operators[0].j_index() == 0 { m + 1 } else { m.max(1) };
        let ns = candidate_ns(n_prev, min_n, self.config.n_max);
        let mut trend = Vec::new();
        let mut best: Option<(BigReal, usize, usize)> = None;
        let mut exhausted = false;
        let mut accepted: Option<Eval> = None;
        let mut tried = 0usize;
        let mut stage_bits = start_bits;
        for &n in &ns {
            tried += 1;
            let mut bits = stage_bits;
            let ev = loop {
                let ev = self.eval_at(k, n, bits, false)?;
                if ev.undecided && ev.failed.is_empty() {
                    if bits * 2 <= self.config.precision_ceiling {
                        debug!("stage {k} n={n}: undecided at {bits} bits, raising precision");
                        bits *= 2;
                        continue;
                    }
                    exhausted = true;
                }
                break ev;
            };
            if let Some(t) = &ev.trend {
                trend.push(TrendPoint { n, residuals: t.clone() });
                let worst = t.iter().cloned().fold(BigReal::zero(), BigReal::max);
                if best.as_ref().is_none_or(|(b, _, _)| worst < *b) {
                    best = Some((worst, n, ev.bits));
                }
            }
            if let Some(fin) = &ev.finished {
                debug!(
                    "stage {k} n={n} deg={} prefix={:.3e}/{:.3e} min|a|={:.3e}",
                    fin.work.zeros_ordered.len(),
                    fin.prefix_total.to_f64(),
                    fin.budget.to_f64(),
                    fin.work.diagnostics.min_zero_modulus.to_f64()
                );
            }
            debug!("stage {k} n={n} bits={} failed={:?} undecided={}", ev.bits, ev.failed, ev.undecided);
            if ev.certified() {
                stage_bits = ev.bits;
                accepted = Some(ev);
                break;
            }
        }
        let upstream_ok = self.records.iter().all(|r| r.certified);
        let ev = match accepted {
            Some(ev) => Some(ev),
            None => match &best {
                Some((_, n, bits)) => Some(self.eval_at(k, *n, *bits, true)?),
                None => None,
            },
        };
        let Some(ev) = ev.filter(|e| e.finished.is_some()) else {
            info!("stage {k}: no candidate produced a stage polynomial");
            self.halted = true;
            self.records.push(self.empty_record(k, trend, exhausted, tried, stage_bits));
            return Ok(());
        };
        let mut certified = ev.certified();
        let mut failed = ev.failed.clone();
        if ev.undecided && !failed.iter().any(|f| f == "precision") {
            failed.push("precision".into());
        }
        if certified && !upstream_ok {
            certified = false;
            failed.push("upstream best-effort".into());
        }
        let bits = ev.bits;
        let (rec, emitted) = self.make_record(k, ev, certified, failed, trend, exhausted && !certified, tried);
        info!(
            "stage {k}: n={} deg={} residual={:.3e} certified={} failed={:?}",
            rec.n_k,
            rec.deg_qk,
            rec.residual_k.to_f64(),
            rec.certified,
            rec.failed_clauses
        );
        let continue_run = certified || self.config.allow_best_effort;
        self.precision_schedule.push(bits);
        self.records.push(rec);
        if continue_run {
            let (zeros, f_k, f_abs) = emitted;
            with_precision(bits, || self.emit(zeros, f_k, f_abs, bits));
        } else {
            self.halted = true;
        }
        Ok(())
    }

    fn eval_at(&self, k: usize, n: usize, bits: usize, force: bool) -> Result<Eval> {
        with_precision(bits, || match self.eval_candidate(k, n, bits, force) {
            Ok(ev) => Ok(ev),
            Err(Error::NonConvergence { .. }) | Err(Error::Reconstruction(_)) => {
                Ok(Eval { n, bits, trend: None, failed: Vec::new(), undecided: true, finished: None })
            }
            Err(Error::Precondition(msg)) => {
                Ok(Eval { n, bits, trend: None, failed: vec![format!("precondition: {msg}")], undecided: false, finished: None })
            }
            Err(e) => Err(e),
        })
    }

    fn eval_candidate(&self, k: usize, n: usize, bits: usize, force: bool) -> Result<Eval> {
        let t1 = &self.operators[0];
        let radius = BigReal::from_u64(k as u64);
        let tol = pow2(-(k as i64));
        let p = self.target(k);
        let f_prev = &self.f_partial;
        let f_prev_err = self.f_err();
        let path = path_for(t1, &p, &BigReal::from_u64(self.config.stages as u64))?;
        let cand = quotient_candidate(path.as_ref(), t1, f_prev, &p, n, &self.config.construction)?;
        let q = &cand.q;
        let mut failed = Vec::new();
        let mut undecided = false;
        let samples = self.config.samples;
        let prev_radius = BigReal::from_u64(k as u64 - 1);
        let f_prev_norm = &coeff_upper(f_prev, &prev_radius) + &coeff_upper(&f_prev_err, &prev_radius);
        let budget = (&f_prev_norm * &pow2(k as i64 - 1)).recip();
        let inv_k = BigReal::from_u64(k as u64).recip();
        let inv_k2 = BigReal::from_u64((k * k) as u64).recip();
        let mut note = |d: Decision, name: String, failed: &mut Vec<String>| match d {
            Decision::Pass => {}
            Decision::Fail => failed.push(name),
            Decision::Undecided => undecided = true,
        };

        // Screening on q itself.
        let deg = q.degree().unwrap_or(0);
        if deg <= k {
            failed.push("degree".into());
        }
        if coeff_upper(q, &radius) >= inv_k2 {
            failed.push("a:norm".into());
        }
        if q.coeff(1).abs() >= inv_k {
            failed.push("c".into());
        }
        let qp1 = q.add(&Poly::one());
        let g = qp1.mul(f_prev);
        let g_err = product_error(&with_precision(64, || qp1.abs_coeffs().mul(&self.f_abs)), self.factor_list.factors.len() + deg, self.min_bits.min(bits));
        let mut trend = Vec::new();
        for (i, op) in self.operators.iter().enumerate().take(k) {
            let (value, mut m) = measure(op, n, &g, &g_err, Some(&p), &radius, bits);
            let d = m.decide(&value, &radius, &tol, samples);
            trend.push(m.bound());
            note(d, format!("b[{i}]"), &mut failed);
        }
        let qf = q.mul(f_prev);
        for (i, j, nj) in self.continuity_pairs(k) {
            let (value, mut m) = measure(&self.operators[i], nj, &qf, &g_err, None, &radius, bits);
            let d = m.decide(&value, &radius, &tol, samples);
            if d != Decision::Pass {
                debug!(
                    "stage {k} n={n} continuity[{i},{j}] upper={:.3e} lower={:.3e} error={:.3e}",
                    m.upper.to_f64(),
                    m.lower.as_ref().map_or(f64::NAN, |l| l.to_f64()),
                    m.error.to_f64()
                );
            }
            note(d, format!("continuity[{i},{j}]"), &mut failed);
        }
        if deg >= 1 {
            // The first prefix alone has deviation R/|a_1| ≥ R/B for any ordering.
            let bnd = fujiwara_bound(&qp1);
            if &radius / &bnd >= budget {
                failed.push("e:fujiwara".into());
            }
        }
        let mut ev = Eval { n, bits, trend: Some(trend), failed, undecided, finished: None };
        if !(ev.failed.is_empty() || force) || deg == 0 {
            return Ok(ev);
        }
        let mut failed = std::mem::take(&mut ev.failed);
        if force {
            failed.clear();
        }
        let mut undecided = ev.undecided && !force;

        // Full measurement on f_k rebuilt from the ordered zeros.
        let work = finish_candidate(cand, f_prev, &self.config.construction, &radius, Some(&budget))?;
        let zeros = &work.zeros_ordered;
        let s = zeros.len();
        let block = Poly::from_unit_factors(zeros);
        let q_k = block.sub(&Poly::one());
        let f_k = f_prev.mul(&block);
        let block_abs = abs_product(zeros);
        let f_abs = with_precision(64, || self.f_abs.mul(&block_abs));
        let u_bits = self.min_bits.min(bits);
        let f_err = product_error(&f_abs, self.factor_list.factors.len() + s, u_bits);
        let q_err = product_error(&block_abs, s, bits);
        let mut tally = |d: Decision, name: String, failed: &mut Vec<String>| match d {
            Decision::Pass => {}
            Decision::Fail => failed.push(name),
            Decision::Undecided => undecided = true,
        };

        if s <= k {
            failed.push("degree".into());
        }
        let q_norm = &coeff_upper(&q_k, &radius) + &coeff_upper(&q_err, &radius);
        if q_norm >= inv_k2 {
            failed.push("a:norm".into());
        }
        let (min_m, _) = modulus_range(zeros);
        let prev_max = self.records.last().unwrap().max_zero_modulus.clone();
        if &min_m * &(&BigReal::one() - &pow2(-(bits as i64) / 2)) <= prev_max {
            failed.push("a:zero-modulus".into());
        }
        let q1_abs = q_k.coeff(1).abs();
        if &q1_abs + &q_err.coeff(1).abs() >= inv_k {
            failed.push("c".into());
        }
        if !simple_zeros(zeros) {
            failed.push("d".into());
        }
        let prefix_err = prefix_rounding(zeros, &radius, bits);
        let prefix_total = &work.diagnostics.prefix_product_max + &prefix_err;
        if prefix_total >= budget {
            failed.push("e".into());
        }
        let mut residuals = Vec::new();
        for (i, op) in self.operators.iter().enumerate().take(k) {
            let (value, mut m) = measure(op, n, &f_k, &f_err, Some(&p), &radius, bits);
            let d = m.decide(&value, &radius, &tol, samples);
            tally(d, format!("b[{i}]"), &mut failed);
            residuals.push(OperatorResidual { operator: i, measured: m });
        }
        let diff = f_k.sub(f_prev);
        let diff_err = f_err.add(&f_prev_err);
        let mut continuity = Vec::new();
        for (i, j, nj) in self.continuity_pairs(k) {
            let (value, mut m) = measure(&self.operators[i], nj, &diff, &diff_err, None, &radius, bits);
            let d = m.decide(&value, &radius, &tol, samples);
            tally(d, format!("continuity[{i},{j}]"), &mut failed);
            continuity.push(ContinuityEntry { operator: i, stage: j, n_j: nj, measured: m });
        }
        ev.failed = failed;
        ev.undecided = undecided;
        ev.finished = Some(Finished {
            work,
            path: path.name().into(),
            f_k,
            f_abs,
            residuals,
            continuity,
            q_norm,
            q1_abs,
            prefix_total,
            budget,
        });
        Ok(ev)
    }

    /// (operator i, stage j, n_j) with i ≤ j ≤ k − 1 (1-based), 0-based i.
    fn continuity_pairs(&self, k: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.operators.len() {
            for j in (i + 1)..k {
                out.push((i, j, self.records[j - 1].n_k));
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn make_record(&self, k: usize, ev: Eval, certified: bool, failed: Vec<String>, trend: Vec<TrendPoint>, exhausted: bool, tried: usize) -> (StageRecord, (Vec<BigComplex>, Poly, Poly)) {
        let fin = ev.finished.unwrap();
        let w = &fin.work;
        let (min_m, max_m) = modulus_range(&w.zeros_ordered);
        let n = ev.n;
        let residual_k = fin.residuals.iter().map(|r| r.measured.bound()).fold(BigReal::zero(), BigReal::max);
        let continuity_residuals = (1..k)
            .map(|j| fin.continuity.iter().filter(|c| c.stage == j).map(|c| c.measured.bound()).fold(BigReal::zero(), BigReal::max))
            .collect();
        let m = self.f_partial.degree().unwrap_or(0);
        let omega = if (1..=12).contains(&m) {
            with_precision(ev.bits, || {
                let zs: Vec<BigComplex> = roots(&self.f_partial).ok()?.into_iter().map(|r| r.root).collect();
                remainder_bound_constant(&zs).ok().map(|b| b.omega.to_f64())
            })
        } else {
            None
        };
        let diagnostics = StageDiagnostics {
            q1_below_inv_n: fin.q1_abs < BigReal::from_u64(n as u64).recip(),
            zeros_beyond_n_pow: min_m > BigReal::from_f64((n as f64).powf(self.config.construction.exp_zero_radius)),
            degree_in_window: w.diagnostics.degree_in_window,
            reconstruction_error: w.diagnostics.reconstruction_error.to_f64(),
            remainder_norm: w.r_n.max_abs_coeff().to_f64(),
            omega,
            perturbed: w.diagnostics.perturbed,
            candidates_tried: tried,
        };
        let rec = StageRecord {
            k,
            n_k: n,
            deg_qk: w.zeros_ordered.len(),
            residual_k,
            residuals: fin.residuals,
            continuity_residuals,
            continuity: fin.continuity,
            q_norm: fin.q_norm,
            q1_abs: fin.q1_abs,
            min_zero_modulus: min_m,
            max_zero_modulus: max_m,
            prev_max_zero_modulus: self.records.last().unwrap().max_zero_modulus.clone(),
            prefix_product_max: fin.prefix_total,
            prefix_budget: fin.budget,
            prefix_sum_max: w.diagnostics.prefix_sum_max.clone(),
            prefix_sum_bound: w.diagnostics.prefix_sum_bound.clone(),
            certified,
            failed_clauses: failed,
            precision_used: ev.bits,
            precision_exhausted: exhausted,
            path: fin.path,
            r: w.r.clone(),
            ordering: w.diagnostics.ordering.into(),
            trend,
            diagnostics,
        };
        (rec, (w.zeros_ordered.clone(), fin.f_k, fin.f_abs))
    }

    fn empty_record(&self, k: usize, trend: Vec<TrendPoint>, exhausted: bool, tried: usize, bits: usize) -> StageRecord {
        let inf = BigReal::from_f64(f64::INFINITY);
        StageRecord {
            k,
            n_k: 0,
            deg_qk: 0,
            residual_k: inf.clone(),
            residuals: Vec::new(),
            continuity_residuals: Vec::new(),
            continuity: Vec::new(),
            q_norm: inf.clone(),
            q1_abs: inf.clone(),
            min_zero_modulus: BigReal::zero(),
            max_zero_modulus: BigReal::zero(),
            prev_max_zero_modulus: self.records.last().map(|r| r.max_zero_modulus.clone()).unwrap_or_else(BigReal::zero),
            prefix_product_max: inf.clone(),
            prefix_budget: BigReal::zero(),
            prefix_sum_max: inf.clone(),
            prefix_sum_bound: BigReal::zero(),
            certified: false,
            failed_clauses: vec!["no candidate".into()],
            precision_used: bits,
            precision_exhausted: exhausted,
            path: String::new(),
            r: None,
            ordering: String::new(),
            trend,
            diagnostics: StageDiagnostics { candidates_tried: tried, ..Default::default() },
        }
    }
}

fn modulus_range(zeros: &[BigComplex]) -> (BigReal, BigReal) {
    zeros
        .iter()
        .map(|z| z.abs())
        .fold((BigReal::from_f64(f64::INFINITY), BigReal::zero()), |(lo, hi), v| (lo.min(v.clone()), hi.max(v)))
}

/// 2·max_i |c_i/c_d|^{1/(d−i)}: every zero has modulus below this.
pub fn fujiwara_bound(p: &Poly) -> BigReal {
    let d = p.degree().expect("nonzero polynomial");
    let lead = p.coeff(d).abs();
    let mut b = BigReal::zero();
    for i in 0..d {
        let c = p.coeff(i).abs();
        if c.is_zero() {
            continue;
        }
        let ratio = &c / &lead;
        let e = if i == 0 { 0.5 } else { 1.0 };
        let root = (&ratio * &BigReal::from_f64(e)).powf(&BigReal::from_u64((d - i) as u64).recip());
        b = b.max(root);
    }
    (&b * &BigReal::from_u64(2)).inflate(16)
}

fn simple_zeros(zeros: &[BigComplex]) -> bool {
    let scale = zeros.iter().map(|z| z.abs()).fold(BigReal::one(), BigReal::max);
    for i in 0..zeros.len() {
        for j in 0..i {
            if too_close(&zeros[i], &zeros[j], &scale) {
                return false;
            }
        }
    }
    true
}

/// Rounding allowance for prefix products: (4s + 8)·2^{1−P}·∏(1 + R/|a|).
fn prefix_rounding(zeros: &[BigComplex], radius: &BigReal, bits: usize) -> BigReal {
    with_precision(64, || {
        let prod = zeros.iter().fold(BigReal::one(), |acc, a| &acc * &(&BigReal::one() + &(radius / &a.abs())));
        (&(&prod * &unit(bits)) * &BigReal::from_u64(4 * zeros.len() as u64 + 8)).inflate(zeros.len() + 8)
    })
}

/// Concatenated zero blocks, checked against the running product f_K.
pub fn assemble_factors(state: &RunState) -> Result<FactorList> {
    let fl = state.factor_list.clone();
    if fl.factors.is_empty() {
        return Ok(fl);
    }
    let bits = state.precision_schedule.iter().copied().max().unwrap_or(precision());
    with_precision(bits, || {
        let full = Poly::from_unit_factors(&fl.factors);
        let err = &full.max_abs_diff(&state.f_partial) / &state.f_partial.max_abs_coeff();
        if err > pow2(-(bits as i64) / 2) {
            return Err(Error::Reconstruction(format!("factor product differs from f_K by {:.3e} relative", err.to_f64())));
        }
        Ok(fl)
    })
}

/// Builds and runs a construction.
pub fn run(operators: Vec<DiffOperator>, config: RunConfig) -> Result<RunState> {
    let mut st = RunState::new(operators, config)?;
    st.run()?;
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidates() {
        let ns = candidate_ns(3, 1, 300);
        assert_eq!(&ns[..3], &[4, 5, 6]);
        assert_eq!(*ns.last().unwrap(), 300);
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(candidate_ns(3, 1, 5), vec![4, 5]);
        assert_eq!(candidate_ns(10, 50, 60), (50..=60).collect::<Vec<_>>());
    }

    #[test]
    fn fujiwara_dominates_roots() {
        let p = Poly::from_roots(&BigComplex::one(), &[BigComplex::from_f64(3.0, 4.0), BigComplex::from_f64(-1.0, 0.0)]);
        assert!(fujiwara_bound(&p).to_f64() >= 5.0);
    }
}
