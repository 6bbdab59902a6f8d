//! Independent re-check of a run from its factor list alone.

use crate::error::{Error, Result};
use crate::operator::DiffOperator;
use crate::poly::{Poly, QPoly};
use crate::scalar::{with_precision, BigReal};

use super::measure::{abs_product, measure, product_error};
use super::{FactorList, StageRecord};

/// What a certificate claims about one stage.
#[derive(Clone, Debug)]
pub struct StageClaim {
    pub k: usize,
    pub n_k: usize,
    /// (operator, recorded upper bound).
    pub residuals: Vec<(usize, BigReal)>,
    /// (operator, stage j, recorded upper bound).
    pub continuity: Vec<(usize, usize, BigReal)>,
    pub certified: bool,
}

impl From<&StageRecord> for StageClaim {
    fn from(r: &StageRecord) -> Self {
        StageClaim {
            k: r.k,
            n_k: r.n_k,
            residuals: r.residuals.iter().map(|x| (x.operator, x.measured.upper.clone())).collect(),
            continuity: r.continuity.iter().map(|c| (c.operator, c.stage, c.measured.upper.clone())).collect(),
            certified: r.certified,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyRow {
    pub k: usize,
    pub operator: usize,
    /// None for property (b); Some(j) for continuity against n_j.
    pub against: Option<usize>,
    pub recorded: BigReal,
    pub recomputed: BigReal,
    pub flagged: bool,
}

/// ‖T^{n_k} f_K − p_k‖_k against 2^{1−k}.
#[derive(Clone, Debug)]
pub struct TelescopeRow {
    pub k: usize,
    pub operator: usize,
    pub value: BigReal,
    pub bound: BigReal,
    pub ok: bool,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub telescoping: Vec<TelescopeRow>,
    pub flags: usize,
    pub fully_certified: bool,
}

/// f_0 = 1, f_k = f_{k−1}·∏_{block k}(1 − z/a).
pub fn rebuild_partials(factors: &FactorList) -> Vec<Poly> {
    let mut out = vec![Poly::one()];
    for k in 1..=factors.stages() {
        let next = out[k - 1].mul(&Poly::from_unit_factors(factors.block(k)));
        out.push(next);
    }
    out
}

fn disagree(recorded: &BigReal, recomputed: &BigReal, floor: &BigReal) -> bool {
    let two = BigReal::from_u64(2);
    *recomputed > &(&two * recorded) + floor || *recorded > &(&two * recomputed) + floor
}

/// Recomputes every recorded residual at `bits` from `factors` and flags
/// disagreements beyond a factor of two.
pub fn verify_certificate(operators: &[DiffOperator], factors: &FactorList, claims: &[StageClaim], targets: &[QPoly], bits: usize) -> Result<VerifyReport> {
    let claims: Vec<&StageClaim> = claims.iter().filter(|c| c.n_k > 0).collect();
    if claims.is_empty() {
        return Ok(VerifyReport::default());
    }
    if factors.stage_offsets.first() != Some(&0) || factors.stage_offsets.windows(2).any(|w| w[0] > w[1]) || *factors.stage_offsets.last().unwrap() != factors.factors.len() {
        return Err(Error::Input("stage offsets do not partition the factor list".into()));
    }
    if factors.stages() < claims.len() {
        return Err(Error::Input(format!("{} stage records but only {} factor blocks", claims.len(), factors.stages())));
    }
    if targets.len() < claims.len() {
        return Err(Error::Input("not enough targets for the recorded stages".into()));
    }
    if factors.factors.iter().any(|a| a.is_zero()) {
        return Err(Error::Input("factor list contains a zero".into()));
    }
    with_precision(bits, || {
        let partials = rebuild_partials(factors);
        let errs: Vec<Poly> = (0..partials.len())
            .map(|k| {
                let upto = &factors.factors[..factors.stage_offsets[k]];
                product_error(&abs_product(upto), upto.len(), bits)
            })
            .collect();
        let n_of = |j: usize| claims.iter().find(|c| c.k == j).map(|c| c.n_k);
        let floor = BigReal::one().ldexp(-(bits as i64) / 2);
        let mut rep = VerifyReport { fully_certified: claims.iter().all(|c| c.certified), ..Default::default() };
        for c in &claims {
            let k = c.k;
            let radius = BigReal::from_u64(k as u64);
            let p = targets[k - 1].to_big();
            for (op, recorded) in &c.residuals {
                let t = operators.get(*op).ok_or_else(|| Error::Input(format!("operator index {op} out of range")))?;
                let (_, m) = measure(t, c.n_k, &partials[k], &errs[k], Some(&p), &radius, bits);
                let flagged = disagree(recorded, &m.upper, &floor);
                rep.rows.push(VerifyRow { k, operator: *op, against: None, recorded: recorded.clone(), recomputed: m.upper, flagged });
            }
            for (op, j, recorded) in &c.continuity {
                let t = operators.get(*op).ok_or_else(|| Error::Input(format!("operator index {op} out of range")))?;
                let nj = n_of(*j).ok_or_else(|| Error::Input(format!("continuity refers to missing stage {j}")))?;
                let diff = partials[k].sub(&partials[k - 1]);
                let derr = errs[k].add(&errs[k - 1]);
                let (_, m) = measure(t, nj, &diff, &derr, None, &radius, bits);
                let flagged = disagree(recorded, &m.upper, &floor);
                rep.rows.push(VerifyRow { k, operator: *op, against: Some(*j), recorded: recorded.clone(), recomputed: m.upper, flagged });
            }
        }
        let last = claims.iter().map(|c| c.k).max().unwrap();
        for c in &claims {
            let k = c.k;
            let radius = BigReal::from_u64(k as u64);
            let p = targets[k - 1].to_big();
            let bound = BigReal::one().ldexp(1 - k as i64);
            for (op, _) in &c.residuals {
                let (_, m) = measure(&operators[*op], c.n_k, &partials[last], &errs[last], Some(&p), &radius, bits);
                let value = m.bound();
                rep.telescoping.push(TelescopeRow { k, operator: *op, ok: value <= bound, value, bound: bound.clone() });
            }
        }
        rep.flags = rep.rows.iter().filter(|r| r.flagged).count();
        Ok(rep)
    })
}
