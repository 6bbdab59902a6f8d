//! JSON formats: operator specs and self-contained run certificates.
//!
//! Every number is a decimal string. Floating values carry
//! ⌈P·log10 2⌉ + 2 significant digits so they re-parse to the same value
//! at P bits; operator data and targets are exact rationals ("a/b").

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::driver::{verify_certificate, FactorList, RunState, StageClaim, StageRecord, VerifyReport};
use crate::error::{Error, Result};
use crate::operator::{DiffOperator, OperatorKind};
use crate::poly::QPoly;
use crate::scalar::{with_precision, BigComplex, BigReal, QComplex};

pub const FORMAT_VERSION: &str = concat!("hyperfactor ", env!("CARGO_PKG_VERSION"));

pub type Pair = [String; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OperatorSpec {
    Poly { coeffs: Vec<Pair> },
    Translation { lambda: Pair, a: Pair },
}

/// Parses "3", "-0.25", "1.5e-3" or "2/7" to an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Input(format!("not a number: {s:?}"));
    if t.contains('/') {
        let r = BigRational::from_str(t).map_err(|_| bad())?;
        return Ok(r);
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = BigInt::from_str(&format!("{int}{frac}0")).map_err(|_| bad())? / BigInt::from(10);
    let scale = exp - frac.len() as i64;
    if scale.unsigned_abs() > 10_000 {
        return Err(Error::Input(format!("exponent out of range in {s:?}")));
    }
    let ten = BigInt::from(10).pow(scale.unsigned_abs() as u32);
    let mut r = if scale >= 0 { BigRational::from_integer(digits * ten) } else { BigRational::new(digits, ten) };
    if neg {
        r = -r;
    }
    Ok(r)
}

fn rat_str(r: &BigRational) -> String {
    r.to_string()
}

fn q_pair(z: &QComplex) -> Pair {
    [rat_str(&z.re), rat_str(&z.im)]
}

fn parse_q(p: &Pair) -> Result<QComplex> {
    Ok(QComplex::new(parse_rational(&p[0])?, parse_rational(&p[1])?))
}

impl OperatorSpec {
    pub fn from_operator(t: &DiffOperator) -> Self {
        match t.kind() {
            OperatorKind::TaylorPoly { coeffs } => OperatorSpec::Poly { coeffs: coeffs.iter().map(q_pair).collect() },
            OperatorKind::ScaledTranslation { lambda, shift } => OperatorSpec::Translation { lambda: q_pair(lambda), a: q_pair(shift) },
        }
    }

    /// Rejects scalar and otherwise ill-formed operators with a message naming the condition.
    pub fn to_operator(&self) -> Result<DiffOperator> {
        let t = match self {
            OperatorSpec::Poly { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::Input("poly operator needs at least one coefficient".into()));
                }
                DiffOperator::polynomial(coeffs.iter().map(parse_q).collect::<Result<_>>()?)?
            }
            OperatorSpec::Translation { lambda, a } => DiffOperator::translation(parse_q(lambda)?, parse_q(a)?)?,
        };
        t.ensure_nonscalar()?;
        Ok(t)
    }
}

/// Reads either a single spec object or a list of them.
pub fn parse_operator_specs(json: &str) -> Result<Vec<DiffOperator>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(OperatorSpec),
        Many(Vec<OperatorSpec>),
    }
    let parsed: OneOrMany = serde_json::from_str(json).map_err(|e| Error::Input(format!("operator spec: {e}")))?;
    let specs = match parsed {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    };
    if specs.is_empty() {
        return Err(Error::Input("operator spec list is empty".into()));
    }
    specs.iter().map(OperatorSpec::to_operator).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub stages: usize,
    pub n_max: usize,
    pub precision_bits: usize,
    pub precision_ceiling: usize,
    pub samples: Option<usize>,
    pub allow_best_effort: bool,
    pub exp_outer: f64,
    pub exp_zero_radius: f64,
    pub exp_degree_cap: f64,
    pub ordering: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredEntry {
    pub operator: usize,
    /// Stage j whose n_j was applied (continuity entries only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stage: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_j: Option<usize>,
    pub upper: String,
    pub lower: Option<String>,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendEntry {
    pub n: usize,
    pub residuals: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsEntry {
    pub q1_below_inv_n: bool,
    pub zeros_beyond_n_pow: bool,
    pub degree_in_window: bool,
    pub reconstruction_error: f64,
    pub remainder_norm: f64,
    pub omega: Option<f64>,
    pub perturbed: usize,
    pub candidates_tried: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub k: usize,
    pub n_k: usize,
    pub deg_qk: usize,
    pub residual_k: String,
    pub residuals: Vec<MeasuredEntry>,
    pub continuity_residuals: Vec<String>,
    pub continuity: Vec<MeasuredEntry>,
    pub q_norm: String,
    pub q1_abs: String,
    pub min_zero_modulus: String,
    pub max_zero_modulus: String,
    pub prev_max_zero_modulus: String,
    pub prefix_product_max: String,
    pub prefix_budget: String,
    pub prefix_sum_max: String,
    pub prefix_sum_bound: String,
    pub certified: bool,
    pub failed_clauses: Vec<String>,
    pub precision_used: usize,
    pub precision_exhausted: bool,
    pub path: String,
    pub r: Option<Pair>,
    pub ordering: String,
    pub trend: Vec<TrendEntry>,
    pub diagnostics: DiagnosticsEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub version: String,
    pub operators: Vec<OperatorSpec>,
    pub config: ConfigEcho,
    /// Exact targets p_1, …, p_K as coefficient lists.
    pub targets: Vec<Vec<Pair>>,
    pub certified: bool,
    pub stages: Vec<StageEntry>,
    /// Significant digits used for every floating value below.
    pub digits: usize,
    pub factors: Vec<Pair>,
    pub stage_offsets: Vec<usize>,
    pub precision_schedule: Vec<usize>,
}

fn num(x: &BigReal, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_negative() { "-inf" } else { "inf" }.into();
    }
    x.to_decimal(digits)
}

fn parse_num(s: &str) -> Result<BigReal> {
    match s.trim() {
        "inf" => Ok(BigReal::from_f64(f64::INFINITY)),
        "-inf" => Ok(BigReal::from_f64(f64::NEG_INFINITY)),
        t => BigReal::parse(t).map_err(Error::Input),
    }
}

fn pair(z: &BigComplex, digits: usize) -> Pair {
    [num(&z.re, digits), num(&z.im, digits)]
}

fn stage_entry(r: &StageRecord, digits: usize) -> StageEntry {
    let n = |x: &BigReal| num(x, digits);
    StageEntry {
        k: r.k,
        n_k: r.n_k,
        deg_qk: r.deg_qk,
        residual_k: n(&r.residual_k),
        residuals: r
            .residuals
            .iter()
            .map(|x| MeasuredEntry {
                operator: x.operator,
                stage: None,
                n_j: None,
                upper: n(&x.measured.upper),
                lower: x.measured.lower.as_ref().map(n),
                error: n(&x.measured.error),
            })
            .collect(),
        continuity_residuals: r.continuity_residuals.iter().map(n).collect(),
        continuity: r
            .continuity
            .iter()
            .map(|c| MeasuredEntry {
                operator: c.operator,
                stage: Some(c.stage),
                n_j: Some(c.n_j),
                upper: n(&c.measured.upper),
                lower: c.measured.lower.as_ref().map(n),
                error: n(&c.measured.error),
            })
            .collect(),
        q_norm: n(&r.q_norm),
        q1_abs: n(&r.q1_abs),
        min_zero_modulus: n(&r.min_zero_modulus),
        max_zero_modulus: n(&r.max_zero_modulus),
        prev_max_zero_modulus: n(&r.prev_max_zero_modulus),
        prefix_product_max: n(&r.prefix_product_max),
        prefix_budget: n(&r.prefix_budget),
        prefix_sum_max: n(&r.prefix_sum_max),
        prefix_sum_bound: n(&r.prefix_sum_bound),
        certified: r.certified,
        failed_clauses: r.failed_clauses.clone(),
        precision_used: r.precision_used,
        precision_exhausted: r.precision_exhausted,
        path: r.path.clone(),
        r: r.r.as_ref().map(|z| pair(z, digits)),
        ordering: r.ordering.clone(),
        trend: r.trend.iter().map(|t| TrendEntry { n: t.n, residuals: t.residuals.iter().map(n).collect() }).collect(),
        diagnostics: DiagnosticsEntry {
            q1_below_inv_n: r.diagnostics.q1_below_inv_n,
            zeros_beyond_n_pow: r.diagnostics.zeros_beyond_n_pow,
            degree_in_window: r.diagnostics.degree_in_window,
            reconstruction_error: r.diagnostics.reconstruction_error,
            remainder_norm: r.diagnostics.remainder_norm,
            omega: r.diagnostics.omega,
            perturbed: r.diagnostics.perturbed,
            candidates_tried: r.diagnostics.candidates_tried,
        },
    }
}

impl CertificateFile {
    pub fn from_run(state: &RunState) -> Self {
        let bits = state.precision_schedule.iter().copied().max().unwrap_or(state.config.precision_bits);
        let digits = BigReal::roundtrip_digits(bits);
        let c = &state.config;
        CertificateFile {
            version: FORMAT_VERSION.into(),
            operators: state.operators.iter().map(OperatorSpec::from_operator).collect(),
            config: ConfigEcho {
                stages: c.stages,
                n_max: c.n_max,
                precision_bits: c.precision_bits,
                precision_ceiling: c.precision_ceiling,
                samples: c.samples,
                allow_best_effort: c.allow_best_effort,
                exp_outer: c.construction.exp_outer,
                exp_zero_radius: c.construction.exp_zero_radius,
                exp_degree_cap: c.construction.exp_degree_cap,
                ordering: c.construction.ordering.clone(),
            },
            targets: state.targets().iter().map(|p| p.coeffs().iter().map(q_pair).collect()).collect(),
            certified: state.all_certified(),
            stages: state.records.iter().map(|r| stage_entry(r, digits)).collect(),
            digits,
            factors: state.factor_list.factors.iter().map(|z| pair(z, digits)).collect(),
            stage_offsets: state.factor_list.stage_offsets.clone(),
            precision_schedule: state.precision_schedule.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Input(format!("certificate: {e}")))
    }

    /// Highest precision used by the run, and hence the parse precision.
    pub fn bits(&self) -> usize {
        self.precision_schedule.iter().copied().max().unwrap_or(self.config.precision_bits)
    }

    pub fn operators(&self) -> Result<Vec<DiffOperator>> {
        self.operators.iter().map(OperatorSpec::to_operator).collect()
    }

    pub fn targets(&self) -> Result<Vec<QPoly>> {
        self.targets.iter().map(|cs| Ok(QPoly::new(cs.iter().map(parse_q).collect::<Result<_>>()?))).collect()
    }

    /// Factors parsed at the certificate's precision.
    pub fn factor_list(&self) -> Result<FactorList> {
        with_precision(self.bits(), || {
            let factors = self
                .factors
                .iter()
                .map(|p| Ok(BigComplex::new(parse_num(&p[0])?, parse_num(&p[1])?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(FactorList { factors, stage_offsets: self.stage_offsets.clone() })
        })
    }

    pub fn claims(&self) -> Result<Vec<StageClaim>> {
        with_precision(self.bits(), || {
            self.stages
                .iter()
                .map(|s| {
                    let residuals = s.residuals.iter().map(|m| Ok((m.operator, parse_num(&m.upper)?))).collect::<Result<_>>()?;
                    let continuity = s
                        .continuity
                        .iter()
                        .map(|m| {
                            let j = m.stage.ok_or_else(|| Error::Input("continuity entry without stage".into()))?;
                            Ok((m.operator, j, parse_num(&m.upper)?))
                        })
                        .collect::<Result<_>>()?;
                    Ok(StageClaim { k: s.k, n_k: s.n_k, residuals, continuity, certified: s.certified })
                })
                .collect()
        })
    }

    /// Recomputes every recorded residual from the factor list alone.
    pub fn verify(&self) -> Result<VerifyReport> {
        let ops = self.operators()?;
        let targets = self.targets()?;
        let factors = self.factor_list()?;
        let claims = self.claims()?;
        verify_certificate(&ops, &factors, &claims, &targets, self.bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("2/4").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("1.5e-3").unwrap(), BigRational::new(3.into(), 2000.into()));
        assert_eq!(parse_rational("12e2").unwrap(), BigRational::from_integer(1200.into()));
        assert_eq!(parse_rational(".5").unwrap(), BigRational::new(1.into(), 2.into()));
        for bad in ["", "x", "1..2", "1/0x", "e5", "-"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn operator_specs() {
        let ops = parse_operator_specs(r#"{"kind":"poly","coeffs":[["2","0"],["1","0"]]}"#).unwrap();
        assert_eq!(ops[0], DiffOperator::from_ints(&[2, 1]).unwrap());
        let ops = parse_operator_specs(r#"[{"kind":"translation","lambda":["1","0"],"a":["1","0"]}]"#).unwrap();
        assert_eq!(ops[0], DiffOperator::unit_translation());
        assert!(parse_operator_specs(r#"{"kind":"poly","coeffs":[["3","0"]]}"#).is_err());
        assert!(parse_operator_specs(r#"{"kind":"translation","lambda":["1","0"],"a":["0","0"]}"#).is_err());
        assert!(parse_operator_specs(r#"{"kind":"poly""#).is_err());
        assert!(parse_operator_specs("[]").is_err());
    }

    #[test]
    fn spec_round_trip() {
        let t = DiffOperator::polynomial(vec![QComplex::ratio(1, 3), QComplex::from_ints(0, -2)]).unwrap();
        let spec = OperatorSpec::from_operator(&t);
        assert_eq!(spec.to_operator().unwrap(), t);
    }
}
