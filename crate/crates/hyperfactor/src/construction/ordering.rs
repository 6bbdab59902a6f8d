//! Orderings of a stage's zeros that keep prefix sums of reciprocals small.
//!
//! Strategies implement [`ZeroOrdering`] and are looked up by name, so the
//! driver and CLI can switch between them at run time.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{BigComplex, BigReal};

type Pt = (f64, f64);

/// A rule that permutes reciprocals 1/a_j.
pub trait ZeroOrdering: Send + Sync {
    fn name(&self) -> &'static str;
    /// Returns a permutation of `0..recips.len()`.
    fn order(&self, recips: &[Pt], t: f64) -> Vec<usize>;
}

/// Parameters some strategies need.
#[derive(Clone, Debug)]
pub struct OrderingParams {
    /// Node budget for backtracking search.
    pub budget: usize,
    /// Disk radius the prefix products are measured on (power-sum strategy).
    pub radius: f64,
}

impl Default for OrderingParams {
    fn default() -> Self {
        OrderingParams { budget: 100_000, radius: 1.0 }
    }
}

type Builder = fn(&OrderingParams) -> Box<dyn ZeroOrdering>;

/// Name → strategy constructor.
pub fn registry() -> BTreeMap<&'static str, Builder> {
    let mut m: BTreeMap<&'static str, Builder> = BTreeMap::new();
    m.insert("exhaustive", |_| Box::new(Exhaustive));
    m.insert("greedy", |p| Box::new(Greedy { budget: p.budget }));
    m.insert("confinement", |p| Box::new(Confinement { budget: p.budget }));
    m.insert("power-sum", |p| Box::new(PowerSum { radius: p.radius, terms: 12 }));
    m
}

pub fn ordering_by_name(name: &str, params: &OrderingParams) -> Result<Box<dyn ZeroOrdering>> {
    registry()
        .get(name)
        .map(|b| b(params))
        .ok_or_else(|| Error::Input(format!("unknown ordering strategy {name:?}; known: {:?}", registry().keys().collect::<Vec<_>>())))
}

pub const CONFINEMENT_CONSTANT: f64 = 2.236_067_977_499_79; // √5

fn add(a: Pt, b: Pt) -> Pt {
    (a.0 + b.0, a.1 + b.1)
}

fn norm(a: Pt) -> f64 {
    a.0.hypot(a.1)
}

/// Largest |prefix sum| of `recips` taken in `order`.
pub fn prefix_max(recips: &[Pt], order: &[usize]) -> f64 {
    let mut s = (0.0, 0.0);
    let mut best: f64 = 0.0;
    for &i in order {
        s = add(s, recips[i]);
        best = best.max(norm(s));
    }
    best
}

/// Optimal order by branch and bound; falls back to greedy above 8 elements.
pub struct Exhaustive;

impl ZeroOrdering for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }
    fn order(&self, recips: &[Pt], t: f64) -> Vec<usize> {
        if recips.len() > 8 {
            return Greedy { budget: 0 }.order(recips, t);
        }
        exhaustive(recips)
    }
}

pub fn exhaustive(recips: &[Pt]) -> Vec<usize> {
    fn go(r: &[Pt], used: &mut Vec<bool>, path: &mut Vec<usize>, s: Pt, cur: f64, best: &mut (f64, Vec<usize>)) {
        if cur >= best.0 {
            return;
        }
        if path.len() == r.len() {
            *best = (cur, path.clone());
            return;
        }
        for i in 0..r.len() {
            if !used[i] {
                let ns = add(s, r[i]);
                used[i] = true;
                path.push(i);
                go(r, used, path, ns, cur.max(norm(ns)), best);
                path.pop();
                used[i] = false;
            }
        }
    }
    let mut best = (f64::INFINITY, (0..recips.len()).collect());
    go(recips, &mut vec![false; recips.len()], &mut Vec::new(), (0.0, 0.0), 0.0, &mut best);
    best.1
}

/// Greedy descent on |running sum| with depth-first backtracking toward √5·t.
pub struct Greedy {
    pub budget: usize,
}

impl ZeroOrdering for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }
    fn order(&self, recips: &[Pt], t: f64) -> Vec<usize> {
        let target = CONFINEMENT_CONSTANT * t * (1.0 + 1e-12);
        let plain = greedy(recips);
        if prefix_max(recips, &plain) <= target || self.budget == 0 {
            return plain;
        }
        let mut nodes = 0usize;
        let mut used = vec![false; recips.len()];
        let mut path = Vec::with_capacity(recips.len());
        if backtrack(recips, target, &mut used, &mut path, (0.0, 0.0), &mut nodes, self.budget) {
            path
        } else {
            plain
        }
    }
}

fn greedy(recips: &[Pt]) -> Vec<usize> {
    let mut used = vec![false; recips.len()];
    let mut s = (0.0, 0.0);
    let mut out = Vec::with_capacity(recips.len());
    for _ in 0..recips.len() {
        let i = (0..recips.len())
            .filter(|&i| !used[i])
            .min_by(|&a, &b| norm(add(s, recips[a])).partial_cmp(&norm(add(s, recips[b]))).unwrap())
            .unwrap();
        used[i] = true;
        s = add(s, recips[i]);
        out.push(i);
    }
    out
}

fn backtrack(r: &[Pt], target: f64, used: &mut [bool], path: &mut Vec<usize>, s: Pt, nodes: &mut usize, budget: usize) -> bool {
    if path.len() == r.len() {
        return true;
    }
    let mut cand: Vec<(f64, usize)> = (0..r.len()).filter(|&i| !used[i]).map(|i| (norm(add(s, r[i])), i)).collect();
    cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (v, i) in cand {
        if v > target {
            break;
        }
        *nodes += 1;
        if *nodes > budget {
            return false;
        }
        used[i] = true;
        path.push(i);
        if backtrack(r, target, used, path, add(s, r[i]), nodes, budget) {
            return true;
        }
        path.pop();
        used[i] = false;
    }
    false
}

/// Exhaustive for small sets, greedy with backtracking otherwise, then the
/// angular polygon order as a fallback; returns the best of those tried.
pub struct Confinement {
    pub budget: usize,
}

impl ZeroOrdering for Confinement {
    fn name(&self) -> &'static str {
        "confinement"
    }
    fn order(&self, recips: &[Pt], t: f64) -> Vec<usize> {
        if recips.len() <= 8 {
            return exhaustive(recips);
        }
        let target = CONFINEMENT_CONSTANT * t * (1.0 + 1e-12);
        let g = Greedy { budget: self.budget }.order(recips, t);
        let gm = prefix_max(recips, &g);
        if gm <= target {
            return g;
        }
        let poly = polygon_order(recips);
        if prefix_max(recips, &poly) < gm {
            poly
        } else {
            g
        }
    }
}

/// Half-plane rule: each step takes the unused vector pointing most against
/// the running sum, sweeping the vectors around the origin like the edges
/// of a convex polygon.
fn polygon_order(recips: &[Pt]) -> Vec<usize> {
    let mut used = vec![false; recips.len()];
    let mut s = (0.0, 0.0);
    let mut out = Vec::with_capacity(recips.len());
    for _ in 0..recips.len() {
        let sn = norm(s);
        let i = (0..recips.len())
            .filter(|&i| !used[i])
            .min_by(|&a, &b| {
                let key = |i: usize| {
                    if sn == 0.0 {
                        -norm(recips[i])
                    } else {
                        (s.0 * recips[i].0 + s.1 * recips[i].1) / (sn * norm(recips[i]).max(f64::MIN_POSITIVE))
                    }
                };
                key(a).partial_cmp(&key(b)).unwrap()
            })
            .unwrap();
        used[i] = true;
        s = add(s, recips[i]);
        out.push(i);
    }
    out
}

/// Greedy on the log of the prefix product: with P_k = Σ_{chosen} a_j^{-k},
/// log ∏(1 − z/a_j) = −Σ_k P_k z^k / k, so Σ_k R^k |P_k| / k controls
/// ‖1 − ∏(1 − z/a_j)‖_R.
pub struct PowerSum {
    pub radius: f64,
    pub terms: usize,
}

impl ZeroOrdering for PowerSum {
    fn name(&self) -> &'static str {
        "power-sum"
    }
    fn order(&self, recips: &[Pt], _t: f64) -> Vec<usize> {
        let kmax = self.terms.max(1);
        let powers: Vec<Vec<Pt>> = recips
            .iter()
            .map(|&(x, y)| {
                let mut v = Vec::with_capacity(kmax);
                let mut p = (x, y);
                for _ in 0..kmax {
                    v.push(p);
                    p = (p.0 * x - p.1 * y, p.0 * y + p.1 * x);
                }
                v
            })
            .collect();
        let weights: Vec<f64> = (1..=kmax).map(|k| self.radius.powi(k as i32) / k as f64).collect();
        let mut sums = vec![(0.0, 0.0); kmax];
        let mut used = vec![false; recips.len()];
        let mut out = Vec::with_capacity(recips.len());
        for _ in 0..recips.len() {
            let cost = |i: usize| -> f64 { (0..kmax).map(|k| weights[k] * norm(add(sums[k], powers[i][k]))).sum() };
            let i = (0..recips.len())
                .filter(|&i| !used[i])
                .min_by(|&a, &b| cost(a).partial_cmp(&cost(b)).unwrap())
                .unwrap();
            used[i] = true;
            for k in 0..kmax {
                sums[k] = add(sums[k], powers[i][k]);
            }
            out.push(i);
        }
        out
    }
}

/// An ordering together with its achieved bound.
#[derive(Clone, Debug)]
pub struct OrderOutcome {
    pub ordered: Vec<BigComplex>,
    /// max_J |Σ_{j≤J} 1/a_j| at working precision.
    pub prefix_max: BigReal,
    /// t = max(max_j |1/a_j|, |Σ_j 1/a_j|).
    pub t: BigReal,
    /// Whether prefix_max ≤ √5·t.
    pub bound_met: bool,
    pub strategy: &'static str,
}

/// Orders `zeros` with the named strategy; `t` defaults to the smallest value
/// satisfying the preconditions.
pub fn order_with(strategy: &dyn ZeroOrdering, zeros: &[BigComplex], t: Option<&BigReal>) -> OrderOutcome {
    let recip_big: Vec<BigComplex> = zeros.iter().map(|z| z.recip()).collect();
    let t = t.cloned().unwrap_or_else(|| {
        let total = recip_big.iter().fold(BigComplex::zero(), |s, x| &s + x).abs();
        recip_big.iter().map(|x| x.abs()).fold(total, BigReal::max)
    });
    let recips: Vec<Pt> = recip_big.iter().map(|r| r.to_f64()).collect();
    let perm = strategy.order(&recips, t.to_f64());
    let mut s = BigComplex::zero();
    let mut pm = BigReal::zero();
    for &i in &perm {
        s = &s + &recip_big[i];
        pm = pm.max(s.abs());
    }
    let bound = &t * &BigReal::from_u64(5).sqrt();
    OrderOutcome {
        ordered: perm.iter().map(|&i| zeros[i].clone()).collect(),
        bound_met: pm <= bound,
        prefix_max: pm,
        t,
        strategy: strategy.name(),
    }
}

/// Default confinement ordering.
pub fn order_zeros(zeros: &[BigComplex], t: &BigReal) -> OrderOutcome {
    order_with(&Confinement { budget: OrderingParams::default().budget }, zeros, Some(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<BigComplex> {
        v.iter().map(|&(x, y)| BigComplex::from_f64(x, y).recip()).collect()
    }

    #[test]
    fn two_opposite() {
        let out = order_zeros(&pts(&[(1.0, 0.0), (-1.0, 0.0)]), &BigReal::one());
        assert!((out.prefix_max.to_f64() - 1.0).abs() < 1e-12 && out.bound_met);
    }

    #[test]
    fn four_axes() {
        let out = order_zeros(&pts(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]), &BigReal::one());
        assert!(out.prefix_max.to_f64() <= 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn registry_knows_all() {
        for name in ["exhaustive", "greedy", "confinement", "power-sum"] {
            assert_eq!(ordering_by_name(name, &OrderingParams::default()).unwrap().name(), name);
        }
        assert!(ordering_by_name("nope", &OrderingParams::default()).is_err());
    }
}
