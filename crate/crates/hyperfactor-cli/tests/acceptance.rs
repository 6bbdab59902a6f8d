//! End-to-end acceptance: one PASS/FAIL line per criterion.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hyperfactor::certificate::CertificateFile;
use hyperfactor::construction::ordering::{exhaustive, prefix_max, CONFINEMENT_CONSTANT};
use hyperfactor::construction::{order_zeros, path_for, product_exact, quotient_candidate, taylor_tail_bound, ConstructionConfig};
use hyperfactor::division::{remainder_bound_constant, remainder_via_interpolation};
use hyperfactor::operator::{coefficient_bound_c, growth_bound, right_inverse_s, right_inverse_s_pow, DiffOperator};
use hyperfactor::poly::{coeff_upper, Poly, QPoly};
use hyperfactor::scalar::{with_precision, BigComplex, BigReal, QComplex};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: usize = 256;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn pow2(e: i64) -> BigReal {
    BigReal::one().ldexp(e)
}

fn q_of(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn unit_box(rng: &mut ChaCha8Rng) -> QComplex {
    QComplex::new(q_of(rng.gen_range(-1.0..1.0)), q_of(rng.gen_range(-1.0..1.0)))
}

fn random_taylor(rng: &mut ChaCha8Rng, max_deg: usize) -> DiffOperator {
    loop {
        let d = rng.gen_range(1..=max_deg);
        let c: Vec<QComplex> = (0..=d).map(|_| unit_box(rng)).collect();
        if let Ok(t) = DiffOperator::polynomial(c) {
            if t.j_index() == 0 && !t.is_scalar() {
                return t;
            }
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> Poly {
    let d = rng.gen_range(0..=max_deg);
    Poly::from_f64(&(0..=d).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect::<Vec<_>>())
}

fn ints(c: &[i64]) -> Poly {
    QPoly::from_ints(c).to_big()
}

fn right_inverse_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tol = pow2(-224);
    let mut worst = BigReal::zero();
    let mut bad = 0;
    with_precision(P, || {
        for _ in 0..200 {
            let t = random_taylor(&mut rng, 4);
            let p = random_poly(&mut rng, 6);
            let back = t.apply(&right_inverse_s(&t, &p).unwrap());
            let err = back.max_abs_diff(&p);
            if err > tol {
                bad += 1;
            }
            worst = worst.clone().max(err);
        }
    });
    let secs = start.elapsed().as_secs_f64();
    outcome(bad == 0 && secs < 10.0, format!("worst 2^{:.1}, {bad} over 2^-224, {secs:.2}s", worst.log2_abs()))
}

fn coefficient_bound() -> Outcome {
    let start = Instant::now();
    let mut bad = 0;
    let mut margin = f64::INFINITY;
    with_precision(P, || {
        let t = DiffOperator::from_ints(&[1, -1]).unwrap();
        let p = ints(&[1, 0, 0, 1]);
        let c = coefficient_bound_c(&t, &p, &BigReal::one()).unwrap().c;
        for n in 1..=25 {
            let cn = c.powi(n);
            for co in right_inverse_s_pow(&t, n, &p).unwrap().coeffs() {
                let a = co.abs();
                if a >= cn {
                    bad += 1;
                }
                margin = margin.min(cn.log2_abs() - a.log2_abs());
            }
        }
    });
    let secs = start.elapsed().as_secs_f64();
    outcome(bad == 0 && secs < 5.0, format!("{bad} violations, min log2 margin {margin:.1}, {secs:.2}s"))
}

fn growth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    with_precision(P, || {
        for i in 0..50 {
            let t = if i % 5 == 4 {
                let lambda = unit_box(&mut rng);
                let mut a = unit_box(&mut rng);
                if a.norm_sqr() == BigRational::from_integer(0.into()) {
                    a = QComplex::from_ints(1, 0);
                }
                DiffOperator::translation(if lambda.norm_sqr() == BigRational::from_integer(0.into()) { QComplex::from_ints(1, 0) } else { lambda }, a).unwrap()
            } else {
                random_taylor(&mut rng, 4)
            };
            let p = random_poly(&mut rng, 5);
            let n = rng.gen_range(0..=15);
            let r = BigReal::from_u64(if rng.gen_bool(0.5) { 1 } else { 5 });
            if coeff_upper(&t.apply_n(n, &p), &r) > growth_bound(&t, &p, &r, n) {
                bad += 1;
            }
        }
    });
    outcome(bad == 0, format!("{bad} violations in 50 draws"))
}

fn tail_structure() -> Outcome {
    let mut bad = 0;
    for n in 1..=24usize {
        for m in 0..n {
            let p = product_exact(m, n);
            if p.coeff(0) != QComplex::from_ints(1, 0) || (1..=m).any(|k| p.coeff(k) != QComplex::from_ints(0, 0)) {
                bad += 1;
            }
        }
    }
    let mut over = 0;
    with_precision(P, || {
        let r = BigComplex::from_f64(0.01, 0.0);
        for m in 4..=10usize {
            for n in [m + 1, 2 * m, 24] {
                let b = taylor_tail_bound(m, n, &r, &BigReal::one(), 0.9).unwrap();
                if b.measured_upper > b.bound {
                    over += 1;
                }
            }
        }
    });
    outcome(bad == 0 && over == 0, format!("{bad} structure violations, {over} bound violations"))
}

fn remainder_control() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut mismatched, mut over) = (0, 0);
    with_precision(P, || {
        let mut done = 0;
        while done < 100 {
            let m = rng.gen_range(1..=6);
            let zs: Vec<BigComplex> = (0..m).map(|_| BigComplex::from_f64(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
            let Ok(bound) = remainder_bound_constant(&zs) else { continue };
            done += 1;
            let f = Poly::from_unit_factors(&zs);
            let g = random_poly(&mut rng, 14);
            let (_, rem) = Poly::divide(&g, &f);
            let interp = remainder_via_interpolation(&g, &bound);
            let scale = rem.max_abs_coeff().max(g.max_abs_coeff()).max(BigReal::one());
            if &interp.max_abs_diff(&rem) / &scale > pow2(-((P - 40) as i64)) {
                mismatched += 1;
            }
            let r = &zs.iter().map(|a| a.abs()).fold(BigReal::zero(), BigReal::max) + &BigReal::one();
            let cap = &bound.omega * &coeff_upper(&g, &r);
            if rem.coeffs().iter().any(|c| c.abs() > cap) {
                over += 1;
            }
        }
    });
    outcome(mismatched == 0 && over == 0, format!("{mismatched} mismatches, {over} omega violations"))
}

fn confinement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut ours, mut optimum) = (0, 0);
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(1..=8);
        let t: f64 = rng.gen_range(0.1..10.0);
        let mut v: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let (mx, my) = v.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0 / n as f64, a.1 + b.1 / n as f64));
        let shift = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        for p in &mut v {
            p.0 += shift.0 / n as f64 - mx;
            p.1 += shift.1 / n as f64 - my;
        }
        let top = v.iter().map(|p| p.0.hypot(p.1)).fold(0.0, f64::max);
        if top == 0.0 {
            continue;
        }
        for p in &mut v {
            p.0 *= t / top;
            p.1 *= t / top;
        }
        let s = v.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        if s.0.hypot(s.1) > t || v.iter().any(|p| p.0.hypot(p.1) == 0.0) {
            continue;
        }
        done += 1;
        let zeros: Vec<BigComplex> = v.iter().map(|&(x, y)| BigComplex::from_f64(x, y).recip()).collect();
        let got = with_precision(128, || order_zeros(&zeros, &BigReal::from_f64(t)).prefix_max.to_f64());
        let cap = CONFINEMENT_CONSTANT * t * (1.0 + 1e-12);
        if got > cap {
            ours += 1;
        }
        if prefix_max(&v, &exhaustive(&v)) > cap {
            optimum += 1;
        }
    }
    outcome(ours == 0 && optimum == 0, format!("{ours} ordering failures, {optimum} exhaustive failures"))
}

fn antiderivative_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    let mut cases = 0;
    with_precision(P, || {
        let f = Poly::from_unit_factors(&[BigComplex::from_f64(2.0, 0.0), BigComplex::from_f64(3.0, 0.0)]);
        let cfg = ConstructionConfig::default();
        for t in [DiffOperator::differentiation(), DiffOperator::from_ints(&[0, 0, 1]).unwrap()] {
            for _ in 0..4 {
                let p = random_poly(&mut rng, 1);
                let path = path_for(&t, &p, &BigReal::one()).unwrap();
                for n in 3..=12 {
                    cases += 1;
                    let c = quotient_candidate(path.as_ref(), &t, &f, &p, n, &cfg).unwrap();
                    let g = c.q.add(&Poly::one()).mul(&f);
                    let out = t.apply_n(n, &g).sub(&p);
                    let scale = coeff_upper(&t.apply_n(n, &g.abs_coeffs()), &BigReal::one()).max(BigReal::one());
                    if out.max_abs_coeff() > scale.ldexp(-((P - 48) as i64)) {
                        bad += 1;
                    }
                }
            }
        }
    });
    outcome(bad == 0, format!("{bad} of {cases} cases over tolerance"))
}

struct Run {
    cert: CertificateFile,
    exit: i32,
    elapsed: Duration,
}

fn construct(dir: &Path, name: &str, args: &[&str]) -> Run {
    let out = dir.join(format!("{name}.json"));
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_hyperfactor"))
        .arg("construct")
        .args(args)
        .arg("-o")
        .arg(&out)
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let cert = CertificateFile::from_json(&fs::read_to_string(&out).expect("certificate written")).expect("certificate parses");
    Run { cert, exit: status.status.code().unwrap_or(-1), elapsed }
}

fn all_stages_certified(r: &Run, k: usize) -> bool {
    r.exit == 0 && r.cert.certified && r.cert.stages.len() == k && r.cert.stages.iter().all(|s| s.certified)
}

fn strictly_decreasing(trend: &[Vec<f64>]) -> bool {
    trend.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b < a))
}

fn trend_of(cert: &CertificateFile) -> Vec<Vec<f64>> {
    cert.stages
        .iter()
        .find(|s| !s.certified)
        .map(|s| s.trend.iter().map(|t| t.residuals.iter().map(|v| v.parse::<f64>().unwrap_or(f64::INFINITY)).collect()).collect())
        .unwrap_or_default()
}

fn summary(r: &Run) -> String {
    let first_bad = r.cert.stages.iter().find(|s| !s.certified);
    let cert: Vec<String> = r.cert.stages.iter().filter(|s| s.certified).map(|s| format!("{}@{}", s.k, s.n_k)).collect();
    match first_bad {
        None => format!("certified stages {} in {:.1}s", cert.join(","), r.elapsed.as_secs_f64()),
        Some(s) => format!(
            "certified {}; stage {} failed {:?} (exit {}, {:.1}s)",
            if cert.is_empty() { "none".into() } else { cert.join(",") },
            s.k,
            s.failed_clauses,
            r.exit,
            r.elapsed.as_secs_f64()
        ),
    }
}

fn end_to_end(dir: &Path) -> Outcome {
    let limit = Duration::from_secs(300);
    let mac = construct(dir, "maclane6", &["--preset", "maclane", "-K", "6", "--nmax", "300"]);
    let shift = construct(dir, "shift5", &["--preset", "shifted-identity", "-K", "5", "--nmax", "300"]);
    let birk = construct(dir, "birkhoff3", &["--preset", "birkhoff", "-K", "3", "--allow-best-effort"]);
    let mac_ok = all_stages_certified(&mac, 6) && mac.elapsed < limit;
    let shift_ok = all_stages_certified(&shift, 5) && shift.elapsed < limit;
    let trend = trend_of(&birk.cert);
    let birk_ok = all_stages_certified(&birk, 3) || (birk.exit == 2 && trend.len() >= 2 && strictly_decreasing(&trend));
    let birk_note = if all_stages_certified(&birk, 3) {
        "all certified".to_string()
    } else {
        let first = trend.first().and_then(|v| v.first()).copied().unwrap_or(f64::NAN);
        let last = trend.last().and_then(|v| v.first()).copied().unwrap_or(f64::NAN);
        format!("best-effort, trend {first:.2e} -> {last:.2e} over {} n, decreasing={}", trend.len(), strictly_decreasing(&trend))
    };
    outcome(
        mac_ok && shift_ok && birk_ok,
        format!("maclane: {}; shifted-identity: {}; birkhoff: {birk_note}", summary(&mac), summary(&shift)),
    )
}

fn certified_maclane(dir: &Path) -> Run {
    construct(dir, "maclane3", &["--preset", "maclane", "-K", "3"])
}

fn telescoping(run: &Run) -> Outcome {
    if !all_stages_certified(run, 3) {
        return outcome(false, "reference run did not certify");
    }
    let rep = run.cert.verify().unwrap();
    let ok = !rep.telescoping.is_empty() && rep.telescoping.iter().all(|t| t.ok) && rep.flags == 0;
    let worst = rep.telescoping.iter().map(|t| t.value.log2_abs() - t.bound.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    outcome(ok, format!("{} rows, max log2(value/bound) {worst:.1}, {} flags", rep.telescoping.len(), rep.flags))
}

fn fidelity(run: &Run) -> Outcome {
    let cert = &run.cert;
    let bits = cert.bits();
    let fl = cert.factor_list().unwrap();
    let (rel, budgets_ok) = with_precision(bits, || {
        // Rebuild f_K stage by stage, as the run did, and compare with the flat product.
        let mut staged = Poly::one();
        for k in 1..=fl.stages() {
            staged = staged.mul(&Poly::from_unit_factors(fl.block(k)));
        }
        let flat = Poly::from_unit_factors(&fl.factors);
        let rel = &flat.max_abs_diff(&staged) / &staged.max_abs_coeff();
        let budgets_ok = cert.stages.iter().all(|s| {
            let dev = BigReal::parse(&s.prefix_product_max).unwrap();
            let budget = BigReal::parse(&s.prefix_budget).unwrap();
            if s.k == 1 {
                dev <= budget
            } else {
                dev < budget
            }
        });
        (rel, budgets_ok)
    });
    let ok = rel <= pow2(-(bits as i64) / 2) && budgets_ok;
    outcome(ok, format!("relative expansion error 2^{:.1} (limit 2^-{}), budgets met: {budgets_ok}", rel.log2_abs(), bits / 2))
}

fn multi(dir: &Path) -> Outcome {
    let demo = Command::new(env!("CARGO_BIN_EXE_hyperfactor")).args(["demo", "multi"]).output().expect("binary runs");
    let table = String::from_utf8_lossy(&demo.stdout);
    let columns = table.contains("resid[T1]") && table.contains("resid[T2]");
    let run = construct(dir, "multi3", &["--preset", "multi", "-K", "3", "--allow-best-effort"]);
    let stages = &run.cert.stages;
    let certified = stages.len() == 3 && stages.iter().all(|s| s.certified && s.residuals.len() == 2);
    let trends = stages.iter().filter(|s| !s.certified && s.k > 1).all(|s| !s.trend.is_empty() && s.trend.iter().all(|t| t.residuals.len() == 2));
    let ok = columns && (certified || (run.exit == 2 && trends));
    outcome(ok, format!("demo columns: {columns}; {}; per-operator trends: {trends}", if certified { "all certified" } else { "best-effort" }))
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let reference = certified_maclane(dir.path());
    let results = vec![
        (1, "right-inverse identity", right_inverse_identity()),
        (2, "coefficient bound C^n", coefficient_bound()),
        (3, "growth bound", growth()),
        (4, "double Taylor product structure", tail_structure()),
        (5, "remainder control", remainder_control()),
        (6, "confinement ordering", confinement()),
        (7, "antiderivative-path exactness", antiderivative_exactness()),
        (8, "end-to-end certification", end_to_end(dir.path())),
        (9, "telescoping bound", telescoping(&reference)),
        (10, "factorization fidelity", fidelity(&reference)),
        (11, "multi-operator mode", multi(dir.path())),
    ];
    let mut failed = Vec::new();
    for (i, name, o) in &results {
        println!("criterion {i:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(*i);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
