use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hyperfactor::certificate::{parse_operator_specs, CertificateFile};
use hyperfactor::driver::{assemble_factors, RunConfig, RunState, VerifyReport};
use hyperfactor::operator::DiffOperator;
use hyperfactor::presets::{preset, presets};
use hyperfactor::Error;

const EXIT_CERTIFIED: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_BEST_EFFORT: u8 = 2;
const EXIT_FLAGGED: u8 = 3;
const EXIT_PRECISION: u8 = 4;

#[derive(Parser)]
#[command(name = "hyperfactor", version, about = "Certified construction of hypercyclic entire functions as infinite products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a construction and write its certificate.
    Construct {
        /// JSON operator spec (one object or a list).
        spec: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
        /// Where to write the certificate; "-" for stdout.
        #[arg(short, long, default_value = "certificate.json")]
        output: PathBuf,
    },
    /// Recompute every residual recorded in a certificate.
    Verify { certificate: PathBuf },
    /// Run a small construction for a named preset and print its table.
    Demo {
        name: String,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Named operator setup (maclane, birkhoff, shifted-identity, multi).
    #[arg(long)]
    preset: Option<String>,
    /// Operator spec as inline JSON or a file path; repeat for joint constructions.
    #[arg(long = "operators")]
    operators: Vec<String>,
    /// Number of stages to build.
    #[arg(short = 'K', long = "stages")]
    stages: Option<usize>,
    /// Largest iteration count tried at any stage.
    #[arg(long)]
    nmax: Option<usize>,
    /// Starting working precision in bits.
    #[arg(long)]
    precision_bits: Option<usize>,
    /// Precision may double up to this many bits.
    #[arg(long)]
    precision_ceiling: Option<usize>,
    /// Circle samples for the reported lower bounds.
    #[arg(long)]
    samples: Option<usize>,
    /// Keep going past a stage that does not certify.
    #[arg(long)]
    allow_best_effort: bool,
    /// Seed for the randomized test harness; the construction is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunFlags {
    fn config(&self, default_stages: usize) -> RunConfig {
        let d = RunConfig::default();
        RunConfig {
            stages: self.stages.unwrap_or(default_stages),
            n_max: self.nmax.unwrap_or(d.n_max),
            precision_bits: self.precision_bits.unwrap_or(d.precision_bits),
            precision_ceiling: self.precision_ceiling.unwrap_or(d.precision_ceiling.max(self.precision_bits.unwrap_or(0))),
            samples: self.samples,
            allow_best_effort: self.allow_best_effort,
            ..d
        }
    }

    fn operators(&self, spec: Option<&Path>) -> anyhow::Result<Vec<DiffOperator>> {
        let mut ops = Vec::new();
        if let Some(name) = &self.preset {
            ops.extend(preset(name)?.operators());
        }
        if let Some(path) = spec {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ops.extend(parse_operator_specs(&text)?);
        }
        for item in &self.operators {
            let t = item.trim_start();
            let text = if t.starts_with('{') || t.starts_with('[') {
                item.clone()
            } else {
                fs::read_to_string(item).with_context(|| format!("reading {item}"))?
            };
            ops.extend(parse_operator_specs(&text)?);
        }
        if ops.is_empty() {
            anyhow::bail!("no operator given; use --preset, a spec file, or --operators");
        }
        Ok(ops)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(exit_code(Cli::parse()))
}

fn exit_code(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::PrecisionExhausted { .. }) => EXIT_PRECISION,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Construct { spec, run, output } => {
            let ops = run.operators(spec.as_deref())?;
            let state = construct(ops, run.config(RunConfig::default().stages))?;
            let cert = CertificateFile::from_run(&state);
            let table_to_stderr = output.as_os_str() == "-";
            let table = stage_table(&state);
            if table_to_stderr {
                println!("{}", cert.to_json());
                eprint!("{table}");
            } else {
                fs::write(&output, cert.to_json()).with_context(|| format!("writing {}", output.display()))?;
                print!("{table}");
                println!("certificate written to {}", output.display());
            }
            Ok(run_exit_code(&state))
        }
        Command::Verify { certificate } => {
            let text = fs::read_to_string(&certificate).with_context(|| format!("reading {}", certificate.display()))?;
            let cert = CertificateFile::from_json(&text)?;
            let report = cert.verify()?;
            print!("{}", verify_table(&report));
            Ok(if report.flags == 0 { EXIT_CERTIFIED } else { EXIT_FLAGGED })
        }
        Command::Demo { name, run } => {
            let p = presets().remove(name.as_str()).ok_or_else(|| {
                anyhow::anyhow!("unknown demo {name:?}; choose one of: {}", presets().keys().copied().collect::<Vec<_>>().join(", "))
            })?;
            let mut cfg = run.config(p.demo_stages);
            cfg.allow_best_effort = true;
            println!("{}: {}", p.name, p.description);
            let state = construct(p.operators(), cfg)?;
            print!("{}", stage_table(&state));
            Ok(run_exit_code(&state))
        }
    }
}

fn construct(ops: Vec<DiffOperator>, cfg: RunConfig) -> anyhow::Result<RunState> {
    let mut state = RunState::new(ops, cfg)?;
    state.run()?;
    assemble_factors(&state)?;
    Ok(state)
}

fn run_exit_code(state: &RunState) -> u8 {
    if state.all_certified() {
        EXIT_CERTIFIED
    } else if state.precision_exhausted() {
        EXIT_PRECISION
    } else {
        EXIT_BEST_EFFORT
    }
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn stage_table(state: &RunState) -> String {
    let ops = state.operators.len();
    let mut out = String::new();
    let mut head = format!("{:>3} {:>5} {:>6}", "k", "n_k", "deg");
    for i in 0..ops {
        head += &format!(" {:>11}", format!("resid[T{}]", i + 1));
    }
    head += &format!(" {:>11} {:>11} {:>11} {:>11} {:>5}  failed", "continuity", "|q|_k", "prefix", "budget", "cert");
    out += &head;
    out.push('\n');
    for r in &state.records {
        let mut line = format!("{:>3} {:>5} {:>6}", r.k, r.n_k, r.deg_qk);
        for i in 0..ops {
            let v = r.residuals.iter().find(|x| x.operator == i).map(|x| sci(x.measured.bound().to_f64())).unwrap_or_else(|| "-".into());
            line += &format!(" {v:>11}");
        }
        let cont = r.continuity_residuals.iter().map(|x| x.to_f64()).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        line += &format!(
            " {:>11} {:>11} {:>11} {:>11} {:>5}  {}",
            cont.map_or("-".into(), sci),
            sci(r.q_norm.to_f64()),
            sci(r.prefix_product_max.to_f64()),
            sci(r.prefix_budget.to_f64()),
            if r.certified { "yes" } else { "no" },
            r.failed_clauses.join(",")
        );
        out += &line;
        out.push('\n');
        if !r.certified && !r.trend.is_empty() {
            for i in 0..ops {
                let pts: Vec<String> = r.trend.iter().filter_map(|t| t.residuals.get(i).map(|v| format!("{}:{}", t.n, sci(v.to_f64())))).collect();
                if !pts.is_empty() {
                    out += &format!("    trend T{}: {}\n", i + 1, pts.join(" "));
                }
            }
        }
    }
    out
}

fn verify_table(rep: &VerifyReport) -> String {
    let mut out = format!("{:>3} {:>4} {:>8} {:>11} {:>11}  flag\n", "k", "op", "against", "recorded", "recomputed");
    for r in &rep.rows {
        let against = r.against.map_or("n_k".to_string(), |j| format!("n_{j}"));
        out += &format!(
            "{:>3} {:>4} {:>8} {:>11} {:>11}  {}\n",
            r.k,
            r.operator + 1,
            against,
            sci(r.recorded.to_f64()),
            sci(r.recomputed.to_f64()),
            if r.flagged { "FLAG" } else { "" }
        );
    }
    if !rep.telescoping.is_empty() {
        out += "telescoping |T^{n_k} f_K - p_k|_k against 2^{1-k}:\n";
        for t in &rep.telescoping {
            out += &format!("{:>3} {:>4} {:>11} {:>11}  {}\n", t.k, t.operator + 1, sci(t.value.to_f64()), sci(t.bound.to_f64()), if t.ok { "ok" } else { "over" });
        }
    }
    out += &format!("flags: {}\n", rep.flags);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> u8 {
        exit_code(Cli::try_parse_from(std::iter::once("hyperfactor").chain(args.iter().copied())).unwrap())
    }

    fn construct_maclane(dir: &Path) -> PathBuf {
        let out = dir.join("cert.json");
        assert_eq!(code(&["construct", "--preset", "maclane", "-K", "3", "-o", out.to_str().unwrap()]), EXIT_CERTIFIED);
        out
    }

    #[test]
    fn construct_then_verify_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cert = construct_maclane(dir.path());
        assert_eq!(code(&["verify", cert.to_str().unwrap()]), EXIT_CERTIFIED);
    }

    #[test]
    fn tampered_certificate_exits_with_flag_code() {
        let dir = tempfile::tempdir().unwrap();
        let path = construct_maclane(dir.path());
        let mut cert = CertificateFile::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
        let i = cert.stage_offsets[2];
        cert.factors[i][0] = "5".into();
        fs::write(&path, cert.to_json()).unwrap();
        assert_eq!(code(&["verify", path.to_str().unwrap()]), EXIT_FLAGGED);
    }

    #[test]
    fn empty_stage_list_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let path = construct_maclane(dir.path());
        let mut cert = CertificateFile::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
        cert.stages.clear();
        cert.factors.clear();
        cert.stage_offsets = vec![0];
        fs::write(&path, cert.to_json()).unwrap();
        assert_eq!(code(&["verify", path.to_str().unwrap()]), EXIT_CERTIFIED);
    }

    #[test]
    fn input_errors_exit_one() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        fs::write(&bad, "{\"kind\": \"poly\", \"coeffs\": [").unwrap();
        let out = dir.path().join("c.json");
        let out = out.to_str().unwrap();
        assert_eq!(code(&["construct", bad.to_str().unwrap(), "-o", out]), EXIT_INPUT);
        fs::write(&bad, r#"{"kind": "poly", "coeffs": [["2", "0"]]}"#).unwrap();
        assert_eq!(code(&["construct", bad.to_str().unwrap(), "-o", out]), EXIT_INPUT);
        assert_eq!(code(&["construct", "-o", out]), EXIT_INPUT);
        assert_eq!(code(&["construct", "--preset", "nope", "-o", out]), EXIT_INPUT);
        assert_eq!(code(&["verify", bad.to_str().unwrap()]), EXIT_INPUT);
        assert_eq!(code(&["demo", "unknown"]), EXIT_INPUT);
    }

    #[test]
    fn inline_operator_spec_matches_preset() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        let spec = r#"{"kind": "poly", "coeffs": [["0", "0"], ["1", "0"]]}"#;
        assert_eq!(code(&["construct", "--operators", spec, "-K", "2", "-o", a.to_str().unwrap()]), EXIT_CERTIFIED);
        assert_eq!(code(&["construct", "--preset", "maclane", "-K", "2", "-o", b.to_str().unwrap()]), EXIT_CERTIFIED);
        assert_eq!(fs::read_to_string(a).unwrap(), fs::read_to_string(b).unwrap());
    }

    #[test]
    fn failed_stage_reports_best_effort() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("c.json");
        let rc = code(&["construct", "--preset", "birkhoff", "-K", "2", "--nmax", "4", "-o", out.to_str().unwrap()]);
        assert_eq!(rc, EXIT_BEST_EFFORT);
        let cert = CertificateFile::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
        assert!(!cert.certified);
        assert!(!cert.stages.last().unwrap().trend.is_empty());
    }

    #[test]
    fn multi_table_has_a_column_per_operator() {
        let ops = presets()["multi"].operators();
        let mut st = RunState::new(ops, RunConfig { stages: 2, n_max: 4, allow_best_effort: true, ..Default::default() }).unwrap();
        st.run().unwrap();
        let table = stage_table(&st);
        assert!(table.contains("resid[T1]") && table.contains("resid[T2]"));
        assert!(table.contains("trend T2"));
    }
}
