use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use cpcert::bdd::solve;
use cpcert::circuit::{brute_force_count, parse_order, Cpd, CpeDag, Qdimacs, BRUTE_MAX_COUNTED};
use cpcert::protocol::{
    dag_soundness_bound, replay, run_session, setup_guard, Corruption, SessionConfig, Transcript, Verdict, MAX_COUNTED,
};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "cpcert", version, about = "BDD model counting with interactive certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count models with the BDD solver.
    Solve(InstanceArgs),
    /// Count models and certify the count with the interactive protocol.
    Certify(CertifyArgs),
    /// Replay a recorded transcript against the instance.
    VerifyTranscript(VerifyArgs),
    /// Count models by exhaustive enumeration.
    Brute(BruteArgs),
    /// Print instance statistics and the soundness bound.
    Stats(InstanceArgs),
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// QDIMACS input.
    file: PathBuf,
    /// Variable order file, root level first.
    #[arg(long)]
    order: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Verifier seed; drawn from OS entropy when absent.
    #[arg(long, env = "CPCERT_SEED")]
    seed: Option<u64>,
    /// Write the transcript here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Prover corruption: flip-initial-k, add-one:N or random:N.
    #[arg(long)]
    inject: Option<InjectMode>,
    /// Answer degree-reduction chains incrementally.
    #[arg(long)]
    opt_eval: bool,
    /// Refuse instances with more counted variables than this.
    #[arg(long, default_value_t = MAX_COUNTED)]
    max_vars: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Transcript file.
    transcript: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    order: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct BruteArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = BRUTE_MAX_COUNTED)]
    max_vars: usize,
}

#[derive(Clone, Copy, Debug)]
enum InjectMode {
    FlipInitialK,
    AddOne(u64),
    Random(u64),
}

impl FromStr for InjectMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let index = |v: &str| v.parse::<u64>().map_err(|e| format!("bad answer index {v:?}: {e}"));
        match s.split_once(':') {
            None if s == "flip-initial-k" => Ok(InjectMode::FlipInitialK),
            Some(("add-one", i)) => Ok(InjectMode::AddOne(index(i)?)),
            Some(("random", i)) => Ok(InjectMode::Random(index(i)?)),
            _ => Err(format!("unknown mode {s:?}; expected flip-initial-k, add-one:N or random:N")),
        }
    }
}

enum Failure {
    Input(anyhow::Error),
    Guard(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

const EXIT_REJECT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_GUARD: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Certify(a) => cmd_certify(&a),
        Command::VerifyTranscript(a) => cmd_verify(&a),
        Command::Brute(a) => cmd_brute(&a),
        Command::Stats(a) => cmd_stats(&a),
    };
    match res {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Guard(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(EXIT_GUARD)
        }
    }
}

fn load(file: &Path, order: Option<&Path>) -> anyhow::Result<CpeDag> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let q = Qdimacs::parse(&text).with_context(|| format!("parsing {}", file.display()))?;
    let order = match order {
        Some(p) => {
            let t = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(parse_order(&t).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => None,
    };
    Ok(q.to_dag(order.as_deref())?)
}

fn print_json(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
}

fn cmd_solve(a: &InstanceArgs) -> Result<ExitCode, Failure> {
    let dag = load(&a.file, a.order.as_deref())?;
    let t = Instant::now();
    let res = solve(&dag);
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let verdict = if res.satisfiable() { "SAT" } else { "UNSAT" };
    if a.json {
        print_json(json!({
            "v": 1,
            "count": res.count.to_string(),
            "verdict": verdict,
            "bdd_nodes": res.arena.len(),
            "solve_ms": ms,
        }));
    } else {
        println!("count {}", res.count);
        println!("{verdict}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_brute(a: &BruteArgs) -> Result<ExitCode, Failure> {
    let dag = load(&a.instance.file, a.instance.order.as_deref())?;
    let limit = a.max_vars.min(BRUTE_MAX_COUNTED);
    if dag.num_counted() > limit {
        return Err(Failure::Guard(format!("{} counted variables exceed the limit of {limit}", dag.num_counted())));
    }
    let count = brute_force_count(&dag).map_err(|e| Failure::Guard(e.to_string()))?;
    if a.instance.json {
        print_json(json!({ "v": 1, "count": count.to_string() }));
    } else {
        println!("count {count}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(a: &InstanceArgs) -> Result<ExitCode, Failure> {
    let dag = load(&a.file, a.order.as_deref())?;
    let cpd = Cpd::new(&dag);
    let bound = dag_soundness_bound(&dag);
    if a.json {
        print_json(json!({
            "v": 1,
            "variables": dag.num_levels(),
            "occurring": dag.occurring_vars().len(),
            "counted": dag.num_counted(),
            "nodes": dag.size(),
            "cpd_refs": cpd.len(),
            "max_free": dag.max_free(),
            "soundness_bound": bound.value.to_string(),
            "soundness_bound_log10": finite(bound.log10()),
        }));
    } else {
        println!("variables {}", dag.num_levels());
        println!("occurring {}", dag.occurring_vars().len());
        println!("counted {}", dag.num_counted());
        println!("nodes {}", dag.size());
        println!("cpd refs {}", cpd.len());
        println!("max free {}", dag.max_free());
        println!("soundness bound {bound}");
    }
    Ok(ExitCode::SUCCESS)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn verdict_name(v: &Verdict) -> &'static str {
    if v.is_accept() {
        "ACCEPT"
    } else {
        "REJECT"
    }
}

fn cmd_certify(a: &CertifyArgs) -> Result<ExitCode, Failure> {
    let dag = load(&a.instance.file, a.instance.order.as_deref())?;
    if dag.num_counted() > a.max_vars {
        return Err(Failure::Guard(format!(
            "{} counted variables exceed --max-vars {}",
            dag.num_counted(),
            a.max_vars
        )));
    }
    setup_guard(&dag).map_err(|e| Failure::Guard(e.to_string()))?;
    let seed = a.seed.unwrap_or_else(rand::random);
    let corruption = match a.inject {
        None => Corruption::None,
        Some(InjectMode::FlipInitialK) => Corruption::FlipInitialK,
        Some(InjectMode::AddOne(i)) => Corruption::AddOneAt(i),
        Some(InjectMode::Random(i)) => Corruption::RandomAt { index: i, seed: seed ^ 0x9e37_79b9_7f4a_7c15 },
    };
    let cfg = SessionConfig { seed, opt_eval: a.opt_eval, corruption, record: a.transcript.is_some() };
    let out = run_session(&dag, &cfg);
    if let (Some(path), Some(t)) = (&a.transcript, &out.transcript) {
        fs::write(path, t.to_bytes()).with_context(|| format!("writing {}", path.display()))?;
    }
    let bound = dag_soundness_bound(&dag);
    let s = out.stats;
    let count = match out.verdict {
        Verdict::Accept { count } => Some(count.value()),
        Verdict::Reject { .. } => None,
    };
    if a.instance.json {
        let reason = match out.verdict {
            Verdict::Reject { reason, ordinal } => {
                json!({ "code": reason.code(), "ordinal": ordinal, "what": reason.describe() })
            }
            Verdict::Accept { .. } => serde_json::Value::Null,
        };
        print_json(json!({
            "v": 1,
            "seed": seed,
            "verdict": verdict_name(&out.verdict),
            "reject": reason,
            "count_mod_p": count,
            "count": count.map(|c| c.to_string()),
            "bytes_sent": s.bytes_sent,
            "bytes_received": s.bytes_received,
            "rounds": s.rounds,
            "prover_ms": s.prover_ms(),
            "verifier_ms": s.verifier_ms,
            "soundness_bound_log10": finite(bound.log10()),
        }));
    } else {
        println!("seed {seed}");
        println!("verdict {}", verdict_name(&out.verdict));
        match out.verdict {
            Verdict::Accept { count } => println!("count {}", count.value()),
            Verdict::Reject { reason, ordinal } => {
                println!("reason {} ({}) at reference {ordinal}", reason.code(), reason.describe())
            }
        }
        println!("soundness bound {bound}");
        println!("bytes {} (sent {}, received {})", s.certificate_bytes(), s.bytes_sent, s.bytes_received);
        println!("rounds {}", s.rounds);
        println!(
            "prover {:.3} ms (build {:.3} ms, answer {:.3} ms)",
            s.prover_ms(),
            s.prover_build_ms,
            s.prover_answer_ms
        );
        println!("verifier {:.3} ms", s.verifier_ms);
    }
    Ok(if out.verdict.is_accept() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_REJECT) })
}

fn cmd_verify(a: &VerifyArgs) -> Result<ExitCode, Failure> {
    let bytes = fs::read(&a.transcript).with_context(|| format!("reading {}", a.transcript.display()))?;
    let t = Transcript::from_bytes(&bytes).map_err(|e| anyhow!("{}: {e}", a.transcript.display()))?;
    let dag = load(&a.instance, a.order.as_deref())?;
    let verdict = replay(&dag, &t);
    if a.json {
        let count = match verdict {
            Verdict::Accept { count } => Some(count.value()),
            Verdict::Reject { .. } => None,
        };
        print_json(json!({ "v": 1, "seed": t.seed, "verdict": verdict_name(&verdict), "count": count }));
    } else {
        println!("seed {}", t.seed);
        println!("verdict {}", verdict_name(&verdict));
        match verdict {
            Verdict::Accept { count } => println!("count {}", count.value()),
            Verdict::Reject { reason, ordinal } => {
                println!("reason {} ({}) at reference {ordinal}", reason.code(), reason.describe())
            }
        }
    }
    Ok(if verdict.is_accept() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_REJECT) })
}
