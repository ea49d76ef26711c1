use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use inlr_core::cc::{self, CcResult, Policy};
use inlr_core::qencode::{
    compile_matrix, from_vector, meas_first_of, meas_state_of, to_vector, vector_from_json,
    vector_to_json, ComplexMatrix,
};
use inlr_core::quantum::{run_measure, shot_rng, FUEL_BIN};
use inlr_core::rewrite::{normalize, Outcome, Ruleset};
use inlr_core::suites::{run_suite, Suite};
use inlr_core::syntax::{parse_prop, parse_term, print_term, Calculus, Prop, Term};
use inlr_core::typing::{infer, TypingContext};

const OK: u8 = 0;
const INVALID: u8 = 1;
const STUCK: u8 = 2;
const FUEL: u8 = 3;

/// Deeply nested cc reducts recurse far past the default stack.
const WORKER_STACK: usize = 1 << 30;
const USAGE: u8 = 4;

#[derive(Parser)]
#[command(name = "inlr", version, about = "Type checking, normalization and measurement of in-left-right proof terms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CalculusArg {
    Iplus,
    Quantum,
    Cc,
}

impl From<CalculusArg> for Calculus {
    fn from(c: CalculusArg) -> Calculus {
        match c {
            CalculusArg::Iplus => Calculus::Iplus,
            CalculusArg::Quantum => Calculus::Quantum,
            CalculusArg::Cc => Calculus::Cc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    First,
    Enumerate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Operator {
    /// Measure the term as given.
    None,
    /// Apply the first-qubit measurement returning a Boolean.
    First,
    /// Apply the first-qubit measurement returning the state.
    State,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Iplus,
    Quantum,
    Qencode,
    Cc,
}

#[derive(Subcommand)]
enum Command {
    /// Print the proposition of a term, or a diagnostic.
    Check {
        file: PathBuf,
        #[arg(long, value_enum)]
        calculus: CalculusArg,
        /// Hypotheses, as `x : A, y : B`.
        #[arg(long, default_value = "")]
        ctx: String,
        /// Report diagnostics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Normalize a term, leftmost-outermost.
    Norm {
        file: PathBuf,
        #[arg(long, value_enum)]
        calculus: CalculusArg,
        #[arg(long)]
        fuel: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also print the steps as JSON lines.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value = "")]
        ctx: String,
        /// Cc only: follow one route or explore every reduct.
        #[arg(long, value_enum, default_value = "first")]
        policy: PolicyArg,
    },
    /// Normalize a closed quantum term once per shot and print the histogram.
    Measure {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "none")]
        operator: Operator,
    },
    /// Compile a matrix to a proof of `FROM -o TO`.
    CompileMatrix {
        matrix: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Convert between vectors and proofs of a vector proposition.
    Encode {
        #[arg(long, conflicts_with = "term", required_unless_present = "term")]
        vec: Option<PathBuf>,
        #[arg(long)]
        term: Option<PathBuf>,
        #[arg(long)]
        prop: String,
    },
    /// Show the two routes of the optimization demo.
    DemoOpt,
    /// Run a property suite over random samples.
    Selftest {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type Run = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

fn load_term(path: &Path, calculus: Calculus) -> Result<Term, Failure> {
    let text = read(path)?;
    parse_term(&text, calculus).map_err(|e| fail(INVALID, format!("{}:{e}", path.display())))
}

fn load_prop(text: &str) -> Result<Prop, Failure> {
    parse_prop(text).map_err(|e| fail(INVALID, format!("proposition: {e}")))
}

fn load_ctx(text: &str) -> Result<TypingContext, Failure> {
    TypingContext::parse(text).map_err(|e| fail(INVALID, format!("context: {e}")))
}

fn check(file: &Path, calculus: Calculus, ctx: &str, json: bool) -> Run {
    let t = load_term(file, calculus)?;
    let ctx = load_ctx(ctx)?;
    match infer(calculus, &ctx, &t) {
        Ok(p) => {
            println!("{p}");
            Ok(OK)
        }
        Err(e) if json => Err(fail(INVALID, e.to_json().to_string())),
        Err(e) => Err(fail(INVALID, e.to_string())),
    }
}

fn outcome_code(outcome: &Outcome) -> Result<(), Failure> {
    match outcome {
        Outcome::NormalForm(_) => Ok(()),
        Outcome::FuelExhausted(t) => Err(fail(FUEL, format!("fuel exhausted at {}", print_term(t)))),
        Outcome::Stuck { term, reason } => {
            Err(fail(STUCK, format!("stuck at {}: {reason}", print_term(term))))
        }
    }
}

fn norm(
    file: &Path,
    calculus: Calculus,
    fuel: Option<u64>,
    seed: u64,
    trace: bool,
    ctx: &str,
    policy: PolicyArg,
) -> Run {
    let t = load_term(file, calculus)?;
    let ctx = load_ctx(ctx)?;
    infer(calculus, &ctx, &t).map_err(|e| fail(INVALID, e.to_string()))?;
    let rules = Ruleset::full(calculus);
    let fuel = fuel.unwrap_or(rules.default_fuel());
    if let (Calculus::Cc, PolicyArg::Enumerate) = (calculus, policy) {
        let CcResult::Graph(g) = cc::normalize_cc(&t, fuel, Policy::Enumerate) else {
            unreachable!("enumerate yields a graph");
        };
        for &i in &g.normal_forms {
            println!("{}", print_term(&g.nodes[i]));
        }
        print!("{}", g.to_dot());
        if g.truncated {
            return Err(fail(FUEL, "node budget exhausted"));
        }
        return Ok(OK);
    }
    let tr = normalize(&t, rules, fuel, &mut shot_rng(seed, 0));
    println!("{}", print_term(tr.outcome.term()));
    if trace {
        print!("{}", tr.to_jsonl());
    }
    outcome_code(&tr.outcome)?;
    Ok(OK)
}

fn qubits(p: &Prop) -> Option<usize> {
    (0..16).find(|&n| Prop::qn(n) == *p)
}

fn measure(file: &Path, shots: u64, seed: u64, operator: Operator) -> Run {
    let t = load_term(file, Calculus::Quantum)?;
    let p = infer(Calculus::Quantum, &TypingContext::new(), &t)
        .map_err(|e| fail(INVALID, e.to_string()))?;
    let t = match operator {
        Operator::None => t,
        Operator::First | Operator::State => {
            let n = qubits(&p)
                .filter(|&n| n >= 1)
                .ok_or_else(|| fail(INVALID, format!("{p} is not a proposition of qubits")))?;
            if matches!(operator, Operator::First) {
                meas_first_of(n, t)
            } else {
                meas_state_of(n, t)
            }
        }
    };
    let h = run_measure(&t, shots, seed);
    println!(
        "{}",
        serde_json::to_string_pretty(&h.to_json()).expect("histogram serializes")
    );
    let stuck: u64 = h.bins.iter().filter(|b| b.term.is_none() && b.label != FUEL_BIN).map(|b| b.count).sum();
    if stuck > 0 {
        return Err(fail(STUCK, format!("{stuck} of {shots} shots are stuck")));
    }
    if h.count_of(FUEL_BIN) > 0 {
        return Err(fail(FUEL, "fuel exhausted"));
    }
    Ok(OK)
}

fn compile(matrix: &Path, from: &str, to: &str) -> Run {
    let m = ComplexMatrix::from_json(&read(matrix)?).map_err(|e| fail(INVALID, e.to_string()))?;
    let t = compile_matrix(&m, &load_prop(from)?, &load_prop(to)?)
        .map_err(|e| fail(INVALID, e.to_string()))?;
    println!("{}", print_term(&t));
    Ok(OK)
}

fn encode(vec: Option<&Path>, term: Option<&Path>, prop: &str) -> Run {
    let p = load_prop(prop)?;
    match (vec, term) {
        (Some(v), _) => {
            let v = vector_from_json(&read(v)?).map_err(|e| fail(INVALID, e.to_string()))?;
            let t = from_vector(&v, &p).map_err(|e| fail(INVALID, e.to_string()))?;
            println!("{}", print_term(&t));
        }
        (None, Some(f)) => {
            let t = load_term(f, Calculus::Quantum)?;
            inlr_core::typing::check(Calculus::Quantum, &TypingContext::new(), &t, &p)
                .map_err(|e| fail(INVALID, e.to_string()))?;
            let v = to_vector(&t, &p).map_err(|e| fail(STUCK, e.to_string()))?;
            println!("{}", vector_to_json(&v));
        }
        (None, None) => return Err(fail(USAGE, "one of --vec or --term is required")),
    }
    Ok(OK)
}

fn demo_opt() -> Run {
    let d = cc::demo_optimization();
    println!("context: {}", cc::demo_context());
    for (title, route) in [
        ("applied", &d.applied),
        ("unapplied", &d.unapplied),
        ("reapplied", &d.reapplied),
    ] {
        println!("{title}:");
        println!("  {}", print_term(&route.start));
        for (step, t) in &route.steps {
            println!("  -> {}  [{} at {:?}]", print_term(t), step.rule, step.pos);
        }
    }
    println!("applied normal form: {}", print_term(&d.applied_nf));
    println!("reapplied normal form: {}", print_term(&d.reapplied_nf));
    println!("routes agree: {}", d.converges());
    Ok(if d.converges() { OK } else { INVALID })
}

fn selftest(suite: SuiteArg, samples: usize, seed: u64, json: bool) -> Run {
    let suite = match suite {
        SuiteArg::Iplus => Suite::Iplus,
        SuiteArg::Quantum => Suite::Quantum,
        SuiteArg::Qencode => Suite::Qencode,
        SuiteArg::Cc => Suite::Cc,
    };
    let checks = run_suite(suite, samples, seed);
    for c in &checks {
        if json {
            println!("{}", c.to_json());
        } else {
            println!("{c}");
        }
    }
    Ok(if checks.iter().all(|c| c.passed()) { OK } else { INVALID })
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Check {
            file,
            calculus,
            ctx,
            json,
        } => check(&file, calculus.into(), &ctx, json),
        Command::Norm {
            file,
            calculus,
            fuel,
            seed,
            trace,
            ctx,
            policy,
        } => norm(&file, calculus.into(), fuel, seed, trace, &ctx, policy),
        Command::Measure {
            file,
            shots,
            seed,
            operator,
        } => measure(&file, shots, seed, operator),
        Command::CompileMatrix { matrix, from, to } => compile(&matrix, &from, &to),
        Command::Encode { vec, term, prop } => encode(vec.as_deref(), term.as_deref(), &prop),
        Command::DemoOpt => demo_opt(),
        Command::Selftest {
            suite,
            samples,
            seed,
            json,
        } => selftest(suite, samples, seed, json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let worker = std::thread::Builder::new()
        .stack_size(WORKER_STACK)
        .spawn(move || run(cli))
        .expect("spawn worker thread");
    match worker.join().expect("worker thread panicked") {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
