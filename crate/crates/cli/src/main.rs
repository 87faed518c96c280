use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::json;

use minimax_experts::adversary::{enumerate_vertices, is_extreme, vertices_json};
use minimax_experts::algorithm::opt2_finite_exact;
use minimax_experts::registry::{adversary_by_name, algorithm_by_name, ADVERSARY_NAMES, ALGORITHM_NAMES};
use minimax_experts::sim::{comb_regret_curve, run_game_with, Accounting};
use minimax_experts::solver::{
    check_indifference3, check_recurrences, extract_policy2_finite, finite_regret_closed2,
    solve_finite_with_cap, solve_geometric, write_table, TableFormat, Value, DEFAULT_STATE_CAP,
};
use minimax_experts::walk::{simulate_walls, WallProcessSpec};
use minimax_experts::{Error, HorizonSpec};

const EXIT_VALIDATION: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "minimax-experts",
    version,
    about = "Minimax regret solvers and simulators for prediction with expert advice"
)]
struct Cli {
    /// Worker threads for parallel work (defaults to all cores)
    #[arg(long, global = true, env = "EXPERTS_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact finite-horizon minimax regret by backward induction
    SolveFinite {
        #[arg(long, visible_alias = "k")]
        experts: usize,
        #[arg(long)]
        horizon: u32,
        /// Refuse to build tables with more (state, remaining) pairs than this
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Geometric-horizon minimax regret by truncated value iteration
    SolveGeometric {
        #[arg(long, visible_alias = "k")]
        experts: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 60)]
        gap_cap: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo regret of an algorithm against an adversary
    Simulate {
        #[arg(long, visible_alias = "experts")]
        k: usize,
        #[arg(long)]
        adversary: String,
        #[arg(long)]
        algorithm: String,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = AccountingArg::Expected)]
        accounting: AccountingArg,
        /// Write the JSON result here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual, indifference and vertex checks; exits 3 on failure
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Discount to check (default: 0.5, 0.1 and 0.01)
        #[arg(long)]
        delta: Option<f64>,
        /// Largest gap on the check grid
        #[arg(long, default_value_t = 30)]
        max_gap: u32,
        /// Horizon for the finite-horizon checks
        #[arg(long, default_value_t = 100)]
        horizon: u32,
    },
    /// Comb adversary regret against the uniform player, normalized by √(2δ)
    CombCurve {
        #[arg(long, visible_alias = "experts")]
        k: usize,
        /// Comma-separated list of deltas
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Particle-between-walls process; regret estimate is half the visit count
    Walls {
        #[arg(long, visible_alias = "experts")]
        k: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Vertices of the balanced polytope as JSON
    Vertices {
        #[arg(long, visible_alias = "experts")]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Output {
    /// Write the table (or curve) here
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct HorizonArgs {
    /// Fixed number of rounds
    #[arg(long)]
    horizon: Option<u32>,
    /// Per-round stopping probability of a geometric horizon
    #[arg(long)]
    delta: Option<f64>,
}

impl HorizonArgs {
    fn spec(&self) -> Result<HorizonSpec, Error> {
        match (self.horizon, self.delta) {
            (Some(t), None) => Ok(HorizonSpec::finite(t)),
            (None, Some(d)) => HorizonSpec::geometric(d),
            _ => Err(Error::InvalidInput(
                "give exactly one of --horizon and --delta".into(),
            )),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for TableFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => TableFormat::Csv,
            FormatArg::Json => TableFormat::Json,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AccountingArg {
    Expected,
    Sampled,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Indifference3,
    Recurrences,
    Vertices,
    Finite2,
    All,
}

enum Failure {
    Lib(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn policy_help() -> String {
    format!(
        "Adversaries: {}\nAlgorithms:  {}",
        ADVERSARY_NAMES.join(", "),
        ALGORITHM_NAMES.join(", ")
    )
}

fn main() -> ExitCode {
    let help = policy_help();
    let mut cmd = Cli::command().after_help(help.clone());
    cmd = cmd.mut_subcommand("simulate", |c| c.after_help(help));
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_VALIDATION);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ResourceCap { .. } => EXIT_RESOURCE,
                _ => EXIT_VALIDATION,
            })
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::SolveFinite {
            experts,
            horizon,
            state_cap,
            output,
        } => {
            let table = solve_finite_with_cap(experts, horizon, state_cap)?;
            let v = table.minimax_regret();
            println!("minimax regret: {v} = {}", v.to_f64());
            if let Some(path) = output.out {
                write_table(&table, &path, output.format.into())?;
            }
        }
        Command::SolveGeometric {
            experts,
            delta,
            gap_cap,
            tol,
            output,
        } => {
            let table = solve_geometric(experts, delta, gap_cap, tol)?;
            println!("minimax regret: {:.10}", table.minimax_regret().to_f64());
            println!(
                "truncation bound: {:.3e} (gap cap {gap_cap}, {} iterations)",
                table.truncation_bound.unwrap_or(0.0),
                table.iterations.unwrap_or(0)
            );
            if let Some(path) = output.out {
                write_table(&table, &path, output.format.into())?;
            }
        }
        Command::Simulate {
            k,
            adversary,
            algorithm,
            horizon,
            trials,
            seed,
            accounting,
            out,
        } => {
            let horizon = horizon.spec()?;
            let adv = adversary_by_name(&adversary, k)?;
            let alg = algorithm_by_name(&algorithm, k, seed)?;
            let accounting = match accounting {
                AccountingArg::Expected => Accounting::Expected,
                AccountingArg::Sampled => Accounting::Sampled,
            };
            let est = run_game_with(adv.as_ref(), alg.as_ref(), horizon, trials, seed, accounting)?;
            let text = serde_json::to_string_pretty(&est).map_err(Error::from)?;
            emit(&text);
            if let Some(path) = out {
                fs::write(path, text + "\n")?;
            }
        }
        Command::Verify {
            suite,
            delta,
            max_gap,
            horizon,
        } => verify(suite, delta, max_gap, horizon)?,
        Command::CombCurve {
            k,
            deltas,
            trials,
            seed,
            output,
        } => {
            let curve = comb_regret_curve(k, &deltas, trials, seed)?;
            println!("delta,regret,std_error,normalized");
            for p in &curve {
                println!(
                    "{},{:.6},{:.6},{:.6}",
                    p.delta, p.estimate.mean, p.estimate.std_error, p.normalized
                );
            }
            if let Some(path) = output.out {
                let text = match output.format {
                    FormatArg::Json => serde_json::to_string_pretty(&curve).map_err(Error::from)? + "\n",
                    FormatArg::Csv => {
                        let mut s = String::from("# minimax-experts comb-curve v1\ndelta,regret,std_error,trials,seed,normalized,normalized_std_error\n");
                        for p in &curve {
                            s += &format!(
                                "{},{},{},{},{},{},{}\n",
                                p.delta,
                                p.estimate.mean,
                                p.estimate.std_error,
                                p.estimate.trials,
                                p.estimate.seed,
                                p.normalized,
                                p.normalized_std_error
                            );
                        }
                        s
                    }
                };
                fs::write(path, text)?;
            }
        }
        Command::Walls {
            k,
            delta,
            trials,
            seed,
        } => {
            let spec = WallProcessSpec::new(k, delta)?;
            let est = simulate_walls(&spec, trials, seed)?;
            let text = serde_json::to_string_pretty(&json!({ "spec": spec, "estimate": est }))
                .map_err(Error::from)?;
            emit(&text);
        }
        Command::Vertices { k, out } => {
            let text = vertices_json(k)?;
            match out {
                Some(path) => fs::write(path, text + "\n")?,
                None => emit(&text),
            }
        }
    }
    Ok(())
}

/// Prints to stdout, ignoring a closed pipe (`| head`).
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

struct Outcome {
    failures: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, line: String) {
        println!("[{}] {line}", if ok { "pass" } else { "FAIL" });
        if !ok {
            self.failures.push(line);
        }
    }
}

fn verify(suite: Suite, delta: Option<f64>, max_gap: u32, horizon: u32) -> Result<(), Failure> {
    let deltas = match delta {
        Some(d) => {
            HorizonSpec::geometric(d)?;
            vec![d]
        }
        None => vec![0.5, 0.1, 0.01],
    };
    let run = |s: Suite| suite == s || suite == Suite::All;
    let mut out = Outcome { failures: Vec::new() };

    if run(Suite::Indifference3) {
        for &d in &deltas {
            let mut worst = 0.0f64;
            let mut holds = true;
            let mut n = 0;
            for d13 in 2..=max_gap {
                for d12 in 1..d13 {
                    let r = check_indifference3(d, d12, d13)?;
                    worst = worst.max(r.max_residual);
                    holds &= r.inequalities_hold;
                    n += 1;
                }
            }
            out.check(
                worst < 1e-12 && holds,
                format!("indifference3 delta={d}: max residual {worst:.2e} over {n} interior states, inequalities hold: {holds}"),
            );
        }
    }
    if run(Suite::Recurrences) {
        for &d in &deltas {
            for k in [2, 3] {
                let r = check_recurrences(k, HorizonSpec::Geometric { delta: d }, max_gap)?;
                out.check(
                    r.max_residual < 1e-12,
                    format!(
                        "recurrences k={k} delta={d}: max residual {:.2e} over {} points",
                        r.max_residual, r.points
                    ),
                );
            }
        }
        let r = check_recurrences(2, HorizonSpec::finite(horizon), max_gap)?;
        out.check(
            r.exact_zero == Some(true),
            format!(
                "recurrences k=2 T={horizon}: exact residuals all zero: {}",
                r.exact_zero == Some(true)
            ),
        );
    }
    if run(Suite::Vertices) {
        // k=4 has 43: the 31 usually listed plus 12 of the form {1}{134}{23}{24}
        for (k, want) in [(2, 3), (3, 7), (4, 43)] {
            let vs = enumerate_vertices(k)?;
            let extreme = vs.iter().filter(|v| is_extreme(v)).count();
            out.check(
                vs.len() == want && extreme == want,
                format!(
                    "vertices k={k}: {} found, {extreme} extreme (expected {want})",
                    vs.len()
                ),
            );
        }
    }
    if run(Suite::Finite2) {
        let table = solve_finite_with_cap(2, horizon, DEFAULT_STATE_CAP)?;
        let mut mismatches = 0;
        for e in &table.entries {
            let l = e.remaining.expect("finite table");
            let want = finite_regret_closed2(-(e.gaps[0] as i64), l)?;
            if e.value != Value::Exact(want) {
                mismatches += 1;
            }
        }
        out.check(
            mismatches == 0,
            format!(
                "finite2 T={horizon}: {mismatches} of {} states differ from the random-walk closed form",
                table.entries.len()
            ),
        );
        let policy = extract_policy2_finite(&table)?;
        let mut bad = 0;
        for l in 1..=horizon {
            for d in 0..=horizon {
                if policy.get(d, l) != Some(opt2_finite_exact(d, l)?) {
                    bad += 1;
                }
            }
        }
        out.check(
            bad == 0,
            format!("finite2 policy T={horizon}: {bad} (d, l) pairs differ from the table"),
        );
    }
    if out.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(out.failures.join("; ")))
    }
}
