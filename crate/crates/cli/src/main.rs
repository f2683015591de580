//! `vault`: command-line front end for the vault model.
//!
//! Exit status: 0 success, 1 property violation, replay divergence or failed
//! scenario, 2 usage or parse error, 3 I/O error.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use vault_model::generate::random_chain;
use vault_model::properties::{check_trace, explore, ExploreConfig};
use vault_model::scenarios::{self, ScenarioKind, ScenarioSpec};
use vault_model::{
    Action, ActionOutcome, Address, ArithmeticMode, Chain, Error, Mutation, Trace, VaultConfig, VaultState,
};

use output::{Format, Out};

#[derive(Parser, Debug)]
#[command(
    name = "vault",
    version,
    about = "Two-tier time-delayed vault model: simulate, replay, check and explore"
)]
struct Cli {
    /// Request-sum arithmetic: `legacy` wraps, `fixed` rejects on overflow.
    #[arg(long, global = true, value_name = "legacy|fixed")]
    mode: Option<ArithmeticMode>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Seed for randomized trace generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Create a vault and write a chain snapshot.
    Init(InitArgs),
    /// Submit one action in the next block and rewrite the snapshot.
    Apply {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        sender: Address,
        /// Action in trace encoding, e.g. '{"type":"Deposit","amount":"5"}'.
        #[arg(long)]
        action: String,
    },
    /// Replay a trace onto a snapshot, printing each outcome.
    Run {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Write the resulting snapshot here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a recorded trace against every safety property.
    Check {
        /// Vault configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Exhaustively explore all move sequences up to a depth.
    Explore(ExploreArgs),
    /// Run a scripted attack or recovery scenario.
    Scenario {
        #[arg(value_enum)]
        name: ScenarioName,
        /// Overrides such as K=2,L=2,n=3 (also funds=, delay=).
        #[arg(long, default_value = "")]
        param: String,
        /// Write the scenario's trace here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Generate a random trace from --seed.
    GenTrace {
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Vault configuration (JSON); a small default vault otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the trace here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the final chain snapshot here.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct InitArgs {
    #[arg(long)]
    delay: u64,
    #[arg(long)]
    t1: Address,
    #[arg(long)]
    creator: Address,
    #[arg(long)]
    max_requests: usize,
    #[arg(long)]
    out: PathBuf,
    /// The vault's own address.
    #[arg(long)]
    self_address: Option<Address>,
}

#[derive(Args, Debug)]
struct ExploreArgs {
    #[arg(long, default_value_t = 4)]
    addresses: usize,
    #[arg(long, default_value_t = 3)]
    amount_cap: u64,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    delay: u64,
    #[arg(long, default_value_t = 4)]
    max_requests: usize,
    /// Maximum number of distinct states.
    #[arg(long, default_value_t = ExploreConfig::default().budget)]
    budget: usize,
    /// Explore a vault running one deliberately broken rule.
    #[arg(long, value_parser = parse_mutation)]
    mutation: Option<Mutation>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioName {
    Dos,
    DelayEvasion,
    Type2Recovery,
    Type1Lockdown,
}

impl From<ScenarioName> for ScenarioKind {
    fn from(n: ScenarioName) -> Self {
        match n {
            ScenarioName::Dos => ScenarioKind::Dos,
            ScenarioName::DelayEvasion => ScenarioKind::DelayEvasion,
            ScenarioName::Type2Recovery => ScenarioKind::Type2Recovery,
            ScenarioName::Type1Lockdown => ScenarioKind::Type1Lockdown,
        }
    }
}

fn parse_mutation(s: &str) -> Result<Mutation, String> {
    Mutation::ALL
        .into_iter()
        .find(|m| format!("{m:?}") == s)
        .ok_or_else(|| {
            let names: Vec<String> = Mutation::ALL.iter().map(|m| format!("{m:?}")).collect();
            format!("unknown mutation; expected one of {}", names.join(", "))
        })
}

/// How a command ended, mapped to the exit status.
enum Failure {
    Finding,
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::Parse(_) | Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            Error::ReplayDivergence { .. } | Error::BudgetExceeded { .. } | Error::ScenarioAssertionFailed { .. } => {
                eprintln!("{e}");
                Failure::Finding
            }
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Usage(format!("{what}: {e}")))
}

fn load_chain(path: &Path) -> Result<Chain, Failure> {
    Chain::from_snapshot(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_trace(path: &Path) -> Result<Trace, Failure> {
    Trace::from_jsonl(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path, mode: Option<ArithmeticMode>) -> Result<VaultConfig, Failure> {
    let mut config: VaultConfig = parse_json(&path.display().to_string(), &read(path)?)?;
    if let Some(mode) = mode {
        config.mode = mode;
    }
    Ok(config)
}

fn init(cli: &Cli, args: &InitArgs, out: &mut Out) -> Outcome {
    let mut config = VaultConfig::new(
        args.delay,
        args.t1,
        args.creator,
        args.max_requests,
        cli.mode.unwrap_or_default(),
    );
    if let Some(addr) = args.self_address {
        config.self_address = addr;
    }
    let chain = Chain::new(config)?;
    write(&args.out, &chain.to_snapshot())?;
    out.chain_summary(&chain);
    Ok(())
}

fn apply(state: &Path, sender: Address, action: &str, out: &mut Out) -> Outcome {
    let action: Action = parse_json("--action", action)?;
    let mut chain = load_chain(state)?;
    chain.submit(sender, action);
    write(state, &chain.to_snapshot())?;
    out.record(chain.trace.records().last().expect("just submitted"));
    Ok(())
}

/// A trace line for `run`; block and outcome are optional so that traces
/// can be written by hand.
#[derive(Deserialize)]
struct Step {
    #[serde(default)]
    block: Option<String>,
    sender: Address,
    action: Action,
    #[serde(default)]
    outcome: Option<ActionOutcome>,
}

fn run(state: &Path, trace: &Path, save: Option<&Path>, out: &mut Out) -> Outcome {
    let mut chain = load_chain(state)?;
    let text = read(trace)?;
    let mut steps = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let step: Step = parse_json(&format!("{} line {}", trace.display(), n + 1), line)?;
        let block = match &step.block {
            Some(b) => Some(
                b.parse::<u64>()
                    .map_err(|_| Failure::Usage(format!("line {}: bad block {b:?}", n + 1)))?,
            ),
            None => None,
        };
        steps.push((n + 1, block, step));
    }
    let mut last = chain.current_block;
    for (line, block, _) in &steps {
        if let Some(b) = block {
            if *b <= last {
                return Err(Failure::Usage(format!(
                    "line {line}: block {b} is not after block {last}"
                )));
            }
            last = *b;
        } else {
            last += 1;
        }
    }

    let mut diverged = false;
    for (line, block, step) in steps {
        if let Some(b) = block {
            if b > chain.current_block + 1 {
                chain.advance(b - chain.current_block - 1)?;
            }
        }
        let outcome = chain.submit(step.sender, step.action);
        out.record(chain.trace.records().last().expect("just submitted"));
        if let Some(recorded) = step.outcome {
            if recorded != outcome {
                out.divergence(line, &recorded, &outcome);
                diverged = true;
                break;
            }
        }
    }
    if let Some(path) = save {
        write(path, &chain.to_snapshot())?;
    }
    if diverged {
        Err(Failure::Finding)
    } else {
        Ok(())
    }
}

fn check(config: &Path, trace: &Path, mode: Option<ArithmeticMode>, out: &mut Out) -> Outcome {
    let config = load_config(config, mode)?;
    let trace = load_trace(trace)?;
    let initial = VaultState::new(&config)?;
    let violations = check_trace(&initial, &trace)?;
    out.check_report(&trace, &violations);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Finding)
    }
}

fn explore_cmd(args: &ExploreArgs, mode: Option<ArithmeticMode>, out: &mut Out) -> Outcome {
    let config = ExploreConfig {
        addresses: args.addresses,
        amount_cap: args.amount_cap,
        max_depth: args.depth,
        delay: args.delay,
        max_ledger_size: args.max_requests,
        mode: mode.unwrap_or_default(),
        budget: args.budget,
        mutation: args.mutation,
        stop_at_first_violation: false,
    };
    let report = explore(&config)?;
    out.explore_report(&report);
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Finding)
    }
}

fn scenario(
    name: ScenarioName,
    params: &str,
    trace_out: Option<&Path>,
    mode: Option<ArithmeticMode>,
    out: &mut Out,
) -> Outcome {
    let spec = ScenarioSpec::new(name.into(), mode.unwrap_or_default()).with_params(params)?;
    let result = scenarios::run(&spec)?;
    if let Some(path) = trace_out {
        write(path, &result.trace().to_jsonl())?;
    }
    out.scenario_report(&result);
    result.ensure_passed().map_err(|e| {
        eprintln!("{e}");
        Failure::Finding
    })
}

fn gen_trace(
    cli: &Cli,
    steps: usize,
    config: Option<&Path>,
    dest: Option<&Path>,
    state_out: Option<&Path>,
    out: &mut Out,
) -> Outcome {
    let config = match config {
        Some(path) => load_config(path, cli.mode)?,
        None => VaultConfig::new(
            3,
            Address::from_low_u64(1),
            Address::from_low_u64(2),
            16,
            cli.mode.unwrap_or_default(),
        ),
    };
    let chain = random_chain(&config, cli.seed, steps)?;
    match dest {
        Some(path) => write(path, &chain.trace.to_jsonl())?,
        None => out.raw(&chain.trace.to_jsonl()),
    }
    if let Some(path) = state_out {
        write(path, &chain.to_snapshot())?;
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Out) -> Outcome {
    match &cli.command {
        Command::Init(args) => init(cli, args, out),
        Command::Apply { state, sender, action } => apply(state, *sender, action, out),
        Command::Run {
            state,
            trace,
            out: save,
        } => run(state, trace, save.as_deref(), out),
        Command::Check { config, trace } => check(config, trace, cli.mode, out),
        Command::Explore(args) => explore_cmd(args, cli.mode, out),
        Command::Scenario { name, param, trace_out } => scenario(*name, param, trace_out.as_deref(), cli.mode, out),
        Command::GenTrace {
            steps,
            config,
            out: dest,
            state_out,
        } => gen_trace(
            cli,
            *steps,
            config.as_deref(),
            dest.as_deref(),
            state_out.as_deref(),
            out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = Out::new(cli.format);
    let result = dispatch(&cli, &mut out);
    out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Finding) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
