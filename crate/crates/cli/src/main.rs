use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};
use wvg_core::cnf::{decide_eexasat, decide_emajsat, decide_eminsat};
use wvg_core::gadgets::{build_weight_set, WeightSet};
use wvg_core::reductions::{build, validate_instance, ControlInstance, Goal, TheoremTag};
use wvg_core::{
    decide_control, parse_dimacs, seed_suite, verify_reduction_with, CnfFormula, CountingStrategy,
    ErrorKind, Game, Method, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "wvg", version, about = "Exact power indices and control problems for weighted voting games")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Write the canonical small-formula corpus as DIMACS files into DIR.
    #[arg(long, value_name = "DIR")]
    seed_suite: Option<PathBuf>,

    /// Largest variable count in the seed suite.
    #[arg(long, default_value_t = 3, requires = "seed_suite")]
    max_vars: usize,

    /// Largest clause count in the seed suite.
    #[arg(long, default_value_t = 3, requires = "seed_suite")]
    max_clauses: usize,

    #[command(flatten)]
    engine: EngineArgs,

    /// Write the JSON result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EngineArgs {
    /// Counting method: auto, enumerate, mitm or sparse-dp.
    #[arg(long, global = true, default_value = "auto")]
    engine: String,

    /// Worker threads for counting (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, env = "WVG_ENUMERATE_CAP", hide_env_values = true)]
    enumerate_cap: Option<usize>,

    #[arg(long, global = true, env = "WVG_MITM_CAP", hide_env_values = true)]
    mitm_cap: Option<usize>,

    #[arg(long, global = true, env = "WVG_SPARSE_STATE_CAP", hide_env_values = true)]
    sparse_state_cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Banzhaf and Shapley-Shubik index of one player.
    Index {
        #[arg(long)]
        game: PathBuf,
        /// 1-based player position.
        #[arg(long)]
        player: usize,
    },
    /// Decide a control instance.
    Control {
        #[arg(long)]
        instance: PathBuf,
        /// Override the instance's goal.
        #[arg(long)]
        goal: Option<Goal>,
    },
    /// Decide E-MajSAT, E-MinSAT or E-ExaSAT by brute force.
    Sat {
        #[arg(long)]
        cnf: PathBuf,
        /// emajsat, eminsat or eexasat.
        #[arg(long)]
        problem: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: Option<BigUint>,
    },
    /// Gadget weights for a formula.
    Gadget {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        k: usize,
        /// Weight set 1-4.
        #[arg(long)]
        set: u8,
        /// Also check the coalition/assignment bijection exhaustively.
        #[arg(long)]
        bijection: bool,
    },
    /// Build a reduction instance.
    Reduce {
        #[command(flatten)]
        reduction: ReductionArgs,
        #[arg(long)]
        goal: Option<Goal>,
    },
    /// Build a reduction and compare both sides.
    Verify {
        #[command(flatten)]
        reduction: ReductionArgs,
        /// Largest player count (including the budget) that is counted.
        #[arg(long, default_value_t = VerifyOptions::default().full_limit)]
        full_limit: usize,
    },
    /// Structural checks of an instance file.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Args)]
struct ReductionArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    theorem: TheoremTag,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    ell: Option<BigUint>,
}

enum Failure {
    Usage(String),
    Capability(String),
}

impl From<wvg_core::Error> for Failure {
    fn from(e: wvg_core::Error) -> Self {
        match e.kind() {
            ErrorKind::Usage => Failure::Usage(e.to_string()),
            ErrorKind::Capability => Failure::Capability(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_cnf(path: &Path) -> CliResult<CnfFormula> {
    Ok(parse_dimacs(&read(path)?)?)
}

fn read_instance(path: &Path) -> CliResult<ControlInstance> {
    Ok(ControlInstance::from_json(&read(path)?)?)
}

fn strategy(args: &EngineArgs) -> CliResult<CountingStrategy> {
    let mut s = match args.engine.as_str() {
        "auto" => CountingStrategy::auto(),
        name => CountingStrategy::with_method(name.parse::<Method>()?),
    };
    if let Some(c) = args.enumerate_cap {
        s.enumerate_cap = c;
    }
    if let Some(c) = args.mitm_cap {
        s.mitm_cap = c;
    }
    if let Some(c) = args.sparse_state_cap {
        s.sparse_state_cap = c;
    }
    Ok(s)
}

fn player_index(player: usize, players: usize) -> CliResult<usize> {
    if player == 0 || player > players {
        return Err(Failure::Usage(format!(
            "player {player} outside 1..={players}"
        )));
    }
    Ok(player - 1)
}

fn to_value<T: serde::Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<Value> {
    if let Some(threads) = cli.engine.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let engine = strategy(&cli.engine)?;
    if let Some(dir) = &cli.seed_suite {
        if cli.command.is_some() {
            return Err(Failure::Usage("--seed-suite cannot be combined with a subcommand".into()));
        }
        return write_suite(dir, cli.max_vars, cli.max_clauses);
    }
    let Some(command) = cli.command else {
        return Err(Failure::Usage("a subcommand or --seed-suite is required".into()));
    };
    match command {
        Command::Index { game, player } => {
            let game: Game = serde_json::from_str(&read(&game)?).map_err(wvg_core::Error::from)?;
            let p = player_index(player, game.num_players())?;
            let beta = wvg_core::banzhaf(&game, p, &engine)?;
            let phi = wvg_core::shapley_shubik(&game, p, &engine)?;
            Ok(json!({ "banzhaf": beta, "shapley": phi }))
        }
        Command::Control { instance, goal } => {
            let mut inst = read_instance(&instance)?;
            if let Some(goal) = goal {
                inst.goal = goal;
            }
            to_value(&decide_control(&inst, &engine)?)
        }
        Command::Sat { cnf, problem, k, ell } => {
            let f = read_cnf(&cnf)?;
            let decision = match problem.as_str() {
                "emajsat" => decide_emajsat(&f, k)?,
                "eminsat" => decide_eminsat(&f, k)?,
                "eexasat" => {
                    let ell = ell.ok_or_else(|| Failure::Usage("eexasat needs --ell".into()))?;
                    decide_eexasat(&f, k, &ell)?
                }
                other => return Err(Failure::Usage(format!("unknown problem `{other}`"))),
            };
            let mut v = to_value(&decision)?;
            v["problem"] = json!(problem);
            Ok(v)
        }
        Command::Gadget { cnf, k, set, bijection } => {
            let f = read_cnf(&cnf)?;
            let gw = build_weight_set(&f, k, WeightSet::from_id(set)?, None, None)?;
            let mut v = json!({ "weights": to_value(&gw)? });
            if bijection {
                let cap = engine.enumerate_cap;
                v["bijection"] = to_value(&gw.verify_bijection(cap)?)?;
            }
            Ok(v)
        }
        Command::Reduce { reduction, goal } => {
            let f = read_cnf(&reduction.cnf)?;
            let mut inst = build(reduction.theorem, &f, reduction.k, reduction.ell.as_ref())?;
            if let Some(goal) = goal {
                if !reduction.theorem.goals().contains(&goal) {
                    return Err(Failure::Usage(format!(
                        "goal {} is not supported by {}",
                        goal.name(),
                        reduction.theorem
                    )));
                }
                inst.goal = goal;
            }
            to_value(&inst)
        }
        Command::Verify { reduction, full_limit } => {
            let f = read_cnf(&reduction.cnf)?;
            let report = verify_reduction_with(
                reduction.theorem,
                &f,
                reduction.k,
                reduction.ell.as_ref(),
                &engine,
                VerifyOptions { full_limit },
            )?;
            to_value(&report)
        }
        Command::Validate { instance } => to_value(&validate_instance(&read_instance(&instance)?)),
    }
}

fn write_suite(dir: &Path, max_vars: usize, max_clauses: usize) -> CliResult<Value> {
    let io = |e: std::io::Error| Failure::Usage(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let suite = seed_suite(max_vars, max_clauses);
    for (i, f) in suite.iter().enumerate() {
        let name = format!("n{}_m{}_{:05}.cnf", f.num_vars(), f.num_clauses(), i + 1);
        fs::write(dir.join(name), f.to_dimacs()).map_err(io)?;
    }
    Ok(json!({ "formulas": suite.len(), "dir": dir.display().to_string() }))
}

fn emit(value: &Value, output: Option<&Path>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli) {
        Ok(value) => match emit(&value, output.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Capability(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
