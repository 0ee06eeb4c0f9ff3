use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use cpt_games::cpt::{cpt_value, CptPreferences, Lottery};
use cpt_games::equilibrium::{
    check_correlated_eq, check_mediated_eq_with, check_nash_joint, MediatedGameFile,
    DEFAULT_RESOLUTION, DEFAULT_TOL, HULL_TOL,
};
use cpt_games::error::Error;
use cpt_games::exec::Execution;
use cpt_games::game::{Game, JointDistribution};
use cpt_games::harness::{replay, simulate, ReplayConfig, RunConfig};

#[derive(Parser)]
#[command(
    name = "cpt-games",
    version,
    about = "Equilibria and learning in games with CPT players"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Correlated,
    Nash,
    Mediated,
}

#[derive(Subcommand)]
enum Command {
    /// Print the CPT value of a lottery.
    Eval {
        #[arg(long)]
        prefs: PathBuf,
        #[arg(long)]
        lottery: PathBuf,
    },
    /// Check a distribution against an equilibrium notion and print the certificate.
    Check {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum, default_value = "correlated")]
        mode: Mode,
        /// Grid resolution of the mediated check.
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        grid: usize,
        /// Defaults to 1e-9, or 1e-6 for the mediated check.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a scenario and write its trace and summary.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scenario to run with default settings when no config is given.
        #[arg(long, conflicts_with = "config")]
        scenario: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Replay a mediated game as calibrated play and print the report.
    Replay {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = 4000)]
        horizon: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ShapeMismatch(_) => 3,
        Error::UnknownScenario(_) => 4,
        Error::AssessmentCollision { .. } => 5,
        _ => 2,
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn execution() -> Execution {
    let threads = std::env::var("CPT_GAMES_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    match threads {
        Some(0) | None => Execution::Parallel,
        Some(1) => Execution::Sequential,
        Some(n) => {
            // a second initialisation only fails if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
            Execution::Parallel
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let exec = execution();
    match cli.command {
        Command::Eval { prefs, lottery } => {
            let prefs: CptPreferences = read_json(&prefs)?;
            let lottery: Lottery = read_json(&lottery)?;
            println!("{:.6}", cpt_value(&lottery, &prefs));
            Ok(0)
        }
        Command::Check {
            game,
            dist,
            mode,
            grid,
            tol,
        } => {
            let g: Game = read_json(&game)?;
            let mu: JointDistribution = read_json(&dist)?;
            let cert = match mode {
                Mode::Correlated => check_correlated_eq(&g, &mu, tol.unwrap_or(DEFAULT_TOL))?,
                Mode::Nash => check_nash_joint(&g, &mu, tol.unwrap_or(DEFAULT_TOL))?,
                Mode::Mediated => {
                    check_mediated_eq_with(&g, &mu, grid, tol.unwrap_or(HULL_TOL), exec)?
                }
            };
            print_json(&cert);
            Ok(if cert.is_member() { 0 } else { 1 })
        }
        Command::Simulate {
            config,
            scenario,
            seed,
            horizon,
            out,
        } => {
            let mut c = match (config, scenario) {
                (Some(path), _) => {
                    RunConfig::from_json(&read_text(&path)?).map_err(|e| match e {
                        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
                        other => other,
                    })?
                }
                (None, Some(name)) => RunConfig::for_scenario(&name)?,
                (None, None) => {
                    return Err(Error::InvalidParameter(
                        "give --config or --scenario".into(),
                    ))
                }
            };
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(h) = horizon {
                c.horizon = h;
            }
            let sim = simulate(&c, exec)?;
            let (trace, summary) = sim.write(&out)?;
            println!("{}", trace.display());
            println!("{}", summary.display());
            Ok(0)
        }
        Command::Replay {
            game,
            horizon,
            tol,
            out,
        } => {
            let file: MediatedGameFile = read_json(&game)?;
            let summary = replay(file, ReplayConfig { horizon, tol })?;
            match out {
                Some(path) => {
                    let text = serde_json::to_string_pretty(&summary).expect("serializable") + "\n";
                    std::fs::write(&path, text)
                        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                }
                None => print_json(&summary),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
