use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use safe_rl_harness::describe::{analysis_report, summarize};
use safe_rl_harness::envs::{resolve, Context, EnvSpec, Model};
use safe_rl_harness::format::{game_to_json, mdp_to_json};
use safe_rl_harness::verify::{run_suite, Size};
use safe_rl_harness::{run_experiment, ExperimentConfig, HarnessError, Result};

#[derive(Parser)]
#[command(name = "safe-rl", version, about = "Run and check tabular safe RL experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Game file to use instead of the config's env.
        #[arg(long)]
        game: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, default_value = "tiny")]
        size: String,
        #[arg(long)]
        seed: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Inspect or export environments.
    Env {
        #[command(subcommand)]
        command: EnvCommand,
    },
    /// Print unsafe sets, safe actions, feasibility and the safe optimum.
    Analyze {
        #[arg(long)]
        env: String,
    },
}

#[derive(Subcommand)]
enum EnvCommand {
    /// Dimensions, feasibility and optimal values.
    Describe {
        #[arg(long)]
        env: String,
        #[arg(long)]
        json: bool,
    },
    /// Write an environment in the interchange format.
    Export {
        #[arg(long)]
        env: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(env: &str) -> Result<Model> {
    resolve(&EnvSpec::Name(env.to_owned()), Context::default())
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, game } => {
            let cfg = ExperimentConfig::load(&config)?;
            let base = config.parent().filter(|p| !p.as_os_str().is_empty());
            let game = game.map(|g| EnvSpec::Name(g.display().to_string()));
            let manifest = run_experiment(&cfg, base, game.as_ref())?;
            for r in &manifest.runs {
                println!(
                    "seed {:>6}  episodes {:>7}  regret {:>12.4}  violation {:>10.4}{}",
                    r.seed,
                    r.episodes,
                    r.total_regret,
                    r.total_violation,
                    r.converged.map_or(String::new(), |c| format!("  converged {c}"))
                );
            }
            println!("config {}", manifest.config_hash);
        }
        Command::Verify { size, seed, json } => {
            let report = run_suite(Size::parse(&size)?, seed)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for r in &report.results {
                    println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                    if let Some(example) = &r.counterexample {
                        println!("counterexample:\n{example}");
                    }
                }
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Env { command: EnvCommand::Describe { env, json } } => {
            let summary = summarize(&load(&env)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                println!("{summary}");
            }
        }
        Command::Env { command: EnvCommand::Export { env, out } } => {
            let text = match load(&env)? {
                Model::Mdp(m, s) => mdp_to_json(&m, &s),
                Model::Game(g, s) => game_to_json(&g, &s),
            };
            std::fs::write(&out, text + "\n").map_err(|e| HarnessError::output(&out, e))?;
        }
        Command::Analyze { env } => print!("{}", analysis_report(&load(&env)?)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
