//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mdlab_core::game::{Game, Prior};
use mdlab_core::impossibility::{default_checkpoints, run_construction, Construction, ImpossibilitySetup};
use mdlab_core::scenario::{contract_task, drug_approval, judge_prosecutor, ContractParams};

use crate::config::{self, ConfigError, ScenarioConfig};
use crate::experiment::{run_all, write_outputs, RunError};
use crate::gamefile::GameFile;
use crate::solve::{solve, Mode};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_STRICT: u8 = 3;

/// Seeds from this variable replace the config's seed list.
pub const SEED_ENV: &str = "MDLAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "mdlab", version, about = "Prior-free online mechanism design simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment config and write CSV/JSON outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Exit 3 if a measured regret exceeds an asserted bound.
        #[arg(long)]
        strict: bool,
    },
    /// Solve one stage game.
    Solve {
        /// A game or scenario JSON file, or a built-in scenario name.
        #[arg(long)]
        game: String,
        /// Comma-separated probabilities; fractions like 1/3 are accepted.
        #[arg(long)]
        prior: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        policy: Option<usize>,
    },
    /// Replay the scripted-adversary constructions against constant mechanisms.
    Impossibility {
        #[arg(long, value_enum)]
        scenario: ScenarioName,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    Prop1,
    Prop2,
}

/// Run the CLI; `seed_env` is the value of [`SEED_ENV`], if set.
pub fn execute<I, T>(args: I, seed_env: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run { config, out: dir, jobs, strict } => cmd_run(&config, &dir, jobs, strict, seed_env, err),
        Command::Solve { game, prior, epsilon, mode, policy } => cmd_solve(&game, &prior, epsilon, mode, policy, out),
        Command::Impossibility { scenario, horizon, seed } => cmd_impossibility(scenario, horizon, seed, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            let _ = writeln!(err, "config error: {e}");
            EXIT_CONFIG
        }
        Err(Failure::Other(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

enum Failure {
    Config(ConfigError),
    Other(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn cmd_run(config: &Path, dir: &Path, jobs: usize, strict: bool, seed_env: Option<&str>, err: &mut dyn Write) -> Result<u8, Failure> {
    let mut resolved = config::load(config)?;
    if let Some(s) = seed_env {
        let seed = s.trim().parse::<u64>().map_err(|e| ConfigError::new(SEED_ENV, e.to_string()))?;
        resolved.config.seeds = vec![seed];
    }
    let results = run_all(&resolved, jobs).map_err(|e| match e {
        RunError::Config(c) => Failure::Config(c),
        other => Failure::Other(other.into()),
    })?;
    let violations = write_outputs(dir, &resolved, &results)?;
    Ok(run_exit_code(strict, &violations, err))
}

/// Violations are always reported; they only change the exit code under `--strict`.
fn run_exit_code(strict: bool, violations: &[(u64, usize)], err: &mut dyn Write) -> u8 {
    for (seed, t) in violations {
        let _ = writeln!(err, "bound violated: seed {seed}, checkpoint {t}");
    }
    if strict && !violations.is_empty() {
        EXIT_STRICT
    } else {
        EXIT_OK
    }
}

/// A file (game document or scenario spec) or a built-in scenario name.
pub fn load_game(spec: &str) -> Result<Game, ConfigError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("game", e.to_string()))?;
        if let Ok(g) = GameFile::parse(&text) {
            return g.to_game().map_err(|e| ConfigError::new("game", e.to_string()));
        }
        let scenario: ScenarioConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::new("game", format!("neither a game nor a scenario: {e}")))?;
        return scenario.build();
    }
    let built = match spec {
        "judge_prosecutor" => judge_prosecutor(0.5, 0.05),
        "drug_approval" => drug_approval(0.5, 0.05),
        "contract_task" => contract_task(ContractParams::default()),
        _ => return Err(ConfigError::new("game", format!("{spec:?} is neither a file nor a built-in scenario"))),
    };
    built.map(|s| s.game).map_err(|e| ConfigError::new("game", e.to_string()))
}

/// Parse `0.2,0.8` or `2/3,1/3`; sums within 1e-6 of one are renormalized.
pub fn parse_prior(text: &str) -> Result<Prior, ConfigError> {
    let parse_one = |s: &str| -> Result<f64, String> {
        let s = s.trim();
        match s.split_once('/') {
            Some((a, b)) => {
                let (a, b) = (a.trim().parse::<f64>().map_err(|e| e.to_string())?, b.trim().parse::<f64>().map_err(|e| e.to_string())?);
                Ok(a / b)
            }
            None => s.parse::<f64>().map_err(|e| e.to_string()),
        }
    };
    let values = text.split(',').map(parse_one).collect::<Result<Vec<f64>, _>>().map_err(|e| ConfigError::new("prior", e))?;
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(ConfigError::new("prior", format!("probabilities sum to {sum}")));
    }
    Prior::normalized(values).map_err(|e| ConfigError::new("prior", e.to_string()))
}

fn cmd_solve(game: &str, prior: &str, epsilon: f64, mode: Mode, policy: Option<usize>, out: &mut dyn Write) -> Result<u8, Failure> {
    let game = load_game(game)?;
    let prior = parse_prior(prior)?;
    if prior.len() != game.n_states() {
        return Err(ConfigError::new("prior", format!("game has {} states", game.n_states())).into());
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(ConfigError::new("epsilon", "must be finite and non-negative").into());
    }
    if let Some(p) = policy.filter(|&p| p >= game.n_policies()) {
        return Err(ConfigError::new("policy", format!("{p} out of range")).into());
    }
    let sol = solve(&game, &prior, epsilon, mode, policy).map_err(anyhow::Error::from)?;
    out.write_all(sol.render(&game).as_bytes()).map_err(anyhow::Error::from)?;
    Ok(EXIT_OK)
}

fn cmd_impossibility(scenario: ScenarioName, horizon: usize, seed: u64, out: &mut dyn Write) -> Result<u8, Failure> {
    if horizon < 100 {
        return Err(ConfigError::new("T", "must be at least 100").into());
    }
    let construction = match scenario {
        ScenarioName::Prop1 => Construction::Prop1,
        ScenarioName::Prop2 => Construction::Prop2,
    };
    let checkpoints = default_checkpoints(horizon);
    let rows = run_construction(construction, &ImpossibilitySetup::default(), horizon, &checkpoints, seed).map_err(anyhow::Error::from)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>| -> csv::Result<()> {
        w.write_record(["scenario", "checkpoint", "policy", "principal_regret", "expected_er", "min_principal_regret"])?;
        for cp in &rows {
            for o in &cp.outcomes {
                w.write_record([
                    format!("{scenario:?}").to_lowercase(),
                    cp.horizon.to_string(),
                    o.policy.to_string(),
                    o.principal_regret.to_string(),
                    o.expected_er.to_string(),
                    cp.min_principal_regret().to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(anyhow::Error::from)?;
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    out.write_all(&bytes).map_err(anyhow::Error::from)?;
    Ok(EXIT_OK)
}
