//! Experiment configuration documents.

use std::path::{Path, PathBuf};

use mdlab_core::engine::{iid_states, markov_states, BoundParams, Theorem};
use mdlab_core::game::{Game, Prior};
use mdlab_core::learner::{LearnerKind, LearnerSpec, Script};
use mdlab_core::mechanism::{MechanismKind, MechanismSpec};
use mdlab_core::scenario::{contract_task, drug_approval, judge_prosecutor, ContractParams};
use serde::{Deserialize, Serialize};

use crate::gamefile::GameFile;

/// A schema or semantic violation, located by field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSource,
    pub mechanism: MechanismConfig,
    pub learner: LearnerConfig,
    pub states: StatesConfig,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seeds: Vec<u64>,
    /// Defaults to `[T]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_params: Option<BoundParamsConfig>,
    /// Defaults by mechanism: M1 → t4, M2 → t5, M3 → t6.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremName>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSource {
    Scenario(ScenarioConfig),
    /// Path to a game document, relative to the config file.
    File(PathBuf),
    Inline(GameFile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    JudgeProsecutor {
        guilty: f64,
        step: f64,
    },
    DrugApproval {
        effective: f64,
        step: f64,
    },
    ContractTask {
        costs: [f64; 2],
        benefits: [f64; 2],
        max_pay: f64,
        step: f64,
    },
}

impl ScenarioConfig {
    pub fn build(&self) -> Result<Game, ConfigError> {
        let built = match *self {
            ScenarioConfig::JudgeProsecutor { guilty, step } => judge_prosecutor(guilty, step),
            ScenarioConfig::DrugApproval { effective, step } => drug_approval(effective, step),
            ScenarioConfig::ContractTask { costs, benefits, max_pay, step } => {
                contract_task(ContractParams { costs, benefits, max_pay, step })
            }
        };
        built.map(|s| s.game).map_err(|e| ConfigError::new("game.scenario", e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKindName {
    Constant,
    M1,
    M2,
    M3,
}

fn default_grid_delta() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismConfig {
    pub kind: MechanismKindName,
    #[serde(default)]
    pub epsilon_bar: f64,
    #[serde(default)]
    pub fixed_policy: usize,
    #[serde(default = "default_grid_delta")]
    pub grid_delta: f64,
    /// Empty means every policy.
    #[serde(default)]
    pub alternatives: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl MechanismConfig {
    pub fn to_spec(&self) -> MechanismSpec {
        let kind = match self.kind {
            MechanismKindName::Constant => MechanismKind::Constant,
            MechanismKindName::M1 => MechanismKind::M1,
            MechanismKindName::M2 => MechanismKind::M2,
            MechanismKindName::M3 => MechanismKind::M3,
        };
        MechanismSpec {
            kind,
            epsilon_bar: self.epsilon_bar,
            fixed_policy: self.fixed_policy,
            grid_delta: self.grid_delta,
            alternatives: self.alternatives.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptConfig {
    /// Defaults to the run's own state sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<usize>>,
    pub trigger_policies: Vec<usize>,
    pub trigger_states: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerConfig {
    Cfl {
        #[serde(default)]
        seed: u64,
    },
    ExpWeights {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
    FixedPriorBayes {
        prior: Vec<f64>,
        #[serde(default)]
        seed: u64,
    },
    SelectiveSuperefficiency {
        script: ScriptConfig,
        #[serde(default)]
        fallback: bool,
        #[serde(default)]
        seed: u64,
    },
    SelectiveSuperinefficiency {
        script: ScriptConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mix: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
}

impl LearnerConfig {
    pub fn is_cfl(&self) -> bool {
        matches!(self, LearnerConfig::Cfl { .. })
    }

    /// Core spec; scripts without explicit states follow `states`.
    pub fn to_spec(&self, states: &[usize]) -> Result<LearnerSpec, ConfigError> {
        let script = |s: &ScriptConfig| Script {
            states: s.states.clone().unwrap_or_else(|| states.to_vec()),
            trigger_policies: s.trigger_policies.clone(),
            trigger_states: s.trigger_states.clone(),
        };
        let (kind, seed) = match self {
            LearnerConfig::Cfl { seed } => (LearnerKind::Cfl, *seed),
            LearnerConfig::ExpWeights { eta, seed } => (LearnerKind::ExpWeights { eta: *eta }, *seed),
            LearnerConfig::FixedPriorBayes { prior, seed } => {
                let prior = Prior::new(prior.clone()).map_err(|e| ConfigError::new("learner.prior", e.to_string()))?;
                (LearnerKind::FixedPriorBayes { prior }, *seed)
            }
            LearnerConfig::SelectiveSuperefficiency { script: s, fallback, seed } => {
                (LearnerKind::SelectiveSuperefficiency { script: script(s), fallback: *fallback }, *seed)
            }
            LearnerConfig::SelectiveSuperinefficiency { script: s, mix, seed } => {
                (LearnerKind::SelectiveSuperinefficiency { script: script(s), mix: *mix }, *seed)
            }
        };
        Ok(LearnerSpec::new(kind, seed))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StatesConfig {
    Iid { probabilities: Vec<f64> },
    Scripted { states: Vec<usize> },
    Markov { initial: Vec<f64>, transition: Vec<Vec<f64>> },
    /// Whitespace- or comma-separated state indices, relative to the config file.
    ScriptFile { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
}

impl From<BoundParamsConfig> for BoundParams {
    fn from(c: BoundParamsConfig) -> Self {
        BoundParams { epsilon: c.epsilon, epsilon_tilde: c.epsilon_tilde, m1: c.m1, m2: c.m2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremName {
    T4,
    T5,
    T6,
}

impl From<TheoremName> for Theorem {
    fn from(t: TheoremName) -> Self {
        match t {
            TheoremName::T4 => Theorem::T4,
            TheoremName::T5 => Theorem::T5,
            TheoremName::T6 => Theorem::T6,
        }
    }
}

/// Everything a run needs, resolved against the file system.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub game: Game,
    pub mechanism: MechanismSpec,
    pub checkpoints: Vec<usize>,
    pub theorem: Option<Theorem>,
    base: PathBuf,
}

/// Parse a config document, reporting schema errors by field path.
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { "<root>".to_string() } else { path }, e.inner().to_string())
    })
}

pub fn load(path: &Path) -> Result<Resolved, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("<file>", format!("{}: {e}", path.display())))?;
    let config = parse(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    resolve(config, &base)
}

fn check_prior(field: &str, v: &[f64], n: usize) -> Result<(), ConfigError> {
    if v.len() != n {
        return Err(ConfigError::new(field, format!("expected {n} probabilities, found {}", v.len())));
    }
    Prior::new(v.to_vec()).map(|_| ()).map_err(|e| ConfigError::new(field, e.to_string()))
}

/// Validate a parsed config and build its game.
pub fn resolve(config: ExperimentConfig, base: &Path) -> Result<Resolved, ConfigError> {
    if config.horizon == 0 {
        return Err(ConfigError::new("T", "must be at least 1"));
    }
    if config.seeds.is_empty() {
        return Err(ConfigError::new("seeds", "must list at least one seed"));
    }
    for (i, &c) in config.checkpoints.iter().enumerate() {
        if c == 0 || c > config.horizon {
            return Err(ConfigError::new(format!("checkpoints[{i}]"), format!("{c} lies outside [1, T]")));
        }
    }
    let game = match &config.game {
        GameSource::Scenario(s) => s.build()?,
        GameSource::File(p) => GameFile::load(&base.join(p)).map_err(|e| ConfigError::new("game.file", e.to_string()))?,
        GameSource::Inline(g) => g.to_game().map_err(|e| ConfigError::new("game.inline", e.to_string()))?,
    };
    let ny = game.n_states();
    match &config.states {
        StatesConfig::Iid { probabilities } => check_prior("states.probabilities", probabilities, ny)?,
        StatesConfig::Markov { initial, transition } => {
            check_prior("states.initial", initial, ny)?;
            if transition.len() != ny {
                return Err(ConfigError::new("states.transition", format!("expected {ny} rows")));
            }
            for (i, row) in transition.iter().enumerate() {
                check_prior(&format!("states.transition[{i}]"), row, ny)?;
            }
        }
        StatesConfig::Scripted { states } => check_script("states.states", states, ny, config.horizon)?,
        StatesConfig::ScriptFile { path } => {
            let states = read_script(&base.join(path)).map_err(|e| ConfigError::new("states.path", e))?;
            check_script("states.path", &states, ny, config.horizon)?;
        }
    }
    let mc = &config.mechanism;
    let np = game.n_policies();
    if mc.kind != MechanismKindName::Constant && !(mc.epsilon_bar > 0.0 && mc.epsilon_bar.is_finite()) {
        return Err(ConfigError::new("mechanism.epsilon_bar", "must be positive for m1, m2 and m3"));
    }
    if mc.fixed_policy >= np {
        return Err(ConfigError::new("mechanism.fixed_policy", format!("{} out of range (game has {np} policies)", mc.fixed_policy)));
    }
    if !(mc.grid_delta > 0.0 && mc.grid_delta <= 1.0) {
        return Err(ConfigError::new("mechanism.grid_delta", "must lie in (0, 1]"));
    }
    if let Some((i, p)) = mc.alternatives.iter().enumerate().find(|(_, &p)| p >= np) {
        return Err(ConfigError::new(format!("mechanism.alternatives[{i}]"), format!("{p} out of range")));
    }
    match &config.learner {
        LearnerConfig::FixedPriorBayes { prior, .. } => check_prior("learner.prior", prior, ny)?,
        LearnerConfig::ExpWeights { eta: Some(e), .. } if !(e.is_finite() && *e >= 0.0) => {
            return Err(ConfigError::new("learner.eta", "must be finite and non-negative"));
        }
        LearnerConfig::SelectiveSuperefficiency { script, .. } | LearnerConfig::SelectiveSuperinefficiency { script, .. } => {
            if let Some(s) = &script.states {
                check_script("learner.script.states", s, ny, config.horizon)?;
            }
            if let Some(p) = script.trigger_policies.iter().find(|&&p| p >= np) {
                return Err(ConfigError::new("learner.script.trigger_policies", format!("{p} out of range")));
            }
            if let Some(y) = script.trigger_states.iter().find(|&&y| y >= ny) {
                return Err(ConfigError::new("learner.script.trigger_states", format!("{y} out of range")));
            }
            if let LearnerConfig::SelectiveSuperinefficiency { mix: Some(q), .. } = &config.learner {
                if !(0.0..=1.0).contains(q) {
                    return Err(ConfigError::new("learner.mix", "must lie in [0, 1]"));
                }
            }
        }
        _ => {}
    }
    let checkpoints = if config.checkpoints.is_empty() { vec![config.horizon] } else { config.checkpoints.clone() };
    let theorem = config.theorem.map(Theorem::from).or(match mc.kind {
        MechanismKindName::Constant => None,
        MechanismKindName::M1 => Some(Theorem::T4),
        MechanismKindName::M2 => Some(Theorem::T5),
        MechanismKindName::M3 => Some(Theorem::T6),
    });
    Ok(Resolved { mechanism: mc.to_spec(), game, checkpoints, theorem, base: base.to_path_buf(), config })
}

fn check_script(field: &str, states: &[usize], ny: usize, horizon: usize) -> Result<(), ConfigError> {
    if states.len() < horizon {
        return Err(ConfigError::new(field, format!("has {} states, T is {horizon}", states.len())));
    }
    if let Some(y) = states.iter().find(|&&y| y >= ny) {
        return Err(ConfigError::new(field, format!("state {y} out of range")));
    }
    Ok(())
}

/// Read a state script: indices separated by whitespace or commas.
pub fn read_script(path: &Path) -> Result<Vec<usize>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

impl Resolved {
    /// The state sequence for one seed.
    pub fn states(&self, seed: u64) -> Result<Vec<usize>, ConfigError> {
        let t = self.config.horizon;
        match &self.config.states {
            StatesConfig::Iid { probabilities } => {
                let prior = Prior::new(probabilities.clone()).map_err(|e| ConfigError::new("states.probabilities", e.to_string()))?;
                Ok(iid_states(&prior, t, seed))
            }
            StatesConfig::Markov { initial, transition } => {
                let initial = Prior::new(initial.clone()).map_err(|e| ConfigError::new("states.initial", e.to_string()))?;
                let flat: Vec<f64> = transition.iter().flatten().copied().collect();
                markov_states(&initial, &flat, t, seed).map_err(|e| ConfigError::new("states.transition", e.to_string()))
            }
            StatesConfig::Scripted { states } => Ok(states[..t].to_vec()),
            StatesConfig::ScriptFile { path } => {
                let states = read_script(&self.base.join(path)).map_err(|e| ConfigError::new("states.path", e))?;
                Ok(states[..t].to_vec())
            }
        }
    }
}
