//! JSON game documents.
//!
//! `u` and `v` are flat arrays indexed row-major by (response, policy, state).

use std::path::Path;

use mdlab_core::game::{CoverRadii, Game, GameParts, Lipschitz, Metric};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricFile {
    Discrete,
    Matrix(Vec<Vec<f64>>),
}

impl Default for MetricFile {
    fn default() -> Self {
        MetricFile::Discrete
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzFile {
    pub u_response: f64,
    pub u_policy: f64,
    pub v_response: f64,
    pub v_policy: f64,
}

impl Default for LipschitzFile {
    fn default() -> Self {
        Self { u_response: 1.0, u_policy: 1.0, v_response: 1.0, v_policy: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverRadiiFile {
    #[serde(default)]
    pub response: f64,
    #[serde(default)]
    pub policy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub states: Vec<String>,
    pub responses: Vec<String>,
    pub policies: Vec<String>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(default)]
    pub response_metric: MetricFile,
    #[serde(default)]
    pub policy_metric: MetricFile,
    #[serde(default)]
    pub lipschitz: LipschitzFile,
    #[serde(default)]
    pub cover_radii: CoverRadiiFile,
}

#[derive(Debug, thiserror::Error)]
pub enum GameFileError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Game(#[from] mdlab_core::error::GameError),
}

fn metric(m: &MetricFile) -> Metric {
    match m {
        MetricFile::Discrete => Metric::Discrete,
        MetricFile::Matrix(rows) => Metric::Matrix(rows.iter().flatten().copied().collect()),
    }
}

fn metric_file(m: &Metric, n: usize) -> MetricFile {
    match m {
        Metric::Discrete => MetricFile::Discrete,
        Metric::Matrix(flat) => MetricFile::Matrix(flat.chunks(n).map(<[f64]>::to_vec).collect()),
    }
}

impl GameFile {
    pub fn parse(text: &str) -> Result<Self, GameFileError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| GameFileError::Parse { path: e.path().to_string(), message: e.inner().to_string() })
    }

    pub fn load(path: &Path) -> Result<Game, GameFileError> {
        Self::parse(&std::fs::read_to_string(path)?)?.to_game()
    }

    pub fn to_game(&self) -> Result<Game, GameFileError> {
        let l = self.lipschitz;
        Ok(Game::new(GameParts {
            states: self.states.clone(),
            responses: self.responses.clone(),
            policies: self.policies.clone(),
            u: self.u.clone(),
            v: self.v.clone(),
            response_metric: metric(&self.response_metric),
            policy_metric: metric(&self.policy_metric),
            lipschitz: Lipschitz { u_response: l.u_response, u_policy: l.u_policy, v_response: l.v_response, v_policy: l.v_policy },
            cover_radii: CoverRadii { response: self.cover_radii.response, policy: self.cover_radii.policy },
        })?)
    }

    pub fn from_game(game: &Game) -> Self {
        let p = game.parts();
        let l = p.lipschitz;
        GameFile {
            states: p.states.clone(),
            responses: p.responses.clone(),
            policies: p.policies.clone(),
            u: p.u.clone(),
            v: p.v.clone(),
            response_metric: metric_file(&p.response_metric, game.n_responses()),
            policy_metric: metric_file(&p.policy_metric, game.n_policies()),
            lipschitz: LipschitzFile { u_response: l.u_response, u_policy: l.u_policy, v_response: l.v_response, v_policy: l.v_policy },
            cover_radii: CoverRadiiFile { response: p.cover_radii.response, policy: p.cover_radii.policy },
        }
    }
}
