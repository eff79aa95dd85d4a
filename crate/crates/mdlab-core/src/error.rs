use alloc::string::String;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("row {row:?} has {found} coefficients, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize, row: Option<usize> },
    #[error("non-finite coefficient")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("{table} table has {found} entries, expected {expected}")]
    TableShape { table: &'static str, expected: usize, found: usize },
    #[error("{table}({r},{p},{y}) = {value} lies outside [0, 1]")]
    OutOfRange { table: &'static str, r: usize, p: usize, y: usize, value: f64 },
    #[error("{0} metric is not a symmetric non-negative matrix with zero diagonal")]
    BadMetric(&'static str),
    #[error("{table} violates its declared Lipschitz bound at responses ({r}, {r2}), policies ({p}, {p2}), state {y}")]
    Lipschitz { table: &'static str, r: usize, r2: usize, p: usize, p2: usize, y: usize },
    #[error("game needs at least one state, response and policy")]
    Empty,
    #[error("probabilities must be finite, non-negative and sum to 1")]
    BadPrior,
    #[error("prior has {found} entries for {expected} states")]
    PriorLength { expected: usize, found: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("internal: robust program reported {0:?}")]
    Internal(crate::lp::LpStatus),
    #[error("epsilon must be finite and non-negative")]
    Epsilon,
    #[error("information structure is invalid: {0}")]
    InfoStructure(String),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ForecastError {
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("update called without a preceding predict")]
    UpdateWithoutPredict,
    #[error("matrix is not row-stochastic")]
    NotStochastic,
    #[error("grid step must lie in (0, 1]")]
    BadStep,
    #[error("calibration needs at least one round")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LearnerError {
    #[error("CFL needs a published forecast")]
    MissingForecast,
    #[error("observe called before respond")]
    ObserveBeforeRespond,
    #[error("adversarial learner needs a scripted state sequence")]
    MissingScript,
    #[error("no mixing probability in [0, 1] zeroes the expected regret")]
    NoRoot,
    #[error("learner input is inconsistent: {0}")]
    Input(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MechanismError {
    #[error("M1 needs an information oracle context")]
    MissingOracle,
    #[error("only M1 consumes an information oracle context")]
    UnexpectedOracle,
    #[error("epsilon_bar must be positive for M1-M3")]
    EpsilonBar,
    #[error("policy index {0} out of range")]
    PolicyIndex(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("state index {0} out of range")]
    StateIndex(usize),
    #[error("alternative policy {0} has no counterfactual trajectory")]
    MissingCounterfactual(usize),
    #[error("theorem bound needs parameter {0}")]
    MissingParameter(&'static str),
    #[error("checkpoint {0} outside the transcript")]
    Checkpoint(usize),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Game(#[from] GameError),
}
