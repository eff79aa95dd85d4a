//! Experiment runs and their CSV/JSON outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mdlab_core::engine::{
    agent_regret, calibration, cfl_bound_params, expected_external_regret, principal_regret, run, theorem_bound, BoundParams, Notion,
    Trajectory, Transcript,
};
use mdlab_core::error::EngineError;
use mdlab_core::forecast::CalibrationReport;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, Resolved};

/// Column order of `transcript.csv`.
pub const TRANSCRIPT_HEADER: [&str; 15] = [
    "seed",
    "t",
    "state",
    "forecast_cell",
    "forecast",
    "context",
    "policy",
    "response",
    "response_dist",
    "u",
    "v",
    "expected_u",
    "expected_v",
    "cf_responses",
    "cf_expected_v",
];

/// Column order of `report.csv`.
pub const REPORT_HEADER: [&str; 17] = [
    "seed",
    "checkpoint",
    "pr",
    "er",
    "ir",
    "cir",
    "fer",
    "fcir",
    "expected_er",
    "iota",
    "kappa",
    "l12_bound",
    "iota_apriori",
    "theorem",
    "bound",
    "bound_apriori",
    "status",
];

/// Column order of `bounds.csv`.
pub const BOUNDS_HEADER: [&str; 15] = [
    "seed",
    "checkpoint",
    "theorem",
    "main",
    "iota",
    "iota_apriori",
    "epsilon",
    "epsilon_tilde",
    "m1",
    "m2",
    "value",
    "value_apriori",
    "pr",
    "holds",
    "status",
];

/// Column order of `calibration.csv`.
pub const CALIBRATION_HEADER: [&str; 5] = ["seed", "grid_index", "count", "l1_distance", "empirical_probs"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    /// Parameters measured from a common-forecast learner, which meets them by construction.
    Checked,
    /// Parameters supplied by the user; the bound is reported, not asserted.
    AssumptionUnverified,
    NoBound,
}

impl BoundStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundStatus::Checked => "checked",
            BoundStatus::AssumptionUnverified => "assumption-unverified",
            BoundStatus::NoBound => "no-bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub theorem: &'static str,
    pub main: f64,
    pub iota_apriori: f64,
    pub epsilon: Option<f64>,
    pub epsilon_tilde: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub value: f64,
    pub value_apriori: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointRow {
    pub seed: u64,
    pub checkpoint: usize,
    pub pr: f64,
    pub er: f64,
    pub ir: f64,
    pub cir: f64,
    pub fer: f64,
    pub fcir: f64,
    pub expected_er: f64,
    pub iota: f64,
    pub kappa: f64,
    pub l12_bound: f64,
    pub bound: Option<BoundRow>,
    pub status: BoundStatus,
}

impl CheckpointRow {
    /// Whether a bound asserted for this row is violated.
    pub fn violates(&self) -> bool {
        self.status == BoundStatus::Checked && self.bound.as_ref().is_some_and(|b| self.pr > b.value + 1e-12)
    }
}

#[derive(Clone, Debug)]
pub struct SeedResult {
    pub seed: u64,
    pub transcript: Transcript,
    pub rows: Vec<CheckpointRow>,
    pub calibration: CalibrationReport,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seed {seed}: {source}")]
    Engine { seed: u64, source: EngineError },
}

fn checkpoint_row(resolved: &Resolved, tr: &Transcript, seed: u64) -> Result<CheckpointRow, EngineError> {
    let game = &resolved.game;
    let regret = |n: Notion| agent_regret(game, tr, n, Trajectory::Realized).map(|r| r.value);
    let cal = calibration(tr)?;
    let (params, status) = match (&resolved.config.bound_params, resolved.config.learner.is_cfl()) {
        (Some(p), _) => (Some(BoundParams::from(*p)), BoundStatus::AssumptionUnverified),
        (None, true) => (Some(cfl_bound_params(game, tr)?), BoundStatus::Checked),
        (None, false) => (None, BoundStatus::NoBound),
    };
    let bound = match (resolved.theorem, params) {
        (Some(theorem), Some(params)) => {
            let b = theorem_bound(game, tr, theorem, &params)?;
            Some(BoundRow {
                theorem: theorem.name(),
                main: b.main,
                iota_apriori: b.iota_apriori,
                epsilon: params.epsilon,
                epsilon_tilde: params.epsilon_tilde,
                m1: params.m1,
                m2: params.m2,
                value: b.value,
                value_apriori: b.value_apriori,
            })
        }
        _ => None,
    };
    Ok(CheckpointRow {
        seed,
        checkpoint: tr.len(),
        pr: principal_regret(tr, &tr.alternatives)?,
        er: regret(Notion::Er)?,
        ir: regret(Notion::Ir)?,
        cir: regret(Notion::Cir)?,
        fer: regret(Notion::Fer)?,
        fcir: regret(Notion::Fcir)?,
        expected_er: expected_external_regret(game, tr, Trajectory::Realized)?,
        iota: cal.iota,
        kappa: cal.kappa,
        l12_bound: cal.l12_bound,
        status: if bound.is_some() { status } else { BoundStatus::NoBound },
        bound,
    })
}

/// One seed: a single run, evaluated at every checkpoint prefix.
pub fn run_seed(resolved: &Resolved, seed: u64) -> Result<SeedResult, RunError> {
    let states = resolved.states(seed)?;
    let learner = resolved.config.learner.to_spec(&states)?;
    let wrap = |source| RunError::Engine { seed, source };
    let transcript = run(&resolved.game, &resolved.mechanism, &learner, &states, seed).map_err(wrap)?;
    let mut rows = Vec::with_capacity(resolved.checkpoints.len());
    for &c in &resolved.checkpoints {
        let prefix = transcript.prefix(c).map_err(wrap)?;
        rows.push(checkpoint_row(resolved, &prefix, seed).map_err(wrap)?);
    }
    let calibration = calibration(&transcript).map_err(wrap)?;
    Ok(SeedResult { seed, transcript, rows, calibration })
}

/// Every seed, on up to `jobs` threads; results keep the config's seed order.
pub fn run_all(resolved: &Resolved, jobs: usize) -> Result<Vec<SeedResult>, RunError> {
    let seeds = &resolved.config.seeds;
    let jobs = jobs.clamp(1, seeds.len().max(1));
    let mut slots: Vec<Option<Result<SeedResult, RunError>>> = (0..seeds.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                scope.spawn(move || {
                    (j..seeds.len()).step_by(jobs).map(|i| (i, run_seed(resolved, seeds[i]))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("run thread panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every seed ran")).collect()
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn writer(path: &Path) -> csv::Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(File::create(path)?))
}

pub fn write_transcript(path: &Path, results: &[SeedResult]) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRANSCRIPT_HEADER)?;
    for res in results {
        let tr = &res.transcript;
        for (t, r) in tr.rounds.iter().enumerate() {
            w.write_record([
                res.seed.to_string(),
                (t + 1).to_string(),
                r.state.to_string(),
                r.forecast_cell.to_string(),
                join(tr.forecast(t).probabilities()),
                join(&r.context),
                r.policy.to_string(),
                r.response.to_string(),
                join(&r.response_dist),
                num(r.u),
                num(r.v),
                num(r.expected_u),
                num(r.expected_v),
                join(r.counterfactual.iter().map(|c| c.response)),
                join(r.counterfactual.iter().map(|c| c.expected_v)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(path: &Path, results: &[SeedResult]) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record(REPORT_HEADER)?;
    for row in results.iter().flat_map(|r| &r.rows) {
        let b = row.bound.as_ref();
        w.write_record([
            row.seed.to_string(),
            row.checkpoint.to_string(),
            num(row.pr),
            num(row.er),
            num(row.ir),
            num(row.cir),
            num(row.fer),
            num(row.fcir),
            num(row.expected_er),
            num(row.iota),
            num(row.kappa),
            num(row.l12_bound),
            opt(b.map(|b| b.iota_apriori)),
            b.map(|b| b.theorem.to_string()).unwrap_or_default(),
            opt(b.map(|b| b.value)),
            opt(b.map(|b| b.value_apriori)),
            row.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bounds(path: &Path, results: &[SeedResult]) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record(BOUNDS_HEADER)?;
    for row in results.iter().flat_map(|r| &r.rows) {
        let Some(b) = &row.bound else { continue };
        w.write_record([
            row.seed.to_string(),
            row.checkpoint.to_string(),
            b.theorem.to_string(),
            num(b.main),
            num(row.iota),
            num(b.iota_apriori),
            opt(b.epsilon),
            opt(b.epsilon_tilde),
            opt(b.m1),
            opt(b.m2),
            num(b.value),
            num(b.value_apriori),
            num(row.pr),
            (row.pr <= b.value + 1e-12).to_string(),
            row.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_calibration(path: &Path, results: &[SeedResult]) -> csv::Result<()> {
    let mut w = writer(path)?;
    w.write_record(CALIBRATION_HEADER)?;
    for res in results {
        for cell in &res.calibration.per_cell {
            w.write_record([
                res.seed.to_string(),
                cell.grid_index.to_string(),
                cell.count.to_string(),
                num(cell.l1_distance),
                join(&cell.empirical),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SeedSummary<'a> {
    seed: u64,
    kappa: f64,
    iota: f64,
    checkpoints: &'a [CheckpointRow],
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    runs: Vec<SeedSummary<'a>>,
    /// `(seed, checkpoint)` pairs where an asserted bound failed.
    violations: Vec<(u64, usize)>,
}

/// Write every output file; returns the asserted-bound violations.
pub fn write_outputs(dir: &Path, resolved: &Resolved, results: &[SeedResult]) -> anyhow::Result<Vec<(u64, usize)>> {
    std::fs::create_dir_all(dir)?;
    write_transcript(&dir.join("transcript.csv"), results)?;
    write_report(&dir.join("report.csv"), results)?;
    write_bounds(&dir.join("bounds.csv"), results)?;
    write_calibration(&dir.join("calibration.csv"), results)?;
    let violations: Vec<(u64, usize)> =
        results.iter().flat_map(|r| &r.rows).filter(|row| row.violates()).map(|row| (row.seed, row.checkpoint)).collect();
    let summary = Summary {
        config: &resolved.config,
        runs: results
            .iter()
            .map(|r| SeedSummary { seed: r.seed, kappa: r.calibration.kappa, iota: r.calibration.iota, checkpoints: &r.rows })
            .collect(),
        violations: violations.clone(),
    };
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(violations)
}
