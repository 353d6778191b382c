//! Seeded Monte Carlo experiments over graphs, opinion models and dynamics.
//!
//! Trial `i` of an experiment derives every random choice from
//! `trial_seed(seed, i)`, and rows are collected in index order, so a report
//! depends only on its configuration and never on the thread count.

mod config;
mod experiments;
mod report;

pub use config::{apply_override, read_table, ExperimentConfig, ModelName, PSpec, Preset, ReportFormat};
pub use experiments::{
    bias_sweep, census_experiment, contraction_experiment, contraction_floor, growth_ratio_experiment, p_sweep,
    CensusTable, ContractionReport, ContractionRow, GrowthTable, SweepRow,
};
pub use report::{aggregates_path, aggregates_to_csv, render, trials_to_csv, write_report, REPORT_SCHEMA_VERSION};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{run, Outcome};
use crate::graph::{sample_gnp, Graph, GraphError};
use crate::opinions::{census, OpinionModel};
use crate::rng::{splitmix64, trial_seed};

/// Days t for which |S_{t+1}|/|S_t| is aggregated.
pub const GROWTH_DAYS: u32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("graph sampling failed: {0}")]
    Graph(#[from] GraphError),
    #[error("{path}: {message}")]
    Output { path: String, message: String },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub almost_positive: u64,
    pub unstable: u64,
    pub unstable_with_swing: u64,
    pub excess: i64,
    /// excess / (p·n^{3/2}) with the nominal p.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub index: u64,
    pub seed: u64,
    pub edge_count: u64,
    pub initial_bias: i64,
    /// S_t for every simulated day, day 0 first.
    pub biases: Vec<i64>,
    pub outcome: Option<Outcome>,
    pub unanimity_day: Option<u32>,
    pub final_sign: Option<i8>,
    pub census: Option<CensusRow>,
    pub error: Option<String>,
}

impl TrialRow {
    fn failed(index: u64, seed: u64, message: String) -> Self {
        Self {
            index,
            seed,
            edge_count: 0,
            initial_bias: 0,
            biases: Vec::new(),
            outcome: None,
            unanimity_day: None,
            final_sign: None,
            census: None,
            error: Some(message),
        }
    }

    /// S_t, following the detected cycle past the last simulated day.
    pub fn bias_at(&self, t: u32) -> Option<i64> {
        crate::dynamics::extrapolate_bias(&self.biases, self.outcome.as_ref()?, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            min: *v.first()?,
            q10: quantile_sorted(&v, 0.1)?,
            median: quantile_sorted(&v, 0.5)?,
            q90: quantile_sorted(&v, 0.9)?,
            max: *v.last()?,
        })
    }
}

/// Linear interpolation between order statistics at position q·(len − 1).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    let last = sorted.len().checked_sub(1)?;
    let pos = q.clamp(0.0, 1.0) * last as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub day: u32,
    /// Median of |S_{t+1}|/|S_t| over trials with S_t ≠ 0.
    pub median_ratio: Option<f64>,
    pub samples: u64,
    /// Trials skipped because S_t = 0 or the run hit the day cap first.
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: u64,
    pub failed: u64,
    pub unanimous: u64,
    /// unanimous / trials.
    pub unanimity_fraction: f64,
    pub median_unanimity_day: Option<f64>,
    /// Unanimous trials with S0 ≠ 0.
    pub sign_checked: u64,
    /// Those whose final sign is sgn(S0).
    pub sign_matches: u64,
    pub sign_match_fraction: Option<f64>,
    pub growth: Vec<GrowthRow>,
    pub excess: Option<Quantiles>,
    pub positive_excess_fraction: Option<f64>,
    pub alpha: Option<Quantiles>,
}

impl Aggregates {
    pub fn from_rows(rows: &[TrialRow]) -> Self {
        let trials = rows.len() as u64;
        let failed = rows.iter().filter(|r| r.error.is_some()).count() as u64;
        let days: Vec<f64> = rows.iter().filter_map(|r| r.unanimity_day).map(f64::from).collect();
        let unanimous = days.len() as u64;
        let checked: Vec<&TrialRow> =
            rows.iter().filter(|r| r.unanimity_day.is_some() && r.initial_bias != 0).collect();
        let sign_matches =
            checked.iter().filter(|r| r.final_sign.map(i64::from) == Some(r.initial_bias.signum())).count() as u64;
        let growth = (0..GROWTH_DAYS)
            .map(|t| {
                let ratios: Vec<f64> = rows
                    .iter()
                    .filter_map(|r| match (r.bias_at(t), r.bias_at(t + 1)) {
                        (Some(a), Some(b)) if a != 0 => Some(b.unsigned_abs() as f64 / a.unsigned_abs() as f64),
                        _ => None,
                    })
                    .collect();
                GrowthRow {
                    day: t,
                    median_ratio: median(&ratios),
                    samples: ratios.len() as u64,
                    skipped: trials - ratios.len() as u64,
                }
            })
            .collect();
        let censuses: Vec<CensusRow> = rows.iter().filter_map(|r| r.census).collect();
        let excess: Vec<f64> = censuses.iter().map(|c| c.excess as f64).collect();
        let alpha: Vec<f64> = censuses.iter().map(|c| c.alpha).collect();
        let fraction = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        Self {
            trials,
            failed,
            unanimous,
            unanimity_fraction: fraction(unanimous, trials).unwrap_or(0.0),
            median_unanimity_day: median(&days),
            sign_checked: checked.len() as u64,
            sign_matches,
            sign_match_fraction: fraction(sign_matches, checked.len() as u64),
            growth,
            excess: Quantiles::of(&excess),
            positive_excess_fraction: fraction(
                censuses.iter().filter(|c| c.excess > 0).count() as u64,
                censuses.len() as u64,
            ),
            alpha: Quantiles::of(&alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub resolved_p: f64,
    pub trials: Vec<TrialRow>,
    pub aggregates: Aggregates,
}

/// Seed of the shared graph in quenched experiments.
fn quenched_graph_seed(master: u64) -> u64 {
    splitmix64(master ^ 0x5155_454E_4348_4544)
}

fn run_trial(cfg: &ExperimentConfig, p: f64, shared: Option<&Graph>, index: u64) -> TrialRow {
    let seed = trial_seed(cfg.seed, index);
    match try_trial(cfg, p, shared, index, seed) {
        Ok(row) => row,
        Err(message) => TrialRow::failed(index, seed, message),
    }
}

fn try_trial(cfg: &ExperimentConfig, p: f64, shared: Option<&Graph>, index: u64, seed: u64) -> Result<TrialRow, String> {
    let owned;
    let g = match shared {
        Some(g) => g,
        None => {
            owned = sample_gnp(cfg.n, p, seed).map_err(|e| e.to_string())?;
            &owned
        }
    };
    let init = OpinionModel { kind: cfg.opinion_kind(), seed }.sample(cfg.n).map_err(|e| e.to_string())?;
    let census = match (cfg.gamma, &init.morning) {
        (Some(gamma), Some(r0)) => {
            let c = census(g, r0, &init.swing_set, gamma, p).map_err(|e| e.to_string())?;
            Some(CensusRow {
                almost_positive: c.almost_positive as u64,
                unstable: c.unstable as u64,
                unstable_with_swing: c.unstable_with_swing as u64,
                excess: c.excess,
                alpha: c.alpha(cfg.n, p),
            })
        }
        _ => None,
    };
    let traj = run(g, &init.s0, cfg.day_cap).map_err(|e| e.to_string())?;
    let final_sign = match traj.outcome {
        Outcome::Unanimous { sign, .. } => Some(sign),
        _ => None,
    };
    Ok(TrialRow {
        index,
        seed,
        edge_count: g.edge_count() as u64,
        initial_bias: init.s0.bias(),
        biases: traj.biases(),
        outcome: Some(traj.outcome),
        unanimity_day: traj.unanimity_day(),
        final_sign,
        census,
        error: None,
    })
}

/// Runs every trial of `cfg` on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let p = cfg.resolved_p();
    let shared = if cfg.quenched { Some(sample_gnp(cfg.n, p, quenched_graph_seed(cfg.seed))?) } else { None };
    let trials: Vec<TrialRow> =
        (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, p, shared.as_ref(), i)).collect();
    let aggregates = Aggregates::from_rows(&trials);
    Ok(ExperimentReport { schema_version: REPORT_SCHEMA_VERSION, config: cfg.clone(), resolved_p: p, trials, aggregates })
}

/// [`run_experiment`] on a dedicated pool of `threads` workers (0 picks the
/// rayon default).
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport, HarnessError> {
    with_pool(threads, || run_experiment(cfg))
}

/// Runs `f` inside a fresh rayon pool with `threads` workers (0 = one per core).
pub fn with_pool<T: Send>(
    threads: usize,
    f: impl FnOnce() -> Result<T, HarnessError> + Send,
) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    pool.install(f)
}
