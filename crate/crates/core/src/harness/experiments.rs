use serde::{Deserialize, Serialize};

use super::config::check_discrepancy;
use super::{run_experiment, ExperimentConfig, ExperimentReport, GrowthRow, HarnessError, ModelName, PSpec, Quantiles};

fn require_model(cfg: &ExperimentConfig, allowed: &[ModelName], what: &str) -> Result<(), HarnessError> {
    if allowed.contains(&cfg.model) {
        return Ok(());
    }
    Err(HarnessError::Config(format!("{what} does not support model {:?}", cfg.model)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub sqrt_np: f64,
    pub rows: Vec<GrowthRow>,
    /// median_ratio / sqrt(np) per row.
    pub relative: Vec<Option<f64>>,
    pub report: ExperimentReport,
}

/// Median per-day bias growth |S_{t+1}|/|S_t| under uniform initial opinions.
pub fn growth_ratio_experiment(cfg: &ExperimentConfig) -> Result<GrowthTable, HarnessError> {
    require_model(cfg, &[ModelName::Uniform], "the growth experiment")?;
    let report = run_experiment(cfg)?;
    let sqrt_np = (cfg.n as f64 * report.resolved_p).sqrt();
    let rows = report.aggregates.growth.clone();
    let relative = rows.iter().map(|r| r.median_ratio.map(|m| m / sqrt_np)).collect();
    Ok(GrowthTable { sqrt_np, rows, relative, report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusTable {
    pub positive_excess_fraction: f64,
    pub excess: Quantiles,
    pub alpha: Quantiles,
    pub report: ExperimentReport,
}

/// Almost-positive excess per trial for the morning/evening model.
pub fn census_experiment(cfg: &ExperimentConfig) -> Result<CensusTable, HarnessError> {
    require_model(cfg, &[ModelName::MorningEvening], "the census experiment")?;
    if cfg.gamma.is_none() {
        return Err(HarnessError::Config("the census experiment requires gamma".into()));
    }
    let report = run_experiment(cfg)?;
    let a = &report.aggregates;
    match (a.positive_excess_fraction, a.excess, a.alpha) {
        (Some(positive_excess_fraction), Some(excess), Some(alpha)) => {
            Ok(CensusTable { positive_excess_fraction, excess, alpha, report })
        }
        _ => Err(HarnessError::Config("every census trial failed".into())),
    }
}

/// ⌈8β/(p·sqrt δ)⌉: the bias beyond which a (p, β)-jumbled graph with
/// minimum degree at least δnp has bias at least (1 − δ/2)n one day later.
pub fn contraction_floor(beta: f64, p: f64, delta: f64) -> i64 {
    (8.0 * beta / (p * delta.sqrt())).ceil() as i64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub index: u64,
    /// First day with |S_t| ≥ bias_floor.
    pub crossing_day: Option<u32>,
    /// Minority size from the crossing day on, in the crossing sign.
    pub minority: Vec<u64>,
    /// σ·S_{t*+1}/n with σ the crossing sign.
    pub next_bias_share: Option<f64>,
    /// next_bias_share ≥ 1 − δ/2.
    pub jump: Option<bool>,
    /// Minority never grows after the crossing day.
    pub monotone: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub bias_floor: i64,
    pub delta: f64,
    pub qualifying: u64,
    pub jump_fraction: Option<f64>,
    pub monotone_fraction: Option<f64>,
    pub rows: Vec<ContractionRow>,
}

/// For trials whose bias reaches `bias_floor`, records the jump of the next
/// day and the decay of the minority afterwards.
pub fn contraction_experiment(cfg: &ExperimentConfig, bias_floor: i64, delta: f64) -> Result<ContractionReport, HarnessError> {
    require_model(cfg, &[ModelName::Uniform, ModelName::FixedDiscrepancy], "the contraction experiment")?;
    if bias_floor < 1 {
        return Err(HarnessError::Config(format!("bias floor {bias_floor} must be positive")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(HarnessError::Config(format!("delta {delta} outside (0, 1]")));
    }
    let report = run_experiment(cfg)?;
    let n = cfg.n as i64;
    let rows: Vec<ContractionRow> = report
        .trials
        .iter()
        .map(|r| {
            let crossing = r.biases.iter().position(|b| b.abs() >= bias_floor).map(|t| t as u32);
            let mut row = ContractionRow {
                index: r.index,
                crossing_day: crossing,
                minority: Vec::new(),
                next_bias_share: None,
                jump: None,
                monotone: None,
            };
            let (Some(t), Some(next)) = (crossing, crossing.and_then(|t| r.bias_at(t + 1))) else {
                return row;
            };
            let sign = r.biases[t as usize].signum();
            let minority = |b: i64| ((n - sign * b) / 2) as u64;
            row.minority = r.biases[t as usize..].iter().map(|&b| minority(b)).collect();
            if row.minority.len() == 1 {
                row.minority.push(minority(next));
            }
            let share = (sign * next) as f64 / n as f64;
            row.next_bias_share = Some(share);
            row.jump = Some(share >= 1.0 - delta / 2.0);
            row.monotone = Some(row.minority[1..].windows(2).all(|w| w[1] <= w[0]));
            row
        })
        .collect();
    let qualifying = rows.iter().filter(|r| r.jump.is_some()).count() as u64;
    let fraction = |f: fn(&ContractionRow) -> Option<bool>| {
        (qualifying > 0).then(|| rows.iter().filter(|r| f(r) == Some(true)).count() as f64 / qualifying as f64)
    };
    Ok(ContractionReport {
        bias_floor,
        delta,
        qualifying,
        jump_fraction: fraction(|r| r.jump),
        monotone_fraction: fraction(|r| r.monotone),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub discrepancy: Option<i64>,
    pub trials: u64,
    pub unanimous: u64,
    pub unanimity_fraction: f64,
    /// Trials ending unanimous in the sign of a nonzero S0.
    pub majority_wins: u64,
    pub majority_win_fraction: f64,
    /// Share of unanimous trials that end at +1.
    pub plus_share: Option<f64>,
    pub median_unanimity_day: Option<f64>,
}

fn sweep_row(report: &ExperimentReport) -> SweepRow {
    let a = &report.aggregates;
    let plus = report.trials.iter().filter(|r| r.final_sign == Some(1)).count() as f64;
    SweepRow {
        p: report.resolved_p,
        discrepancy: report.config.discrepancy,
        trials: a.trials,
        unanimous: a.unanimous,
        unanimity_fraction: a.unanimity_fraction,
        majority_wins: a.sign_matches,
        majority_win_fraction: a.sign_matches as f64 / a.trials as f64,
        plus_share: (a.unanimous > 0).then(|| plus / a.unanimous as f64),
        median_unanimity_day: a.median_unanimity_day,
    }
}

/// One row per initial discrepancy; every point reuses the master seed, so
/// all points see the same graphs.
pub fn bias_sweep(cfg: &ExperimentConfig, d_values: &[i64]) -> Result<Vec<SweepRow>, HarnessError> {
    require_model(cfg, &[ModelName::FixedDiscrepancy], "the discrepancy sweep")?;
    d_values
        .iter()
        .map(|&d| {
            check_discrepancy(cfg.n, d)?;
            let point = ExperimentConfig { discrepancy: Some(d), ..cfg.clone() };
            Ok(sweep_row(&run_experiment(&point)?))
        })
        .collect()
}

/// One row per edge probability, reusing the master seed at every point.
pub fn p_sweep(cfg: &ExperimentConfig, p_values: &[f64]) -> Result<Vec<SweepRow>, HarnessError> {
    p_values
        .iter()
        .map(|&p| Ok(sweep_row(&run_experiment(&ExperimentConfig { p: PSpec::Value(p), ..cfg.clone() })?)))
        .collect()
}
