use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::opinions::{swing_count, OpinionKind};

/// Edge probability, given directly or as coefficient·n^exponent·(ln n)^log_power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PSpec {
    Value(f64),
    Preset(Preset),
    Formula { coefficient: f64, exponent: f64, log_power: f64 },
}

/// Endpoints of the regime n^{−3/5}·ln n ≤ p ≤ n^{−1/2}, with unit constants.
/// A different constant is expressed through [`PSpec::Formula`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Lower,
    Upper,
}

impl PSpec {
    pub fn resolve(&self, n: usize) -> f64 {
        let nf = n as f64;
        let formula = |coefficient: f64, exponent: f64, log_power: f64| {
            let log = if log_power == 0.0 { 1.0 } else { nf.ln().powf(log_power) };
            coefficient * nf.powf(exponent) * log
        };
        match *self {
            PSpec::Value(p) => p,
            PSpec::Preset(Preset::Lower) => formula(1.0, -0.6, 1.0),
            PSpec::Preset(Preset::Upper) => formula(1.0, -0.5, 0.0),
            PSpec::Formula { coefficient, exponent, log_power } => formula(coefficient, exponent, log_power),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    #[default]
    Uniform,
    FixedDiscrepancy,
    MorningEvening,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

fn default_day_cap() -> u32 {
    64
}

fn default_c() -> f64 {
    1.0
}

/// One experiment: `trials` independent runs on G(n, p) from a seeded
/// initial opinion model. Trial `i` uses the seed `trial_seed(seed, i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: PSpec,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub model: ModelName,
    /// S0 for the fixed-discrepancy model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<i64>,
    /// Swing coefficient for the morning/evening model.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Census threshold; enables per-trial censuses (morning/evening model).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "default_day_cap")]
    pub day_cap: u32,
    /// Share one graph across all trials instead of resampling per trial.
    #[serde(default)]
    pub quenched: bool,
    #[serde(default)]
    pub format: ReportFormat,
}

impl ExperimentConfig {
    pub fn new(n: usize, p: f64, trials: u64, seed: u64, model: ModelName) -> Self {
        Self {
            n,
            p: PSpec::Value(p),
            trials,
            seed,
            model,
            discrepancy: None,
            c: default_c(),
            gamma: None,
            day_cap: default_day_cap(),
            quenched: false,
            format: ReportFormat::Csv,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        Self::from_table(toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, HarnessError> {
        let cfg: Self = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the file at `path` (if any), applies `key=value` overrides in
    /// order, then validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut table = match path {
            Some(path) => read_table(path)?,
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn resolved_p(&self) -> f64 {
        self.p.resolve(self.n)
    }

    pub fn opinion_kind(&self) -> OpinionKind {
        match self.model {
            ModelName::Uniform => OpinionKind::UniformRandom,
            ModelName::FixedDiscrepancy => OpinionKind::FixedDiscrepancy { d: self.discrepancy.unwrap_or(0) },
            ModelName::MorningEvening => OpinionKind::MorningEvening { c: self.c },
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.n > u32::MAX as usize {
            return bad(format!("n = {} exceeds the supported maximum {}", self.n, u32::MAX));
        }
        let p = self.resolved_p();
        if !(p > 0.0 && p <= 1.0) {
            return bad(format!("p resolves to {p}, outside (0, 1]"));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.day_cap == 0 {
            return bad("day_cap must be at least 1".into());
        }
        if !self.c.is_finite() || self.c < 0.0 {
            return bad(format!("c = {} must be finite and non-negative", self.c));
        }
        if let Some(g) = self.gamma {
            if !g.is_finite() || g < 0.0 {
                return bad(format!("gamma = {g} must be finite and non-negative"));
            }
            if self.model != ModelName::MorningEvening {
                return bad("gamma (census) requires model = \"morning-evening\"".into());
            }
        }
        match (self.model, self.discrepancy) {
            (ModelName::FixedDiscrepancy, None) => return bad("model \"fixed-discrepancy\" requires discrepancy".into()),
            (ModelName::FixedDiscrepancy, Some(d)) => check_discrepancy(self.n, d)?,
            (_, Some(_)) => return bad("discrepancy is only used by model \"fixed-discrepancy\"".into()),
            _ => {}
        }
        if self.model == ModelName::MorningEvening {
            let swing = swing_count(self.n, self.c);
            if swing > self.n / 2 {
                return bad(format!("c = {} gives {swing} swing vertices but only {} are negative", self.c, self.n / 2));
            }
        }
        Ok(())
    }
}

/// Parses a config file into an unvalidated table.
pub fn read_table(path: &Path) -> Result<toml::Table, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

pub(crate) fn check_discrepancy(n: usize, d: i64) -> Result<(), HarnessError> {
    if d.unsigned_abs() > n as u64 {
        return Err(HarnessError::Config(format!("discrepancy {d} outside [-{n}, {n}]")));
    }
    if (n as i64 - d) % 2 != 0 {
        return Err(HarnessError::Config(format!("discrepancy {d} does not have the parity of n = {n}")));
    }
    Ok(())
}

/// Applies `key=value`; the value is read as a TOML value when it parses as
/// one and as a bare string otherwise. Dotted keys address nested tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), HarnessError> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override {assignment:?} is not key=value")))?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() {
        return Err(HarnessError::Config(format!("override {assignment:?} has an empty key")));
    }
    let parsed: toml::Table = match toml::from_str(&format!("{key} = {value}")) {
        Ok(t) => t,
        Err(_) => {
            let quoted = toml::Value::String(value.to_string());
            toml::from_str(&format!("{key} = {quoted}"))
                .map_err(|e| HarnessError::Config(format!("override {assignment:?}: {e}")))?
        }
    };
    merge(table, parsed);
    Ok(())
}

fn merge(into: &mut toml::Table, from: toml::Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}
