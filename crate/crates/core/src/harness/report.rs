use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{ExperimentReport, HarnessError, ReportFormat, TrialRow};
use crate::dynamics::Outcome;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const TRIAL_HEADER: [&str; 16] = [
    "index",
    "seed",
    "edge_count",
    "initial_bias",
    "outcome",
    "outcome_day",
    "period",
    "unanimity_day",
    "final_sign",
    "biases",
    "almost_positive",
    "unstable",
    "unstable_with_swing",
    "excess",
    "alpha",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn trial_record(r: &TrialRow) -> [String; 16] {
    let (kind, day, period) = match r.outcome {
        Some(Outcome::Unanimous { day, .. }) => ("unanimous", Some(day), None),
        Some(Outcome::PeriodTwo { period, day, .. }) => ("period_two", Some(day), Some(period)),
        Some(Outcome::DayCapReached) => ("day_cap_reached", None, None),
        None => ("", None, None),
    };
    let biases = r.biases.iter().map(i64::to_string).collect::<Vec<_>>().join(";");
    let c = r.census;
    [
        r.index.to_string(),
        r.seed.to_string(),
        r.edge_count.to_string(),
        r.initial_bias.to_string(),
        kind.to_string(),
        opt(day),
        opt(period),
        opt(r.unanimity_day),
        opt(r.final_sign),
        biases,
        opt(c.map(|c| c.almost_positive)),
        opt(c.map(|c| c.unstable)),
        opt(c.map(|c| c.unstable_with_swing)),
        opt(c.map(|c| c.excess)),
        opt(c.map(|c| c.alpha)),
        r.error.clone().unwrap_or_default(),
    ]
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn csv_bytes(rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing CSV to memory cannot fail");
    }
    w.into_inner().expect("flushing CSV to memory cannot fail")
}

/// One row per trial, header first.
pub fn trials_to_csv(report: &ExperimentReport) -> Vec<u8> {
    let header = TRIAL_HEADER.iter().map(|s| s.to_string()).collect();
    csv_bytes(std::iter::once(header).chain(report.trials.iter().map(|r| trial_record(r).to_vec())))
}

/// `metric,value` rows for the config echo and every aggregate.
pub fn aggregates_to_csv(report: &ExperimentReport) -> Vec<u8> {
    let a = &report.aggregates;
    let mut rows: Vec<(String, String)> = vec![
        ("schema_version".into(), report.schema_version.to_string()),
        ("n".into(), report.config.n.to_string()),
        ("p".into(), report.resolved_p.to_string()),
        ("master_seed".into(), report.config.seed.to_string()),
        ("trials".into(), a.trials.to_string()),
        ("failed".into(), a.failed.to_string()),
        ("unanimous".into(), a.unanimous.to_string()),
        ("unanimity_fraction".into(), a.unanimity_fraction.to_string()),
        ("median_unanimity_day".into(), opt(a.median_unanimity_day)),
        ("sign_checked".into(), a.sign_checked.to_string()),
        ("sign_matches".into(), a.sign_matches.to_string()),
        ("sign_match_fraction".into(), opt(a.sign_match_fraction)),
    ];
    for g in &a.growth {
        rows.push((format!("growth_median_ratio_t{}", g.day), opt(g.median_ratio)));
        rows.push((format!("growth_samples_t{}", g.day), g.samples.to_string()));
        rows.push((format!("growth_skipped_t{}", g.day), g.skipped.to_string()));
    }
    for (name, q) in [("excess", a.excess), ("alpha", a.alpha)] {
        if let Some(q) = q {
            for (stat, v) in [("min", q.min), ("q10", q.q10), ("median", q.median), ("q90", q.q90), ("max", q.max)] {
                rows.push((format!("{name}_{stat}"), v.to_string()));
            }
        }
    }
    rows.push(("positive_excess_fraction".into(), opt(a.positive_excess_fraction)));
    csv_bytes(std::iter::once(vec!["metric".into(), "value".into()]).chain(rows.into_iter().map(|(k, v)| vec![k, v])))
}

pub(crate) fn report_json(report: &ExperimentReport) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("reports contain only finite numbers");
    bytes.push(b'\n');
    bytes
}

/// Path of the aggregates file that accompanies a CSV report at `path`.
pub fn aggregates_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".aggregates.csv");
    path.with_file_name(name)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let err = |e: std::io::Error| HarnessError::Output { path: path.display().to_string(), message: e.to_string() };
    let mut f = BufWriter::new(File::create(path).map_err(err)?);
    f.write_all(bytes).map_err(err)?;
    f.flush().map_err(err)
}

/// JSON: one document. CSV: trial rows at `path` and aggregates at
/// `<path>.aggregates.csv`.
pub fn write_report(report: &ExperimentReport, path: &Path, format: ReportFormat) -> Result<(), HarnessError> {
    match format {
        ReportFormat::Json => write_bytes(path, &report_json(report)),
        ReportFormat::Csv => {
            write_bytes(path, &trials_to_csv(report))?;
            write_bytes(&aggregates_path(path), &aggregates_to_csv(report))
        }
    }
}

/// Report bytes as written by [`write_report`]; for CSV the trial table only.
pub fn render(report: &ExperimentReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => report_json(report),
        ReportFormat::Csv => trials_to_csv(report),
    }
}
