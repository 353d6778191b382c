use majdyn::dynamics::Outcome;
use majdyn::harness::*;
use majdyn::probkit::{BinomSpec, Pmf};

fn uniform(n: usize, p: f64, trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(n, p, trials, seed, ModelName::Uniform)
}

fn fixed(n: usize, p: f64, trials: u64, seed: u64, d: i64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(n, p, trials, seed, ModelName::FixedDiscrepancy);
    cfg.discrepancy = Some(d);
    cfg
}

fn morning(n: usize, p: f64, trials: u64, seed: u64, gamma: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(n, p, trials, seed, ModelName::MorningEvening);
    cfg.gamma = Some(gamma);
    cfg
}

/// Binomial standard-error window used for Monte Carlo against exact values.
fn within_four_se(estimate: f64, exact: f64, trials: u64) -> bool {
    (estimate - exact).abs() <= 4.0 * (exact * (1.0 - exact) / trials as f64).sqrt()
}

#[test]
fn aggregates_recompute_from_rows() {
    let report = run_experiment(&morning(400, 0.05, 12, 5, 0.1)).unwrap();
    assert_eq!(report.aggregates, Aggregates::from_rows(&report.trials));
    let a = &report.aggregates;
    assert_eq!(a.unanimity_fraction, a.unanimous as f64 / a.trials as f64);
    assert_eq!(a.trials, 12);
    assert!(report.trials.iter().all(|r| r.census.is_some()));
    assert!(report.trials.iter().enumerate().all(|(i, r)| r.index == i as u64));
}

#[test]
fn unanimous_trials_stay_unanimous() {
    let report = run_experiment(&uniform(2000, 0.02, 20, 8)).unwrap();
    for r in &report.trials {
        if let Some(Outcome::Unanimous { day, .. }) = r.outcome {
            assert!(r.biases[day as usize..].iter().all(|b| b.unsigned_abs() == 2000), "{r:?}");
        }
    }
}

#[test]
fn thread_count_does_not_change_reports() {
    let cfg = morning(3000, 0.03, 8, 77, 0.1);
    let one = run_experiment_with_threads(&cfg, 1).unwrap();
    let four = run_experiment_with_threads(&cfg, 4).unwrap();
    assert_eq!(one, four);
    assert_eq!(render(&one, ReportFormat::Json), render(&four, ReportFormat::Json));
}

#[test]
fn quenched_trials_share_one_graph() {
    let mut cfg = uniform(500, 0.05, 6, 4);
    cfg.quenched = true;
    let report = run_experiment(&cfg).unwrap();
    let e = report.trials[0].edge_count;
    assert!(report.trials.iter().all(|r| r.edge_count == e));
    cfg.quenched = false;
    let annealed = run_experiment(&cfg).unwrap();
    assert!(annealed.trials.iter().any(|r| r.edge_count != e));
}

/// On K_n a nonzero S0 wins on day 1 and S0 = 0 oscillates, so the
/// unanimity rate is P[S0 ≠ 0] and the plus rate is P[S0 > 0].
#[test]
fn complete_graph_rates_match_exact_binomial() {
    let (n, trials) = (40u64, 2000u64);
    let report = run_experiment(&uniform(n as usize, 1.0, trials, 12)).unwrap();
    let positives = Pmf::binomial(BinomSpec::new(n, 0.5).unwrap());
    let tie = positives.mass(n as i64 / 2);
    let plus = positives.tail_ge(n as i64 / 2 + 1);
    let a = &report.aggregates;
    assert!(within_four_se(a.unanimity_fraction, 1.0 - tie, trials), "{} vs {}", a.unanimity_fraction, 1.0 - tie);
    let plus_rate = report.trials.iter().filter(|r| r.final_sign == Some(1)).count() as f64 / trials as f64;
    assert!(within_four_se(plus_rate, plus, trials), "{plus_rate} vs {plus}");
    assert_eq!(a.sign_match_fraction, Some(1.0));
}

#[test]
fn growth_on_empty_and_complete_graphs() {
    let empty = growth_ratio_experiment(&uniform(101, 1e-9, 10, 3)).unwrap();
    for row in &empty.rows {
        assert_eq!(row.median_ratio, Some(1.0));
        assert_eq!(row.skipped, 0);
    }
    let complete = growth_ratio_experiment(&uniform(101, 1.0, 10, 3)).unwrap();
    let r0 = &complete.report.trials[0];
    let expected = 101.0 / r0.initial_bias.unsigned_abs() as f64;
    assert!(complete.report.trials.iter().all(|r| r.unanimity_day == Some(1)));
    assert!(complete.rows[0].median_ratio.unwrap() >= 1.0);
    assert_eq!(r0.bias_at(1).unwrap().unsigned_abs() as f64 / r0.initial_bias.unsigned_abs() as f64, expected);
    assert!(growth_ratio_experiment(&fixed(100, 0.1, 2, 1, 0)).is_err());
}

#[test]
fn growth_skips_zero_bias_days() {
    let report = run_experiment(&fixed(100, 1e-9, 5, 1, 0)).unwrap();
    assert!(report.aggregates.growth.iter().all(|g| g.samples == 0 && g.skipped == 5 && g.median_ratio.is_none()));
}

#[test]
fn census_on_empty_graph_counts_every_vertex() {
    let c = census_experiment(&morning(101, 1e-9, 4, 2, 0.1)).unwrap();
    for r in &c.report.trials {
        assert_eq!(r.census.unwrap().excess, 50);
    }
    assert_eq!(c.positive_excess_fraction, 1.0);
}

#[test]
fn census_excess_monotone_in_gamma() {
    let a = census_experiment(&morning(2000, 0.03, 10, 6, 0.1)).unwrap();
    let b = census_experiment(&morning(2000, 0.03, 10, 6, 0.2)).unwrap();
    for (x, y) in a.report.trials.iter().zip(&b.report.trials) {
        assert!(y.census.unwrap().excess >= x.census.unwrap().excess);
    }
    assert!(census_experiment(&uniform(100, 0.1, 2, 1)).is_err());
}

#[test]
fn contraction_on_complete_graph() {
    let c = contraction_experiment(&fixed(51, 1.0, 5, 1, 3), 2, 0.9).unwrap();
    assert_eq!(c.qualifying, 5);
    for r in &c.rows {
        assert_eq!(r.crossing_day, Some(0));
        assert_eq!(r.minority[1], 0);
    }
    assert_eq!(c.jump_fraction, Some(1.0));
}

#[test]
fn contraction_in_regime() {
    let (n, p, delta) = (10_000usize, 0.03, 0.9);
    let floor = contraction_floor((n as f64 * p).sqrt(), p, delta);
    assert_eq!(floor, 4869);
    let c = contraction_experiment(&uniform(n, p, 60, 31), floor, delta).unwrap();
    assert!(c.qualifying >= 54, "{}", c.qualifying);
    assert!(c.jump_fraction.unwrap() >= 0.9);
    assert!(c.monotone_fraction.unwrap() >= 0.95);
}

#[test]
fn contraction_rejections() {
    assert!(contraction_experiment(&uniform(100, 0.1, 1, 1), 0, 0.9).is_err());
    assert!(contraction_experiment(&uniform(100, 0.1, 1, 1), 5, 1.5).is_err());
    assert!(contraction_experiment(&morning(100, 0.1, 1, 1, 0.1), 5, 0.9).is_err());
}

#[test]
fn sweep_trivial_points() {
    let rows = bias_sweep(&fixed(60, 0.2, 200, 9, 0), &[60, 0]).unwrap();
    assert_eq!(rows[0].unanimity_fraction, 1.0);
    assert_eq!(rows[0].median_unanimity_day, Some(0.0));
    // d = 0 is sign-symmetric: the plus share is Bin(unanimous, 1/2).
    let split = rows[1].plus_share.unwrap();
    assert!(within_four_se(split, 0.5, rows[1].unanimous), "{split}");
    assert!(bias_sweep(&fixed(60, 0.2, 2, 9, 0), &[3]).is_err());
    assert!(bias_sweep(&uniform(60, 0.2, 2, 9), &[2]).is_err());
}

#[test]
fn sweep_majority_wins_rise_with_discrepancy() {
    let (n, p) = (10_000usize, 0.03f64);
    let d = 4 * ((n as f64).powf(-0.25) * p.powf(-1.25)).ceil() as i64;
    assert_eq!(d, 36);
    let rows = bias_sweep(&fixed(n, p, 100, 41, 0), &[2, d]).unwrap();
    assert!(rows[1].majority_win_fraction >= rows[0].majority_win_fraction + 0.2, "{rows:?}");
}

#[test]
fn p_sweep_reports_each_point() {
    let rows = p_sweep(&uniform(300, 0.1, 4, 2), &[0.05, 0.2]).unwrap();
    assert_eq!(rows.iter().map(|r| r.p).collect::<Vec<_>>(), vec![0.05, 0.2]);
    assert!(rows.iter().all(|r| r.trials == 4));
}

#[test]
fn json_round_trip() {
    let report = run_experiment(&morning(300, 0.05, 5, 3, 0.1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_report(&report, &path, ReportFormat::Json).unwrap();
    let back: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, report);
}

#[test]
fn csv_layout() {
    let report = run_experiment(&uniform(200, 0.05, 3, 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_report(&report, &path, ReportFormat::Csv).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap().get(0), Some("index"));
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let biases: Vec<i64> = rows[0][9].split(';').map(|s| s.parse().unwrap()).collect();
    assert_eq!(biases, report.trials[0].biases);
    let agg = std::fs::read_to_string(aggregates_path(&path)).unwrap();
    assert!(agg.starts_with("metric,value\nschema_version,1\n"));
}

#[test]
fn empty_trial_list_serializes() {
    let mut report = run_experiment(&uniform(10, 0.5, 1, 1)).unwrap();
    report.trials.clear();
    report.aggregates = Aggregates::from_rows(&report.trials);
    let csv = String::from_utf8(trials_to_csv(&report)).unwrap();
    assert_eq!(csv.lines().count(), 1);
    let json: serde_json::Value = serde_json::from_slice(&render(&report, ReportFormat::Json)).unwrap();
    assert_eq!(json["trials"], serde_json::json!([]));
}

#[test]
fn write_errors_carry_path() {
    let report = run_experiment(&uniform(10, 0.5, 1, 1)).unwrap();
    let err = write_report(&report, std::path::Path::new("/nonexistent-dir/r.json"), ReportFormat::Json).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/r.json"), "{err}");
}

const GOLDEN: &str = include_str!("golden/run_n100_p0.1_seed42.json");

fn golden_config() -> ExperimentConfig {
    let mut cfg = uniform(100, 0.1, 3, 42);
    cfg.format = ReportFormat::Json;
    cfg
}

#[test]
fn golden_report_is_byte_identical() {
    for threads in [1, 3] {
        let report = run_experiment_with_threads(&golden_config(), threads).unwrap();
        assert_eq!(String::from_utf8(render(&report, ReportFormat::Json)).unwrap(), GOLDEN);
    }
}
