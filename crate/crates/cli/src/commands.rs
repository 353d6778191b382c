use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use majdyn::graph::{degree_stats, sample_gnp, write_binary};
use majdyn::harness::{
    self, apply_override, read_table, ExperimentConfig, ExperimentReport, HarnessError, ReportFormat,
};
use majdyn::probkit::{verify_lemmas, SuiteConfig, Tolerances};
use serde::Serialize;

use crate::{CensusArgs, Command, ContractionArgs, ExperimentArgs, Failure, Format, GenGraphArgs, SweepArgs, VerifyArgs};

pub(crate) fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Census(args) => census(args),
        Command::Growth(args) => growth(args),
        Command::Contraction(args) => contraction(args),
        Command::VerifyLemmas(args) => verify(args),
        Command::GenGraph(args) => gen_graph(args),
    }
}

impl ExperimentArgs {
    /// Flag overrides as `key=value`, applied after `--set`.
    fn flag_overrides(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                out.push(format!("{key}={v}"));
            }
        };
        push("n", self.n.map(|v| v.to_string()));
        push("p", self.p.clone());
        push("trials", self.trials.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("model", self.model.as_ref().map(|m| format!("\"{m}\"")));
        push("day_cap", self.day_cap.map(|v| v.to_string()));
        push("quenched", self.quenched.then(|| "true".to_string()));
        push("format", self.format.map(|f| format!("\"{}\"", format_name(f))));
        out
    }

    /// Layers: `defaults` (only for absent keys), config file, `--set`,
    /// dedicated flags. A key given both by `--set` and a flag is rejected.
    fn config(&self, defaults: &[(&str, &str)], extra: Vec<String>) -> Result<ExperimentConfig, Failure> {
        let flags: Vec<String> = self.flag_overrides().into_iter().chain(extra).collect();
        let key = |s: &String| s.split_once('=').map(|(k, _)| k.trim().to_string()).unwrap_or_default();
        for f in &flags {
            if self.overrides.iter().any(|o| key(o) == key(f)) {
                return Err(Failure::Usage(format!("`{}` is set both by --set and by its own flag", key(f))));
            }
        }
        let mut table = match &self.config {
            Some(path) => read_table(path)?,
            None => toml::Table::new(),
        };
        for o in self.overrides.iter().chain(&flags) {
            apply_override(&mut table, o)?;
        }
        for (k, v) in defaults {
            if !table.contains_key(*k) {
                apply_override(&mut table, &format!("{k}={v}"))?;
            }
        }
        let cfg = ExperimentConfig::from_table(table)?;
        log::info!("resolved p = {} for n = {}", cfg.resolved_p(), cfg.n);
        Ok(cfg)
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn runtime(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn write_out(output: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match output {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path).map_err(runtime(path))?);
            f.write_all(bytes).and_then(|_| f.flush()).map_err(runtime(path))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| Failure::Runtime(format!("stdout: {e}")))
        }
    }
}

/// Serializes flat rows as CSV (header from field names) or a JSON array.
fn table_bytes<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(rows).map_err(|e| Failure::Runtime(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Failure::Runtime(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

fn run_report(args: &ExperimentArgs, cfg: &ExperimentConfig) -> Result<ExperimentReport, Failure> {
    log::info!("running {} trials on {} threads", cfg.trials, if args.threads == 0 { "default".into() } else { args.threads.to_string() });
    Ok(harness::run_experiment_with_threads(cfg, args.threads)?)
}

fn emit_report(args: &ExperimentArgs, cfg: &ExperimentConfig, report: &ExperimentReport) -> Result<(), Failure> {
    match &args.output {
        Some(path) => Ok(harness::write_report(report, path, cfg.format)?),
        None => write_out(None, &harness::render(report, cfg.format)),
    }
}

fn run(args: ExperimentArgs) -> Result<(), Failure> {
    let cfg = args.config(&[], Vec::new())?;
    let report = run_report(&args, &cfg)?;
    log::info!("unanimity fraction {}", report.aggregates.unanimity_fraction);
    emit_report(&args, &cfg, &report)
}

fn census(args: CensusArgs) -> Result<(), Failure> {
    let mut extra = Vec::new();
    if let Some(g) = args.gamma {
        extra.push(format!("gamma={g}"));
    }
    if let Some(c) = args.c {
        extra.push(format!("c={c}"));
    }
    let e = &args.experiment;
    let cfg = e.config(&[("model", "\"morning-evening\""), ("gamma", "0.1")], extra)?;
    let table = with_threads(e.threads, || harness::census_experiment(&cfg))?;
    log::info!(
        "positive excess in {} of trials, median alpha {}",
        table.positive_excess_fraction,
        table.alpha.median
    );
    emit_report(e, &cfg, &table.report)
}

#[derive(Serialize)]
struct GrowthLine {
    day: u32,
    median_ratio: Option<f64>,
    sqrt_np: f64,
    relative: Option<f64>,
    samples: u64,
    skipped: u64,
}

fn growth(args: ExperimentArgs) -> Result<(), Failure> {
    let cfg = args.config(&[], Vec::new())?;
    let t = with_threads(args.threads, || harness::growth_ratio_experiment(&cfg))?;
    let lines: Vec<GrowthLine> = t
        .rows
        .iter()
        .zip(&t.relative)
        .map(|(r, &relative)| GrowthLine {
            day: r.day,
            median_ratio: r.median_ratio,
            sqrt_np: t.sqrt_np,
            relative,
            samples: r.samples,
            skipped: r.skipped,
        })
        .collect();
    write_out(args.output.as_deref(), &table_bytes(&lines, args.format.unwrap_or(cfg_format(&cfg)))?)
}

#[derive(Serialize)]
struct ContractionLine {
    index: u64,
    bias_floor: i64,
    crossing_day: Option<u32>,
    next_bias_share: Option<f64>,
    jump: Option<bool>,
    monotone: Option<bool>,
    minority: String,
}

fn contraction(args: ContractionArgs) -> Result<(), Failure> {
    let e = &args.experiment;
    let cfg = e.config(&[], Vec::new())?;
    let p = cfg.resolved_p();
    let floor = args.bias_floor.unwrap_or_else(|| harness::contraction_floor((cfg.n as f64 * p).sqrt(), p, args.delta));
    let c = with_threads(e.threads, || harness::contraction_experiment(&cfg, floor, args.delta))?;
    log::info!("{} qualifying trials, jump fraction {:?}, monotone fraction {:?}", c.qualifying, c.jump_fraction, c.monotone_fraction);
    let lines: Vec<ContractionLine> = c
        .rows
        .iter()
        .map(|r| ContractionLine {
            index: r.index,
            bias_floor: floor,
            crossing_day: r.crossing_day,
            next_bias_share: r.next_bias_share,
            jump: r.jump,
            monotone: r.monotone,
            minority: r.minority.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
        })
        .collect();
    write_out(e.output.as_deref(), &table_bytes(&lines, e.format.unwrap_or(cfg_format(&cfg)))?)
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let e = &args.experiment;
    let rows = if args.d.is_empty() {
        let cfg = e.config(&[], Vec::new())?;
        with_threads(e.threads, || harness::p_sweep(&cfg, &args.p_grid))?
    } else {
        let first = args.d[0].to_string();
        let cfg = e.config(&[("model", "\"fixed-discrepancy\""), ("discrepancy", &first)], Vec::new())?;
        with_threads(e.threads, || harness::bias_sweep(&cfg, &args.d))?
    };
    write_out(e.output.as_deref(), &table_bytes(&rows, e.format.unwrap_or(Format::Csv))?)
}

fn cfg_format(cfg: &ExperimentConfig) -> Format {
    match cfg.format {
        ReportFormat::Csv => Format::Csv,
        ReportFormat::Json => Format::Json,
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T, HarnessError> + Send) -> Result<T, Failure> {
    Ok(harness::with_pool(threads, f)?)
}

#[derive(Serialize)]
struct LemmaLine {
    check: String,
    status: &'static str,
    cases: usize,
    failures: usize,
    min_stat: f64,
    max_stat: f64,
    rule: String,
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    if args.cases == 0 {
        return Err(Failure::Usage("--cases must be at least 1".into()));
    }
    if args.max_trials > majdyn::probkit::EXACT_TRIALS_LIMIT / 4 {
        return Err(Failure::Usage(format!(
            "--max-trials must be at most {} so every convolution stays within the exact limit",
            majdyn::probkit::EXACT_TRIALS_LIMIT / 4
        )));
    }
    let cfg = SuiteConfig { cases: args.cases, max_trials: args.max_trials, seed: args.seed };
    let rows = verify_lemmas(&cfg, &Tolerances::default()).map_err(|e| Failure::Runtime(e.to_string()))?;
    let all_pass = rows.iter().all(|r| r.pass);
    let lines: Vec<LemmaLine> = rows
        .into_iter()
        .map(|r| LemmaLine {
            status: if r.pass { "PASS" } else { "FAIL" },
            check: r.check,
            cases: r.cases,
            failures: r.failures,
            min_stat: r.min_stat,
            max_stat: r.max_stat,
            rule: r.rule,
        })
        .collect();
    write_out(args.output.as_deref(), &table_bytes(&lines, args.format.unwrap_or(Format::Csv))?)?;
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Runtime("at least one check failed".into()))
    }
}

#[derive(Serialize)]
struct GraphSummary<'a> {
    path: &'a str,
    n: usize,
    p: f64,
    seed: u64,
    edges: usize,
    min_degree: usize,
    max_degree: usize,
    mean_degree: f64,
}

fn gen_graph(args: GenGraphArgs) -> Result<(), Failure> {
    let g = sample_gnp(args.n, args.p, args.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    let path = &args.output;
    let file = File::create(path).map_err(runtime(path))?;
    let mut w = BufWriter::new(file);
    write_binary(&g, &mut w).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    w.flush().map_err(runtime(path))?;
    let d = degree_stats(&g);
    let summary = GraphSummary {
        path: &path.to_string_lossy(),
        n: g.n(),
        p: args.p,
        seed: args.seed,
        edges: g.edge_count(),
        min_degree: d.min,
        max_degree: d.max,
        mean_degree: d.mean,
    };
    let mut line = serde_json::to_vec(&summary).map_err(|e| Failure::Runtime(e.to_string()))?;
    line.push(b'\n');
    write_out(None, &line)
}
