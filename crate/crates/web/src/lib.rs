//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and are callable natively; the exports only convert errors to JS.

use majdyn::dynamics::{run, DayRecord, Outcome};
use majdyn::graph::{degree_stats, sample_gnp, Graph};
use majdyn::opinions::{apply_swing, census, sample_fixed_discrepancy, sample_morning, sample_uniform};
use majdyn::probkit::{binom_diff_pmf, BinomSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest graph the page may request; keeps every call single-threaded and
/// well under a second.
pub const MAX_VERTICES: usize = 20_000;

/// Largest binomial trial count for the difference PMF.
pub const MAX_TRIALS: u32 = 5_000;

#[derive(Debug, Serialize)]
pub struct GraphInfo {
    pub n: usize,
    pub p: f64,
    pub edges: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
}

#[derive(Debug, Serialize)]
pub struct Simulation {
    pub graph: GraphInfo,
    pub days: Vec<DayRecord>,
    pub outcome: Outcome,
}

#[derive(Debug, Serialize)]
pub struct CensusDemo {
    pub graph: GraphInfo,
    pub swing_count: usize,
    pub threshold: f64,
    pub almost_positive: usize,
    pub unstable: usize,
    pub unstable_with_swing: usize,
    pub excess: i64,
    pub alpha: f64,
    /// Evening biases on days 0, 1 and 2.
    pub evening_biases: [i64; 3],
}

#[derive(Debug, Serialize)]
pub struct DiffPmf {
    /// Support starts here; `masses[i]` is P[X − Y = min + i].
    pub min: i64,
    pub masses: Vec<f64>,
    pub p_equal: f64,
    pub p_x_ge_y: f64,
}

fn check_graph(n: usize, p: f64) -> Result<(), String> {
    if n == 0 || n > MAX_VERTICES {
        return Err(format!("n must be in 1..={MAX_VERTICES}, got {n}"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(format!("p must be in (0, 1], got {p}"));
    }
    Ok(())
}

fn graph_info(g: &Graph, p: f64) -> GraphInfo {
    let d = degree_stats(g);
    GraphInfo { n: g.n(), p, edges: g.edge_count(), min_degree: d.min, max_degree: d.max, mean_degree: d.mean }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Majority dynamics on G(n, p) from uniform opinions, or from opinions with
/// bias exactly `discrepancy` when given.
pub fn simulate_json(n: usize, p: f64, seed: u64, discrepancy: Option<i64>, day_cap: u32) -> Result<String, String> {
    check_graph(n, p)?;
    let g = sample_gnp(n, p, seed).map_err(|e| e.to_string())?;
    let s0 = match discrepancy {
        Some(d) => sample_fixed_discrepancy(n, d, seed).map_err(|e| e.to_string())?,
        None => sample_uniform(n, seed),
    };
    let t = run(&g, &s0, day_cap).map_err(|e| e.to_string())?;
    to_json(&Simulation { graph: graph_info(&g, p), days: t.days, outcome: t.outcome })
}

/// Morning opinions with ⌈n/2⌉ positives, a swing of ⌊c√n⌉ negatives and the
/// almost-positive census at threshold γ.
pub fn census_json(n: usize, p: f64, gamma: f64, c: f64, seed: u64) -> Result<String, String> {
    check_graph(n, p)?;
    let g = sample_gnp(n, p, seed).map_err(|e| e.to_string())?;
    let r0 = sample_morning(n, seed);
    let (s0, swing) = apply_swing(&r0, c, seed).map_err(|e| e.to_string())?;
    let report = census(&g, &r0, &swing, gamma, p).map_err(|e| e.to_string())?;
    let t = run(&g, &s0, 2).map_err(|e| e.to_string())?;
    let evening = |day| t.bias_at(day).unwrap_or(0);
    to_json(&CensusDemo {
        graph: graph_info(&g, p),
        swing_count: report.swing_count,
        threshold: report.threshold,
        almost_positive: report.almost_positive,
        unstable: report.unstable,
        unstable_with_swing: report.unstable_with_swing,
        excess: report.excess,
        alpha: report.alpha(n, p),
        evening_biases: [evening(0), evening(1), evening(2)],
    })
}

/// Exact distribution of X − Y for X ~ Bin(n, p), Y ~ Bin(m, p).
pub fn binom_diff_json(n: u32, m: u32, p: f64) -> Result<String, String> {
    if n > MAX_TRIALS || m > MAX_TRIALS {
        return Err(format!("trial counts must be at most {MAX_TRIALS}"));
    }
    let spec = |k: u32| BinomSpec::new(k as u64, p).map_err(|e| e.to_string());
    let d = binom_diff_pmf(spec(n)?, spec(m)?).map_err(|e| e.to_string())?;
    let masses: Vec<f64> = (d.min()..=d.max()).map(|k| d.mass(k)).collect();
    to_json(&DiffPmf { min: d.min(), masses, p_equal: d.mass(0), p_x_ge_y: d.tail_ge(0) })
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate(n: u32, p: f64, seed: u32, discrepancy: Option<i32>, day_cap: u32) -> Result<String, JsError> {
    js(simulate_json(n as usize, p, seed as u64, discrepancy.map(i64::from), day_cap))
}

#[wasm_bindgen(js_name = censusDemo)]
pub fn census_demo(n: u32, p: f64, gamma: f64, c: f64, seed: u32) -> Result<String, JsError> {
    js(census_json(n as usize, p, gamma, c, seed as u64))
}

#[wasm_bindgen(js_name = binomDiff)]
pub fn binom_diff(n: u32, m: u32, p: f64) -> Result<String, JsError> {
    js(binom_diff_json(n, m, p))
}
