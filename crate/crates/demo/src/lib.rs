//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes and returns JSON strings so the page needs no glue
//! beyond `JSON.parse`. The same functions are callable natively.

use serde::{Deserialize, Serialize};
use tarsim::costmodel::{self, Axis, CostDynamics};
use tarsim::simulator::one_phase_stop;
use tarsim::synth::{self, SynthSpec};
use tarsim::{Bm25Params, CostStructure, RunConfig, RunTrace, Simulator, Strategy, TrainConfig};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SimulateParams {
    pub corpus_seed: u64,
    pub n_docs: usize,
    pub prevalence: f64,
    pub signal: f64,
    pub noise: f64,
    pub batch_size: usize,
    pub recall_target: f64,
    pub extension_batches: usize,
    pub run_seed: u64,
}

impl Default for SimulateParams {
    fn default() -> Self {
        let spec = SynthSpec::separable(0);
        SimulateParams {
            corpus_seed: 0,
            n_docs: spec.n_docs,
            prevalence: spec.categories[0].prevalence,
            signal: spec.categories[0].signal_mean,
            noise: spec.noise_sd,
            batch_size: 40,
            recall_target: 0.8,
            extension_batches: 5,
            run_seed: 0,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Simulation {
    pub relevance_feedback: RunTrace,
    pub uncertainty: RunTrace,
}

/// Generates a synthetic corpus and runs both strategies from the same seed.
pub fn simulate_native(params: &SimulateParams) -> Result<Simulation, String> {
    let mut spec = SynthSpec::separable(params.corpus_seed);
    spec.n_docs = params.n_docs;
    spec.noise_sd = params.noise;
    spec.categories[0].prevalence = params.prevalence;
    spec.categories[0].signal_mean = params.signal;
    let corpus = synth::generate(&spec).map_err(|e| e.to_string())?;
    let sim = Simulator::new(&corpus, Bm25Params::default(), TrainConfig::default()).map_err(|e| e.to_string())?;
    let run = |strategy| {
        let mut cfg = RunConfig::new("target", strategy, params.run_seed);
        cfg.batch_size = params.batch_size;
        cfg.recall_target = params.recall_target;
        cfg.extension_batches = params.extension_batches;
        sim.run(&cfg).map_err(|e| e.to_string())
    };
    Ok(Simulation {
        relevance_feedback: run(Strategy::RelevanceFeedback)?,
        uncertainty: run(Strategy::Uncertainty)?,
    })
}

#[derive(Debug, Serialize)]
pub struct DynamicsView {
    pub dynamics: CostDynamics,
    pub optimal_t: usize,
    pub min_cost: f64,
    pub one_phase_stop: usize,
    pub one_phase_cost: f64,
}

pub fn cost_dynamics_native(trace: &RunTrace, structure: &str) -> Result<DynamicsView, String> {
    let s: CostStructure = structure.parse().map_err(|e: tarsim::Error| e.to_string())?;
    let g = trace.config.recall_target;
    let dynamics = costmodel::dynamics(trace, &s, g).map_err(|e| e.to_string())?;
    let (optimal_t, min_cost) = costmodel::optimal_stop(&dynamics).map_err(|e| e.to_string())?;
    Ok(DynamicsView {
        optimal_t,
        min_cost,
        one_phase_stop: one_phase_stop(trace, dynamics.quota).map_err(|e| e.to_string())?,
        one_phase_cost: costmodel::one_phase_cost(trace, &s, g).map_err(|e| e.to_string())?,
        dynamics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub optimal_t: usize,
    pub acceptable_count: usize,
    pub acceptable_iterations: Vec<usize>,
    pub truncated: bool,
}

/// Optimal stop and 10%-style acceptable range as one cost family's `x` varies.
pub fn stopping_sweep_native(trace: &RunTrace, axis: &str, xs: &[f64], tolerance: f64) -> Result<Vec<SweepRow>, String> {
    let axis: Axis = axis.parse().map_err(|e: tarsim::Error| e.to_string())?;
    xs.iter()
        .map(|&x| {
            let s = axis.at(x).map_err(|e| e.to_string())?;
            let d = costmodel::dynamics(trace, &s, trace.config.recall_target).map_err(|e| e.to_string())?;
            let a = costmodel::acceptable_range(&d, tolerance).map_err(|e| e.to_string())?;
            Ok(SweepRow {
                x,
                optimal_t: a.optimal_t,
                acceptable_count: a.acceptable_count,
                acceptable_iterations: a.acceptable_iterations,
                truncated: a.truncated,
            })
        })
        .collect()
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

fn parse<T: for<'de> Deserialize<'de>>(json: &str, what: &str) -> Result<T, String> {
    serde_json::from_str(json).map_err(|e| format!("bad {what}: {e}"))
}

/// `{corpus_seed, n_docs, prevalence, signal, noise, batch_size, recall_target,
/// extension_batches, run_seed}` (all optional) to `{relevance_feedback, uncertainty}` traces.
#[wasm_bindgen]
pub fn simulate(params_json: &str) -> Result<String, JsValue> {
    to_js(parse(params_json, "parameters").and_then(|p| simulate_native(&p)))
}

/// Trace JSON and a structure such as `"10,10,1,1"` to the per-iteration costs.
#[wasm_bindgen]
pub fn cost_dynamics(trace_json: &str, structure: &str) -> Result<String, JsValue> {
    to_js(parse(trace_json, "trace").and_then(|t| cost_dynamics_native(&t, structure)))
}

/// Trace JSON, an axis name (`training`, `additive`, `phase_one_positives`)
/// and a JSON array of x values to one stopping summary per x.
#[wasm_bindgen]
pub fn stopping_sweep(trace_json: &str, axis: &str, xs_json: &str, tolerance: f64) -> Result<String, JsValue> {
    to_js(parse::<RunTrace>(trace_json, "trace").and_then(|t| {
        let xs: Vec<f64> = parse(xs_json, "x values")?;
        stopping_sweep_native(&t, axis, &xs, tolerance)
    }))
}
