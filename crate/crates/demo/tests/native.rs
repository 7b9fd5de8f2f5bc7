use tarsim_demo::{cost_dynamics_native, simulate_native, stopping_sweep_native, SimulateParams};

fn small() -> SimulateParams {
    SimulateParams { n_docs: 400, batch_size: 20, extension_batches: 2, ..SimulateParams::default() }
}

#[test]
fn simulate_runs_both_strategies() {
    let sim = simulate_native(&small()).unwrap();
    assert_eq!(sim.relevance_feedback.records[0], sim.uncertainty.records[0]);
    assert_eq!(sim.relevance_feedback.collection_size, 400);
    let again = simulate_native(&small()).unwrap();
    assert_eq!(sim.uncertainty, again.uncertainty);
}

#[test]
fn dynamics_view_is_consistent() {
    let sim = simulate_native(&small()).unwrap();
    let view = cost_dynamics_native(&sim.relevance_feedback, "1,1,1,1").unwrap();
    assert_eq!(view.dynamics.points.len(), sim.relevance_feedback.records.len());
    assert!(view.min_cost <= view.one_phase_cost);
    assert_eq!(view.dynamics.points[view.optimal_t].cost.total, view.min_cost);
    assert!(cost_dynamics_native(&sim.relevance_feedback, "0,1,1,1").is_err());
}

#[test]
fn sweep_starts_at_uniform() {
    let sim = simulate_native(&small()).unwrap();
    let t = &sim.relevance_feedback;
    let rows = stopping_sweep_native(t, "training", &[0.0, 1.0, 5.0, 20.0], 0.1).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].optimal_t, cost_dynamics_native(t, "1,1,1,1").unwrap().optimal_t);
    assert!(rows.windows(2).all(|w| w[1].optimal_t <= w[0].optimal_t));
    assert!(stopping_sweep_native(t, "sideways", &[0.0], 0.1).is_err());
}

#[test]
fn json_entry_points_round_trip() {
    let out = tarsim_demo::simulate(r#"{"n_docs": 300, "batch_size": 30}"#).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let trace = v["uncertainty"].to_string();
    let dyn_json = tarsim_demo::cost_dynamics(&trace, "(25,5,5,1)").unwrap();
    assert!(dyn_json.contains("\"optimal_t\""));
    let sweep = tarsim_demo::stopping_sweep(&trace, "additive", "[0, 2, 4]", 0.1).unwrap();
    assert_eq!(serde_json::from_str::<Vec<serde_json::Value>>(&sweep).unwrap().len(), 3);
}
