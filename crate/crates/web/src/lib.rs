//! wasm-bindgen bindings behind `www/index.html`. Every function takes and
//! returns JSON strings so the page needs no glue beyond `JSON.parse`.

use contagion_core::analysis::classify;
use contagion_core::dynamics::{simulate, IntegratorConfig};
use contagion_core::experiments::{builtin_model, monte_carlo, InitialPolicy, ScenarioSpec, BUILTIN_NAMES};
use contagion_core::model::{Model, State};
use serde_json::json;
use wasm_bindgen::prelude::*;

const PLOT_POINTS: usize = 400;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn parse_model(model_json: &str) -> Result<Model, JsError> {
    let model = Model::from_json(model_json).map_err(err)?;
    model.ensure_simulatable().map_err(err)?;
    Ok(model)
}

/// Names accepted by [`builtin_model_json`], as a JSON array.
#[wasm_bindgen]
pub fn builtin_names() -> String {
    json!(BUILTIN_NAMES).to_string()
}

/// Canonical JSON for a builtin model, for the editor pane.
#[wasm_bindgen]
pub fn builtin_model_json(name: &str) -> Result<String, JsError> {
    Ok(builtin_model(name).map_err(err)?.to_json())
}

/// Integrates from `x = x0·1`, `o = o0·1` and returns
/// `{t, x, o, outcome, converged}` thinned to a few hundred samples.
#[wasm_bindgen]
pub fn simulate_model(model_json: &str, x0: f64, o0: f64, t_max: f64) -> Result<String, JsError> {
    let model = parse_model(model_json)?;
    let mut cfg = IntegratorConfig::default();
    cfg.t_max = t_max;
    cfg.record_stride = ((t_max / cfg.step) as usize / PLOT_POINTS).max(1);
    let start = State::uniform(model.n(), x0, o0);
    let t = simulate(&model, &start, &cfg).map_err(err)?;
    let xs: Vec<&Vec<f64>> = t.states.iter().map(|s| &s.x).collect();
    let os: Vec<&Vec<f64>> = t.states.iter().map(|s| &s.o).collect();
    Ok(json!({
        "t": t.times,
        "x": xs,
        "o": os,
        "outcome": t.terminal.outcome,
        "converged": t.converged,
    })
    .to_string())
}

/// Stability report for the flop and the hit.
#[wasm_bindgen]
pub fn classify_model(model_json: &str) -> Result<String, JsError> {
    let model = parse_model(model_json)?;
    Ok(classify(&model).map_err(err)?.to_json())
}

/// Monte-Carlo basin scatter: `{points: [[mean_x0, mean_o0, outcome], ...], counts}`.
#[wasm_bindgen]
pub fn basin(model_json: &str, trials: usize, seed: u64) -> Result<String, JsError> {
    let model = parse_model(model_json)?;
    let spec = ScenarioSpec {
        name: "browser".into(),
        model,
        initial: InitialPolicy::UniformRandom,
        trials,
        seed,
        integrator: IntegratorConfig::default(),
    };
    let mc = monte_carlo(&spec).map_err(err)?;
    let points: Vec<_> = mc
        .records
        .iter()
        .map(|r| {
            let label = r.outcome.map_or_else(|| "Error".to_string(), |o| o.to_string());
            json!([r.mean_x0, r.mean_o0, label])
        })
        .collect();
    Ok(json!({ "points": points, "counts": mc.counts }).to_string())
}
