//! Scenario library and seeded Monte-Carlo basin mapping.

mod builtins;
pub mod random;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dynamics::{simulate, DynamicsError, IntegratorConfig, Outcome, Trajectory};
use crate::model::{Model, ModelError, State};
use crate::serial::decimal_sig;

pub use builtins::{builtin_model, builtin_scenario, BUILTIN_NAMES, TIPPING_X_STAR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialPolicy {
    Fixed(State),
    /// Every component uniform on `[0, 1]`.
    UniformRandom,
    /// Uniform states `x = a 1, o = b 1` on a `resolution x resolution`
    /// lattice of cell centres; trial `k` takes cell `(k / res, k % res)`.
    Grid { resolution: usize },
}

impl InitialPolicy {
    /// Initial state for trial `trial`. Random draws come from a ChaCha8
    /// stream selected by the trial index, so they do not depend on which
    /// trials run or in which order.
    pub fn initial(&self, n: usize, seed: u64, trial: usize) -> State {
        match self {
            InitialPolicy::Fixed(s) => s.clone(),
            InitialPolicy::UniformRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial as u64);
                let z: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
                State::from_slice(&z)
            }
            InitialPolicy::Grid { resolution } => {
                let r = (*resolution).max(1);
                let cell = trial % (r * r);
                let a = ((cell / r) as f64 + 0.5) / r as f64;
                let b = ((cell % r) as f64 + 0.5) / r as f64;
                State::uniform(n, a, b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub model: Model,
    pub initial: InitialPolicy,
    pub trials: usize,
    pub seed: u64,
    pub integrator: IntegratorConfig,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.model.ensure_simulatable()?;
        self.integrator.validate()?;
        if self.trials == 0 {
            return Err(ExperimentError::Config("trial count must be at least 1".into()));
        }
        if let InitialPolicy::Fixed(s) = &self.initial {
            if s.n() != self.model.n() {
                return Err(ExperimentError::Config(format!(
                    "initial state has {} nodes, model has {}",
                    s.n(),
                    self.model.n()
                )));
            }
            s.check_domain(0.0)?;
        }
        if let InitialPolicy::Grid { resolution: 0 } = self.initial {
            return Err(ExperimentError::Config("grid resolution must be at least 1".into()));
        }
        Ok(())
    }

    /// Single fixed-start run: kept as a full trajectory rather than a
    /// Monte-Carlo summary.
    pub fn is_single_run(&self) -> bool {
        matches!(self.initial, InitialPolicy::Fixed(_)) && self.trials == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub trial: usize,
    pub initial: State,
    pub mean_x0: f64,
    pub mean_o0: f64,
    pub outcome: Option<Outcome>,
    pub residual: f64,
    pub final_state: Option<State>,
    pub max_excursion: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub scenario: String,
    pub seed: u64,
    pub trials: usize,
    /// Keyed by outcome name, plus `Error` for trials that failed.
    pub counts: BTreeMap<String, usize>,
    pub records: Vec<McRecord>,
    /// Excluded from equality-based reproducibility checks.
    pub wall_time_s: f64,
}

impl McSummary {
    pub fn count(&self, outcome: Outcome) -> usize {
        self.counts.get(&outcome.to_string()).copied().unwrap_or(0)
    }

    /// Mean initial adoption over trials ending in `outcome`.
    pub fn mean_initial_adoption(&self, outcome: Outcome) -> Option<f64> {
        let xs: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.outcome == Some(outcome))
            .map(|r| r.mean_x0)
            .collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }

    /// `true` when counts and records match, ignoring wall time.
    pub fn same_results(&self, other: &McSummary) -> bool {
        self.seed == other.seed && self.counts == other.counts && self.records == other.records
    }
}

fn run_trial(spec: &ScenarioSpec, trial: usize) -> McRecord {
    let n = spec.model.n();
    let initial = spec.initial.initial(n, spec.seed, trial);
    let (mean_x0, mean_o0) = (initial.mean_x(), initial.mean_o());
    let mut rec = McRecord {
        trial,
        initial,
        mean_x0,
        mean_o0,
        outcome: None,
        residual: f64::NAN,
        final_state: None,
        max_excursion: 0.0,
        error: None,
    };
    let mut cfg = spec.integrator.clone();
    // only the end point matters here
    cfg.record_stride = usize::MAX;
    match simulate(&spec.model, &rec.initial, &cfg) {
        Ok(t) => {
            rec.outcome = Some(t.terminal.outcome);
            rec.residual = t.terminal.residual;
            rec.max_excursion = t.max_excursion;
            rec.final_state = Some(t.final_state().clone());
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[cfg(not(target_arch = "wasm32"))]
fn clock() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(target_arch = "wasm32")]
fn clock() -> Option<std::time::Instant> {
    None
}

/// Runs `spec.trials` independent trials. Per-trial failures are recorded,
/// not propagated. Trials run on the rayon pool when the `parallel`
/// feature is on; records are always ordered by trial index.
pub fn monte_carlo(spec: &ScenarioSpec) -> Result<McSummary, ExperimentError> {
    spec.validate()?;
    let start = clock();
    #[cfg(feature = "parallel")]
    let records: Vec<McRecord> = {
        use rayon::prelude::*;
        (0..spec.trials).into_par_iter().map(|k| run_trial(spec, k)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let records: Vec<McRecord> = (0..spec.trials).map(|k| run_trial(spec, k)).collect();

    let mut counts: BTreeMap<String, usize> = Outcome::ALL.iter().map(|o| (o.to_string(), 0)).collect();
    counts.insert("Error".into(), 0);
    for r in &records {
        let key = r.outcome.map_or_else(|| "Error".to_string(), |o| o.to_string());
        *counts.get_mut(&key).expect("all keys present") += 1;
    }
    Ok(McSummary {
        scenario: spec.name.clone(),
        seed: spec.seed,
        trials: spec.trials,
        counts,
        records,
        wall_time_s: start.map_or(0.0, |s| s.elapsed().as_secs_f64()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub trajectories: Vec<Trajectory>,
    pub mc: Option<McSummary>,
}

/// Single fixed-start specs produce one trajectory; everything else goes
/// through [`monte_carlo`].
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResult, ExperimentError> {
    spec.validate()?;
    let (trajectories, mc) = if spec.is_single_run() {
        let init = spec.initial.initial(spec.model.n(), spec.seed, 0);
        (vec![simulate(&spec.model, &init, &spec.integrator)?], None)
    } else {
        (Vec::new(), Some(monte_carlo(spec)?))
    };
    Ok(ScenarioResult {
        spec: spec.clone(),
        trajectories,
        mc,
    })
}

impl ScenarioResult {
    /// `summary.json` contents: parameter echo, seed, counts and the
    /// terminal state of every kept trajectory.
    pub fn summary(&self) -> Value {
        let spec = &self.spec;
        let model: Value = serde_json::from_str(&spec.model.to_json()).expect("model JSON parses");
        let terminals: Vec<Value> = self
            .trajectories
            .iter()
            .map(|t| {
                json!({
                    "outcome": t.terminal.outcome,
                    "residual": t.terminal.residual,
                    "converged": t.converged,
                    "t_final": t.final_time(),
                    "x": t.final_state().x,
                    "o": t.final_state().o,
                    "max_excursion": t.max_excursion,
                    "clamp_warnings": t.clamp_warnings,
                })
            })
            .collect();
        let mut v = json!({
            "scenario": spec.name,
            "seed": spec.seed,
            "trials": spec.trials,
            "model": model,
            "integrator": spec.integrator,
            "initial": spec.initial,
            "trajectories": terminals,
        });
        if let Some(mc) = &self.mc {
            v["counts"] = json!(mc.counts);
            v["wall_time_s"] = json!(mc.wall_time_s);
        }
        v
    }
}

/// `mean_x0,mean_o0,outcome` rows, one per trial, for scatter plots.
pub fn basin_csv(mc: &McSummary) -> String {
    let mut out = String::from("mean_x0,mean_o0,outcome\n");
    for r in &mc.records {
        let label = r.outcome.map_or_else(|| "Error".to_string(), |o| o.to_string());
        out.push_str(&format!(
            "{},{},{}\n",
            decimal_sig(r.mean_x0, 12),
            decimal_sig(r.mean_o0, 12),
            label
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        for name in BUILTIN_NAMES {
            let spec = builtin_scenario(name).unwrap();
            spec.validate().unwrap();
        }
        assert!(matches!(builtin_model("nope"), Err(ExperimentError::UnknownScenario(_))));
    }

    #[test]
    fn star_values() {
        let m = builtin_model("star5").unwrap();
        assert_eq!(m.adoption.beta.row(0), &[0.1, 0.2, 0.2, 0.2, 0.2]);
        assert_eq!(m.adoption.delta[0], 5.0);
    }

    #[test]
    fn exact_tipping_has_half_equilibrium() {
        let m = builtin_model("tipping4_exact").unwrap();
        let eq = crate::analysis::interior_equilibrium(&m).unwrap().unwrap();
        for v in eq.z_star.components() {
            assert!((v - TIPPING_X_STAR).abs() < 1e-12);
        }
        // the printed rates put the solution elsewhere
        let printed = builtin_model("tipping4").unwrap();
        let eq = crate::analysis::interior_equilibrium(&printed).unwrap().unwrap();
        assert!(eq.z_star.x.iter().any(|v| (v - TIPPING_X_STAR).abs() > 1e-3));
    }

    #[test]
    fn uniform_streams_are_per_trial() {
        let p = InitialPolicy::UniformRandom;
        assert_eq!(p.initial(4, 7, 3), p.initial(4, 7, 3));
        assert_ne!(p.initial(4, 7, 3), p.initial(4, 7, 4));
        assert_ne!(p.initial(4, 7, 3), p.initial(4, 8, 3));
    }

    #[test]
    fn grid_cells() {
        let p = InitialPolicy::Grid { resolution: 2 };
        assert_eq!(p.initial(2, 0, 0), State::uniform(2, 0.25, 0.25));
        assert_eq!(p.initial(2, 0, 1), State::uniform(2, 0.25, 0.75));
        assert_eq!(p.initial(2, 0, 3), State::uniform(2, 0.75, 0.75));
    }

    #[test]
    fn zero_start_always_flops() {
        let mut spec = builtin_scenario("tipping4_exact").unwrap();
        spec.initial = InitialPolicy::Fixed(State::zeros(4));
        spec.trials = 10;
        let mc = monte_carlo(&spec).unwrap();
        assert_eq!(mc.count(Outcome::Flop), 10);
        assert_eq!(basin_csv(&mc).lines().count(), 11);
    }
}
