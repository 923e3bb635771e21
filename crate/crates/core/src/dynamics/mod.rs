//! Fixed-step RK4 integration of the coupled model, with hypercube
//! clamping, convergence detection and terminal classification.

mod csv;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::field::Weights;
use crate::model::{Model, ModelError, State};
use crate::numerics::norm_inf;

pub use self::csv::{trajectory_csv, write_trajectory_csv};

/// Consecutive sub-tolerance residuals required to declare convergence.
pub const CONVERGENCE_STREAK: usize = 10;
/// Hit requires every component above this; flop every component below
/// `1 - HIT_THRESHOLD`.
pub const HIT_THRESHOLD: f64 = 0.99;
pub const FLOP_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid integrator config: {0}")]
    Config(String),
    #[error("non-finite state after t = {last_valid_time}")]
    NonFinite { last_valid_time: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub step: f64,
    pub t_max: f64,
    /// Convergence threshold on `‖ż‖∞`.
    pub convergence_tol: f64,
    /// Clamp corrections larger than this are logged.
    pub clamp_warn_tol: f64,
    /// Record every `record_stride`-th step.
    pub record_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            t_max: 5000.0,
            convergence_tol: 1e-10,
            clamp_warn_tol: 1e-9,
            record_stride: 100,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(DynamicsError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("step", self.step)?;
        positive("t_max", self.t_max)?;
        positive("convergence_tol", self.convergence_tol)?;
        positive("clamp_warn_tol", self.clamp_warn_tol)?;
        if self.step >= self.t_max {
            return Err(DynamicsError::Config(format!(
                "step {} must be smaller than t_max {}",
                self.step, self.t_max
            )));
        }
        if self.record_stride == 0 {
            return Err(DynamicsError::Config("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Hit,
    Flop,
    Interior,
    Split,
    Timeout,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::Hit,
        Outcome::Flop,
        Outcome::Interior,
        Outcome::Split,
        Outcome::Timeout,
    ];
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalLabel {
    pub outcome: Outcome,
    /// `‖ż‖∞` at the final state.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub t: f64,
    pub active_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Active-link count whenever it changes (bounded confidence only).
    pub switch_trace: Option<Vec<SwitchEvent>>,
    pub terminal: TerminalLabel,
    pub converged: bool,
    /// Bounded-confidence threshold the run used.
    pub xi: Option<f64>,
    /// Largest distance any pre-clamp component strayed outside `[0, 1]`.
    pub max_excursion: f64,
    /// Steps whose clamp correction exceeded `clamp_warn_tol`.
    pub clamp_warnings: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Trajectory holding a single state, with a convergence verdict. Mostly
    /// useful to classify a state directly.
    pub fn constant(state: State, residual: f64, converged: bool, xi: Option<f64>) -> Self {
        let mut t = Trajectory {
            times: vec![0.0],
            states: vec![state],
            switch_trace: None,
            terminal: TerminalLabel {
                outcome: Outcome::Timeout,
                residual,
            },
            converged,
            xi,
            max_excursion: 0.0,
            clamp_warnings: 0,
        };
        t.terminal = classify_terminal(&t);
        t
    }
}

/// Labels the end of a trajectory.
///
/// Hit and flop depend only on the final state. Interior and split need a
/// converged run; split additionally needs a bounded-confidence threshold
/// and at least two opinion clusters more than `ξ` apart. Anything else
/// is a timeout.
pub fn classify_terminal(t: &Trajectory) -> TerminalLabel {
    let s = t.final_state();
    let residual = t.terminal.residual;
    let outcome = if s.min_component() > HIT_THRESHOLD {
        Outcome::Hit
    } else if s.max_component() < FLOP_THRESHOLD {
        Outcome::Flop
    } else if !t.converged {
        Outcome::Timeout
    } else if t.xi.is_some_and(|xi| opinion_clusters(&s.o, xi) >= 2) {
        Outcome::Split
    } else {
        Outcome::Interior
    };
    TerminalLabel { outcome, residual }
}

/// Number of groups left after splitting sorted opinions at every gap
/// larger than `xi`.
pub fn opinion_clusters(o: &[f64], xi: f64) -> usize {
    if o.is_empty() {
        return 0;
    }
    let mut sorted = o.to_vec();
    sorted.sort_by(f64::total_cmp);
    1 + sorted.windows(2).filter(|w| w[1] - w[0] > xi).count()
}

/// Integrates `model` from `initial` with classical RK4.
///
/// Under bounded confidence the active links are re-evaluated at every
/// stage. After each step components are clamped back into `[0, 1]`.
/// The run stops once `‖ż‖∞ < convergence_tol` holds at
/// [`CONVERGENCE_STREAK`] consecutive steps, or at `t_max`.
pub fn simulate(model: &Model, initial: &State, cfg: &IntegratorConfig) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    model.ensure_simulatable()?;
    let n = model.n();
    if initial.n() != n || initial.o.len() != n {
        return Err(ModelError::Dimension {
            field: "initial",
            expected: n,
            found: initial.x.len().max(initial.o.len()),
        }
        .into());
    }
    initial.check_domain(0.0)?;

    let dim = 2 * n;
    let h = cfg.step;
    let total_steps = (cfg.t_max / h).ceil() as u64;
    let mut z = initial.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    let mut times = vec![0.0];
    let mut states = vec![initial.clone()];
    let mut switch_trace = model.xi.map(|_| {
        vec![SwitchEvent {
            t: 0.0,
            active_edges: model.active_edge_count(&z[n..]),
        }]
    });
    let mut max_excursion: f64 = 0.0;
    let mut clamp_warnings = 0;
    let mut streak = 0;
    let mut converged = false;
    let mut step = 0u64;
    let mut residual;

    loop {
        model.field_into(&z, Weights::Model, &mut k1);
        residual = norm_inf(&k1);
        if !residual.is_finite() {
            return Err(DynamicsError::NonFinite {
                last_valid_time: step as f64 * h,
            });
        }
        if residual < cfg.convergence_tol {
            streak += 1;
            if streak >= CONVERGENCE_STREAK {
                converged = true;
                break;
            }
        } else {
            streak = 0;
        }
        if step >= total_steps {
            break;
        }

        for i in 0..dim {
            tmp[i] = z[i] + 0.5 * h * k1[i];
        }
        model.field_into(&tmp, Weights::Model, &mut k2);
        for i in 0..dim {
            tmp[i] = z[i] + 0.5 * h * k2[i];
        }
        model.field_into(&tmp, Weights::Model, &mut k3);
        for i in 0..dim {
            tmp[i] = z[i] + h * k3[i];
        }
        model.field_into(&tmp, Weights::Model, &mut k4);

        let mut step_excursion: f64 = 0.0;
        for i in 0..dim {
            let v = z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if !v.is_finite() {
                return Err(DynamicsError::NonFinite {
                    last_valid_time: step as f64 * h,
                });
            }
            if v < 0.0 {
                step_excursion = step_excursion.max(-v);
                z[i] = 0.0;
            } else if v > 1.0 {
                step_excursion = step_excursion.max(v - 1.0);
                z[i] = 1.0;
            } else {
                z[i] = v;
            }
        }
        step += 1;
        let t = step as f64 * h;
        max_excursion = max_excursion.max(step_excursion);
        if step_excursion > cfg.clamp_warn_tol {
            clamp_warnings += 1;
            log::warn!("clamped state back into the unit cube at t = {t} (excursion {step_excursion:e})");
        }
        if let Some(trace) = switch_trace.as_mut() {
            let active = model.active_edge_count(&z[n..]);
            if trace.last().is_some_and(|e| e.active_edges != active) {
                trace.push(SwitchEvent { t, active_edges: active });
            }
        }
        if step % cfg.record_stride as u64 == 0 {
            times.push(t);
            states.push(State::from_slice(&z));
        }
    }

    let t_end = step as f64 * h;
    if times.last() != Some(&t_end) {
        times.push(t_end);
        states.push(State::from_slice(&z));
    }
    let mut traj = Trajectory {
        times,
        states,
        switch_trace,
        terminal: TerminalLabel {
            outcome: Outcome::Timeout,
            residual,
        },
        converged,
        xi: model.xi,
        max_excursion,
        clamp_warnings,
    };
    traj.terminal = classify_terminal(&traj);
    Ok(traj)
}
