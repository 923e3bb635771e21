use crate::model::{AdoptionParams, Model, OpinionParams, State};
use crate::numerics::Matrix;

use super::{ExperimentError, InitialPolicy, ScenarioSpec};
use crate::dynamics::IntegratorConfig;

pub const BUILTIN_NAMES: [&str; 7] = [
    "barbell_no_coupling",
    "barbell_identical",
    "barbell_deleted",
    "tipping4",
    "tipping4_exact",
    "star5",
    "complete20",
];

const BARBELL_BETA: [[f64; 7]; 7] = [
    [0.0665, 0.0668, 0.0630, 0.0, 0.0, 0.0, 0.0],
    [0.0718, 0.0033, 0.0477, 0.0, 0.0, 0.0, 0.0],
    [0.0281, 0.0521, 0.0549, 0.0641, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0114, 0.0525, 0.0480, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0250, 0.0646, 0.0432, 0.0575],
    [0.0, 0.0, 0.0, 0.0, 0.0112, 0.0050, 0.0346],
    [0.0, 0.0, 0.0, 0.0, 0.0470, 0.0421, 0.0108],
];
const BARBELL_DELTA: [f64; 7] = [0.0599, 0.0208, 0.0790, 0.0767, 0.0773, 0.0813, 0.0156];
const BARBELL_O0: [f64; 7] = [0.8279, 0.2410, 0.7215, 0.9841, 0.6457, 0.5573, 0.9630];
const BARBELL_T_MAX: f64 = 2000.0;

const TIPPING_BETA: [[f64; 4]; 4] = [
    [0.1, 0.25, 0.3, 0.35],
    [0.15, 0.05, 0.3, 0.3],
    [0.5, 0.3, 0.1, 0.3],
    [0.2, 0.1, 0.1, 0.2],
];
const TIPPING_DELTA: [f64; 4] = [0.5, 0.4, 0.6, 0.3];
/// `x* = o* = 0.5 · 1`; the printed rates do not place the equilibrium
/// there, so `tipping4_exact` recomputes `δ` from the same `β`.
pub const TIPPING_X_STAR: f64 = 0.5;
const MC_TRIALS: usize = 500;

fn complete(n: usize) -> Matrix {
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[(i, j)] = 1.0;
            }
        }
    }
    w
}

fn model(beta: Matrix, delta: Vec<f64>, opinion: OpinionParams) -> Model {
    Model::new(AdoptionParams { beta, delta }, opinion, None).expect("builtin parameters are valid")
}

fn barbell(variant: &str) -> Model {
    let beta = Matrix::from_rows(&BARBELL_BETA);
    let mut support = Matrix::zeros(7, 7);
    for i in 0..7 {
        for j in 0..7 {
            if i != j && beta[(i, j)] > 0.0 {
                support[(i, j)] = 1.0;
            }
        }
    }
    let opinion = match variant {
        "barbell_no_coupling" => OpinionParams {
            w_o: Matrix::zeros(7, 7),
            w_x: vec![0.0; 7],
            gamma: vec![1.0; 7],
        },
        "barbell_identical" => OpinionParams::unit(support),
        _ => {
            // node 4 keeps listening to 3 and 5 but nobody hears node 4
            support[(2, 3)] = 0.0;
            support[(4, 3)] = 0.0;
            OpinionParams::unit(support)
        }
    };
    model(beta, BARBELL_DELTA.to_vec(), opinion)
}

fn tipping(exact: bool) -> Model {
    let beta = Matrix::from_rows(&TIPPING_BETA);
    let delta = if exact {
        (0..4)
            .map(|i| {
                let off: f64 = (0..4).filter(|&j| j != i).map(|j| beta[(i, j)] * TIPPING_X_STAR).sum();
                off + beta[(i, i)]
            })
            .collect()
    } else {
        TIPPING_DELTA.to_vec()
    };
    model(beta, delta, OpinionParams::unit(complete(4)))
}

fn star5() -> Model {
    let beta = Matrix::from_rows(&[
        [0.1, 0.2, 0.2, 0.2, 0.2],
        [0.01, 0.15, 0.0, 0.0, 0.0],
        [0.01, 0.0, 0.15, 0.0, 0.0],
        [0.01, 0.0, 0.0, 0.15, 0.0],
        [0.01, 0.0, 0.0, 0.0, 0.15],
    ]);
    let mut w = Matrix::zeros(5, 5);
    for k in 1..5 {
        w[(0, k)] = 1.0;
        w[(k, 0)] = 1.0;
    }
    model(beta, vec![5.0, 0.1, 0.1, 0.1, 0.1], OpinionParams::unit(w))
}

fn complete20() -> Model {
    let n = 20;
    let mut beta = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            beta[(i, j)] = 0.005 + if i == j { 0.145 } else { 0.0 };
        }
    }
    model(
        beta,
        vec![0.1; n],
        OpinionParams {
            w_o: complete(n),
            w_x: vec![1.0; n],
            gamma: vec![0.75; n],
        },
    )
}

pub fn builtin_model(name: &str) -> Result<Model, ExperimentError> {
    Ok(match name {
        "barbell_no_coupling" | "barbell_identical" | "barbell_deleted" => barbell(name),
        "tipping4" => tipping(false),
        "tipping4_exact" => tipping(true),
        "star5" => star5(),
        "complete20" => complete20(),
        other => return Err(ExperimentError::UnknownScenario(other.to_string())),
    })
}

/// Builtin scenario with its default initial policy, trial count and
/// integrator settings.
pub fn builtin_scenario(name: &str) -> Result<ScenarioSpec, ExperimentError> {
    let model = builtin_model(name)?;
    let n = model.n();
    let (initial, trials, integrator) = match name {
        "barbell_no_coupling" | "barbell_identical" | "barbell_deleted" => {
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            let state = State::new(x, BARBELL_O0.to_vec()).expect("valid state");
            (
                InitialPolicy::Fixed(state),
                1,
                IntegratorConfig::default().with_t_max(BARBELL_T_MAX),
            )
        }
        "tipping4" | "tipping4_exact" => (InitialPolicy::UniformRandom, MC_TRIALS, IntegratorConfig::default()),
        _ => (
            InitialPolicy::Fixed(State::uniform(n, 0.5, 0.5)),
            1,
            IntegratorConfig::default(),
        ),
    };
    Ok(ScenarioSpec {
        name: name.to_string(),
        model,
        initial,
        trials,
        seed: 0,
        integrator,
    })
}
