//! Random model families used by property tests and the acceptance suite.
//! Every family is parameterised by an explicit RNG so draws are
//! reproducible from a seed.

use rand::Rng;

use crate::analysis::omega;
use crate::model::{AdoptionParams, Model, OpinionParams, State};
use crate::numerics::{strongly_connected, Matrix};

/// Directed graph with a Hamiltonian cycle under a random node order plus
/// extra edges with probability `density`, weights in `[0.2, 1.5]`.
pub fn strongly_connected_weights<R: Rng>(rng: &mut R, n: usize, density: f64) -> Matrix {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut w = Matrix::zeros(n, n);
    if n > 1 {
        for k in 0..n {
            w[(order[k], order[(k + 1) % n])] = rng.random_range(0.2..1.5);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && w[(i, j)] == 0.0 && rng.random_bool(density) {
                w[(i, j)] = rng.random_range(0.2..1.5);
            }
        }
    }
    debug_assert!(strongly_connected(&w, 0.0).unwrap());
    w
}

/// Symmetric weights on a random spanning tree plus extra edges.
pub fn undirected_weights<R: Rng>(rng: &mut R, n: usize, density: f64) -> Matrix {
    let mut w = Matrix::zeros(n, n);
    for k in 1..n {
        let parent = rng.random_range(0..k);
        let v = rng.random_range(0.2..1.5);
        w[(k, parent)] = v;
        w[(parent, k)] = v;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if w[(i, j)] == 0.0 && rng.random_bool(density) {
                let v = rng.random_range(0.2..1.5);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    w
}

/// Off-diagonal adoption rates in `[0, max)` with the given density and
/// endogenous rates in `[lo, hi)`.
pub fn adoption_rates<R: Rng>(rng: &mut R, n: usize, density: f64, max: f64, lo: f64, hi: f64) -> Matrix {
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = if i == j {
                rng.random_range(lo..hi)
            } else if rng.random_bool(density) {
                rng.random_range(0.0..max)
            } else {
                0.0
            };
        }
    }
    b
}

fn omega_one(beta: &Matrix, i: usize) -> f64 {
    beta.row(i).iter().sum()
}

fn build(beta: Matrix, delta: Vec<f64>, opinion: OpinionParams, xi: Option<f64>) -> Model {
    Model::new(AdoptionParams { beta, delta }, opinion, xi).expect("generated parameters are valid")
}

/// Strongly connected opinion graph, `δ_i > Ω_i(1)`, `w^x > 0`, `γ ∈ [0.5, 1]`.
pub fn global_flop_model<R: Rng>(rng: &mut R, n: usize) -> Model {
    let beta = adoption_rates(rng, n, 0.5, 0.3, 0.01, 0.3);
    let delta = (0..n).map(|i| omega_one(&beta, i) * rng.random_range(1.05..2.0)).collect();
    let opinion = OpinionParams {
        w_o: strongly_connected_weights(rng, n, 0.3),
        w_x: (0..n).map(|_| rng.random_range(0.1..1.5)).collect(),
        gamma: (0..n).map(|_| rng.random_range(0.5..=1.0)).collect(),
    };
    build(beta, delta, opinion, None)
}

/// Strongly connected opinion graph, `β_ii > δ_i`, `γ = 1`, `w^x > 0`.
pub fn global_hit_model<R: Rng>(rng: &mut R, n: usize) -> Model {
    let beta = adoption_rates(rng, n, 0.5, 0.3, 0.1, 0.5);
    let delta = (0..n).map(|i| beta[(i, i)] * rng.random_range(0.1..0.9)).collect();
    let opinion = OpinionParams {
        w_o: strongly_connected_weights(rng, n, 0.3),
        w_x: (0..n).map(|_| rng.random_range(0.1..1.5)).collect(),
        gamma: vec![1.0; n],
    };
    build(beta, delta, opinion, None)
}

/// Strongly connected opinion graph with `δ_i > β_ii` and random `γ`.
pub fn local_flop_model<R: Rng>(rng: &mut R, n: usize) -> Model {
    let beta = adoption_rates(rng, n, 0.5, 0.5, 0.01, 0.5);
    let delta = (0..n).map(|i| beta[(i, i)] * rng.random_range(1.01..3.0)).collect();
    let opinion = OpinionParams {
        w_o: strongly_connected_weights(rng, n, 0.3),
        w_x: (0..n).map(|_| rng.random_range(0.1..1.5)).collect(),
        gamma: (0..n).map(|_| rng.random_range(0.2..=1.0)).collect(),
    };
    build(beta, delta, opinion, None)
}

/// Like [`local_flop_model`] but node `k` has `δ_k < γ_max β_kk`, with
/// `γ_max = 1` so the flop's local conditions all fail there.
pub fn blocked_local_flop_model<R: Rng>(rng: &mut R, n: usize) -> Model {
    let m = local_flop_model(rng, n);
    let k = rng.random_range(0..n);
    let mut delta = m.adoption.delta.clone();
    delta[k] = m.adoption.beta[(k, k)] * rng.random_range(0.2..0.99);
    let mut opinion = m.opinion.clone();
    opinion.gamma[rng.random_range(0..n)] = 1.0;
    build(m.adoption.beta.clone(), delta, opinion, None)
}

/// Strongly connected model with `γ = 1` and arbitrary positive rates.
pub fn unit_gamma_model<R: Rng>(rng: &mut R, n: usize) -> Model {
    let beta = adoption_rates(rng, n, 0.5, 0.5, 0.01, 0.5);
    let delta = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let opinion = OpinionParams {
        w_o: strongly_connected_weights(rng, n, 0.3),
        w_x: (0..n).map(|_| rng.random_range(0.1..1.5)).collect(),
        gamma: vec![1.0; n],
    };
    build(beta, delta, opinion, None)
}

/// [`unit_gamma_model`] with at least one `γ_k < 1`.
pub fn sub_unit_gamma_model<R: Rng>(rng: &mut R, n: usize) -> Model {
    let m = unit_gamma_model(rng, n);
    let mut opinion = m.opinion.clone();
    for g in opinion.gamma.iter_mut() {
        if rng.random_bool(0.5) {
            *g = rng.random_range(0.5..0.95);
        }
    }
    opinion.gamma[rng.random_range(0..n)] = rng.random_range(0.5..0.95);
    build(m.adoption.beta.clone(), m.adoption.delta.clone(), opinion, None)
}

/// Bounded-confidence flop family: undirected opinion graph,
/// `w^x_i = Ω_i(1)` and `δ_i > Ω_i(1)`.
pub fn bc_flop_model<R: Rng>(rng: &mut R, n: usize) -> Model {
    let beta = adoption_rates(rng, n, 0.5, 0.3, 0.01, 0.3);
    let w_x: Vec<f64> = (0..n).map(|i| omega_one(&beta, i)).collect();
    let delta = w_x.iter().map(|w| w * rng.random_range(1.05..2.0)).collect();
    let opinion = OpinionParams {
        w_o: undirected_weights(rng, n, 0.3),
        w_x,
        gamma: (0..n).map(|_| rng.random_range(0.5..=1.0)).collect(),
    };
    let xi = rng.random_range(0.05..0.5);
    build(beta, delta, opinion, Some(xi))
}

/// Bounded-confidence hit family: undirected opinion graph, `γ = 1`,
/// `δ_i = w^x_i` and `β_ii > δ_i`.
pub fn bc_hit_model<R: Rng>(rng: &mut R, n: usize) -> Model {
    let beta = adoption_rates(rng, n, 0.5, 0.3, 0.1, 0.5);
    let delta: Vec<f64> = (0..n).map(|i| beta[(i, i)] * rng.random_range(0.1..0.9)).collect();
    let opinion = OpinionParams {
        w_o: undirected_weights(rng, n, 0.3),
        w_x: delta.clone(),
        gamma: vec![1.0; n],
    };
    let xi = rng.random_range(0.05..0.5);
    build(beta, delta, opinion, Some(xi))
}

/// State with every component drawn from `[lo, hi)`.
pub fn state_in<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> State {
    let mut draw = || (0..n).map(|_| rng.random_range(lo..hi)).collect::<Vec<_>>();
    let x = draw();
    let o = draw();
    State { x, o }
}

/// Checks a model against `δ_i > Ω_i(1)` (used to sanity-check families).
pub fn satisfies_global_flop(model: &Model) -> bool {
    (0..model.n()).all(|i| model.adoption.delta[i] > omega(model, i, 1.0).unwrap())
}
