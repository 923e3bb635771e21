use serde::{Deserialize, Serialize};

use super::{AnalysisError, EQUALITY_TOL, EQUILIBRIUM_TOL};
use crate::model::{Model, State};
use crate::numerics::{norm_inf, solve_linear, spectral_abscissa, Matrix};

/// Candidate equilibrium with `x* = o*` and `B_off x* = δ - β_diag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorEquilibrium {
    pub z_star: State,
    /// `‖ż‖∞` at `z*` under the static opinion weights.
    pub field_residual: f64,
    /// `max_i |δ_i - Σ_{j≠i} β_ij x*_j - β_ii|`.
    pub adoption_residual: f64,
    /// `max_i |x*_i - o*_i|`.
    pub match_residual: f64,
    /// `max_i |Σ_j w_ij (x*_j - x*_i)|`.
    pub consensus_residual: f64,
    pub feasible: bool,
}

impl InteriorEquilibrium {
    /// Residual record for an arbitrary state.
    pub fn evaluate(model: &Model, z: State) -> Result<Self, AnalysisError> {
        let n = model.n();
        if z.n() != n {
            return Err(crate::numerics::NumericsError::Dimension {
                expected: n,
                found: z.n(),
            }
            .into());
        }
        let field_residual = model.vector_field(&z, &model.opinion.w_o)?.norm_inf();
        let beta = &model.adoption.beta;
        let w = &model.opinion.w_o;
        let mut adoption = 0.0_f64;
        let mut consensus = 0.0_f64;
        for i in 0..n {
            let mut rate = beta[(i, i)];
            let mut flow = 0.0;
            for j in 0..n {
                if j != i {
                    rate += beta[(i, j)] * z.x[j];
                    flow += w[(i, j)] * (z.x[j] - z.x[i]);
                }
            }
            adoption = adoption.max((model.adoption.delta[i] - rate).abs());
            consensus = consensus.max(flow.abs());
        }
        let gaps: Vec<f64> = z.x.iter().zip(&z.o).map(|(x, o)| x - o).collect();
        let feasible = z.components().all(|v| v > 0.0 && v < 1.0);
        Ok(Self {
            field_residual,
            adoption_residual: adoption,
            match_residual: norm_inf(&gaps),
            consensus_residual: consensus,
            feasible,
            z_star: z,
        })
    }

    pub fn satisfies_conditions(&self) -> bool {
        self.adoption_residual < EQUILIBRIUM_TOL
            && self.match_residual < EQUILIBRIUM_TOL
            && self.consensus_residual < EQUILIBRIUM_TOL
    }
}

/// Solves `Σ_{j≠i} β_ij x_j = δ_i - β_ii` and sets `o = x`.
///
/// `Ok(None)` when the system is singular.
pub fn interior_equilibrium(model: &Model) -> Result<Option<InteriorEquilibrium>, AnalysisError> {
    if model.opinion.gamma.iter().any(|g| (g - 1.0).abs() > EQUALITY_TOL) {
        return Err(AnalysisError::Precondition("requires gamma_i = 1 for all i".into()));
    }
    let n = model.n();
    let mut off = model.adoption.beta.clone();
    let mut rhs = model.adoption.delta.clone();
    for i in 0..n {
        rhs[i] -= off[(i, i)];
        off[(i, i)] = 0.0;
    }
    let x = match solve_linear(&off, &rhs) {
        Ok(x) => x,
        Err(crate::numerics::NumericsError::Singular { pivot }) => {
            log::debug!("interior equilibrium system singular at pivot {pivot}");
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };
    // Rounding can push a corner solution just past the boundary.
    let x: Vec<f64> = x
        .into_iter()
        .map(|v| if (-EQUALITY_TOL..=1.0 + EQUALITY_TOL).contains(&v) { v.clamp(0.0, 1.0) } else { v })
        .collect();
    // A solution outside the cube is still reported (infeasible), but the
    // vector field is only defined on the cube.
    let z = State { o: x.clone(), x };
    if z.components().any(|v| !(0.0..=1.0).contains(&v)) {
        let n_bad = z.components().filter(|v| !(0.0..=1.0).contains(v)).count();
        log::debug!("interior equilibrium leaves the unit cube in {n_bad} components");
        return Ok(Some(InteriorEquilibrium {
            field_residual: f64::NAN,
            adoption_residual: 0.0,
            match_residual: 0.0,
            consensus_residual: f64::NAN,
            feasible: false,
            z_star: z,
        }));
    }
    Ok(Some(InteriorEquilibrium::evaluate(model, z)?))
}

/// Positive vector `y` with `J(z*) y > 0`, certifying `α(J(z*)) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstabilityWitness {
    pub y: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub jy_min: f64,
    pub alpha: f64,
    pub jacobian: Matrix,
}

impl InstabilityWitness {
    pub fn is_valid(&self) -> bool {
        self.y.iter().all(|&v| v > 0.0) && self.jy_min > 0.0
    }
}

/// Builds `y = (1 + ε, 1)` with `ε_i` half of
/// `Σ_{j≠i} β_ij (1 - x*_i) x*_i / δ_i`.
///
/// At the hit the same bound is evaluated in the mirrored coordinates
/// `x̂ = 1 - x`, where it reads identically.
pub fn instability_witness(
    model: &Model,
    eq: &InteriorEquilibrium,
) -> Result<InstabilityWitness, AnalysisError> {
    if !eq.satisfies_conditions() {
        return Err(AnalysisError::Precondition(format!(
            "equilibrium residuals (adoption {:e}, match {:e}, consensus {:e}) exceed {EQUILIBRIUM_TOL:e}",
            eq.adoption_residual, eq.match_residual, eq.consensus_residual
        )));
    }
    if !model.opinion_strongly_connected() {
        return Err(AnalysisError::Precondition("opinion graph not strongly connected".into()));
    }
    if model.opinion.w_x.iter().any(|&w| w <= 0.0) {
        return Err(AnalysisError::Precondition("requires w_x > 0 at every node".into()));
    }
    if model.opinion.gamma.iter().any(|g| (g - 1.0).abs() > EQUALITY_TOL) {
        return Err(AnalysisError::Precondition("requires gamma_i = 1 for all i".into()));
    }
    let n = model.n();
    let z = &eq.z_star;
    let mut epsilons = Vec::with_capacity(n);
    for i in 0..n {
        let x = z.x[i];
        let spread = (1.0 - x) * x;
        let slack = model.neighbor_rate_sum(i) * spread;
        if spread <= EQUALITY_TOL || slack <= 0.0 {
            return Err(AnalysisError::DegenerateBound { node: i, x });
        }
        epsilons.push(0.5 * slack / model.adoption.delta[i]);
    }
    let mut y: Vec<f64> = epsilons.iter().map(|e| 1.0 + e).collect();
    y.extend(std::iter::repeat_n(1.0, n));
    let jacobian = model.jacobian(z, &model.opinion.w_o)?;
    let jy = jacobian.mul_vec(&y);
    let jy_min = jy.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha = spectral_abscissa(&jacobian)?;
    Ok(InstabilityWitness {
        y,
        epsilons,
        jy_min,
        alpha,
        jacobian,
    })
}
