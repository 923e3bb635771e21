//! Analytic certificates for the flop (`0`) and hit (`1`) equilibria.
//!
//! Everything here is a sufficient condition or a checkable witness:
//! the per-node rate bound `Ω_i(τ)`, the stability classifier, weakly
//! chained diagonal dominance, comparison matrices with diagonal Lyapunov
//! certificates, and the interior equilibria with their instability
//! witnesses.

mod classify;
mod equilibrium;
mod lyapunov;
mod wcdd;

use thiserror::Error;

use crate::model::{Model, ModelError};
use crate::numerics::NumericsError;

pub use classify::{classify, Condition, EquilibriumVerdict, Hypotheses, StabilityReport, Verdict};
pub use equilibrium::{instability_witness, interior_equilibrium, InstabilityWitness, InteriorEquilibrium};
pub use lyapunov::{comparison_matrices, lyapunov_certificate, ComparisonMatrices, LyapunovCertificate};
pub use wcdd::{wcdd, WcddReport};

/// Absolute tolerance for the measure-zero equality conditions.
pub const EQUALITY_TOL: f64 = 1e-12;
/// Largest `λ_max(PᵀQ + QP)` accepted from a certificate.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Residual bound an equilibrium record must meet before a witness is built.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("tau = {0} lies outside [0, 1]")]
    TauOutOfRange(f64),
    #[error("node index {index} out of range for {n} nodes")]
    NodeIndex { index: usize, n: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("matrix is not Metzler")]
    NotMetzler,
    #[error("matrix is reducible")]
    Reducible,
    #[error("matrix has spectral abscissa {0:e} > 0")]
    Unstable(f64),
    #[error("witness slack vanishes at node {node} (x* = {x})")]
    DegenerateBound { node: usize, x: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Node `i`'s maximal adoption rate when every neighbour has adoption at
/// most `tau`: `Σ_{j≠i} β_ij τ + β_ii`.
pub fn omega(model: &Model, i: usize, tau: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(AnalysisError::TauOutOfRange(tau));
    }
    if i >= model.n() {
        return Err(AnalysisError::NodeIndex { index: i, n: model.n() });
    }
    Ok(omega_unchecked(model, i, tau))
}

pub(crate) fn omega_unchecked(model: &Model, i: usize, tau: f64) -> f64 {
    model.neighbor_rate_sum(i) * tau + model.endogenous_rate(i)
}
