//! The coupled adoption/opinion model.
//!
//! Node `i` carries an adopter fraction `x_i` and a scaled mean opinion
//! `o_i`, both in `[0, 1]`:
//!
//! ```text
//! dx_i/dt = -δ_i x_i (1 - o_i) + (1 - x_i) o_i (Σ_{j≠i} β_ij x_j + β_ii)
//! do_i/dt =  Σ_j a_ij (o_j - o_i) + w^x_i (γ_i x_i - o_i)
//! ```
//!
//! With a static opinion graph `a_ij = w°_ij`. Under bounded confidence
//! with threshold `ξ`, `a_ij = w°_ij` only while `|o_j - o_i| < ξ`.

mod doc;
pub(crate) mod field;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{strongly_connected, Matrix};

pub use doc::ModelDoc;
pub use field::FieldValue;

/// Slack allowed outside the unit hypercube when evaluating the field.
pub const DOMAIN_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field}: expected length {expected}, found {found}")]
    Dimension {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{field}[{index}] is not finite")]
    NonFinite { field: &'static str, index: usize },
    #[error("model violates {0}")]
    Violation(Violation),
    #[error("state component {index} = {value} lies outside [0, 1]")]
    Domain { index: usize, value: f64 },
    #[error("bounded-confidence weights requested on a model without a threshold")]
    NotBoundedConfidence,
    #[error("invalid model document: {0}")]
    Document(String),
}

/// Adoption-side parameters. `beta[(i, j)]`, `j != i`, is the rate at which
/// adopters at `j` recruit at `i`; `beta[(i, i)]` is the endogenous rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AdoptionParams {
    pub beta: Matrix,
    pub delta: Vec<f64>,
}

/// Opinion-side parameters. `w_o[(i, j)]` is how strongly `i` listens to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionParams {
    pub w_o: Matrix,
    pub w_x: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl OpinionParams {
    /// Unit weights on the given opinion edges, `w_x = 1`, `γ = 1`.
    pub fn unit(w_o: Matrix) -> Self {
        let n = w_o.rows();
        Self {
            w_o,
            w_x: vec![1.0; n],
            gamma: vec![1.0; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    n: usize,
    pub adoption: AdoptionParams,
    pub opinion: OpinionParams,
    /// Bounded-confidence threshold; `None` selects the static opinion graph.
    pub xi: Option<f64>,
}

impl Model {
    /// Checks shapes and finiteness. Sign and assumption checks live in
    /// [`Model::validate`].
    pub fn new(adoption: AdoptionParams, opinion: OpinionParams, xi: Option<f64>) -> Result<Self, ModelError> {
        let n = adoption.delta.len();
        let square = |field, m: &Matrix| -> Result<(), ModelError> {
            if m.rows() != n || m.cols() != n {
                return Err(ModelError::Dimension {
                    field,
                    expected: n * n,
                    found: m.rows() * m.cols(),
                });
            }
            if let Some(index) = m.as_slice().iter().position(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite { field, index });
            }
            Ok(())
        };
        let vector = |field, v: &[f64]| -> Result<(), ModelError> {
            if v.len() != n {
                return Err(ModelError::Dimension {
                    field,
                    expected: n,
                    found: v.len(),
                });
            }
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(ModelError::NonFinite { field, index });
            }
            Ok(())
        };
        square("beta", &adoption.beta)?;
        vector("delta", &adoption.delta)?;
        square("w_o", &opinion.w_o)?;
        vector("w_x", &opinion.w_x)?;
        vector("gamma", &opinion.gamma)?;
        if let Some(x) = xi {
            if !x.is_finite() {
                return Err(ModelError::NonFinite { field: "xi", index: 0 });
            }
        }
        Ok(Self {
            n,
            adoption,
            opinion,
            xi,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_bounded_confidence(&self) -> bool {
        self.xi.is_some()
    }

    /// Same parameters with the bounded-confidence threshold replaced.
    pub fn with_threshold(&self, xi: Option<f64>) -> Self {
        Self { xi, ..self.clone() }
    }

    /// `Σ_{j≠i} β_ij`.
    pub fn neighbor_rate_sum(&self, i: usize) -> f64 {
        (0..self.n)
            .filter(|&j| j != i)
            .map(|j| self.adoption.beta[(i, j)])
            .sum()
    }

    pub fn endogenous_rate(&self, i: usize) -> f64 {
        self.adoption.beta[(i, i)]
    }

    pub fn opinion_strongly_connected(&self) -> bool {
        strongly_connected(&self.opinion.w_o, 0.0).expect("w_o is square by construction")
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.n;
        let mut violations = Vec::new();
        let mut push = |constraint, i, j, value| {
            violations.push(Violation {
                constraint,
                i,
                j,
                value,
            })
        };
        for i in 0..n {
            for j in 0..n {
                let b = self.adoption.beta[(i, j)];
                if i == j {
                    if b <= 0.0 {
                        push(Constraint::EndogenousRate, i, None, b);
                    }
                } else if b < 0.0 {
                    push(Constraint::NegativeAdoptionRate, i, Some(j), b);
                }
                let w = self.opinion.w_o[(i, j)];
                if i == j {
                    if w != 0.0 {
                        push(Constraint::OpinionSelfLoop, i, None, w);
                    }
                } else if w < 0.0 {
                    push(Constraint::NegativeOpinionWeight, i, Some(j), w);
                }
            }
            let d = self.adoption.delta[i];
            if d <= 0.0 {
                push(Constraint::DropRate, i, None, d);
            }
            let wx = self.opinion.w_x[i];
            if wx < 0.0 {
                push(Constraint::NegativeCouplingWeight, i, None, wx);
            }
            let g = self.opinion.gamma[i];
            if g <= 0.0 {
                push(Constraint::PositiveGamma, i, None, g);
            } else if g > 1.0 {
                push(Constraint::GammaAboveOne, i, None, g);
            }
        }
        if n > 0 && self.opinion.w_x.iter().all(|&w| w <= 0.0) {
            push(Constraint::CouplingPresent, 0, None, 0.0);
        }
        if let Some(xi) = self.xi {
            if xi <= 0.0 {
                push(Constraint::Threshold, 0, None, xi);
            }
        }
        let has = |c: Constraint| violations.iter().any(|v| v.constraint == c);
        let endogenous_adoption = !has(Constraint::EndogenousRate);
        let coupling_present = !has(Constraint::CouplingPresent);
        let positive_gamma = !has(Constraint::PositiveGamma);
        let opinion_strongly_connected = self.opinion_strongly_connected();
        let mut warnings = Vec::new();
        if !opinion_strongly_connected {
            warnings.push("opinion graph is not strongly connected (assumption 4)".to_string());
        }
        ValidationReport {
            endogenous_adoption,
            coupling_present,
            positive_gamma,
            opinion_strongly_connected,
            violations,
            warnings,
        }
    }

    /// Fails on anything that breaks the hypercube invariance or the sign
    /// structure of the field. Missing coupling (assumption 2) and a
    /// disconnected opinion graph are tolerated here.
    pub fn ensure_simulatable(&self) -> Result<(), ModelError> {
        match self.validate().violations.into_iter().find(|v| v.constraint.is_hard()) {
            Some(v) => Err(ModelError::Violation(v)),
            None => Ok(()),
        }
    }

    /// As [`Model::ensure_simulatable`], additionally requiring assumption 2.
    pub fn ensure_assumptions(&self) -> Result<(), ModelError> {
        match self
            .validate()
            .violations
            .into_iter()
            .find(|v| v.constraint.is_hard() || v.constraint == Constraint::CouplingPresent)
        {
            Some(v) => Err(ModelError::Violation(v)),
            None => Ok(()),
        }
    }
}

/// Parameter constraints checked by [`Model::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Assumption 1: `β_ii > 0`.
    EndogenousRate,
    /// Assumption 2: some `w^x_i > 0`.
    CouplingPresent,
    /// Assumption 3: `γ_i > 0`.
    PositiveGamma,
    GammaAboveOne,
    NegativeAdoptionRate,
    DropRate,
    NegativeOpinionWeight,
    OpinionSelfLoop,
    NegativeCouplingWeight,
    Threshold,
}

impl Constraint {
    fn is_hard(self) -> bool {
        self != Constraint::CouplingPresent
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::EndogenousRate => "Assumption 1 (beta_ii > 0)",
            Constraint::CouplingPresent => "Assumption 2 (some w_x > 0)",
            Constraint::PositiveGamma => "Assumption 3 (gamma_i > 0)",
            Constraint::GammaAboveOne => "gamma_i <= 1",
            Constraint::NegativeAdoptionRate => "beta_ij >= 0",
            Constraint::DropRate => "delta_i > 0",
            Constraint::NegativeOpinionWeight => "w_o_ij >= 0",
            Constraint::OpinionSelfLoop => "w_o_ii = 0",
            Constraint::NegativeCouplingWeight => "w_x_i >= 0",
            Constraint::Threshold => "xi > 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub i: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.j {
            Some(j) => write!(f, "{} at ({}, {}): {}", self.constraint, self.i, j, self.value),
            None => write!(f, "{} at node {}: {}", self.constraint, self.i, self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub endogenous_adoption: bool,
    pub coupling_present: bool,
    pub positive_gamma: bool,
    /// Advisory: bounded-confidence runs legitimately disconnect the graph.
    pub opinion_strongly_connected: bool,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Paired adoption and opinion vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: Vec<f64>,
    pub o: Vec<f64>,
}

impl State {
    pub fn new(x: Vec<f64>, o: Vec<f64>) -> Result<Self, ModelError> {
        if x.len() != o.len() {
            return Err(ModelError::Dimension {
                field: "o",
                expected: x.len(),
                found: o.len(),
            });
        }
        Ok(Self { x, o })
    }

    pub fn uniform(n: usize, x: f64, o: f64) -> Self {
        Self {
            x: vec![x; n],
            o: vec![o; n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::uniform(n, 0.0, 0.0)
    }

    pub fn ones(n: usize) -> Self {
        Self::uniform(n, 1.0, 1.0)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Stacked `[x; o]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(2 * self.n());
        z.extend_from_slice(&self.x);
        z.extend_from_slice(&self.o);
        z
    }

    pub fn from_slice(z: &[f64]) -> Self {
        assert!(z.len() % 2 == 0, "stacked state has odd length");
        let (x, o) = z.split_at(z.len() / 2);
        Self {
            x: x.to_vec(),
            o: o.to_vec(),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = f64> + '_ {
        self.x.iter().chain(&self.o).copied()
    }

    /// Fails when a component is non-finite or outside `[-eps, 1 + eps]`.
    pub fn check_domain(&self, eps: f64) -> Result<(), ModelError> {
        for (index, value) in self.components().enumerate() {
            if !value.is_finite() || value < -eps || value > 1.0 + eps {
                return Err(ModelError::Domain { index, value });
            }
        }
        Ok(())
    }

    pub fn min_component(&self) -> f64 {
        self.components().fold(f64::INFINITY, f64::min)
    }

    pub fn max_component(&self) -> f64 {
        self.components().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_x(&self) -> f64 {
        mean(&self.x)
    }

    pub fn mean_o(&self) -> f64 {
        mean(&self.o)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(beta: f64, delta: f64, wx: f64, gamma: f64) -> Model {
        Model::new(
            AdoptionParams {
                beta: Matrix::from_diag(&[beta]),
                delta: vec![delta],
            },
            OpinionParams {
                w_o: Matrix::zeros(1, 1),
                w_x: vec![wx],
                gamma: vec![gamma],
            },
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_endogenous_rate_fails_assumption_one() {
        let r = single(0.0, 0.5, 1.0, 1.0).validate();
        assert!(!r.endogenous_adoption);
        assert_eq!(r.violations[0].constraint, Constraint::EndogenousRate);
        let err = single(0.0, 0.5, 1.0, 1.0).ensure_simulatable().unwrap_err();
        assert!(err.to_string().contains("Assumption 1"));
    }

    #[test]
    fn zero_coupling_fails_assumption_two_but_still_simulates() {
        let m = single(0.3, 0.5, 0.0, 1.0);
        assert!(!m.validate().coupling_present);
        assert!(m.ensure_simulatable().is_ok());
        assert!(m.ensure_assumptions().is_err());
    }

    #[test]
    fn gamma_range() {
        assert!(!single(0.3, 0.5, 1.0, 0.0).validate().positive_gamma);
        let r = single(0.3, 0.5, 1.0, 1.5).validate();
        assert!(r.positive_gamma);
        assert_eq!(r.violations[0].constraint, Constraint::GammaAboveOne);
    }

    #[test]
    fn dimension_mismatch_is_a_construction_error() {
        let err = Model::new(
            AdoptionParams {
                beta: Matrix::identity(2),
                delta: vec![1.0, 1.0],
            },
            OpinionParams::unit(Matrix::zeros(3, 3)),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::Dimension { field: "w_o", .. }));
    }

    #[test]
    fn state_domain() {
        assert!(State::uniform(2, 0.5, 1.0).check_domain(0.0).is_ok());
        assert!(matches!(
            State::new(vec![0.1, -0.2], vec![0.0, 0.0]).unwrap().check_domain(1e-6),
            Err(ModelError::Domain { index: 1, .. })
        ));
        let z = State::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        assert_eq!(State::from_slice(&z.to_vec()), z);
    }
}
