use serde::{Deserialize, Serialize};

use super::{Model, ModelError, State, DOMAIN_EPS};
use crate::numerics::{norm_inf, Matrix};

/// Time derivative of a [`State`], per unit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldValue {
    pub dx: Vec<f64>,
    pub d_o: Vec<f64>,
}

impl FieldValue {
    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.dx).max(norm_inf(&self.d_o))
    }
}

/// Where the opinion weights come from during an evaluation.
#[derive(Clone, Copy)]
pub(crate) enum Weights<'a> {
    Given(&'a Matrix),
    /// Static graph for a consensus model, thresholded for bounded confidence.
    Model,
}

impl Model {
    fn check_eval(&self, s: &State, w: &Matrix) -> Result<(), ModelError> {
        let n = self.n();
        if s.x.len() != n || s.o.len() != n {
            return Err(ModelError::Dimension {
                field: "state",
                expected: n,
                found: s.x.len().max(s.o.len()),
            });
        }
        if w.rows() != n || w.cols() != n {
            return Err(ModelError::Dimension {
                field: "active_weights",
                expected: n * n,
                found: w.rows() * w.cols(),
            });
        }
        s.check_domain(DOMAIN_EPS)
    }

    /// Evaluates the field at `s` with the opinion weights `active_weights`
    /// (the static `w_o`, or [`Model::effective_opinion_weights`]).
    pub fn vector_field(&self, s: &State, active_weights: &Matrix) -> Result<FieldValue, ModelError> {
        self.check_eval(s, active_weights)?;
        let n = self.n();
        let z = s.to_vec();
        let mut out = vec![0.0; 2 * n];
        self.field_into(&z, Weights::Given(active_weights), &mut out);
        let d_o = out.split_off(n);
        Ok(FieldValue { dx: out, d_o })
    }

    /// Field at stacked state `z = [x; o]`, written into `out`. No checks.
    pub(crate) fn field_into(&self, z: &[f64], weights: Weights<'_>, out: &mut [f64]) {
        let n = self.n();
        let (x, o) = z.split_at(n);
        let (fx, go) = out.split_at_mut(n);
        let beta = &self.adoption.beta;
        for i in 0..n {
            let row = beta.row(i);
            let mut pressure = row[i];
            for (j, (&b, &xj)) in row.iter().zip(x).enumerate() {
                if j != i {
                    pressure += b * xj;
                }
            }
            fx[i] = -self.adoption.delta[i] * x[i] * (1.0 - o[i]) + (1.0 - x[i]) * o[i] * pressure;
        }
        let w_o = &self.opinion.w_o;
        for i in 0..n {
            let oi = o[i];
            let mut social = 0.0;
            match weights {
                Weights::Given(w) => {
                    for (j, (&a, &oj)) in w.row(i).iter().zip(o).enumerate() {
                        if j != i {
                            social += a * (oj - oi);
                        }
                    }
                }
                Weights::Model => {
                    let xi = self.xi;
                    for (j, (&a, &oj)) in w_o.row(i).iter().zip(o).enumerate() {
                        if j != i && a != 0.0 && xi.is_none_or(|t| (oj - oi).abs() < t) {
                            social += a * (oj - oi);
                        }
                    }
                }
            }
            go[i] = social + self.opinion.w_x[i] * (self.opinion.gamma[i] * x[i] - oi);
        }
    }

    /// The `2N x 2N` Jacobian `[[∂f/∂x, ∂f/∂o], [∂g/∂x, ∂g/∂o]]` at `s`,
    /// holding the opinion weights fixed at `active_weights`.
    pub fn jacobian(&self, s: &State, active_weights: &Matrix) -> Result<Matrix, ModelError> {
        self.check_eval(s, active_weights)?;
        let n = self.n();
        let (x, o) = (&s.x, &s.o);
        let beta = &self.adoption.beta;
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let pressure = self.endogenous_rate(i)
                + (0..n).filter(|&k| k != i).map(|k| beta[(i, k)] * x[k]).sum::<f64>();
            let delta = self.adoption.delta[i];
            j[(i, i)] = -delta * (1.0 - o[i]) - o[i] * pressure;
            for k in (0..n).filter(|&k| k != i) {
                j[(i, k)] = (1.0 - x[i]) * o[i] * beta[(i, k)];
            }
            j[(i, n + i)] = delta * x[i] + (1.0 - x[i]) * pressure;

            let wx = self.opinion.w_x[i];
            j[(n + i, i)] = wx * self.opinion.gamma[i];
            let mut degree = 0.0;
            for k in (0..n).filter(|&k| k != i) {
                let a = active_weights[(i, k)];
                j[(n + i, n + k)] = a;
                degree += a;
            }
            j[(n + i, n + i)] = -degree - wx;
        }
        Ok(j)
    }

    /// Opinion weights with every link between nodes whose opinions differ
    /// by `ξ` or more switched off.
    pub fn effective_opinion_weights(&self, s: &State) -> Result<Matrix, ModelError> {
        let xi = self.xi.ok_or(ModelError::NotBoundedConfidence)?;
        let n = self.n();
        if s.o.len() != n {
            return Err(ModelError::Dimension {
                field: "state",
                expected: n,
                found: s.o.len(),
            });
        }
        let mut w = self.opinion.w_o.clone();
        for i in 0..n {
            for j in 0..n {
                if (s.o[j] - s.o[i]).abs() >= xi {
                    w[(i, j)] = 0.0;
                }
            }
        }
        Ok(w)
    }

    /// Weights in force at `s`: the static graph, or its thresholded
    /// version under bounded confidence.
    pub fn active_weights(&self, s: &State) -> Matrix {
        match self.xi {
            Some(_) => self
                .effective_opinion_weights(s)
                .expect("threshold present"),
            None => self.opinion.w_o.clone(),
        }
    }

    /// Number of links active at stacked opinion vector `o`.
    pub(crate) fn active_edge_count(&self, o: &[f64]) -> usize {
        let n = self.n();
        let w = &self.opinion.w_o;
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                if i != j && w[(i, j)] != 0.0 && self.xi.is_none_or(|t| (o[j] - o[i]).abs() < t) {
                    count += 1;
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AdoptionParams, OpinionParams};

    fn scalar() -> Model {
        Model::new(
            AdoptionParams {
                beta: Matrix::from_diag(&[0.3]),
                delta: vec![0.5],
            },
            OpinionParams::unit(Matrix::zeros(1, 1)),
            None,
        )
        .unwrap()
    }

    fn pair(xi: Option<f64>) -> Model {
        Model::new(
            AdoptionParams {
                beta: Matrix::from_rows(&[[0.2, 0.1], [0.3, 0.4]]),
                delta: vec![0.5, 0.6],
            },
            OpinionParams::unit(Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])),
            xi,
        )
        .unwrap()
    }

    #[test]
    fn flop_is_an_equilibrium() {
        let m = pair(None);
        let f = m.vector_field(&State::zeros(2), &m.opinion.w_o).unwrap();
        assert_eq!(f.norm_inf(), 0.0);
    }

    #[test]
    fn hit_is_an_equilibrium_for_unit_gamma() {
        let m = pair(None);
        let f = m.vector_field(&State::ones(2), &m.opinion.w_o).unwrap();
        assert_eq!(f.norm_inf(), 0.0);
    }

    #[test]
    fn hit_breaks_when_gamma_below_one() {
        let mut m = pair(None);
        m.opinion.gamma[1] = 0.9;
        let f = m.vector_field(&State::ones(2), &m.opinion.w_o).unwrap();
        assert!(f.norm_inf() > 0.0);
        assert!(f.d_o[1] < 0.0);
    }

    #[test]
    fn scalar_jacobian_at_flop() {
        let m = scalar();
        let j = m.jacobian(&State::zeros(1), &m.opinion.w_o).unwrap();
        assert_eq!(j, Matrix::from_rows(&[[-0.5, 0.3], [1.0, -1.0]]));
    }

    #[test]
    fn out_of_domain_state_is_rejected() {
        let m = pair(None);
        let s = State::new(vec![0.5, 1.1], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            m.vector_field(&s, &m.opinion.w_o),
            Err(ModelError::Domain { index: 1, .. })
        ));
    }

    #[test]
    fn bounded_confidence_weights() {
        let m = pair(Some(0.01));
        let s = State::new(vec![0.0, 0.0], vec![0.0, 0.5]).unwrap();
        assert_eq!(m.effective_opinion_weights(&s).unwrap(), Matrix::zeros(2, 2));
        let wide = pair(Some(1.5));
        assert_eq!(wide.effective_opinion_weights(&s).unwrap(), wide.opinion.w_o);
        let same = State::uniform(2, 0.0, 0.4);
        assert_eq!(m.effective_opinion_weights(&same).unwrap(), m.opinion.w_o);
        // gap equal to the threshold severs the link
        let tie = pair(Some(0.5));
        assert_eq!(tie.effective_opinion_weights(&s).unwrap(), Matrix::zeros(2, 2));
        assert!(matches!(
            pair(None).effective_opinion_weights(&s),
            Err(ModelError::NotBoundedConfidence)
        ));
    }

    #[test]
    fn internal_field_matches_public_with_thresholded_weights() {
        let m = pair(Some(0.3));
        let s = State::new(vec![0.2, 0.7], vec![0.1, 0.9]).unwrap();
        let w = m.effective_opinion_weights(&s).unwrap();
        let public = m.vector_field(&s, &w).unwrap();
        let mut out = vec![0.0; 4];
        m.field_into(&s.to_vec(), Weights::Model, &mut out);
        assert_eq!(out[..2], public.dx[..]);
        assert_eq!(out[2..], public.d_o[..]);
        assert_eq!(m.active_edge_count(&s.o), 0);
    }
}
