use serde::{Deserialize, Serialize};

use super::{AdoptionParams, Model, ModelError, OpinionParams};
use crate::numerics::Matrix;
use crate::serial::canonical_json;

/// JSON form of a [`Model`]. Matrices are row-major; a flat array of
/// `n * n` numbers and a nested array of rows are both accepted on input.
/// Omitted opinion fields default to unit weights, `w_x = 1` and `γ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub n: usize,
    pub beta: MatrixField,
    pub delta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_o: Option<MatrixField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixField {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl MatrixField {
    fn into_matrix(self, field: &'static str, n: usize) -> Result<Matrix, ModelError> {
        let flat = match self {
            MatrixField::Flat(v) => v,
            MatrixField::Nested(rows) => {
                if rows.len() != n {
                    return Err(ModelError::Dimension {
                        field,
                        expected: n,
                        found: rows.len(),
                    });
                }
                let mut flat = Vec::with_capacity(n * n);
                for r in rows {
                    if r.len() != n {
                        return Err(ModelError::Dimension {
                            field,
                            expected: n,
                            found: r.len(),
                        });
                    }
                    flat.extend(r);
                }
                flat
            }
        };
        if flat.len() != n * n {
            return Err(ModelError::Dimension {
                field,
                expected: n * n,
                found: flat.len(),
            });
        }
        Matrix::from_row_major(n, n, flat).map_err(|e| ModelError::Document(format!("{field}: {e}")))
    }
}

impl ModelDoc {
    pub fn into_model(self) -> Result<Model, ModelError> {
        let n = self.n;
        if self.delta.len() != n {
            return Err(ModelError::Dimension {
                field: "delta",
                expected: n,
                found: self.delta.len(),
            });
        }
        let beta = self.beta.into_matrix("beta", n)?;
        let w_o = match self.w_o {
            Some(m) => m.into_matrix("w_o", n)?,
            None => Matrix::zeros(n, n),
        };
        Model::new(
            AdoptionParams {
                beta,
                delta: self.delta,
            },
            OpinionParams {
                w_o,
                w_x: self.w_x.unwrap_or_else(|| vec![1.0; n]),
                gamma: self.gamma.unwrap_or_else(|| vec![1.0; n]),
            },
            self.xi,
        )
    }
}

impl From<&Model> for ModelDoc {
    fn from(m: &Model) -> Self {
        ModelDoc {
            n: m.n(),
            beta: MatrixField::Flat(m.adoption.beta.as_slice().to_vec()),
            delta: m.adoption.delta.clone(),
            w_o: Some(MatrixField::Flat(m.opinion.w_o.as_slice().to_vec())),
            w_x: Some(m.opinion.w_x.clone()),
            gamma: Some(m.opinion.gamma.clone()),
            xi: m.xi,
        }
    }
}

impl Model {
    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ModelError::Document(e.to_string()))?;
        doc.into_model()
    }

    /// Canonical JSON with every field explicit.
    pub fn to_json(&self) -> String {
        canonical_json(&ModelDoc::from(self)).expect("model document serialises")
    }
}
