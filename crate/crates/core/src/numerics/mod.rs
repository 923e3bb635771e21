//! Dense small-matrix kernel: storage, eigenvalues, linear solves,
//! symmetric definiteness and support-graph reachability.

mod eigen;
mod graph;
mod linear;
mod matrix;

use num_complex::Complex64;
use thiserror::Error;

pub use eigen::{eigenvalues, perron, spectral_abscissa, symmetric_eigenvalues, symmetric_max_eig, Spectrum};
pub use graph::{reachable_rows, strongly_connected};
pub use linear::{determinant, solve_linear, Lu, SINGULAR_PIVOT_TOL};
pub use matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("dimension {n} exceeds supported maximum {max}")]
    TooLarge { n: usize, max: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular to working precision at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("no convergence after {iterations} iterations ({} values resolved)", partial.len())]
    NoConvergence {
        iterations: usize,
        partial: Vec<Complex64>,
    },
    #[error("matrix asymmetry {asymmetry:e} exceeds tolerance (norm {norm:e})")]
    Asymmetric { asymmetry: f64, norm: f64 },
    #[error("matrix has a negative off-diagonal entry")]
    NotMetzler,
}

/// Weighted in-degree Laplacian `diag(row sums) - W` of a weight matrix
/// (the diagonal of `w` is ignored).
pub fn in_degree_laplacian(w: &Matrix) -> Matrix {
    let n = w.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        let mut d = 0.0;
        for j in 0..n {
            if i != j {
                d += w[(i, j)];
                l[(i, j)] = -w[(i, j)];
            }
        }
        l[(i, i)] = d;
    }
    l
}

/// `‖v‖∞`.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
