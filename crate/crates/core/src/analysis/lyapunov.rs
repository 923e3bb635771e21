use serde::{Deserialize, Serialize};

use super::{omega_unchecked, AnalysisError, CERTIFICATE_TOL};
use crate::model::Model;
use crate::numerics::{in_degree_laplacian, solve_linear, spectral_abscissa, strongly_connected, symmetric_max_eig, Matrix};

/// Linear comparison systems bounding the flow near the flop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrices {
    /// `[[-B̄, B̄], [WΓ, -(L + W)]]` with `B̄ = diag(Ω_i(τ))`.
    pub p: Matrix,
    /// `p` with `W` in place of `WΓ`; dominates `p` whenever `γ ≤ 1`.
    pub p_upper: Matrix,
    /// `[[-D, D], [W, -(L + W)]]`.
    pub p_hat: Matrix,
}

pub fn comparison_matrices(model: &Model, tau: f64) -> Result<ComparisonMatrices, AnalysisError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(AnalysisError::TauOutOfRange(tau));
    }
    let n = model.n();
    let op = &model.opinion;
    let b_bar = Matrix::from_diag(&(0..n).map(|i| omega_unchecked(model, i, tau)).collect::<Vec<_>>());
    let d = Matrix::from_diag(&model.adoption.delta);
    let w = Matrix::from_diag(&op.w_x);
    let wg = Matrix::from_diag(&(0..n).map(|i| op.w_x[i] * op.gamma[i]).collect::<Vec<_>>());
    let opinion_block = in_degree_laplacian(&op.w_o).add(&w).scale(-1.0);
    Ok(ComparisonMatrices {
        p: Matrix::block2x2(&b_bar.scale(-1.0), &b_bar, &wg, &opinion_block),
        p_upper: Matrix::block2x2(&b_bar.scale(-1.0), &b_bar, &w, &opinion_block),
        p_hat: Matrix::block2x2(&d.scale(-1.0), &d, &w, &opinion_block),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCertificate {
    pub p: Matrix,
    /// Diagonal of `Q`, scaled so the largest entry is 1.
    pub q: Vec<f64>,
    /// Largest eigenvalue of `PᵀQ + QP`.
    pub lambda_max: f64,
    pub alpha: f64,
    pub hurwitz: bool,
}

impl LyapunovCertificate {
    pub fn is_valid(&self) -> bool {
        self.q.iter().all(|&q| q > 0.0)
            && self.lambda_max <= CERTIFICATE_TOL
            && (!self.hurwitz || self.lambda_max < 0.0)
    }
}

/// Positive vector spanning the kernel of an irreducible singular M-matrix
/// `-m`, normalised to unit sum.
fn kernel_vector(m: &Matrix) -> Result<Vec<f64>, AnalysisError> {
    let n = m.rows();
    let mut bordered = m.clone();
    for j in 0..n {
        bordered[(n - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    Ok(solve_linear(&bordered, &rhs)?)
}

/// Diagonal `Q` with `PᵀQ + QP ⪯ 0` for an irreducible Metzler `p` with
/// `α(p) ≤ 0`, built as `q_i = η_i / ξ_i` from right and left positive
/// vectors of `p`.
pub fn lyapunov_certificate(p: &Matrix) -> Result<LyapunovCertificate, AnalysisError> {
    if !p.is_square() {
        return Err(crate::numerics::NumericsError::NotSquare {
            rows: p.rows(),
            cols: p.cols(),
        }
        .into());
    }
    if !p.is_metzler() {
        return Err(AnalysisError::NotMetzler);
    }
    if !strongly_connected(p, 0.0)? {
        return Err(AnalysisError::Reducible);
    }
    let n = p.rows();
    if n == 0 {
        return Err(AnalysisError::Precondition("empty matrix".into()));
    }
    let alpha = spectral_abscissa(p)?;
    let marginal = 1e-10 * p.norm_inf().max(1.0);
    if alpha > marginal {
        return Err(AnalysisError::Unstable(alpha));
    }
    let hurwitz = alpha < -marginal;
    let pt = p.transpose();
    let (xi, eta) = if hurwitz {
        let minus_one = vec![-1.0; n];
        (solve_linear(p, &minus_one)?, solve_linear(&pt, &minus_one)?)
    } else {
        (kernel_vector(p)?, kernel_vector(&pt)?)
    };
    if xi.iter().chain(&eta).any(|&v| v <= 0.0) {
        return Err(AnalysisError::Precondition(
            "positive eigenvector lost to rounding".into(),
        ));
    }
    let mut q: Vec<f64> = eta.iter().zip(&xi).map(|(e, x)| e / x).collect();
    let top = q.iter().copied().fold(0.0, f64::max);
    q.iter_mut().for_each(|v| *v /= top);
    let qm = Matrix::from_diag(&q);
    let s = pt.matmul(&qm).add(&qm.matmul(p)).symmetric_part();
    let lambda_max = symmetric_max_eig(&s)?;
    Ok(LyapunovCertificate {
        p: p.clone(),
        q,
        lambda_max,
        alpha,
        hurwitz,
    })
}
