use super::{Matrix, NumericsError};

/// Relative pivot threshold below which a matrix counts as singular.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-13;

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    /// Factors `m`, failing when a pivot falls below
    /// `SINGULAR_PIVOT_TOL * |m|∞`.
    pub fn factor(m: &Matrix) -> Result<Self, NumericsError> {
        let n = square_dim(m)?;
        let threshold = SINGULAR_PIVOT_TOL * m.norm_inf();
        let (lu, perm, swaps, bad) = eliminate(m, threshold);
        if let Some(pivot) = bad {
            return Err(NumericsError::Singular { pivot });
        }
        debug_assert_eq!(perm.len(), n);
        Ok(Self { lu, perm, swaps })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = self.lu.rows();
        if rhs.len() != n {
            return Err(NumericsError::Dimension {
                expected: n,
                found: rhs.len(),
            });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * y[j]).sum();
            y[i] = (y[i] - s) / self.lu[(i, i)];
        }
        Ok(y)
    }

    pub fn determinant(&self) -> f64 {
        let d: f64 = self.lu.diag().iter().product();
        if self.swaps % 2 == 0 {
            d
        } else {
            -d
        }
    }
}

fn square_dim(m: &Matrix) -> Result<usize, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.rows())
}

/// Gaussian elimination with partial pivoting. Returns the packed factors,
/// the row permutation, the number of swaps and the first pivot index whose
/// magnitude is at or below `threshold` (elimination skips such columns).
fn eliminate(m: &Matrix, threshold: f64) -> (Matrix, Vec<usize>, usize, Option<usize>) {
    let n = m.rows();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let mut bad = None;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= threshold || pmax == 0.0 {
            bad.get_or_insert(k);
            continue;
        }
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            perm.swap(k, p);
            swaps += 1;
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            a[(i, k)] = f;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    (a, perm, swaps, bad)
}

/// Solves `m v = rhs` by LU with partial pivoting.
pub fn solve_linear(m: &Matrix, rhs: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if rhs.len() != m.rows() {
        return Err(NumericsError::Dimension {
            expected: m.rows(),
            found: rhs.len(),
        });
    }
    Lu::factor(m)?.solve(rhs)
}

/// Determinant via the same elimination, with no singularity cut-off.
pub fn determinant(m: &Matrix) -> Result<f64, NumericsError> {
    square_dim(m)?;
    let (lu, _, swaps, bad) = eliminate(m, 0.0);
    if bad.is_some() {
        return Ok(0.0);
    }
    let d: f64 = lu.diag().iter().product();
    Ok(if swaps % 2 == 0 { d } else { -d })
}
