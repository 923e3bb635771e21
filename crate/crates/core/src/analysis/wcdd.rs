use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::numerics::{reachable_rows, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WcddReport {
    pub is_wcdd: bool,
    pub diagonally_dominant: bool,
    /// Rows with `|m_ii| > Σ_{j≠i} |m_ij|`.
    pub strict_rows: BTreeSet<usize>,
}

/// Weakly chained diagonal dominance: dominant in every row, and every
/// non-strict row reaches a strict row along nonzero off-diagonal entries.
///
/// # Panics
/// If `m` is not square.
pub fn wcdd(m: &Matrix) -> WcddReport {
    assert!(m.is_square(), "wcdd needs a square matrix");
    let n = m.rows();
    let mut dominant = true;
    let mut strict = BTreeSet::new();
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        let d = m[(i, i)].abs();
        if d > off {
            strict.insert(i);
        } else if d < off {
            dominant = false;
        }
    }
    let is_wcdd = dominant
        && !strict.is_empty()
        && reachable_rows(m, &strict, 0.0)
            .map(|r| r.len() == n)
            .unwrap_or(false);
    WcddReport {
        is_wcdd: is_wcdd || n == 0,
        diagonally_dominant: dominant,
        strict_rows: strict,
    }
}
