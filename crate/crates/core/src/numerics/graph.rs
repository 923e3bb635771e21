//! Reachability on the support graph of a square matrix.
//!
//! Entry `(i, j)` with `i != j` and `|a_ij| > threshold` is a directed edge
//! `i -> j`. For opinion weights this means "i listens to j"; for the
//! diagonal-dominance walk condition it is exactly the chain of nonzero
//! entries the definition asks for.

use std::collections::BTreeSet;

use super::{Matrix, NumericsError};

fn check(m: &Matrix) -> Result<usize, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.rows())
}

#[inline]
fn edge(m: &Matrix, i: usize, j: usize, threshold: f64) -> bool {
    i != j && m[(i, j)].abs() > threshold
}

/// Nodes reachable from `start` following edges forward (`reverse = false`)
/// or backward.
fn search(m: &Matrix, start: &[usize], threshold: f64, reverse: bool) -> Vec<bool> {
    let n = m.rows();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    for &s in start {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for v in 0..n {
            let e = if reverse {
                edge(m, v, u, threshold)
            } else {
                edge(m, u, v, threshold)
            };
            if e && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Strong connectivity of the support graph. The empty and one-node graphs
/// count as strongly connected.
pub fn strongly_connected(adjacency: &Matrix, support_threshold: f64) -> Result<bool, NumericsError> {
    let n = check(adjacency)?;
    if n <= 1 {
        return Ok(true);
    }
    let fwd = search(adjacency, &[0], support_threshold, false);
    if fwd.iter().any(|&s| !s) {
        return Ok(false);
    }
    let bwd = search(adjacency, &[0], support_threshold, true);
    Ok(bwd.iter().all(|&s| s))
}

/// Every row with a directed walk (possibly empty) into `targets`.
pub fn reachable_rows(
    adjacency: &Matrix,
    targets: &BTreeSet<usize>,
    support_threshold: f64,
) -> Result<BTreeSet<usize>, NumericsError> {
    let n = check(adjacency)?;
    if let Some(&bad) = targets.iter().find(|&&t| t >= n) {
        return Err(NumericsError::Dimension {
            expected: n,
            found: bad + 1,
        });
    }
    let start: Vec<usize> = targets.iter().copied().collect();
    let seen = search(adjacency, &start, support_threshold, true);
    Ok((0..n).filter(|&i| seen[i]).collect())
}
