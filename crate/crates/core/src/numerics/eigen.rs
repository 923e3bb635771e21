//! Eigenvalues of small dense real matrices.
//!
//! General matrices go through balancing, Householder reduction to upper
//! Hessenberg form and the Francis double-shift QR iteration. Symmetric
//! matrices use cyclic Jacobi rotations. Metzler matrices additionally get
//! a Perron power iteration on a nonnegative shift, used as an oracle and
//! for Perron vectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Matrix, NumericsError};

const MAX_DIM: usize = 256;

/// All eigenvalues of a square matrix together with its spectral abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by decreasing real part, then decreasing imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Largest real part over `eigenvalues`.
    pub abscissa: f64,
}

impl Spectrum {
    fn from_unsorted(mut eigenvalues: Vec<Complex64>) -> Self {
        eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        let abscissa = eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            eigenvalues,
            abscissa,
        }
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }
}

/// Computes every eigenvalue of `m`.
///
/// The QR sweep budget is `100 * n`; running out yields
/// [`NumericsError::NoConvergence`] carrying the eigenvalues already
/// deflated.
pub fn eigenvalues(m: &Matrix) -> Result<Spectrum, NumericsError> {
    let n = check_square(m)?;
    if n > MAX_DIM {
        return Err(NumericsError::TooLarge { n, max: MAX_DIM });
    }
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            abscissa: f64::NEG_INFINITY,
        });
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    balance(&mut a);
    hessenberg(&mut a);
    let eig = hqr(&mut a, 100 * n)?;
    Ok(Spectrum::from_unsorted(eig))
}

/// Spectral abscissa `max Re(λ)`.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64, NumericsError> {
    Ok(eigenvalues(m)?.abscissa)
}

fn check_square(m: &Matrix) -> Result<usize, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.rows())
}

/// Diagonal similarity scaling by powers of two so rows and columns have
/// comparable norms. Leaves the spectrum unchanged.
fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = a.len();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut g = r / RADIX;
            let mut f = 1.0;
            while c < g {
                f *= RADIX;
                c *= SQRDX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= SQRDX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let norm = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -norm } else { norm };
        for i in 0..n {
            v[i] = if i > k { a[i][k] } else { 0.0 };
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v[k + 1..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- (I - 2vvᵀ/|v|²) A
        for j in k..n {
            let dot: f64 = (k + 1..n).map(|i| v[i] * a[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k + 1..n {
                a[i][j] -= f * v[i];
            }
        }
        // A <- A (I - 2vvᵀ/|v|²)
        for row in a.iter_mut() {
            let dot: f64 = (k + 1..n).map(|j| row[j] * v[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k + 1..n {
                row[j] -= f * v[j];
            }
        }
        a[k + 1][k] = alpha;
        for row in a.iter_mut().skip(k + 2) {
            row[k] = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroyed).
fn hqr(a: &mut [Vec<f64>], max_sweeps: usize) -> Result<Vec<Complex64>, NumericsError> {
    let n = a.len();
    let eps = f64::EPSILON;
    let mut wr = vec![Complex64::new(f64::NAN, 0.0); n];
    let mut found = vec![false; n];
    let mut anorm = 0.0;
    for (i, row) in a.iter().enumerate() {
        for v in row.iter().skip(i.saturating_sub(1)) {
            anorm += v.abs();
        }
    }
    let mut sweeps = 0usize;
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l > 0 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = Complex64::new(x + t, 0.0);
                found[nu] = true;
                nn -= 1;
            } else {
                let mut y = a[nu - 1][nu - 1];
                let mut w = a[nu][nu - 1] * a[nu - 1][nu];
                if l == nu - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nu - 1] = Complex64::new(x + z, 0.0);
                        wr[nu] = wr[nu - 1];
                        if z != 0.0 {
                            wr[nu] = Complex64::new(x - w / z, 0.0);
                        }
                    } else {
                        wr[nu] = Complex64::new(x + p, -z);
                        wr[nu - 1] = wr[nu].conj();
                    }
                    found[nu] = true;
                    found[nu - 1] = true;
                    nn -= 2;
                } else {
                    sweeps += 1;
                    if sweeps > max_sweeps {
                        let partial = wr
                            .iter()
                            .zip(&found)
                            .filter(|(_, &f)| f)
                            .map(|(z, _)| *z)
                            .collect();
                        return Err(NumericsError::NoConvergence {
                            iterations: sweeps - 1,
                            partial,
                        });
                    }
                    if its == 10 || its == 20 {
                        // exceptional shift
                        t += x;
                        for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                            row[i] -= x;
                        }
                        let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nu - 2;
                    let mut z;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s0 = y - z;
                        p = (r * s0 - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s0;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u <= eps * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m..nu - 1 {
                        a[i + 2][i] = 0.0;
                        if i != m {
                            a[i + 2][i - 1] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k + 1 != nu {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                let mut pp = a[k][j] + q * a[k + 1][j];
                                if k + 1 != nu {
                                    pp += r * a[k + 2][j];
                                    a[k + 2][j] -= pp * z;
                                }
                                a[k + 1][j] -= pp * y;
                                a[k][j] -= pp * x;
                            }
                            let mmin = if nu < k + 3 { nu } else { k + 3 };
                            for row in a.iter_mut().take(mmin + 1).skip(l) {
                                let mut pp = x * row[k] + y * row[k + 1];
                                if k + 1 != nu {
                                    pp += z * row[k + 2];
                                    row[k + 2] -= pp * r;
                                }
                                row[k + 1] -= pp * q;
                                row[k] -= pp;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 0 || l + 1 >= nn as usize {
                break;
            }
        }
    }
    Ok(wr)
}

/// Largest eigenvalue of the symmetric part of `m`.
///
/// `m` must already be symmetric up to `1e-10 * |m|∞`; the residual
/// asymmetry is averaged away before the Jacobi sweeps.
pub fn symmetric_max_eig(m: &Matrix) -> Result<f64, NumericsError> {
    Ok(symmetric_eigenvalues(m)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// All eigenvalues of the symmetric part of `m`, unsorted.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>, NumericsError> {
    let n = check_square(m)?;
    let scale = m.norm_inf();
    let asym = m.sub(&m.transpose()).norm_inf();
    if asym > 1e-10 * scale {
        return Err(NumericsError::Asymmetric {
            asymmetry: asym,
            norm: scale,
        });
    }
    let s = m.symmetric_part();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| s.row(i).to_vec()).collect();
    jacobi(&mut a)?;
    Ok((0..n).map(|i| a[i][i]).collect())
}

fn jacobi(a: &mut [Vec<f64>]) -> Result<(), NumericsError> {
    let n = a.len();
    let total: f64 = a.iter().flatten().map(|v| v * v).sum();
    for sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-30 * total || off == 0.0 {
            return Ok(());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = sign(1.0, theta) / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        if sweep == 99 {
            break;
        }
    }
    Err(NumericsError::NoConvergence {
        iterations: 100,
        partial: Vec::new(),
    })
}

/// Dominant eigenpair of a Metzler matrix by power iteration on
/// `m + c I`, with `c = 1 + max |m_ii|`.
///
/// Returns `(α(m), v)` with `v` normalised to unit 1-norm. Requires the
/// shifted matrix to be primitive (irreducible suffices, since the shift
/// makes the diagonal positive).
pub fn perron(m: &Matrix, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>), NumericsError> {
    let n = check_square(m)?;
    if !m.is_metzler() {
        return Err(NumericsError::NotMetzler);
    }
    let c = 1.0 + m.diag().iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    let shifted = m.shifted(c);
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for it in 0..max_iter {
        let w = shifted.mul_vec(&v);
        let norm: f64 = w.iter().sum();
        if norm <= 0.0 {
            return Err(NumericsError::NoConvergence {
                iterations: it,
                partial: Vec::new(),
            });
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        lambda = norm;
        if delta < tol {
            return Ok((lambda - c, v));
        }
    }
    Err(NumericsError::NoConvergence {
        iterations: max_iter,
        partial: vec![Complex64::new(lambda - c, 0.0)],
    })
}
