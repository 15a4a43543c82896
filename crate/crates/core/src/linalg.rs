//! Small dense linear algebra over generic scalars and `f64`.
//!
//! Matrices here never exceed a few dozen rows, so plain Gaussian
//! elimination and power iteration are entirely adequate.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// Relative pivot threshold below which a floating elimination is treated as
/// singular. Exact scalars are singular only on a literal zero pivot.
const FLOAT_PIVOT_EPS: f64 = 1e-12;

fn pivot_row<S: Scalar>(m: &[Vec<S>], col: usize, from: usize) -> usize {
    let mut best = from;
    let mut best_mag = m[from][col].abs().to_f64();
    for (r, row) in m.iter().enumerate().skip(from + 1) {
        let mag = row[col].abs().to_f64();
        if mag > best_mag {
            best = r;
            best_mag = mag;
        }
    }
    best
}

fn pivot_negligible<S: Scalar>(pivot: &S, scale: f64) -> bool {
    if S::EXACT {
        pivot.is_zero()
    } else {
        pivot.abs().to_f64() <= FLOAT_PIVOT_EPS * scale.max(1.0)
    }
}

fn max_abs<S: Scalar>(m: &[Vec<S>]) -> f64 {
    m.iter()
        .flat_map(|row| row.iter())
        .map(|x| x.abs().to_f64())
        .fold(0.0, f64::max)
}

/// Inverts a square matrix by Gauss-Jordan elimination with partial pivoting.
pub(crate) fn invert<S: Scalar>(a: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
    let n = a.len();
    let scale = max_abs(a);
    let mut m: Vec<Vec<S>> = a.to_vec();
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { S::one() } else { S::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = pivot_row(&m, col, col);
        if pivot_negligible(&m[p][col], scale) {
            return Err(Error::SingularSystem);
        }
        m.swap(col, p);
        inv.swap(col, p);
        let pivot = m[col][col].clone();
        for j in 0..n {
            m[col][j] = m[col][j].clone() / pivot.clone();
            inv[col][j] = inv[col][j].clone() / pivot.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for j in 0..n {
                m[r][j] = m[r][j].clone() - factor.clone() * m[col][j].clone();
                inv[r][j] = inv[r][j].clone() - factor.clone() * inv[col][j].clone();
            }
        }
    }
    Ok(inv)
}

/// Solves `a x = b` for a square system.
pub(crate) fn solve<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Result<Vec<S>> {
    let n = a.len();
    let scale = max_abs(a);
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b.iter())
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = pivot_row(&m, col, col);
        if pivot_negligible(&m[p][col], scale) {
            return Err(Error::SingularSystem);
        }
        m.swap(col, p);
        let pivot = m[col][col].clone();
        for j in col..=n {
            m[col][j] = m[col][j].clone() / pivot.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for j in col..=n {
                m[r][j] = m[r][j].clone() - factor.clone() * m[col][j].clone();
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Rank by forward elimination over a generic scalar; exact pivots for
/// exact scalars, a fixed relative threshold for floats.
pub(crate) fn rank_generic<S: Scalar>(rows: &[Vec<S>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let scale = max_abs(rows);
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        if rank >= m.len() {
            break;
        }
        let mut best = rank;
        for r in rank + 1..m.len() {
            if m[r][col].abs().to_f64() > m[best][col].abs().to_f64() {
                best = r;
            }
        }
        if pivot_negligible(&m[best][col], scale) {
            continue;
        }
        m.swap(rank, best);
        let pivot = m[rank][col].clone();
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / pivot.clone();
            for j in col..cols {
                m[r][j] = m[r][j].clone() - factor.clone() * m[rank][j].clone();
            }
        }
        rank += 1;
    }
    rank
}

/// Numerical rank by row reduction with a relative pivot threshold.
pub(crate) fn rank_f64(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(Float::abs(*x)));
    if scale == 0.0 {
        return 0;
    }
    let threshold = rel_tol * scale;
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        let mut best = rank;
        for r in rank..m.len() {
            if Float::abs(m[r][col]) > Float::abs(m[best][col]) {
                best = r;
            }
        }
        if rank >= m.len() || Float::abs(m[best][col]) <= threshold {
            continue;
        }
        m.swap(rank, best);
        let pivot = m[rank][col];
        for r in 0..m.len() {
            if r == rank {
                continue;
            }
            let factor = m[r][col] / pivot;
            for j in col..cols {
                m[r][j] -= factor * m[rank][j];
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Least squares via normal equations. Returns the solution and the residual
/// norm `||a x - b||`.
pub(crate) fn lstsq_f64(a: &[Vec<f64>], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut ata = vec![vec![0.0f64; cols]; cols];
    let mut atb = vec![0.0f64; cols];
    for r in 0..rows {
        for i in 0..cols {
            atb[i] += a[r][i] * b[r];
            for j in 0..cols {
                ata[i][j] += a[r][i] * a[r][j];
            }
        }
    }
    let x = solve(&ata, &atb)?;
    let mut residual_sq = 0.0;
    for r in 0..rows {
        let mut acc = -b[r];
        for j in 0..cols {
            acc += a[r][j] * x[j];
        }
        residual_sq += acc * acc;
    }
    Ok((x, Float::sqrt(residual_sq)))
}

/// Dominant eigenpair of a small symmetric matrix by power iteration,
/// started from the coordinate axis with the largest diagonal entry.
pub(crate) fn dominant_eigen_f64(c: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let n = c.len();
    let start = (0..n)
        .max_by(|&i, &j| c[i][i].abs().partial_cmp(&c[j][j].abs()).unwrap())
        .unwrap_or(0);
    let mut v = vec![0.0f64; n];
    v[start] = 1.0;
    let mut lambda = 0.0f64;
    for _ in 0..200 {
        let mut w = vec![0.0f64; n];
        for i in 0..n {
            for j in 0..n {
                w[i] += c[i][j] * v[j];
            }
        }
        let norm = Float::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            return Err(Error::SingularSystem);
        }
        for x in &mut w {
            *x /= norm;
        }
        let mut next = 0.0;
        for i in 0..n {
            for j in 0..n {
                next += w[i] * c[i][j] * w[j];
            }
        }
        let done = Float::abs(next - lambda) <= 1e-15 * Float::abs(next).max(1.0);
        v = w;
        lambda = next;
        if done {
            break;
        }
    }
    Ok((lambda, v))
}
