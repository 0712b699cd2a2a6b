//! Exact rational linear algebra on small dense matrices.
//!
//! Everything here works over `BigRational`; no floating point is involved,
//! so signatures, ranks and solution sets are decided exactly. Matrix sizes
//! in this crate are tiny (at most a few hundred rows for jet-space
//! projections), so plain Gaussian elimination is entirely adequate.

use num::{BigRational, Signed, Zero};

/// Determinant by fraction-free-ish Gaussian elimination (plain division is
/// fine over the rationals).
pub fn det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut sign = 1i64;
    let mut acc = BigRational::from_integer(1.into());
    for col in 0..n {
        let Some(pivot_row) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot_row != col {
            a.swap(pivot_row, col);
            sign = -sign;
        }
        let pivot = a[col][col].clone();
        acc *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &pivot;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    if sign < 0 {
        -acc
    } else {
        acc
    }
}

/// Inertia `(positive, negative, zero)` of a symmetric matrix, computed by
/// exact congruence diagonalization (Sylvester's law of inertia).
pub fn signature(m: &[Vec<BigRational>]) -> (usize, usize, usize) {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut pos = 0usize;
    let mut neg = 0usize;
    let mut zero = 0usize;
    for k in 0..n {
        if a[k][k].is_zero() {
            // Try to bring a nonzero entry onto the diagonal: first by a
            // symmetric swap, then by the congruence row_k += row_j (which
            // makes the diagonal entry 2*a[k][j] when a[j][j] = 0).
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                for c in 0..n {
                    let add = a[j][c].clone();
                    a[k][c] += add;
                }
                for r in 0..n {
                    let add = a[r][j].clone();
                    a[r][k] += add;
                }
            } else {
                zero += 1;
                continue;
            }
        }
        let pivot = a[k][k].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let factor = &a[r][k] / &pivot;
            // Congruence: clear row r and column r simultaneously.
            for c in 0..n {
                let sub = &factor * &a[k][c];
                a[r][c] -= sub;
            }
            for rr in 0..n {
                let sub = &factor * a[rr][k].clone();
                a[rr][r] -= sub;
            }
        }
        for c in 0..n {
            if c != k {
                a[k][c] = BigRational::zero();
                a[c][k] = BigRational::zero();
            }
        }
    }
    (pos, neg, zero)
}

/// One particular solution of `A x = b` (free variables set to zero), or
/// `None` when the system is inconsistent. `A` need not be square.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = a.len();
    assert_eq!(rows, b.len(), "row count mismatch");
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols, "ragged matrix");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let pivot = m[row][col].clone();
        for c in col..=cols {
            m[row][c] = &m[row][c] / &pivot;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=cols {
                    let sub = &factor * &m[row][c];
                    m[r][c] -= sub;
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    // Inconsistency: a zero row with nonzero right-hand side.
    for r in row..rows {
        if !m[r][cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRational::zero(); cols];
    for (r, &c) in pivot_cols.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    Some(x)
}
