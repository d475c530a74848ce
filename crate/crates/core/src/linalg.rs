//! Exact linear algebra over the rationals: reduced row echelon form,
//! particular solutions, canonical null-space bases and determinants.
//!
//! Matrices are dense `Vec<Vec<Rational>>`; everything here is desk scale
//! (orders well below a hundred), so plain fraction arithmetic is fine.

use crate::rational::Rational;
use num_traits::{One, Zero};

pub type Matrix = Vec<Vec<Rational>>;

/// In-place reduced row echelon form. Returns the pivot column of each of the
/// leading rows, in order.
pub fn rref(a: &mut Matrix) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].clone();
        for c in col..cols {
            let v = &a[row][c] / &inv;
            a[row][c] = v;
        }
        for r in 0..rows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..cols {
                    let v = &a[r][c] - &f * &a[row][c];
                    a[r][c] = v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Solves `A x = b` exactly. Returns the particular solution with all free
/// variables set to zero, or `None` if the system is inconsistent.
pub fn solve(a: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None; // pivot in the constants column
    }
    let mut x = vec![Rational::zero(); cols];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = aug[r][cols].clone();
    }
    Some(x)
}

/// Canonical null-space basis from the RREF: one vector per free column, unit
/// at that column, ordered by ascending free-column index.
pub fn null_space(a: &Matrix) -> Vec<Vec<Rational>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![Rational::zero(); cols];
        v[f] = Rational::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -m[r][f].clone();
        }
        basis.push(v);
    }
    basis
}

/// Exact determinant by Gaussian elimination with row swaps.
pub fn determinant(a: &Matrix) -> Rational {
    let n = a.len();
    if n == 0 {
        return Rational::one();
    }
    debug_assert!(a.iter().all(|r| r.len() == n));
    let mut m = a.clone();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            m.swap(col, p);
            det = -det;
        }
        det *= &m[col][col].clone();
        let inv = m[col][col].clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &inv;
            for c in col..n {
                let v = &m[r][c] - &f * &m[col][c];
                m[r][c] = v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_i64};

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter()
            .map(|r| r.iter().map(|&v| rat_i64(v)).collect())
            .collect()
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(determinant(&m(&[&[1, 2], &[1, 3]])), rat_i64(1));
        assert_eq!(determinant(&m(&[&[1, 2], &[2, 4]])), rat_i64(0));
        assert_eq!(
            determinant(&m(&[&[2, 0, 1], &[1, 1, 0], &[0, 3, 1]])),
            rat_i64(5)
        );
        assert_eq!(determinant(&Vec::new()), rat_i64(1));
    }

    #[test]
    fn solve_unique_and_inconsistent() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let b = vec![rat_i64(3), rat_i64(1)];
        assert_eq!(solve(&a, &b).unwrap(), vec![rat_i64(2), rat_i64(1)]);

        let a = m(&[&[1, 1], &[2, 2]]);
        let b = vec![rat_i64(1), rat_i64(3)];
        assert!(solve(&a, &b).is_none());
    }

    #[test]
    fn solve_underdetermined_zeroes_free_vars() {
        let a = m(&[&[1, 2, 0]]);
        let b = vec![rat_i64(5)];
        assert_eq!(
            solve(&a, &b).unwrap(),
            vec![rat_i64(5), rat_i64(0), rat_i64(0)]
        );
    }

    #[test]
    fn null_space_is_canonical() {
        // x + 2y + 3z = 0 has two free columns (y, z).
        let a = m(&[&[1, 2, 3]]);
        let ns = null_space(&a);
        assert_eq!(ns.len(), 2);
        assert_eq!(ns[0], vec![rat_i64(-2), rat_i64(1), rat_i64(0)]);
        assert_eq!(ns[1], vec![rat_i64(-3), rat_i64(0), rat_i64(1)]);
        // Every basis vector really lies in the kernel.
        for v in &ns {
            let dot: Rational = (0..3).map(|i| &a[0][i] * &v[i]).sum();
            assert!(dot == rat(0, 1));
        }
    }
}
