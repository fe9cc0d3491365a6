//! Exterior-power helpers: index subsets, Plücker coordinates and Gram-determinant norms.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;

use crate::arith::matrix::int_det;

/// All k-subsets of {0..n} in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Lexicographic rank of a sorted subset among all subsets of the same size.
pub fn subset_rank(n: usize, s: &[usize]) -> usize {
    let k = s.len();
    let mut rank = 0;
    let mut prev = 0;
    for (i, &x) in s.iter().enumerate() {
        for y in prev..x {
            rank += binom(n - y - 1, k - i - 1);
        }
        prev = x + 1;
    }
    rank
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Columns of `b` indexed by `cols`.
pub fn select_columns(b: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(b.nrows(), cols.len(), |i, j| b[(i, cols[j])])
}

/// ‖b_{c₁} ∧ … ∧ b_{c_k}‖, i.e. √det Gram, computed as |∏ R_ii| from a QR factorization
/// so that sheared columns like (1,0), (10⁸,1) keep full relative accuracy.
pub fn gram_norm(b: &DMatrix<f64>, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return 1.0;
    }
    let r = select_columns(b, cols).qr().unpack_r();
    (0..cols.len()).map(|i| r[(i, i)].abs()).product()
}

/// Hermitian analogue of [`gram_norm`].
pub fn gram_norm_complex(b: &DMatrix<Complex64>, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return 1.0;
    }
    let m = DMatrix::from_fn(b.nrows(), cols.len(), |i, j| b[(i, cols[j])]);
    let r = m.qr().unpack_r();
    (0..cols.len()).map(|i| r[(i, i)].norm()).product()
}

/// Plücker coordinates of the columns of an n×k matrix (k×k row minors, lexicographic).
pub fn plucker(m: &DMatrix<f64>) -> Vec<f64> {
    let (n, k) = m.shape();
    subsets(n, k)
        .iter()
        .map(|rows| DMatrix::from_fn(k, k, |i, j| m[(rows[i], j)]).determinant())
        .collect()
}

/// Exact Plücker coordinates of integer column vectors (each of length n).
pub fn plucker_int(columns: &[Vec<BigInt>]) -> Vec<BigInt> {
    let k = columns.len();
    let n = columns.first().map_or(0, Vec::len);
    subsets(n, k)
        .iter()
        .map(|rows| {
            let entries: Vec<BigInt> = rows
                .iter()
                .flat_map(|&r| columns.iter().map(move |c| c[r].clone()))
                .collect();
            int_det(k, &entries)
        })
        .collect()
}
