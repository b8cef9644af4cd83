//! Small dense complex linear algebra used by charts, pullbacks and norms.

use nalgebra::DMatrix;

use crate::C64;

pub type CMatrix = DMatrix<C64>;

/// Determinant of a square complex matrix; `1` for the empty matrix.
pub fn det(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    match m.nrows() {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.clone().lu().determinant(),
    }
}

/// Determinant of the submatrix with the given rows and columns.
pub fn minor(m: &CMatrix, rows: &[usize], cols: &[usize]) -> C64 {
    debug_assert_eq!(rows.len(), cols.len());
    let sub = CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    det(&sub)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn numerical_rank(m: &CMatrix, rel_threshold: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&v| v > rel_threshold * smax).count(),
        _ => 0,
    }
}

/// Hermitian Gram matrix `JᴴJ`.
pub fn gram(j: &CMatrix) -> CMatrix {
    j.adjoint() * j
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    m.clone().try_inverse()
}

pub fn solve(a: &CMatrix, b: &[C64]) -> Option<Vec<C64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    a.clone().lu().solve(&rhs).map(|v| v.iter().copied().collect())
}

pub fn norm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    'outer: loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 {
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                continue 'outer;
            }
        }
        return out;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(combinations(3, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn det_small() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(3.0, 0.0),
            ],
        );
        assert!((det(&m) - C64::new(6.0, 0.0)).norm() < 1e-12);
    }
}
