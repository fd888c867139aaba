//! Small exact linear algebra helpers over the rationals: rank, nullspaces,
//! congruence diagonalization of symmetric matrices, and leading principal
//! minors. Matrices are dense `Vec<Vec<Rat>>`, which is plenty at s <= 20.

use num_traits::{One, Zero};

use crate::lattice::Rat;

pub type Matrix = Vec<Vec<Rat>>;

/// Row-reduces a copy of `rows` and returns its rank.
pub fn rank(rows: &[Vec<Rat>]) -> usize {
    let mut a: Matrix = rows.to_vec();
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pivot = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..nrows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for c2 in 0..ncols {
                    let t = &a[r][c2] * &f;
                    a[i][c2] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

/// Basis of the solution space `{x in Q^n : row . x = 0 for every row}`.
pub fn nullspace(rows: &[Vec<Rat>], n: usize) -> Vec<Vec<Rat>> {
    let mut a: Matrix = rows.iter().map(|r| {
        assert_eq!(r.len(), n);
        r.clone()
    }).collect();
    let nrows = a.len();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pivot = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..nrows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for c2 in 0..n {
                    let t = &a[r][c2] * &f;
                    a[i][c2] -= t;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut v = vec![Rat::zero(); n];
        v[fc] = Rat::one();
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a[row][fc].clone();
        }
        basis.push(v);
    }
    basis
}

/// Congruence diagonalization of a symmetric matrix: returns `(p, diag)` with
/// `p * g * p^T = diag(diag)`. Rows of `p` express the diagonalizing basis in
/// the original coordinates.
pub fn symmetric_diagonalize(g: &Matrix) -> (Matrix, Vec<Rat>) {
    let n = g.len();
    let mut a = g.clone();
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n);
        for j in 0..n {
            assert_eq!(row[j], g[j][i], "matrix must be symmetric");
        }
    }
    let mut p: Matrix = (0..n)
        .map(|i| {
            let mut row = vec![Rat::zero(); n];
            row[i] = Rat::one();
            row
        })
        .collect();

    // symmetric row+column operation: row_i += f * row_j, col_i += f * col_j
    fn sym_add(a: &mut Matrix, p: &mut Matrix, i: usize, j: usize, f: &Rat) {
        let n = a.len();
        for c in 0..n {
            let t = &a[j][c] * f;
            a[i][c] += t;
        }
        for r in 0..n {
            let t = &a[r][j] * f;
            a[r][i] += t;
        }
        for c in 0..n {
            let t = &p[j][c] * f;
            p[i][c] += t;
        }
    }
    fn sym_swap(a: &mut Matrix, p: &mut Matrix, i: usize, j: usize) {
        a.swap(i, j);
        let n = a.len();
        for r in 0..n {
            a[r].swap(i, j);
        }
        p.swap(i, j);
    }

    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(l) = (k + 1..n).find(|&l| !a[l][l].is_zero()) {
                sym_swap(&mut a, &mut p, k, l);
            } else if let Some((i, j)) = (k..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_zero())
            {
                // all remaining diagonal entries are zero; a[i][j] != 0,
                // so row/col i += row/col j makes a[i][i] = 2 a[i][j] != 0
                sym_add(&mut a, &mut p, i, j, &Rat::one());
                if i != k {
                    sym_swap(&mut a, &mut p, k, i);
                }
            } else {
                break; // remaining block is zero
            }
        }
        let pivot = a[k][k].clone();
        for l in k + 1..n {
            if !a[l][k].is_zero() {
                let f = -(&a[l][k] / &pivot);
                sym_add(&mut a, &mut p, l, k, &f);
            }
        }
    }
    let diag = (0..n).map(|i| a[i][i].clone()).collect();
    (p, diag)
}

/// Determinant by fraction-free-ish Gaussian elimination (exact rationals).
pub fn determinant(g: &Matrix) -> Rat {
    let n = g.len();
    let mut a = g.clone();
    let mut det = Rat::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return Rat::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let pivot = a[k][k].clone();
        det *= &pivot;
        for i in k + 1..n {
            if !a[i][k].is_zero() {
                let f = &a[i][k] / &pivot;
                for j in k..n {
                    let t = &a[k][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
    }
    det
}

/// Determinants of the leading principal `k x k` blocks, `k = 1..=n`.
pub fn leading_principal_minors(g: &Matrix) -> Vec<Rat> {
    let n = g.len();
    (1..=n)
        .map(|k| {
            let block: Matrix = g[..k].iter().map(|row| row[..k].to_vec()).collect();
            determinant(&block)
        })
        .collect()
}
