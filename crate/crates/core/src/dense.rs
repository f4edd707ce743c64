//! Dense linear-algebra oracles: brute-force references for the banded
//! solver, small enough to trust by inspection.

use crate::domain::LatticeDomain;

/// Dense interior Laplacian of a lattice domain (diag 4, −1 per edge).
pub fn dense_laplacian(dom: &LatticeDomain) -> Vec<Vec<f64>> {
    let n = dom.interior_count();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 4.0;
    }
    for &(x, y) in dom.edges() {
        if (y as usize) < n {
            a[x as usize][y as usize] = -1.0;
            a[y as usize][x as usize] = -1.0;
        }
    }
    a
}

/// Gauss-Jordan inverse (reference oracle only; O(n³)).
pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        inv[i][i] = 1.0;
    }
    for col in 0..n {
        // partial pivot
        let piv_row = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv_row);
        inv.swap(col, piv_row);
        let piv = m[col][col];
        for j in 0..n {
            m[col][j] /= piv;
            inv[col][j] /= piv;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m[row][j] -= f * m[col][j];
                    inv[row][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}
