//! Exact nullspaces over ℚ by reduced row echelon form.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Reduces `rows` in place to reduced row echelon form and returns the
/// pivot columns. Pivots are taken left to right, so the result depends
/// only on the column order.
pub fn rref(rows: &mut Vec<Vec<BigRational>>, ncols: usize) -> Vec<usize> {
    rows.retain(|r| r.iter().any(|v| !v.is_zero()));
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for v in rows[r].iter_mut().skip(col) {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// A basis of `{v : A v = 0}`, one vector per free column, with that free
/// entry equal to 1.
pub fn nullspace(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect()
    }

    fn apply(a: &[Vec<BigRational>], v: &[BigRational]) -> Vec<BigRational> {
        a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
    }

    #[test]
    fn rank_deficient_matrix() {
        let a = mat(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let ns = nullspace(&a, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(apply(&a, v).iter().all(|x| x.is_zero()));
        }
        // free columns 2 and 3: v = (-1, -1, 1, 0), (-4, 0, 0, 1)
        assert_eq!(ns[0], vec![q(-1, 1), q(-1, 1), q(1, 1), q(0, 1)]);
        assert_eq!(ns[1], vec![q(-4, 1), q(0, 1), q(0, 1), q(1, 1)]);
    }

    #[test]
    fn full_rank_and_empty() {
        let a = mat(&[&[1, 0], &[0, 3]]);
        assert!(nullspace(&a, 2).is_empty());
        assert_eq!(nullspace(&[], 3).len(), 3);
    }

    #[test]
    fn rational_entries() {
        let a = vec![vec![q(1, 2), q(1, 3)], vec![q(3, 2), q(1, 1)]];
        let ns = nullspace(&a, 2);
        assert_eq!(ns, vec![vec![q(-2, 3), q(1, 1)]]);
    }
}
