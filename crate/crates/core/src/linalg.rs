//! Exact dense Gaussian elimination over the rationals.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::rational::{Point, Rational};

/// Reduced row echelon form of an augmented system `[A | b]`.
struct Echelon {
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

fn rref(mut rows: Vec<Vec<Rational>>, cols: usize) -> Echelon {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in 0..rows[i].len() {
                    let delta = &f * &rows[r][k];
                    rows[i][k] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    Echelon { rows, pivots }
}

pub fn rank(rows: &[Vec<Rational>], cols: usize) -> usize {
    rref(rows.to_vec(), cols).pivots.len()
}

/// Solves `A x = b` when the solution exists and is unique.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational], cols: usize) -> Option<Point> {
    let aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let ech = rref(aug, cols);
    if ech.pivots.len() != cols {
        return None;
    }
    // inconsistent rows are all-zero on the left with a nonzero right side
    if ech.rows[cols..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|i| ech.rows[i][cols].clone()).collect())
}

/// Basis of the null space `{x : A x = 0}`.
pub fn null_space(a: &[Vec<Rational>], cols: usize) -> Vec<Point> {
    let ech = rref(a.to_vec(), cols);
    let free: Vec<usize> = (0..cols).filter(|c| !ech.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = alloc::vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &pc) in ech.pivots.iter().enumerate() {
                v[pc] = -ech.rows[row][f].clone();
            }
            v
        })
        .collect()
}

/// Calls `visit` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, int_point, ratio};

    #[test]
    fn unique_solution() {
        let a = alloc::vec![int_point(&[2, 1]), int_point(&[1, 3])];
        let x = solve_unique(&a, &int_point(&[3, 5]), 2).unwrap();
        assert_eq!(x, alloc::vec![ratio(4, 5), ratio(7, 5)]);
        let singular = alloc::vec![int_point(&[1, 1]), int_point(&[2, 2])];
        assert!(solve_unique(&singular, &int_point(&[1, 2]), 2).is_none());
    }

    #[test]
    fn overdetermined_consistency() {
        let a = alloc::vec![int_point(&[1, 0]), int_point(&[0, 1]), int_point(&[1, 1])];
        assert!(solve_unique(&a, &int_point(&[1, 1, 2]), 2).is_some());
        assert!(solve_unique(&a, &int_point(&[1, 1, 3]), 2).is_none());
    }

    #[test]
    fn kernel() {
        let a = alloc::vec![int_point(&[1, 1, 0])];
        let ns = null_space(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert_eq!(crate::rational::dot(&a[0], v), int(0));
        }
    }

    #[test]
    fn subsets() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], alloc::vec![0, 1]);
        assert_eq!(seen[5], alloc::vec![2, 3]);
        let mut count = 0;
        for_each_subset(3, 0, |_| count += 1);
        assert_eq!(count, 1);
        for_each_subset(2, 3, |_| panic!());
    }
}
