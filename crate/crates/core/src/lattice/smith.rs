//! Smith normal form of square integer matrices with unimodular transforms.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::linalg::{identity_z, ZMatrix};
use crate::rational::Integer;

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal,
/// `d_1 | d_2 | … `, all `d_i ≥ 0`, zeros last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: ZMatrix,
    pub v: ZMatrix,
    pub d: ZMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<Integer> {
        (0..self.d.len()).map(|i| self.d[i][i].clone()).collect()
    }

    /// Product of the invariant factors, i.e. `|det A|`.
    pub fn invariant_product(&self) -> Integer {
        self.diagonal().iter().product()
    }
}

struct Work {
    a: ZMatrix,
    u: ZMatrix,
    v: ZMatrix,
    n: usize,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.u.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(i, j);
        }
    }

    /// row_i += k · row_j
    fn add_row(&mut self, i: usize, j: usize, k: &Integer) {
        for c in 0..self.n {
            let t = &self.a[j][c] * k;
            self.a[i][c] += t;
            let t = &self.u[j][c] * k;
            self.u[i][c] += t;
        }
    }

    /// col_i += k · col_j
    fn add_col(&mut self, i: usize, j: usize, k: &Integer) {
        for r in 0..self.n {
            let t = &self.a[r][j] * k;
            self.a[r][i] += t;
            let t = &self.v[r][j] * k;
            self.v[r][i] += t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.n {
            self.a[i][c] = -self.a[i][c].clone();
            self.u[i][c] = -self.u[i][c].clone();
        }
    }

    /// Position of the smallest nonzero |entry| in the trailing block.
    fn min_entry(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for r in k..self.n {
            for c in k..self.n {
                if self.a[r][c].is_zero() {
                    continue;
                }
                if best.is_none_or(|(br, bc)| self.a[r][c].abs() < self.a[br][bc].abs()) {
                    best = Some((r, c));
                }
            }
        }
        best
    }

    fn reduce_block(&mut self, k: usize) -> bool {
        let Some((r, c)) = self.min_entry(k) else {
            return false;
        };
        self.swap_rows(k, r);
        self.swap_cols(k, c);
        loop {
            let mut dirty = false;
            for r in k + 1..self.n {
                if self.a[r][k].is_zero() {
                    continue;
                }
                let q = self.a[r][k].div_floor(&self.a[k][k]);
                self.add_row(r, k, &-q);
                if !self.a[r][k].is_zero() {
                    self.swap_rows(k, r);
                    dirty = true;
                }
            }
            for c in k + 1..self.n {
                if self.a[k][c].is_zero() {
                    continue;
                }
                let q = self.a[k][c].div_floor(&self.a[k][k]);
                self.add_col(c, k, &-q);
                if !self.a[k][c].is_zero() {
                    self.swap_cols(k, c);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // pivot must divide the whole trailing block
            let offender = (k + 1..self.n)
                .flat_map(|r| (k + 1..self.n).map(move |c| (r, c)))
                .find(|&(r, c)| !self.a[r][c].is_multiple_of(&self.a[k][k]));
            match offender {
                Some((r, _)) => self.add_row(k, r, &Integer::one()),
                None => break,
            }
        }
        if self.a[k][k].is_negative() {
            self.negate_row(k);
        }
        true
    }
}

pub fn smith(a: &[Vec<Integer>]) -> SmithDecomposition {
    let n = a.len();
    let mut w = Work {
        a: a.to_vec(),
        u: identity_z(n),
        v: identity_z(n),
        n,
    };
    for k in 0..n {
        if !w.reduce_block(k) {
            break;
        }
    }
    SmithDecomposition {
        u: w.u,
        v: w.v,
        d: w.a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{det_z, from_i64, mul_z};

    fn check(a: &[Vec<i64>]) -> SmithDecomposition {
        let a = from_i64(a);
        let s = smith(&a);
        assert_eq!(mul_z(&mul_z(&s.u, &a), &s.v), s.d);
        assert!(det_z(&s.u).abs().is_one());
        assert!(det_z(&s.v).abs().is_one());
        let diag = s.diagonal();
        for i in 0..diag.len() {
            for j in 0..diag.len() {
                if i != j {
                    assert!(s.d[i][j].is_zero());
                }
            }
            assert!(!diag[i].is_negative());
            if i + 1 < diag.len() && !diag[i + 1].is_zero() {
                assert!(diag[i + 1].is_multiple_of(&diag[i]));
            }
        }
        assert_eq!(s.invariant_product(), det_z(&a).abs());
        s
    }

    #[test]
    fn identity_is_fixed() {
        let s = check(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(s.u, identity_z(3));
        assert_eq!(s.v, identity_z(3));
    }

    #[test]
    fn two_one_one_two() {
        let s = check(&[vec![2, 1], vec![1, 2]]);
        assert_eq!(s.diagonal(), vec![1.into(), 3.into()]);
    }

    #[test]
    fn already_smith() {
        let s = check(&[vec![2, 0], vec![0, 4]]);
        assert_eq!(s.diagonal(), vec![2.into(), 4.into()]);
    }

    #[test]
    fn non_divisible_diagonal_is_fixed() {
        let s = check(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(s.diagonal(), vec![1.into(), 6.into()]);
    }

    #[test]
    fn singular_matrices() {
        let s = check(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(s.diagonal(), vec![1.into(), 0.into()]);
        let s = check(&[vec![0, 0], vec![0, 0]]);
        assert_eq!(s.diagonal(), vec![0.into(), 0.into()]);
    }
}
