//! Dense exact linear algebra over `Q` and `Z`, sized for `g ≤ 8`.

use num_traits::{One, Signed, Zero};

use crate::rational::{Integer, Rational};

pub type QMatrix = Vec<Vec<Rational>>;
pub type ZMatrix = Vec<Vec<Integer>>;

pub fn identity_q(n: usize) -> QMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

pub fn identity_z(n: usize) -> ZMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Integer::one() } else { Integer::zero() })
                .collect()
        })
        .collect()
}

pub fn to_q(m: &ZMatrix) -> QMatrix {
    m.iter()
        .map(|row| row.iter().map(|z| Rational::from_integer(z.clone())).collect())
        .collect()
}

pub fn from_i64(m: &[Vec<i64>]) -> ZMatrix {
    m.iter()
        .map(|row| row.iter().map(|&v| Integer::from(v)).collect())
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mul_q(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> QMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(Rational::zero(), |acc, k| acc + &row[k] * &b[k][j])
                })
                .collect()
        })
        .collect()
}

pub fn mul_z(a: &[Vec<Integer>], b: &[Vec<Integer>]) -> ZMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(Integer::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn mat_vec_q(a: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

pub fn dot_q(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_symmetric<T: PartialEq>(m: &[Vec<T>]) -> bool {
    (0..m.len()).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

/// Determinant by Gaussian elimination over `Q`.
pub fn det_q(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: QMatrix = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det
}

/// Determinant of an integer matrix (Bareiss, fraction free).
pub fn det_z(m: &[Vec<Integer>]) -> Integer {
    let n = m.len();
    if n == 0 {
        return Integer::one();
    }
    let mut a: ZMatrix = m.to_vec();
    let mut sign = Integer::one();
    let mut prev = Integer::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return Integer::zero();
            };
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

pub fn inverse_q(m: &[Vec<Rational>]) -> Option<QMatrix> {
    let n = m.len();
    let mut a: QMatrix = m.to_vec();
    let mut inv = identity_q(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let p = a[col][col].clone();
        for c in 0..n {
            a[col][c] /= &p;
            inv[col][c] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
                let t = &f * &inv[col][c];
                inv[r][c] -= t;
            }
        }
    }
    Some(inv)
}

/// Inverse of a unimodular integer matrix, `None` if `|det| != 1`.
pub fn inverse_unimodular(m: &[Vec<Integer>]) -> Option<ZMatrix> {
    if !det_z(m).abs().is_one() {
        return None;
    }
    let inv = inverse_q(&to_q(&m.to_vec()))?;
    Some(
        inv.into_iter()
            .map(|row| row.into_iter().map(|q| q.to_integer()).collect())
            .collect(),
    )
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let pv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x /= &pv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_q(m: &[Vec<Rational>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Basis of the null space `{x : m x = 0}`.
pub fn null_space(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -a[row][f].clone();
            }
            v
        })
        .collect()
}

/// Solves `a x = b` for square nonsingular `a`.
pub fn solve_q(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: QMatrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.contains(&n) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n].clone()).collect())
}

pub fn leading_principal_minors(m: &[Vec<Rational>]) -> Vec<Rational> {
    (1..=m.len())
        .map(|k| {
            let sub: QMatrix = m[..k].iter().map(|row| row[..k].to_vec()).collect();
            det_q(&sub)
        })
        .collect()
}

/// Sylvester's criterion; `m` must be symmetric.
pub fn is_positive_definite(m: &[Vec<Rational>]) -> bool {
    leading_principal_minors(m).iter().all(Signed::is_positive)
}

/// All principal minors nonnegative; `m` must be symmetric.
pub fn is_positive_semidefinite(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    (1u32..(1u32 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: QMatrix = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect())
            .collect();
        !det_q(&sub).is_negative()
    })
}

/// `(a v, w)` for a rational matrix and two vectors.
pub fn bilinear(a: &[Vec<Rational>], v: &[Rational], w: &[Rational]) -> Rational {
    dot_q(&mat_vec_q(a, v), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn q(rows: &[&[i64]]) -> QMatrix {
        rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect()
    }

    #[test]
    fn determinants_agree() {
        let m = [[2, 1, 0], [1, 3, -1], [4, 0, 5]];
        let zm: ZMatrix = m.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        let qm = to_q(&zm);
        // 2·15 − 1·(5+4) + 0 = 21
        assert_eq!(det_z(&zm), int(21));
        assert_eq!(det_q(&qm), rat(21));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = q(&[&[2, 1], &[1, 2]]);
        let inv = inverse_q(&m).unwrap();
        assert_eq!(mul_q(&m, &inv), identity_q(2));
        assert!(inverse_q(&q(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn sylvester_and_psd() {
        assert!(is_positive_definite(&q(&[&[2, -1], &[-1, 2]])));
        assert!(!is_positive_definite(&q(&[&[1, 2], &[2, 1]])));
        assert!(is_positive_semidefinite(&q(&[&[1, 1], &[1, 1]])));
        assert!(!is_positive_definite(&q(&[&[1, 1], &[1, 1]])));
        // leading minors of [[0,0],[0,-1]] are 0, 0 but it is not PSD
        assert!(!is_positive_semidefinite(&q(&[&[0, 0], &[0, -1]])));
    }

    #[test]
    fn null_space_is_annihilated() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = null_space(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(mat_vec_q(&m, &v).iter().all(Zero::is_zero));
        }
    }
}
