//! The modified Euler characteristic.
//!
//! For a cell `C` write `K` for `C` with every strict inequality relaxed and
//! `H_s` for the hyperplane of a strict constraint `s`. Then
//! `C ∩ B = (K ∩ B) ∖ ⋃_s H_s` for a closed box `B`, and since every
//! `K ∩ B ∩ H_T` is compact and convex,
//!
//! `χ(C ∩ B) = Σ_{T ⊆ strict} (−1)^{|T|} [K ∩ B ∩ H_T ≠ ∅]`.
//!
//! Each indicator is monotone in the box size and reaches its final value
//! once the box contains one point of `K ∩ H_T`, so the truncation is
//! evaluated beyond both the size bound computed from the constraint data
//! and the coordinates of such points.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::fm::{self, Kind, LinCon};
use super::{Cell, DefinableSet};
use crate::error::{Error, Result};
use crate::rational::{ceil, serde_integer, Integer, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChiEvaluation {
    #[serde(with = "serde_integer")]
    pub value: Integer,
    #[serde(with = "serde_integer")]
    pub l_small: Integer,
    #[serde(with = "serde_integer")]
    pub l_large: Integer,
}

struct Split {
    closed: Vec<LinCon>,
    strict: Vec<LinCon>,
}

fn split(cell: &Cell) -> Split {
    let mut closed = Vec::new();
    let mut strict = Vec::new();
    for l in cell.lincons() {
        if l.kind == Kind::Lt {
            closed.push(LinCon::new(l.a.clone(), l.b.clone(), Kind::Le));
            strict.push(LinCon::new(l.a, l.b, Kind::Eq));
        } else {
            closed.push(l);
        }
    }
    Split { closed, strict }
}

fn box_constraints(n: usize, l: &Rational) -> Vec<LinCon> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut a = vec![Rational::zero(); n];
        a[i] = Rational::one();
        out.push(LinCon::new(a.clone(), l.clone(), Kind::Le));
        a[i] = -Rational::one();
        out.push(LinCon::new(a, l.clone(), Kind::Le));
    }
    out
}

/// Runs `visit` on every nonempty `K ∩ H_T` (with `base` in place of `K`),
/// passing `|T|` and a witness. Supersets of an empty intersection are
/// skipped.
fn walk(n: usize, base: &[LinCon], strict: &[LinCon], visit: &mut impl FnMut(usize, &[Rational])) {
    fn rec(
        n: usize,
        cur: &mut Vec<LinCon>,
        strict: &[LinCon],
        start: usize,
        depth: usize,
        point: &[Rational],
        visit: &mut impl FnMut(usize, &[Rational]),
    ) {
        visit(depth, point);
        for s in start..strict.len() {
            cur.push(strict[s].clone());
            if let Some(p) = fm::witness(n, cur.clone()) {
                rec(n, cur, strict, s + 1, depth + 1, &p, visit);
            }
            cur.pop();
        }
    }
    let mut cur = base.to_vec();
    if let Some(p) = fm::witness(n, cur.clone()) {
        rec(n, &mut cur, strict, 0, 0, &p, visit);
    }
}

fn cell_chi_in_box(cell: &Cell, l: &Rational) -> Integer {
    let n = cell.dim();
    let sp = split(cell);
    let mut base = sp.closed;
    base.extend(box_constraints(n, l));
    let mut total = Integer::zero();
    walk(n, &base, &sp.strict, &mut |depth, _| {
        if depth % 2 == 0 {
            total += 1;
        } else {
            total -= 1;
        }
    });
    total
}

/// `χ(S ∩ [−l, l]^n)`.
pub fn chi_truncated(s: &DefinableSet, l: &Rational) -> Integer {
    s.cells().iter().map(|c| cell_chi_in_box(c, l)).sum()
}

/// Largest coordinate of the chosen points of the `K ∩ H_T`.
fn witness_extent(cell: &Cell) -> Rational {
    let sp = split(cell);
    let mut m = Rational::zero();
    walk(cell.dim(), &sp.closed, &sp.strict, &mut |_, p| {
        for v in p {
            if v.abs() > m {
                m = v.abs();
            }
        }
    });
    m
}

fn size_bound(s: &DefinableSet) -> Integer {
    let n = s.dim();
    let mut max_rhs = Rational::zero();
    let mut max_coeff = Integer::zero();
    for cell in s.cells() {
        for c in cell.constraints() {
            if c.rhs().abs() > max_rhs {
                max_rhs = c.rhs().abs();
            }
            for a in c.coeffs() {
                if a.abs() > max_coeff {
                    max_coeff = a.abs();
                }
            }
        }
    }
    let base = Rational::from_integer(Integer::from(n))
        * (Rational::one() + max_rhs)
        * Rational::from_integer(Integer::one() + max_coeff);
    Integer::one() + ceil(&base)
}

pub fn chi_prime_detailed(s: &DefinableSet) -> Result<ChiEvaluation> {
    let mut l = size_bound(s);
    for cell in s.cells() {
        let reach = Integer::one() + ceil(&witness_extent(cell));
        if reach > l {
            l = reach;
        }
    }
    let l_large: Integer = &l * 2 + 1;
    let small = chi_truncated(s, &Rational::from_integer(l.clone()));
    let large = chi_truncated(s, &Rational::from_integer(l_large.clone()));
    if small != large {
        return Err(Error::NonStabilized {
            small: crate::rational::to_i64(&small).unwrap_or(i64::MIN),
            large: crate::rational::to_i64(&large).unwrap_or(i64::MIN),
            l_small: l.to_string(),
            l_large: l_large.to_string(),
        });
    }
    Ok(ChiEvaluation {
        value: small,
        l_small: l,
        l_large,
    })
}

pub fn chi_prime(s: &DefinableSet) -> Result<Integer> {
    chi_prime_detailed(s).map(|e| e.value)
}
