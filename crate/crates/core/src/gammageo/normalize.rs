//! Disjointification of formulas.
//!
//! Every atom contributes its hyperplane. The faces of the arrangement (sign
//! vectors in `{<, =, >}` that are realized) are enumerated depth first, the
//! formula is evaluated at a point of each face, and the resulting truth
//! table is compressed level by level: at each hyperplane the three sign
//! branches are merged whenever the rest of the table does not depend on the
//! choice, preferring a full merge, then `≥`, then `≤`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::fm::{self, Kind, LinCon};
use super::{sorted, Cell, Constraint, DefinableSet, Formula, Rel};
use crate::error::Result;
use crate::rational::{Integer, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Sign {
    Lt,
    Eq,
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pat {
    Any,
    Is(Sign),
    Le,
    Ge,
}

/// `a·x = c` with primitive `a` whose first nonzero entry is positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Hyperplane {
    a: Vec<Integer>,
    c: Rational,
}

impl Hyperplane {
    fn of(c: &Constraint) -> Option<Hyperplane> {
        let lead = c.coeffs().iter().find(|v| !v.is_zero())?;
        let k = if lead.is_negative() { c.mirrored() } else { c.clone() };
        Some(Hyperplane {
            a: k.coeffs().to_vec(),
            c: k.rhs().clone(),
        })
    }

    fn lincon(&self, s: Sign) -> LinCon {
        let a: Vec<Rational> = self.a.iter().map(|v| Rational::from_integer(v.clone())).collect();
        match s {
            Sign::Lt => LinCon::new(a, self.c.clone(), Kind::Lt),
            Sign::Eq => LinCon::new(a, self.c.clone(), Kind::Eq),
            Sign::Gt => LinCon::new(a.into_iter().map(|v| -v).collect(), -self.c.clone(), Kind::Lt),
        }
    }

    fn sign_at(&self, x: &[Rational]) -> Sign {
        let v = self
            .a
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (p, q)| acc + Rational::from_integer(p.clone()) * q);
        match v.cmp(&self.c) {
            std::cmp::Ordering::Less => Sign::Lt,
            std::cmp::Ordering::Equal => Sign::Eq,
            std::cmp::Ordering::Greater => Sign::Gt,
        }
    }

    fn constraint(&self, p: Pat) -> Option<Constraint> {
        let rel = match p {
            Pat::Any => return None,
            Pat::Is(Sign::Lt) => Rel::Lt,
            Pat::Is(Sign::Eq) => Rel::Eq,
            Pat::Is(Sign::Gt) => Rel::Gt,
            Pat::Le => Rel::Le,
            Pat::Ge => Rel::Ge,
        };
        Some(Constraint::new(self.a.clone(), rel, self.c.clone()).canonical())
    }
}

struct Face {
    signs: Vec<Sign>,
    point: Vec<Rational>,
}

fn enumerate_faces(n: usize, planes: &[Hyperplane]) -> Vec<Face> {
    let mut out = Vec::new();
    let Some(start) = fm::witness(n, Vec::new()) else {
        return out;
    };
    let mut signs = Vec::with_capacity(planes.len());
    let mut cons = Vec::with_capacity(planes.len());
    descend(n, planes, &mut signs, &mut cons, start, &mut out);
    out
}

fn descend(
    n: usize,
    planes: &[Hyperplane],
    signs: &mut Vec<Sign>,
    cons: &mut Vec<LinCon>,
    point: Vec<Rational>,
    out: &mut Vec<Face>,
) {
    let i = signs.len();
    if i == planes.len() {
        out.push(Face {
            signs: signs.clone(),
            point,
        });
        return;
    }
    let here = planes[i].sign_at(&point);
    for s in [Sign::Lt, Sign::Eq, Sign::Gt] {
        cons.push(planes[i].lincon(s));
        // the parent's point already realizes its own sign
        let p = if s == here { Some(point.clone()) } else { fm::witness(n, cons.clone()) };
        if let Some(p) = p {
            signs.push(s);
            descend(n, planes, signs, cons, p, out);
            signs.pop();
        }
        cons.pop();
    }
}

type Row<'a> = (&'a [Sign], bool);

fn consistent(groups: &[&Vec<Row<'_>>]) -> bool {
    let mut seen: BTreeMap<&[Sign], bool> = BTreeMap::new();
    for g in groups {
        for (k, v) in g.iter() {
            if let Some(prev) = seen.insert(k, *v) {
                if prev != *v {
                    return false;
                }
            }
        }
    }
    true
}

fn merged<'a>(groups: &[&Vec<Row<'a>>]) -> Vec<Row<'a>> {
    let mut seen: BTreeMap<&[Sign], bool> = BTreeMap::new();
    for g in groups {
        for (k, v) in g.iter() {
            seen.insert(k, *v);
        }
    }
    seen.into_iter().collect()
}

/// Patterns covering exactly the true rows; `rows` are suffixes from the
/// current level on.
fn compress(rows: &[Row<'_>]) -> Vec<Vec<Pat>> {
    if rows.iter().all(|r| r.1) {
        let width = rows.first().map_or(0, |r| r.0.len());
        return if rows.is_empty() { vec![] } else { vec![vec![Pat::Any; width]] };
    }
    if rows.iter().all(|r| !r.1) {
        return vec![];
    }
    let mut by_sign: [Vec<Row<'_>>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (k, v) in rows {
        let idx = match k[0] {
            Sign::Lt => 0,
            Sign::Eq => 1,
            Sign::Gt => 2,
        };
        by_sign[idx].push((&k[1..], *v));
    }
    let [lt, eq, gt] = &by_sign;
    let mut branches: Vec<(Pat, Vec<Row<'_>>)> = Vec::new();
    if consistent(&[lt, eq, gt]) {
        branches.push((Pat::Any, merged(&[lt, eq, gt])));
    } else if consistent(&[eq, gt]) {
        branches.push((Pat::Is(Sign::Lt), lt.clone()));
        branches.push((Pat::Ge, merged(&[eq, gt])));
    } else if consistent(&[lt, eq]) {
        branches.push((Pat::Le, merged(&[lt, eq])));
        branches.push((Pat::Is(Sign::Gt), gt.clone()));
    } else {
        branches.push((Pat::Is(Sign::Lt), lt.clone()));
        branches.push((Pat::Is(Sign::Eq), eq.clone()));
        branches.push((Pat::Is(Sign::Gt), gt.clone()));
    }
    let mut out = Vec::new();
    for (p, sub) in branches {
        for mut tail in compress(&sub) {
            tail.insert(0, p);
            out.push(tail);
        }
    }
    out
}

fn negation(c: &Constraint) -> Vec<LinCon> {
    let l = c.to_lincon();
    let flipped = |kind| LinCon::new(l.a.iter().map(|v| -v).collect(), -l.b.clone(), kind);
    match l.kind {
        Kind::Lt => vec![flipped(Kind::Le)],
        Kind::Le => vec![flipped(Kind::Lt)],
        Kind::Eq => vec![LinCon::new(l.a.clone(), l.b.clone(), Kind::Lt), flipped(Kind::Lt)],
    }
}

/// Drops constraints implied by the others, in order.
fn prune(n: usize, mut cons: Vec<Constraint>) -> Vec<Constraint> {
    let mut i = 0;
    while i < cons.len() {
        let others: Vec<LinCon> = cons
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| c.to_lincon())
            .collect();
        let redundant = negation(&cons[i]).into_iter().all(|neg| {
            let mut sys = others.clone();
            sys.push(neg);
            !fm::feasible(n, sys)
        });
        if redundant {
            cons.remove(i);
        } else {
            i += 1;
        }
    }
    cons
}

/// Pairwise disjoint cells with relations in `{<, ≤, =}` whose union is the
/// set defined by `formula`.
pub fn normalize(formula: &Formula, dim: usize) -> Result<DefinableSet> {
    formula.check_dim(dim)?;
    let mut planes: Vec<Hyperplane> = formula.atoms().into_iter().filter_map(Hyperplane::of).collect();
    planes.sort();
    planes.dedup();
    let faces = enumerate_faces(dim, &planes);
    let rows: Vec<Row<'_>> = faces.iter().map(|f| (f.signs.as_slice(), formula.eval(&f.point))).collect();
    let mut cells = Vec::new();
    for pats in compress(&rows) {
        let cons: Vec<Constraint> = planes.iter().zip(&pats).filter_map(|(h, p)| h.constraint(*p)).collect();
        cells.push(Cell {
            dim,
            constraints: sorted(prune(dim, cons)),
        });
    }
    Ok(DefinableSet { dim, cells })
}
