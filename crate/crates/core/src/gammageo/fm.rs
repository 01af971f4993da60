//! Exact Fourier–Motzkin elimination with strict inequalities.
//!
//! Equalities are used for substitution before any pairwise combination, and
//! parallel inequalities are collapsed to the tightest one after every step.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::rational::{ceil, floor, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Kind {
    Eq,
    Le,
    Lt,
}

/// `a·x = b`, `a·x ≤ b` or `a·x < b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct LinCon {
    pub a: Vec<Rational>,
    pub b: Rational,
    pub kind: Kind,
}

impl LinCon {
    pub fn new(a: Vec<Rational>, b: Rational, kind: Kind) -> Self {
        LinCon { a, b, kind }
    }

    fn is_constant(&self) -> bool {
        self.a.iter().all(Zero::is_zero)
    }

    fn constant_holds(&self) -> bool {
        let zero = Rational::zero();
        match self.kind {
            Kind::Eq => zero == self.b,
            Kind::Le => zero <= self.b,
            Kind::Lt => zero < self.b,
        }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs = dot(&self.a, x);
        match self.kind {
            Kind::Eq => lhs == self.b,
            Kind::Le => lhs <= self.b,
            Kind::Lt => lhs < self.b,
        }
    }

    /// Scales so that the first nonzero coefficient is `±1` (`+1` for
    /// equalities).
    fn scaled(mut self) -> Self {
        let Some(lead) = self.a.iter().find(|q| !q.is_zero()).cloned() else {
            return self;
        };
        let s = if self.kind == Kind::Eq { lead } else { lead.abs() };
        if !s.is_one() {
            for q in &mut self.a {
                *q /= &s;
            }
            self.b /= &s;
        }
        self
    }

    fn combine(&self, f: &Rational, other: &LinCon, g: &Rational) -> LinCon {
        LinCon {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x * f + y * g).collect(),
            b: &self.b * f + &other.b * g,
            kind: self.kind.max(other.kind),
        }
    }
}

fn dot(a: &[Rational], x: &[Rational]) -> Rational {
    a.iter().zip(x).fold(Rational::zero(), |acc, (p, q)| acc + p * q)
}

/// Drops trivially true constraints and collapses parallel ones. `None` if a
/// contradiction is detected.
pub(crate) fn simplify(cons: Vec<LinCon>) -> Option<Vec<LinCon>> {
    let mut eqs: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
    let mut ineqs: BTreeMap<Vec<Rational>, (Rational, Kind)> = BTreeMap::new();
    for c in cons {
        if c.is_constant() {
            if !c.constant_holds() {
                return None;
            }
            continue;
        }
        let c = c.scaled();
        match c.kind {
            Kind::Eq => match eqs.get(&c.a) {
                Some(b) if *b != c.b => return None,
                Some(_) => {}
                None => {
                    eqs.insert(c.a, c.b);
                }
            },
            kind => match ineqs.get_mut(&c.a) {
                Some((b, k)) => {
                    if c.b < *b || (c.b == *b && kind == Kind::Lt) {
                        *b = c.b;
                        *k = kind;
                    }
                }
                None => {
                    ineqs.insert(c.a, (c.b, kind));
                }
            },
        }
    }
    // opposite parallel pairs: a·x ≤ b and −a·x ≤ b' need −b' ≤ b
    for (a, (b, k)) in &ineqs {
        let neg: Vec<Rational> = a.iter().map(|q| -q).collect();
        if let Some((b2, k2)) = ineqs.get(&neg) {
            let lo = -b2.clone();
            if lo > *b || (lo == *b && (*k == Kind::Lt || *k2 == Kind::Lt)) {
                return None;
            }
        }
    }
    let mut out: Vec<LinCon> = eqs.into_iter().map(|(a, b)| LinCon::new(a, b, Kind::Eq)).collect();
    out.extend(ineqs.into_iter().map(|(a, (b, k))| LinCon::new(a, b, k)));
    Some(out)
}

/// Eliminates variable `k`. The result has zero coefficient at `k`.
pub(crate) fn eliminate(cons: Vec<LinCon>, k: usize) -> Option<Vec<LinCon>> {
    if let Some(p) = cons.iter().position(|c| c.kind == Kind::Eq && !c.a[k].is_zero()) {
        let e = cons[p].clone();
        let out = cons
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != p)
            .map(|(_, c)| {
                if c.a[k].is_zero() {
                    c
                } else {
                    let f = -(&c.a[k] / &e.a[k]);
                    let mut r = c.combine(&Rational::one(), &e, &f);
                    r.kind = c.kind;
                    r.a[k] = Rational::zero();
                    r
                }
            })
            .collect();
        return simplify(out);
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for c in cons {
        if c.a[k].is_positive() {
            pos.push(c);
        } else if c.a[k].is_negative() {
            neg.push(c);
        } else {
            out.push(c);
        }
    }
    for p in &pos {
        for n in &neg {
            let f = Rational::one() / &p.a[k];
            let g = Rational::one() / -&n.a[k];
            let mut r = p.combine(&f, n, &g);
            r.a[k] = Rational::zero();
            out.push(r);
        }
    }
    simplify(out)
}

/// Eliminates the given variables in decreasing order.
pub(crate) fn project(cons: Vec<LinCon>, drop: &[usize]) -> Option<Vec<LinCon>> {
    let mut order = drop.to_vec();
    order.sort_unstable_by(|a, b| b.cmp(a));
    order.dedup();
    let mut cur = simplify(cons)?;
    for k in order {
        cur = eliminate(cur, k)?;
    }
    Some(cur)
}

type Bound = Option<(Rational, bool)>;

/// A point of the interval, as close to 0 as is convenient.
fn pick(lo: Bound, hi: Bound) -> Rational {
    let zero = Rational::zero();
    let above_lo = |v: &Rational| lo.as_ref().is_none_or(|(l, s)| if *s { v > l } else { v >= l });
    let below_hi = |v: &Rational| hi.as_ref().is_none_or(|(h, s)| if *s { v < h } else { v <= h });
    if above_lo(&zero) && below_hi(&zero) {
        return zero;
    }
    if !above_lo(&zero) {
        let (l, s) = lo.clone().unwrap();
        if !s {
            return l;
        }
        let c = Rational::from_integer(floor(&l) + 1);
        if below_hi(&c) {
            return c;
        }
        let (h, _) = hi.unwrap();
        (l + h) / Rational::from_integer(2.into())
    } else {
        let (h, s) = hi.clone().unwrap();
        if !s {
            return h;
        }
        let c = Rational::from_integer(ceil(&h) - 1);
        if above_lo(&c) {
            return c;
        }
        let (l, _) = lo.unwrap();
        (l + h) / Rational::from_integer(2.into())
    }
}

/// A point satisfying every constraint, or `None` if there is none.
pub(crate) fn witness(n: usize, cons: Vec<LinCon>) -> Option<Vec<Rational>> {
    let mut stages = Vec::with_capacity(n);
    let mut cur = simplify(cons)?;
    for k in (0..n).rev() {
        stages.push(cur.clone());
        cur = eliminate(cur, k)?;
    }
    stages.reverse();
    let mut x = vec![Rational::zero(); n];
    for k in 0..n {
        let mut fixed: Option<Rational> = None;
        let mut lo: Bound = None;
        let mut hi: Bound = None;
        for c in &stages[k] {
            let ak = &c.a[k];
            if ak.is_zero() {
                continue;
            }
            let rest = (0..k).fold(Rational::zero(), |acc, j| acc + &c.a[j] * &x[j]);
            let v = (&c.b - rest) / ak;
            let strict = c.kind == Kind::Lt;
            match c.kind {
                Kind::Eq => fixed = Some(v),
                _ if ak.is_positive() => {
                    if hi.as_ref().is_none_or(|(h, s)| v < *h || (v == *h && strict && !s)) {
                        hi = Some((v, strict));
                    }
                }
                _ => {
                    if lo.as_ref().is_none_or(|(l, s)| v > *l || (v == *l && strict && !s)) {
                        lo = Some((v, strict));
                    }
                }
            }
        }
        x[k] = fixed.unwrap_or_else(|| pick(lo, hi));
    }
    debug_assert!(stages.first().is_none_or(|s| s.iter().all(|c| c.holds(&x))));
    Some(x)
}

pub(crate) fn feasible(n: usize, cons: Vec<LinCon>) -> bool {
    witness(n, cons).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, rat};

    fn c(a: &[i64], b: Rational, kind: Kind) -> LinCon {
        LinCon::new(a.iter().map(|&v| rat(v)).collect(), b, kind)
    }

    #[test]
    fn strictness_matters() {
        // x ≤ 0, −x ≤ 0 → {0}; with a strict side it is empty
        assert_eq!(witness(1, vec![c(&[1], rat(0), Kind::Le), c(&[-1], rat(0), Kind::Le)]), Some(vec![rat(0)]));
        assert_eq!(witness(1, vec![c(&[1], rat(0), Kind::Lt), c(&[-1], rat(0), Kind::Le)]), None);
    }

    #[test]
    fn witness_satisfies_system() {
        // 0 < x < y < 1/3, x + y = 1/4
        let cons = vec![
            c(&[-1, 0], rat(0), Kind::Lt),
            c(&[1, -1], rat(0), Kind::Lt),
            c(&[0, 1], frac(1, 3), Kind::Lt),
            c(&[1, 1], frac(1, 4), Kind::Eq),
        ];
        let w = witness(2, cons.clone()).unwrap();
        assert!(cons.iter().all(|k| k.holds(&w)));
    }

    #[test]
    fn projection_of_triangle() {
        // 0 ≤ x ≤ y ≤ 2 projected to x gives 0 ≤ x ≤ 2
        let cons = vec![c(&[-1, 0], rat(0), Kind::Le), c(&[1, -1], rat(0), Kind::Le), c(&[0, 1], rat(2), Kind::Le)];
        let p = project(cons, &[1]).unwrap();
        assert!(p.contains(&c(&[1, 0], rat(2), Kind::Le)));
        assert!(p.contains(&c(&[-1, 0], rat(0), Kind::Le)));
    }

    #[test]
    fn equalities_substitute() {
        // x = 2y, y > 1, x < 3 → 1 < y < 3/2
        let cons = vec![c(&[1, -2], rat(0), Kind::Eq), c(&[0, -1], rat(-1), Kind::Lt), c(&[1, 0], rat(3), Kind::Lt)];
        let w = witness(2, cons.clone()).unwrap();
        assert!(cons.iter().all(|k| k.holds(&w)));
        let cons2 = vec![c(&[1, -2], rat(0), Kind::Eq), c(&[0, -1], rat(-2), Kind::Lt), c(&[1, 0], rat(3), Kind::Lt)];
        assert!(witness(2, cons2).is_none());
    }
}
