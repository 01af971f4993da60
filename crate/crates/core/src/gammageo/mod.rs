//! Definable subsets of `Γ^n = Q^n`: Boolean combinations of linear
//! constraints with integer coefficients and rational right-hand sides.
//!
//! A [`DefinableSet`] is a list of pairwise disjoint [`Cell`]s, each a
//! conjunction of constraints. [`normalize`] turns any [`Formula`] into that
//! shape; [`chi_prime`] computes the modified Euler characteristic
//! `χ'(S) = lim_l χ(S ∩ [−l, l]^n)`.

mod chi;
pub(crate) mod fm;
mod normalize;
mod parse;

use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use chi::{chi_prime, chi_prime_detailed, chi_truncated, ChiEvaluation};
pub use normalize::normalize;
pub use parse::{formula_from_json, parse_formula, parse_formula_in, ParsedFormula};

use crate::error::{check_dim, Error, Result};
use crate::glnz::UnimodularMatrix;
use crate::lattice::TropMatrix;
use crate::linalg;
use crate::rational::{lcm_of_denominators, serde_rational, Integer, Rational};
use fm::{Kind, LinCon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    /// The relation after multiplying both sides by −1.
    pub fn mirror(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Eq => Rel::Eq,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

/// `coeffs · x  rel  rhs`, stored with primitive integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    coeffs: Vec<Integer>,
    rel: Rel,
    rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Integer>, rel: Rel, rhs: Rational) -> Self {
        let g = coeffs.iter().fold(Integer::zero(), |acc, c| acc.gcd(c));
        if g.is_zero() || g.is_one() {
            return Constraint { coeffs, rel, rhs };
        }
        let rhs = rhs / Rational::from_integer(g.clone());
        Constraint {
            coeffs: coeffs.into_iter().map(|c| c / &g).collect(),
            rel,
            rhs,
        }
    }

    pub fn from_i64(coeffs: &[i64], rel: Rel, rhs: Rational) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect(), rel, rhs)
    }

    /// Scales a rational left-hand side to integers.
    pub fn from_rational(coeffs: &[Rational], rel: Rel, rhs: Rational) -> Self {
        let l = Rational::from_integer(lcm_of_denominators(coeffs));
        let ints = coeffs.iter().map(|q| (q * &l).to_integer()).collect();
        Self::new(ints, rel, rhs * l)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (c, v)| acc + Rational::from_integer(c.clone()) * v)
    }

    pub fn eval(&self, x: &[Rational]) -> bool {
        self.rel.holds(&self.lhs(x), &self.rhs)
    }

    /// `Some(truth)` when every coefficient is zero.
    pub fn trivial_value(&self) -> Option<bool> {
        if self.coeffs.iter().all(Zero::is_zero) {
            Some(self.rel.holds(&Rational::zero(), &self.rhs))
        } else {
            None
        }
    }

    /// The same set written with the opposite sign on both sides.
    pub fn mirrored(&self) -> Constraint {
        Constraint {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            rel: self.rel.mirror(),
            rhs: -self.rhs.clone(),
        }
    }

    /// Rewrites `≥`/`>` as `≤`/`<` by mirroring.
    pub fn canonical(&self) -> Constraint {
        match self.rel {
            Rel::Ge | Rel::Gt => self.mirrored(),
            _ => self.clone(),
        }
    }

    fn coeffs_q(&self) -> Vec<Rational> {
        self.coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect()
    }

    pub(crate) fn to_lincon(&self) -> LinCon {
        let c = self.canonical();
        let kind = match c.rel {
            Rel::Lt => Kind::Lt,
            Rel::Le => Kind::Le,
            _ => Kind::Eq,
        };
        LinCon::new(c.coeffs_q(), c.rhs, kind)
    }

    pub(crate) fn from_lincon(l: &LinCon) -> Constraint {
        let rel = match l.kind {
            Kind::Eq => Rel::Eq,
            Kind::Le => Rel::Le,
            Kind::Lt => Rel::Lt,
        };
        Constraint::from_rational(&l.a, rel, l.b.clone())
    }

    /// Inserts zero coefficients so that the result lives in `Γ^{before + n + after}`.
    pub fn embed(&self, before: usize, after: usize) -> Constraint {
        let mut coeffs = vec![Integer::zero(); before];
        coeffs.extend(self.coeffs.iter().cloned());
        coeffs.extend(std::iter::repeat_n(Integer::zero(), after));
        Constraint {
            coeffs,
            rel: self.rel,
            rhs: self.rhs.clone(),
        }
    }
}

pub(crate) fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

pub(crate) fn write_linear(f: &mut impl fmt::Write, coeffs: &[Integer]) -> fmt::Result {
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else if c.is_negative() {
            f.write_str(" - ")?;
        } else {
            f.write_str(" + ")?;
        }
        if !mag.is_one() {
            write!(f, "{mag}")?;
        }
        f.write_str(&var_name(i))?;
        first = false;
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.coeffs.iter().find(|c| !c.is_zero()) {
            Some(lead) if lead.is_negative() => self.mirrored(),
            _ => self.clone(),
        };
        write_linear(f, &c.coeffs)?;
        write!(f, " {} {}", c.rel.symbol(), crate::rational::format_rational(&c.rhs))
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintRepr {
    coeffs: Vec<serde_json::Value>,
    rel: Rel,
    #[serde(with = "serde_rational")]
    rhs: Rational,
}

impl Serialize for Constraint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| match crate::rational::to_i64(c) {
                Some(v) => serde_json::Value::from(v),
                None => serde_json::Value::from(c.to_string()),
            })
            .collect();
        ConstraintRepr {
            coeffs,
            rel: self.rel,
            rhs: self.rhs.clone(),
        }
        .serialize(s)
    }
}

/// Boolean combinations of constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Atom(Constraint),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(c: Constraint) -> Self {
        Formula::Atom(c)
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Self {
        Formula::And(parts.into_iter().collect())
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Self {
        Formula::Or(parts.into_iter().collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn eval(&self, x: &[Rational]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(c) => c.eval(x),
            Formula::Not(f) => !f.eval(x),
            Formula::And(fs) => fs.iter().all(|f| f.eval(x)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(x)),
        }
    }

    pub fn atoms(&self) -> Vec<&Constraint> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Constraint>) {
        match self {
            Formula::Atom(c) => out.push(c),
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
            Formula::True | Formula::False => {}
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        self.atoms().iter().try_for_each(|c| check_dim(n, c.dim()))
    }
}

/// A conjunction of constraints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    dim: usize,
    constraints: Vec<Constraint>,
}

impl Cell {
    pub fn new(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            check_dim(dim, c.dim())?;
        }
        Ok(Cell { dim, constraints })
    }

    pub fn universe(dim: usize) -> Self {
        Cell {
            dim,
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.constraints.iter().all(|c| c.eval(x))
    }

    pub fn is_empty(&self) -> bool {
        !fm::feasible(self.dim, self.lincons())
    }

    /// A point of the cell.
    pub fn witness(&self) -> Option<Vec<Rational>> {
        fm::witness(self.dim, self.lincons())
    }

    pub(crate) fn lincons(&self) -> Vec<LinCon> {
        self.constraints.iter().map(Constraint::to_lincon).collect()
    }

    pub fn to_formula(&self) -> Formula {
        Formula::And(self.constraints.iter().cloned().map(Formula::Atom).collect())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constraints.is_empty() {
            return f.write_str("true");
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct CellRepr<'a> {
    constraints: &'a [Constraint],
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CellRepr {
            constraints: &self.constraints,
        }
        .serialize(s)
    }
}

/// A finite disjoint union of cells in `Γ^dim`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefinableSet {
    dim: usize,
    cells: Vec<Cell>,
}

impl DefinableSet {
    /// The caller guarantees that the cells are pairwise disjoint; use
    /// [`normalize`] otherwise.
    pub fn from_disjoint_cells(dim: usize, cells: Vec<Cell>) -> Result<Self> {
        for c in &cells {
            check_dim(dim, c.dim())?;
        }
        Ok(DefinableSet { dim, cells })
    }

    pub fn empty(dim: usize) -> Self {
        DefinableSet { dim, cells: Vec::new() }
    }

    pub fn universe(dim: usize) -> Self {
        DefinableSet {
            dim,
            cells: vec![Cell::universe(dim)],
        }
    }

    /// A single conjunction.
    pub fn from_constraints(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        Ok(DefinableSet {
            dim,
            cells: vec![Cell::new(dim, constraints)?],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.cells.iter().any(|c| c.contains(x))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(Cell::is_empty)
    }

    pub fn to_formula(&self) -> Formula {
        Formula::Or(self.cells.iter().map(Cell::to_formula).collect())
    }

    pub fn union(&self, other: &DefinableSet) -> Result<DefinableSet> {
        check_dim(self.dim, other.dim)?;
        normalize(&Formula::or([self.to_formula(), other.to_formula()]), self.dim)
    }

    pub fn intersection(&self, other: &DefinableSet) -> Result<DefinableSet> {
        check_dim(self.dim, other.dim)?;
        normalize(&Formula::and([self.to_formula(), other.to_formula()]), self.dim)
    }

    pub fn difference(&self, other: &DefinableSet) -> Result<DefinableSet> {
        check_dim(self.dim, other.dim)?;
        normalize(&Formula::and([self.to_formula(), Formula::not(other.to_formula())]), self.dim)
    }

    pub fn complement(&self) -> DefinableSet {
        normalize(&Formula::not(self.to_formula()), self.dim).expect("dimensions agree")
    }

    /// Equality as subsets of `Γ^n`.
    pub fn set_eq(&self, other: &DefinableSet) -> bool {
        self.dim == other.dim
            && self.difference(other).is_ok_and(|d| d.is_empty())
            && other.difference(self).is_ok_and(|d| d.is_empty())
    }
}

impl fmt::Display for DefinableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return f.write_str("false");
        }
        for (i, c) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "({c})")?;
        }
        Ok(())
    }
}

fn sorted(mut constraints: Vec<Constraint>) -> Vec<Constraint> {
    constraints.sort();
    constraints.dedup();
    constraints
}

/// `S × T` in `Γ^{n+m}`.
pub fn product(s: &DefinableSet, t: &DefinableSet) -> DefinableSet {
    let (n, m) = (s.dim, t.dim);
    let mut cells = Vec::with_capacity(s.cells.len() * t.cells.len());
    for a in &s.cells {
        for b in &t.cells {
            let cons = a
                .constraints
                .iter()
                .map(|c| c.embed(0, m))
                .chain(b.constraints.iter().map(|c| c.embed(n, 0)))
                .collect();
            cells.push(Cell {
                dim: n + m,
                constraints: sorted(cons),
            });
        }
    }
    DefinableSet { dim: n + m, cells }
}

/// `{A x + shift : x ∈ S}`.
pub fn affine_image(s: &DefinableSet, a: &UnimodularMatrix, shift: &[Rational]) -> Result<DefinableSet> {
    check_dim(s.dim, a.g())?;
    check_dim(s.dim, shift.len())?;
    let inv = linalg::to_q(&a.inverse().to_z());
    let cells = s
        .cells
        .iter()
        .map(|cell| {
            let cons = cell
                .constraints
                .iter()
                .map(|c| {
                    // a·x = a·A⁻¹(y − s)
                    let row = linalg::mat_vec_q(&linalg::transpose(&inv), &c.coeffs_q());
                    let rhs = &c.rhs + linalg::dot_q(&row, shift);
                    Constraint::from_rational(&row, c.rel, rhs)
                })
                .collect();
            Cell {
                dim: s.dim,
                constraints: sorted(cons),
            }
        })
        .collect();
    Ok(DefinableSet { dim: s.dim, cells })
}

/// `{Ē^T u : u ∈ [0, 1)^g}`, i.e. `0 ≤ (Ē^{−T} x)_i < 1`.
pub fn half_open_ppd(trop: &TropMatrix) -> Result<DefinableSet> {
    let g = trop.g();
    let inv_t = linalg::inverse_q(&linalg::transpose(trop.entries())).ok_or(Error::SingularMatrix)?;
    let mut cons = Vec::with_capacity(2 * g);
    for row in &inv_t {
        let neg: Vec<Rational> = row.iter().map(|q| -q).collect();
        cons.push(Constraint::from_rational(&neg, Rel::Le, Rational::zero()));
        cons.push(Constraint::from_rational(row, Rel::Lt, Rational::one()));
    }
    DefinableSet::from_constraints(g, sorted(cons))
}

/// Coordinate projection onto `keep` (in the given order).
pub fn project(s: &DefinableSet, keep: &[usize]) -> Result<DefinableSet> {
    for &k in keep {
        if k >= s.dim {
            return Err(Error::DimensionMismatch { expected: s.dim, found: k + 1 });
        }
    }
    let drop: Vec<usize> = (0..s.dim).filter(|i| !keep.contains(i)).collect();
    let mut parts = Vec::new();
    for cell in &s.cells {
        let Some(cons) = fm::project(cell.lincons(), &drop) else {
            continue;
        };
        let atoms = cons
            .iter()
            .map(|l| {
                let a: Vec<Rational> = keep.iter().map(|&k| l.a[k].clone()).collect();
                let reduced = fm::LinCon::new(a, l.b.clone(), l.kind);
                Formula::Atom(Constraint::from_lincon(&reduced))
            })
            .collect();
        parts.push(Formula::And(atoms));
    }
    normalize(&Formula::Or(parts), keep.len())
}

/// The fibre over `values` placed at coordinates `indices`; the remaining
/// coordinates keep their order.
pub fn fiber(s: &DefinableSet, indices: &[usize], values: &[Rational]) -> Result<DefinableSet> {
    check_dim(indices.len(), values.len())?;
    for &k in indices {
        if k >= s.dim {
            return Err(Error::DimensionMismatch { expected: s.dim, found: k + 1 });
        }
    }
    let rest: Vec<usize> = (0..s.dim).filter(|i| !indices.contains(i)).collect();
    let mut parts = Vec::new();
    for cell in &s.cells {
        let atoms = cell
            .constraints
            .iter()
            .map(|c| {
                let fixed = indices
                    .iter()
                    .zip(values)
                    .fold(Rational::zero(), |acc, (&k, v)| acc + Rational::from_integer(c.coeffs[k].clone()) * v);
                let coeffs = rest.iter().map(|&k| c.coeffs[k].clone()).collect();
                Formula::Atom(Constraint::new(coeffs, c.rel, &c.rhs - fixed))
            })
            .collect();
        parts.push(Formula::And(atoms));
    }
    normalize(&Formula::Or(parts), rest.len())
}
