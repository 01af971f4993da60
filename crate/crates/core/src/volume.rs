//! Families of polarized tori over a polyhedral base `Δ ⊂ Γ^m`.
//!
//! The family is given tropically: `Ē(σ) = C + Σ_k σ_k A_k` with integral
//! affine entries. Its tropical total space is
//! `{(σ, x) : σ ∈ Δ, x ∈ Ē(σ)^T [0,1)^g}`, and its motivic volume is computed
//! twice: once from `χ'` of the total space, once by summing over base pieces
//! `χ'(piece)(L−1)^m · [fibre]`.
//!
//! The total space is polyhedral when every row of `Ē(σ)` is a fixed vector
//! scaled by an affine function of `σ`; other families are handled by the
//! fibrewise computation only.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{check_dim, Error, Result};
use crate::gammageo::{
    self, chi_prime, formula_from_json, normalize, parse_formula_in, Cell, Constraint, DefinableSet, Formula, Rel,
};
use crate::lattice::{PolarizationType, TropMatrix};
use crate::linalg::{self, QMatrix};
use crate::motclass::{class_of_torus, vol_polyhedral, MotClass};
use crate::rational::{format_rational, format_vector, serde_integer, serde_rational, Integer, Rational};

/// `coeffs·σ + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineEntry {
    pub coeffs: Vec<i64>,
    #[serde(rename = "const", with = "serde_rational")]
    pub constant: Rational,
}

impl AffineEntry {
    pub fn new(coeffs: Vec<i64>, constant: Rational) -> Self {
        AffineEntry { coeffs, constant }
    }

    pub fn constant(m: usize, c: Rational) -> Self {
        AffineEntry {
            coeffs: vec![0; m],
            constant: c,
        }
    }

    pub fn eval(&self, sigma: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(sigma)
            .fold(self.constant.clone(), |acc, (&c, s)| acc + Rational::from_integer(c.into()) * s)
    }
}

/// How fibres are closed off. `HalfOpen` is the lattice fundamental domain;
/// `Closed` replaces `[0,1)^g` by `[0,1]^g` and serves as a non-vanishing
/// control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberMode {
    #[default]
    HalfOpen,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusFamily {
    g: usize,
    base: DefinableSet,
    lattice_map: Vec<Vec<AffineEntry>>,
    pol: PolarizationType,
    fiber_mode: FiberMode,
}

impl TorusFamily {
    pub fn new(g: usize, base: DefinableSet, lattice_map: Vec<Vec<AffineEntry>>, pol: PolarizationType) -> Result<Self> {
        let m = base.dim();
        check_dim(g, lattice_map.len())?;
        check_dim(g, pol.g())?;
        for row in &lattice_map {
            check_dim(g, row.len())?;
            for e in row {
                check_dim(m, e.coeffs.len())?;
            }
        }
        let base = normalize(&base.to_formula(), m)?;
        Ok(TorusFamily {
            g,
            base,
            lattice_map,
            pol,
            fiber_mode: FiberMode::HalfOpen,
        })
    }

    pub fn with_fiber_mode(mut self, mode: FiberMode) -> Self {
        self.fiber_mode = mode;
        self
    }

    /// A family with `Ē(σ) = C` over a point.
    pub fn constant(c: &TropMatrix, pol: PolarizationType) -> Result<Self> {
        let map = c
            .entries()
            .iter()
            .map(|row| row.iter().map(|q| AffineEntry::constant(0, q.clone())).collect())
            .collect();
        Self::new(c.g(), DefinableSet::universe(0), map, pol)
    }

    pub fn g(&self) -> usize {
        self.g
    }

    /// Dimension of the base.
    pub fn m(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &DefinableSet {
        &self.base
    }

    pub fn lattice_map(&self) -> &[Vec<AffineEntry>] {
        &self.lattice_map
    }

    pub fn pol(&self) -> &PolarizationType {
        &self.pol
    }

    pub fn fiber_mode(&self) -> FiberMode {
        self.fiber_mode
    }

    /// `Ē(σ)`.
    pub fn trop_at(&self, sigma: &[Rational]) -> TropMatrix {
        TropMatrix::new(
            self.lattice_map
                .iter()
                .map(|row| row.iter().map(|e| e.eval(sigma)).collect())
                .collect(),
        )
        .expect("square by construction")
    }

    /// `ΛĒ(σ)`.
    pub fn form_at(&self, sigma: &[Rational]) -> QMatrix {
        self.pol.apply_trop(&self.trop_at(sigma))
    }

    fn constant_part(&self) -> QMatrix {
        self.lattice_map
            .iter()
            .map(|row| row.iter().map(|e| e.constant.clone()).collect())
            .collect()
    }

    fn slope(&self, k: usize) -> QMatrix {
        self.lattice_map
            .iter()
            .map(|row| row.iter().map(|e| Rational::from_integer(e.coeffs[k].into())).collect())
            .collect()
    }

    /// `Λ Σ_k v_k A_k`, the derivative of `ΛĒ` along `v`.
    fn derivative(&self, v: &[Rational]) -> QMatrix {
        let g = self.g;
        let mut out = vec![vec![Rational::zero(); g]; g];
        for (k, vk) in v.iter().enumerate() {
            if vk.is_zero() {
                continue;
            }
            let a = self.slope(k);
            for i in 0..g {
                for j in 0..g {
                    out[i][j] += &a[i][j] * vk;
                }
            }
        }
        linalg::mul_q(&self.pol.to_q(), &out)
    }

    /// The fibre over `σ`: `Ē(σ)^T [0,1)^g` or its closure.
    pub fn fiber_set(&self, sigma: &[Rational]) -> Result<DefinableSet> {
        let t = self.trop_at(sigma);
        match self.fiber_mode {
            FiberMode::HalfOpen => gammageo::half_open_ppd(&t),
            FiberMode::Closed => closed_ppd(&t),
        }
    }

    /// Reads `{"g", "pol", "base", "lattice_map", "fiber_mode"}`. `pol`
    /// defaults to the identity; `base` is a text formula in the base
    /// coordinates, a JSON formula, or `true`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |msg: String| Error::malformed(0, 0, msg);
        let obj = v.as_object().ok_or_else(|| bad("family must be a JSON object".into()))?;
        for k in obj.keys() {
            if !matches!(k.as_str(), "g" | "pol" | "base" | "lattice_map" | "fiber_mode") {
                return Err(bad(format!("unknown key {k:?}")));
            }
        }
        let g = obj
            .get("g")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("\"g\" must be a positive integer".into()))? as usize;
        if g == 0 {
            return Err(bad("\"g\" must be a positive integer".into()));
        }
        let lattice_map: Vec<Vec<AffineEntry>> = serde_json::from_value(
            obj.get("lattice_map").cloned().ok_or_else(|| bad("missing \"lattice_map\"".into()))?,
        )
        .map_err(|e| bad(format!("lattice_map: {e}")))?;
        let m = lattice_map
            .first()
            .and_then(|r| r.first())
            .map_or(0, |e| e.coeffs.len());
        if lattice_map.iter().flatten().any(|e| e.coeffs.len() != m) {
            return Err(bad("lattice_map entries disagree on the base dimension".into()));
        }
        let pol = match obj.get("pol") {
            None | Some(Value::Null) => PolarizationType::identity(g),
            Some(p) => serde_json::from_value(p.clone()).map_err(|e| bad(format!("pol: {e}")))?,
        };
        let formula = match obj.get("base") {
            None | Some(Value::Bool(true)) => Formula::True,
            Some(Value::String(s)) => parse_formula_in(s, Some(m))?.formula,
            Some(f) => formula_from_json(f, Some(m))?.formula,
        };
        let base = normalize(&formula, m)?;
        let mode = match obj.get("fiber_mode") {
            None => FiberMode::HalfOpen,
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| bad(format!("fiber_mode: {e}")))?,
        };
        let fam = TorusFamily::new(g, base, lattice_map, pol).map_err(|e| match e {
            Error::DimensionMismatch { expected, found } => {
                bad(format!("dimension mismatch: expected {expected}, found {found}"))
            }
            e => e,
        })?;
        Ok(fam.with_fiber_mode(mode))
    }
}

/// `Ē^T [0,1]^g`.
fn closed_ppd(t: &TropMatrix) -> Result<DefinableSet> {
    let g = t.g();
    let inv_t = linalg::inverse_q(&linalg::transpose(t.entries())).ok_or(Error::SingularMatrix)?;
    let mut cons = Vec::with_capacity(2 * g);
    for row in &inv_t {
        let neg: Vec<Rational> = row.iter().map(|q| -q).collect();
        cons.push(Constraint::from_rational(&neg, Rel::Le, Rational::zero()));
        cons.push(Constraint::from_rational(row, Rel::Le, Rational::one()));
    }
    cons.sort();
    DefinableSet::from_constraints(g, cons)
}

fn point_string(p: &[Rational]) -> String {
    format!("({})", format_vector(p))
}

/// What validation looked at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub base_cells: usize,
    pub vertices: Vec<String>,
    pub faces_checked: usize,
    pub recession_directions: Vec<String>,
    pub lineality_directions: Vec<String>,
}

/// Symmetry of `ΛĒ(σ)` as an identity of affine functions.
fn check_symmetry(f: &TorusFamily) -> Result<()> {
    let lam = f.pol.to_q();
    let mut parts = vec![f.constant_part()];
    parts.extend((0..f.m()).map(|k| f.slope(k)));
    for p in parts {
        if !linalg::is_symmetric(&linalg::mul_q(&lam, &p)) {
            return Err(Error::SymmetryViolation);
        }
    }
    Ok(())
}

fn rows_of(cell: &Cell) -> Vec<(Vec<Rational>, Rational, Rel)> {
    cell.constraints()
        .iter()
        .filter(|c| c.trivial_value().is_none())
        .map(|c| {
            (
                c.coeffs().iter().map(|a| Rational::from_integer(a.clone())).collect(),
                c.rhs().clone(),
                c.rel(),
            )
        })
        .collect()
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of `{x : rows_i·x ≤ b_i (i < n_ineq), rows_i·x = b_i (i ≥ n_ineq)}`,
/// assumed pointed. Sorted lexicographically.
fn vertices(m: usize, ineq: &[(Vec<Rational>, Rational)], eq: &[(Vec<Rational>, Rational)]) -> Vec<Vec<Rational>> {
    let all: Vec<&(Vec<Rational>, Rational)> = ineq.iter().chain(eq).collect();
    let feasible = |x: &[Rational]| {
        ineq.iter().all(|(a, b)| linalg::dot_q(a, x) <= *b) && eq.iter().all(|(a, b)| linalg::dot_q(a, x) == *b)
    };
    let mut out: Vec<Vec<Rational>> = Vec::new();
    if m == 0 {
        if feasible(&[]) {
            out.push(Vec::new());
        }
        return out;
    }
    for s in subsets(all.len(), m) {
        let a: QMatrix = s.iter().map(|&i| all[i].0.clone()).collect();
        let b: Vec<Rational> = s.iter().map(|&i| all[i].1.clone()).collect();
        if let Some(x) = linalg::solve_q(&a, &b) {
            if feasible(&x) && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out.sort();
    out
}

fn pd(q: &QMatrix) -> bool {
    linalg::is_positive_definite(q)
}

fn psd(q: &QMatrix) -> bool {
    linalg::is_positive_semidefinite(q)
}

/// A point of `cell` on the segment from `from` towards `inside` (or along
/// the ray `inside + t·dir`) where the form is not PD.
fn search_failure(f: &TorusFamily, cell: &Cell, start: &[Rational], step: &[Rational], shrink: bool) -> Option<Vec<Rational>> {
    let mut t = Rational::one();
    for _ in 0..256 {
        let p: Vec<Rational> = start.iter().zip(step).map(|(a, d)| a + d * &t).collect();
        if cell.contains(&p) && !pd(&f.form_at(&p)) {
            return Some(p);
        }
        if shrink {
            t /= Rational::from_integer(2.into());
        } else {
            t *= Rational::from_integer(2.into());
        }
    }
    None
}

fn validate_cell(f: &TorusFamily, cell: &Cell, report: &mut ValidationReport) -> Result<()> {
    let m = f.m();
    let Some(inside) = cell.witness() else {
        return Ok(());
    };
    let rows = rows_of(cell);
    let coeff_rows: QMatrix = rows.iter().map(|r| r.0.clone()).collect();
    let lineality = if m == 0 { Vec::new() } else { linalg::null_space(&coeff_rows, m) };
    for l in &lineality {
        report.lineality_directions.push(point_string(l));
        if f.derivative(l).iter().flatten().any(|q| !q.is_zero()) {
            return Err(Error::UnboundedUnverifiable { direction: format_vector(l) });
        }
    }
    // closure of the pointed part
    let mut ineq = Vec::new();
    let mut eq = Vec::new();
    for (a, b, rel) in &rows {
        match rel {
            Rel::Eq => eq.push((a.clone(), b.clone())),
            Rel::Le | Rel::Lt => ineq.push((a.clone(), b.clone())),
            Rel::Ge | Rel::Gt => ineq.push((a.iter().map(|q| -q).collect(), -b.clone())),
        }
    }
    let mut eq_pointed = eq.clone();
    for l in &lineality {
        eq_pointed.push((l.clone(), linalg::dot_q(l, &inside)));
    }

    for v in vertices(m, &ineq, &eq_pointed) {
        report.vertices.push(point_string(&v));
        let q = f.form_at(&v);
        let ok = if cell.contains(&v) { pd(&q) } else { psd(&q) };
        if !ok {
            let dir: Vec<Rational> = inside.iter().zip(&v).map(|(a, b)| a - b).collect();
            let w = if cell.contains(&v) {
                v.clone()
            } else {
                search_failure(f, cell, &v, &dir, true).unwrap_or(v.clone())
            };
            return Err(Error::NotPositiveDefiniteAt { witness: format_vector(&w) });
        }
    }

    // recession cone of the pointed closure, cut by the unit box
    if m > 0 {
        let mut rec_ineq: Vec<(Vec<Rational>, Rational)> = ineq.iter().map(|(a, _)| (a.clone(), Rational::zero())).collect();
        for i in 0..m {
            let mut e = vec![Rational::zero(); m];
            e[i] = Rational::one();
            rec_ineq.push((e.clone(), Rational::one()));
            e[i] = -Rational::one();
            rec_ineq.push((e, Rational::one()));
        }
        let rec_eq: Vec<(Vec<Rational>, Rational)> = eq_pointed.iter().map(|(a, _)| (a.clone(), Rational::zero())).collect();
        for r in vertices(m, &rec_ineq, &rec_eq) {
            if r.iter().all(Zero::is_zero) {
                continue;
            }
            report.recession_directions.push(point_string(&r));
            if !psd(&f.derivative(&r)) {
                return Err(match search_failure(f, cell, &inside, &r, false) {
                    Some(w) => Error::NotPositiveDefiniteAt { witness: format_vector(&w) },
                    None => Error::UnboundedUnverifiable { direction: format_vector(&r) },
                });
            }
        }
    }

    // PD at one relative-interior point of every face contained in the cell
    let closed_ineqs: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].2 == Rel::Le || rows[i].2 == Rel::Ge).collect();
    let strict: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].2 == Rel::Lt || rows[i].2 == Rel::Gt).collect();
    let as_constraint = |i: usize, rel: Rel| Constraint::from_rational(&rows[i].0, rel, rows[i].1.clone());
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    while let Some((start, tight)) = stack.pop() {
        // faces where exactly `tight` among the closed inequalities is tight
        let mut cons: Vec<Constraint> = Vec::new();
        for (idx, &i) in closed_ineqs.iter().enumerate() {
            let (rel_tight, rel_loose) = match rows[i].2 {
                Rel::Le => (Rel::Eq, Rel::Lt),
                _ => (Rel::Eq, Rel::Gt),
            };
            cons.push(as_constraint(i, if tight.contains(&idx) { rel_tight } else { rel_loose }));
        }
        for &i in &strict {
            cons.push(as_constraint(i, rows[i].2));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.2 == Rel::Eq {
                cons.push(as_constraint(i, Rel::Eq));
            }
        }
        let face = Cell::new(m, cons)?;
        if let Some(w) = face.witness() {
            report.faces_checked += 1;
            if !pd(&f.form_at(&w)) {
                return Err(Error::NotPositiveDefiniteAt { witness: format_vector(&w) });
            }
        }
        // supersets of a tight set with an empty closed face are empty too
        let mut closed_face = Vec::new();
        for (idx, &i) in closed_ineqs.iter().enumerate() {
            closed_face.push(as_constraint(i, if tight.contains(&idx) { Rel::Eq } else { rows[i].2 }));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.2 == Rel::Eq {
                closed_face.push(as_constraint(i, Rel::Eq));
            }
        }
        if Cell::new(m, closed_face)?.is_empty() {
            continue;
        }
        for idx in (start..closed_ineqs.len()).rev() {
            let mut t = tight.clone();
            t.push(idx);
            stack.push((idx + 1, t));
        }
    }
    Ok(())
}

/// Checks symmetry symbolically and positive definiteness on every base
/// cell: PD or PSD at the vertices of the closure (PD when the vertex lies in
/// the cell), PSD of the derivative along recession directions, and PD at a
/// relative-interior point of each face that lies in the cell. Together with
/// convexity of the PSD cone this certifies PD on the whole cell.
pub fn validate_family(f: &TorusFamily) -> Result<ValidationReport> {
    f.pol.ensure_injective()?;
    check_symmetry(f)?;
    let mut report = ValidationReport {
        base_cells: f.base.cells().len(),
        vertices: Vec::new(),
        faces_checked: 0,
        recession_directions: Vec::new(),
        lineality_directions: Vec::new(),
    };
    for cell in f.base.cells() {
        validate_cell(f, cell, &mut report)?;
    }
    Ok(report)
}

/// Row `i` of `Ē(σ)` as `d_i(σ)·p_i`.
struct ScaledRows {
    /// `p_i` as rows.
    p: QMatrix,
    /// `d_i` as `(constant, coefficients)`.
    d: Vec<(Rational, Vec<Rational>)>,
}

fn scaled_rows(f: &TorusFamily) -> Result<ScaledRows> {
    let g = f.g;
    let m = f.m();
    let c = f.constant_part();
    let slopes: Vec<QMatrix> = (0..m).map(|k| f.slope(k)).collect();
    let mut p = Vec::with_capacity(g);
    let mut d = Vec::with_capacity(g);
    for i in 0..g {
        let vecs: Vec<&Vec<Rational>> = std::iter::once(&c[i]).chain(slopes.iter().map(|s| &s[i])).collect();
        let Some(base) = vecs.iter().find(|v| v.iter().any(|q| !q.is_zero())) else {
            return Err(Error::SingularMatrix);
        };
        let lead = base.iter().position(|q| !q.is_zero()).unwrap();
        let mut lambdas = Vec::with_capacity(vecs.len());
        for v in &vecs {
            let lam = &v[lead] / &base[lead];
            if v.iter().zip(base.iter()).any(|(x, y)| *x != &lam * y) {
                return Err(Error::NonPolyhedralTotalSpace { row: i });
            }
            lambdas.push(lam);
        }
        p.push((*base).clone());
        d.push((lambdas[0].clone(), lambdas[1..].to_vec()));
    }
    Ok(ScaledRows { p, d })
}

fn sign_patterns(g: usize) -> Vec<Vec<bool>> {
    (0..1u32 << g).map(|mask| (0..g).map(|i| mask & (1 << i) == 0).collect()).collect()
}

/// `d_i(σ) > 0` or `< 0` as a constraint on `(σ, x)` of total dimension `m + g`.
fn sign_condition(d: &(Rational, Vec<Rational>), positive: bool, g: usize) -> Constraint {
    let mut a: Vec<Rational> = d.1.clone();
    a.extend(std::iter::repeat_n(Rational::zero(), g));
    // d(σ) = c + a·σ
    if positive {
        Constraint::from_rational(&a, Rel::Gt, -d.0.clone())
    } else {
        Constraint::from_rational(&a, Rel::Lt, -d.0.clone())
    }
}

/// `{(σ, x) : σ ∈ base, x ∈ Ē(σ)^T [0,1)^g}` (closed fibres in
/// [`FiberMode::Closed`]). Requires row-scaled lattice maps.
pub fn total_space_trop(f: &TorusFamily) -> Result<DefinableSet> {
    let g = f.g;
    let m = f.m();
    let sr = scaled_rows(f)?;
    // y = P^{-T} x satisfies y_i = d_i(σ) u_i
    let q = linalg::inverse_q(&linalg::transpose(&sr.p)).ok_or(Error::SingularMatrix)?;
    let fiber_rel = match f.fiber_mode {
        FiberMode::HalfOpen => Rel::Lt,
        FiberMode::Closed => Rel::Le,
    };
    let base_formula = Formula::Or(
        f.base
            .cells()
            .iter()
            .map(|c| Formula::And(c.constraints().iter().map(|k| Formula::Atom(k.embed(0, g))).collect()))
            .collect(),
    );
    let mut branches = Vec::new();
    for pattern in sign_patterns(g) {
        let mut parts = vec![base_formula.clone()];
        for i in 0..g {
            let positive = pattern[i];
            parts.push(Formula::Atom(sign_condition(&sr.d[i], positive, g)));
            // y_i and y_i − d_i(σ) as vectors over (σ, x)
            let mut y: Vec<Rational> = vec![Rational::zero(); m];
            y.extend(q[i].iter().cloned());
            let mut y_minus_d: Vec<Rational> = sr.d[i].1.iter().map(|a| -a).collect();
            y_minus_d.extend(q[i].iter().cloned());
            let dc = sr.d[i].0.clone();
            if positive {
                // 0 ≤ y_i, y_i < d_i
                parts.push(Formula::Atom(Constraint::from_rational(&y, Rel::Ge, Rational::zero())));
                parts.push(Formula::Atom(Constraint::from_rational(&y_minus_d, fiber_rel, dc)));
            } else {
                // d_i < y_i, y_i ≤ 0
                parts.push(Formula::Atom(Constraint::from_rational(&y, Rel::Le, Rational::zero())));
                parts.push(Formula::Atom(Constraint::from_rational(&y_minus_d, fiber_rel.mirror(), dc)));
            }
        }
        branches.push(Formula::And(parts));
    }
    normalize(&Formula::Or(branches), m + g)
}

pub fn motivic_volume_direct(f: &TorusFamily) -> Result<MotClass> {
    let total = total_space_trop(f)?;
    vol_polyhedral(&total)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub piece: String,
    pub witness: String,
    #[serde(with = "serde_integer")]
    pub chi_piece: Integer,
    #[serde(with = "serde_integer")]
    pub chi_fiber: Integer,
    /// `χ'(fibre)·(L−1)^g`.
    pub fiber_class: MotClass,
    /// `χ'(piece)·(L−1)^m · fiber_class`.
    pub class: MotClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub pieces: Vec<Piece>,
}

/// Base pieces of constant fibre type: base cells refined by the signs of the
/// row scalings `d_i(σ)` when the lattice map is row-scaled, base cells
/// otherwise.
fn pieces(f: &TorusFamily) -> Result<Vec<Cell>> {
    let m = f.m();
    let sr = match scaled_rows(f) {
        Ok(sr) => sr,
        Err(Error::NonPolyhedralTotalSpace { .. }) => return Ok(f.base.cells().to_vec()),
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for cell in f.base.cells() {
        for pattern in sign_patterns(f.g) {
            let mut parts = vec![cell.to_formula()];
            for (i, &positive) in pattern.iter().enumerate() {
                let c = sign_condition(&sr.d[i], positive, 0);
                parts.push(Formula::Atom(c));
            }
            out.extend(normalize(&Formula::And(parts), m)?.cells().iter().cloned());
        }
    }
    Ok(out)
}

pub fn motivic_volume_fubini(f: &TorusFamily) -> Result<(MotClass, Decomposition)> {
    let m = f.m();
    let g = f.g;
    let torus_g = class_of_torus(g as u32);
    let torus_m = class_of_torus(m as u32);
    let mut total = MotClass::zero();
    let mut out = Vec::new();
    for cell in pieces(f)? {
        let Some(w) = cell.witness() else {
            continue;
        };
        let piece_set = DefinableSet::from_disjoint_cells(m, vec![cell.clone()])?;
        let chi_piece = chi_prime(&piece_set)?;
        let fiber = f.fiber_set(&w)?;
        let fiber_class = vol_polyhedral(&fiber)?;
        let chi_fiber = fiber_class.div_exact(&torus_g).ok_or(Error::NonToricFiberClass)?;
        let chi_fiber = match chi_fiber.coeffs() {
            [] => Integer::zero(),
            [c] => c.clone(),
            _ => return Err(Error::NonToricFiberClass),
        };
        let class = &torus_m.scale(&chi_piece) * &fiber_class;
        total = &total + &class;
        out.push(Piece {
            piece: cell.to_string(),
            witness: point_string(&w),
            chi_piece,
            chi_fiber,
            fiber_class,
            class,
        });
    }
    Ok((total, Decomposition { pieces: out }))
}

/// Outcome of one stage, with the error name when it failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageError {
    pub stage: String,
    pub error: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VanishingReport {
    pub validation: Option<ValidationReport>,
    pub direct: Option<MotClass>,
    pub fubini: Option<MotClass>,
    pub decomposition: Option<Decomposition>,
    pub agree: bool,
    pub vanishes: bool,
    pub errors: Vec<StageError>,
}

impl VanishingReport {
    /// Both volumes computed, equal, and zero.
    pub fn succeeded(&self) -> bool {
        self.agree && self.vanishes && self.errors.is_empty()
    }

    pub fn first_error(&self) -> Option<&StageError> {
        self.errors.first()
    }
}

fn stage_error(stage: &str, e: &Error) -> StageError {
    StageError {
        stage: stage.into(),
        error: e.name().into(),
        message: e.to_string(),
    }
}

/// Validates, then computes both volumes.
pub fn verify_vanishing(f: &TorusFamily) -> VanishingReport {
    let mut report = VanishingReport {
        validation: None,
        direct: None,
        fubini: None,
        decomposition: None,
        agree: false,
        vanishes: false,
        errors: Vec::new(),
    };
    match validate_family(f) {
        Ok(v) => report.validation = Some(v),
        Err(e) => {
            report.errors.push(stage_error("validation", &e));
            return report;
        }
    }
    match motivic_volume_direct(f) {
        Ok(c) => report.direct = Some(c),
        Err(e) => report.errors.push(stage_error("direct", &e)),
    }
    match motivic_volume_fubini(f) {
        Ok((c, d)) => {
            report.fubini = Some(c);
            report.decomposition = Some(d);
        }
        Err(e) => report.errors.push(stage_error("fubini", &e)),
    }
    if let (Some(d), Some(b)) = (&report.direct, &report.fubini) {
        report.agree = d == b;
        report.vanishes = d.is_zero() && b.is_zero();
    }
    report
}

/// Renders `Ē(σ)` entries as `"2s1 + 1/2"`-style strings.
pub fn describe_entry(e: &AffineEntry) -> String {
    let mut out = String::new();
    for (k, c) in e.coeffs.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let sign = if *c < 0 { "-" } else { "+" };
        if out.is_empty() {
            if *c < 0 {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if c.abs() != 1 {
            out.push_str(&c.abs().to_string());
        }
        out.push_str(&format!("s{}", k + 1));
    }
    if out.is_empty() {
        return format_rational(&e.constant);
    }
    if !e.constant.is_zero() {
        let sign = if e.constant.is_negative() { "-" } else { "+" };
        out.push_str(&format!(" {sign} {}", format_rational(&e.constant.abs())));
    }
    out
}
