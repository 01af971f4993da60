//! Lattice matrices, polarization types and the data attached to them:
//! the pairing, the polarization test, theta-section counts and the
//! Appell–Humbert multiplier.

mod smith;

pub use smith::{smith, SmithDecomposition};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, QMatrix, ZMatrix};
use crate::rational::{serde_integer, Integer, Rational};
use crate::valfield::Monomial;

/// `E = (e_ij)`: entry `(i, j)` is the `j`-th coordinate of the image of the
/// `i`-th basis vector of `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeMatrix {
    entries: Vec<Vec<Monomial>>,
}

impl LatticeMatrix {
    pub fn new(entries: Vec<Vec<Monomial>>) -> Result<Self> {
        let g = entries.len();
        if g == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        for row in &entries {
            check_dim(g, row.len())?;
        }
        Ok(LatticeMatrix { entries })
    }

    /// Diagonal `t^{q_i}` with unit off-diagonal entries.
    pub fn diagonal(exps: &[Rational]) -> Self {
        let g = exps.len();
        let entries = (0..g)
            .map(|i| {
                (0..g)
                    .map(|j| {
                        if i == j {
                            Monomial::power_of_t(exps[i].clone())
                        } else {
                            Monomial::one()
                        }
                    })
                    .collect()
            })
            .collect();
        LatticeMatrix { entries }
    }

    /// The lattice matrix with entries `t^{ē_ij}`.
    pub fn from_trop(trop: &TropMatrix) -> Self {
        LatticeMatrix {
            entries: trop
                .entries
                .iter()
                .map(|row| row.iter().map(|q| Monomial::power_of_t(q.clone())).collect())
                .collect(),
        }
    }

    pub fn g(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Monomial>] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &Monomial {
        &self.entries[i][j]
    }

    pub fn transpose(&self) -> LatticeMatrix {
        LatticeMatrix {
            entries: linalg::transpose(&self.entries),
        }
    }

    pub fn tropicalize(&self) -> TropMatrix {
        TropMatrix {
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(Monomial::trop).collect())
                .collect(),
        }
    }
}

/// `Ē = (-log|e_ij|)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropMatrix {
    entries: QMatrix,
}

impl TropMatrix {
    pub fn new(entries: QMatrix) -> Result<Self> {
        let g = entries.len();
        for row in &entries {
            check_dim(g, row.len())?;
        }
        Ok(TropMatrix { entries })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(linalg::to_q(&linalg::from_i64(rows)))
    }

    pub fn g(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &QMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> QMatrix {
        self.entries
    }
}

/// Integer matrix `Λ` with `λ = Λ ∘ i` for the fixed identification
/// `i: M ≅ M'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolarizationType {
    entries: Vec<Vec<i64>>,
}

impl PolarizationType {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let g = entries.len();
        if g == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        for row in &entries {
            check_dim(g, row.len())?;
        }
        Ok(PolarizationType { entries })
    }

    pub fn identity(g: usize) -> Self {
        PolarizationType {
            entries: (0..g)
                .map(|i| (0..g).map(|j| i64::from(i == j)).collect())
                .collect(),
        }
    }

    pub fn g(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn to_z(&self) -> ZMatrix {
        linalg::from_i64(&self.entries)
    }

    pub fn to_q(&self) -> QMatrix {
        linalg::to_q(&self.to_z())
    }

    pub fn det(&self) -> Integer {
        linalg::det_z(&self.to_z())
    }

    pub fn ensure_injective(&self) -> Result<()> {
        if self.det().is_zero() {
            Err(Error::NonInjectivePolarization)
        } else {
            Ok(())
        }
    }

    /// `ΛĒ` as a rational matrix.
    pub fn apply_trop(&self, trop: &TropMatrix) -> QMatrix {
        linalg::mul_q(&self.to_q(), trop.entries())
    }
}

/// `(ΛE)_ij = ∏_k e_kj^{λ_ik}`.
pub fn apply_polarization(e: &LatticeMatrix, pol: &PolarizationType) -> Vec<Vec<Monomial>> {
    let g = e.g();
    (0..g)
        .map(|i| {
            (0..g)
                .map(|j| {
                    (0..g).fold(Monomial::one(), |acc, k| {
                        acc.mul(&e.entry(k, j).pow(pol.entries[i][k]))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn tropicalize_matrix(e: &LatticeMatrix) -> TropMatrix {
    e.tropicalize()
}

fn check_pairing_dims(g: usize, pol: &PolarizationType, a: &[i64], b: &[i64]) -> Result<()> {
    check_dim(g, pol.g())?;
    check_dim(g, a.len())?;
    check_dim(g, b.len())
}

/// `⟨Σ a_i ε_i, Σ b_j ε_j⟩ = ∏_i ∏_j (∏_k e_kj^{λ_ik})^{a_i b_j}`.
pub fn pairing(e: &LatticeMatrix, pol: &PolarizationType, a: &[i64], b: &[i64]) -> Result<Monomial> {
    check_pairing_dims(e.g(), pol, a, b)?;
    let le = apply_polarization(e, pol);
    let mut out = Monomial::one();
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            let k = ai * bj;
            if k != 0 {
                out = out.mul(&le[i][j].pow(k));
            }
        }
    }
    Ok(out)
}

/// Valuation of the pairing, `Σ_ij a_i b_j (ΛĒ)_ij`; this is the Euclidean
/// product `(ΛĒ a, b)` whenever `ΛĒ` is symmetric.
pub fn pairing_val(trop: &TropMatrix, pol: &PolarizationType, a: &[i64], b: &[i64]) -> Result<Rational> {
    check_pairing_dims(trop.g(), pol, a, b)?;
    let q = pol.apply_trop(trop);
    let to_q = |v: &[i64]| -> Vec<Rational> { v.iter().map(|&x| Rational::from_integer(x.into())).collect() };
    Ok(linalg::bilinear(&linalg::transpose(&q), &to_q(a), &to_q(b)))
}

/// Which parts of `(ΛE)` must agree with its transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetryMode {
    /// Coefficients and exponents.
    #[default]
    Full,
    /// Exponents only, i.e. symmetry of `ΛĒ`.
    ValuationOnly,
}

pub fn symmetry_check(e: &LatticeMatrix, pol: &PolarizationType) -> bool {
    symmetry_check_with(e, pol, SymmetryMode::Full)
}

pub fn symmetry_check_with(e: &LatticeMatrix, pol: &PolarizationType, mode: SymmetryMode) -> bool {
    if e.g() != pol.g() {
        return false;
    }
    let le = apply_polarization(e, pol);
    match mode {
        SymmetryMode::Full => linalg::is_symmetric(&le),
        SymmetryMode::ValuationOnly => {
            let vals: Vec<Vec<Rational>> = le
                .iter()
                .map(|row| row.iter().map(Monomial::trop).collect())
                .collect();
            linalg::is_symmetric(&vals)
        }
    }
}

/// `E` lies in `Ã_{g,λ}`: `ΛE` symmetric and `ΛĒ` strictly positive definite
/// (Sylvester's criterion, exact).
pub fn is_polarization(e: &LatticeMatrix, pol: &PolarizationType) -> Result<bool> {
    is_polarization_with(e, pol, SymmetryMode::Full)
}

pub fn is_polarization_with(e: &LatticeMatrix, pol: &PolarizationType, mode: SymmetryMode) -> Result<bool> {
    check_dim(e.g(), pol.g())?;
    pol.ensure_injective()?;
    if !symmetry_check_with(e, pol, mode) {
        return Ok(false);
    }
    Ok(linalg::is_positive_definite(&pol.apply_trop(&e.tropicalize())))
}

pub fn smith_of(pol: &PolarizationType) -> SmithDecomposition {
    smith(&pol.to_z())
}

/// `rk λ = #(M'/λ(M)) = |det Λ|`, read off the Smith invariants.
pub fn polarization_rank(pol: &PolarizationType) -> Result<Integer> {
    pol.ensure_injective()?;
    Ok(smith_of(pol).invariant_product())
}

/// Representatives of `M'/(m·λ(M))`: the Smith box `0 ≤ x_i < d_i` of `mΛ`
/// pulled back through `U⁻¹`, in lexicographic box order.
pub fn theta_coset_reps(pol: &PolarizationType, m: u64) -> Result<Vec<Vec<Integer>>> {
    pol.ensure_injective()?;
    let g = pol.g();
    let scaled: ZMatrix = pol
        .to_z()
        .iter()
        .map(|row| row.iter().map(|z| z * Integer::from(m)).collect())
        .collect();
    if m == 0 {
        return Err(Error::NonInjectivePolarization);
    }
    let s = smith(&scaled);
    let u_inv = linalg::inverse_unimodular(&s.u).expect("Smith transform is unimodular");
    let diag = s.diagonal();
    let mut reps = Vec::new();
    let mut x = vec![Integer::zero(); g];
    loop {
        reps.push(
            u_inv
                .iter()
                .map(|row| row.iter().zip(&x).fold(Integer::zero(), |acc, (a, b)| acc + a * b))
                .collect(),
        );
        // odometer increment, last coordinate fastest
        let mut i = g;
        loop {
            if i == 0 {
                return Ok(reps);
            }
            i -= 1;
            x[i] += 1;
            if x[i] < diag[i] {
                break;
            }
            x[i] = Integer::zero();
        }
    }
}

/// A line-bundle datum `(λ, r)`: the polarization type and the multipliers
/// `r(ε_1), …, r(ε_g)` on the distinguished basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppellHumbertDatum {
    pol: PolarizationType,
    basis_multipliers: Vec<Monomial>,
}

impl AppellHumbertDatum {
    pub fn new(pol: PolarizationType, basis_multipliers: Vec<Monomial>) -> Result<Self> {
        check_dim(pol.g(), basis_multipliers.len())?;
        Ok(AppellHumbertDatum {
            pol,
            basis_multipliers,
        })
    }

    pub fn pol(&self) -> &PolarizationType {
        &self.pol
    }

    pub fn basis_multipliers(&self) -> &[Monomial] {
        &self.basis_multipliers
    }
}

/// Extends `r` from the basis to all of `M` by the cocycle
/// `r(m₁ + m₂) = r(m₁) r(m₂) ⟨m₁, m₂⟩`, walking from `0` to `m` one basis
/// step at a time.
pub fn multiplier_extend(datum: &AppellHumbertDatum, e: &LatticeMatrix, m: &[i64]) -> Result<Monomial> {
    let g = e.g();
    check_dim(g, datum.pol.g())?;
    check_dim(g, m.len())?;
    if !symmetry_check(e, &datum.pol) {
        return Err(Error::AsymmetricPairing);
    }
    let mut x = vec![0i64; g];
    let mut r = Monomial::one();
    for i in 0..g {
        let mut unit = vec![0i64; g];
        unit[i] = 1;
        let ri = &datum.basis_multipliers[i];
        while x[i] < m[i] {
            // r(x + ε_i) = r(x) r(ε_i) ⟨x, ε_i⟩
            r = r.mul(ri).mul(&pairing(e, &datum.pol, &x, &unit)?);
            x[i] += 1;
        }
        while x[i] > m[i] {
            // r(x) = r(x − ε_i) r(ε_i) ⟨x − ε_i, ε_i⟩
            x[i] -= 1;
            let step = ri.mul(&pairing(e, &datum.pol, &x, &unit)?);
            r = r.mul(&step.inv());
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HilbertVariant {
    /// `P(x) = d·x^g`.
    #[default]
    Paper,
    /// `P(x) = 6^g·d·x^g`, matching the rigidification dimension.
    Rigidified,
}

/// Coefficients of the Hilbert polynomial, index = power of `x`.
pub fn hilbert_polynomial(g: usize, d: &Integer, variant: HilbertVariant) -> Vec<Integer> {
    let lead = match variant {
        HilbertVariant::Paper => d.clone(),
        HilbertVariant::Rigidified => d * num_traits::pow(Integer::from(6), g),
    };
    let mut coeffs = vec![Integer::zero(); g + 1];
    coeffs[g] = lead;
    coeffs
}

/// `deg φ_L = χ(L)²`.
pub fn riemann_roch_degree(chi: &Integer) -> Integer {
    chi * chi
}

/// Dimension `6^g·d` of the space the linear rigidification trivializes.
pub fn rigidification_dimension(g: usize, d: &Integer) -> Integer {
    d * num_traits::pow(Integer::from(6), g)
}

pub fn format_polynomial(coeffs: &[Integer], var: &str) -> String {
    let mut terms = Vec::new();
    for (k, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let body = match (k, mag.is_one()) {
            (0, _) => mag.to_string(),
            (1, true) => var.to_string(),
            (1, false) => format!("{mag}{var}"),
            (_, true) => format!("{var}^{k}"),
            (_, false) => format!("{mag}{var}^{k}"),
        };
        terms.push((c.is_negative(), body));
    }
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, body)) in terms.into_iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    g: usize,
    entries: Vec<Vec<Monomial>>,
}

impl Serialize for LatticeMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeRepr {
            g: self.g(),
            entries: self.entries.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = LatticeRepr::deserialize(d)?;
        if r.g != r.entries.len() {
            return Err(serde::de::Error::custom(format!(
                "g = {} but {} rows given",
                r.g,
                r.entries.len()
            )));
        }
        LatticeMatrix::new(r.entries).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PolRepr {
    g: usize,
    entries: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PolInput {
    Full(PolRepr),
    Bare(Vec<Vec<i64>>),
}

impl Serialize for PolarizationType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolRepr {
            g: self.g(),
            entries: self.entries.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolarizationType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = match PolInput::deserialize(d)? {
            PolInput::Full(r) => {
                if r.g != r.entries.len() {
                    return Err(serde::de::Error::custom(format!(
                        "g = {} but {} rows given",
                        r.g,
                        r.entries.len()
                    )));
                }
                r.entries
            }
            PolInput::Bare(e) => e,
        };
        PolarizationType::new(entries).map_err(serde::de::Error::custom)
    }
}

/// Integer vectors in reports.
#[derive(Serialize)]
pub struct IntVec(#[serde(serialize_with = "ser_int_vec")] pub Vec<Integer>);

fn ser_int_vec<S: Serializer>(v: &[Integer], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct One<'a>(&'a Integer);
    impl Serialize for One<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            serde_integer::serialize(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&One(z))?;
    }
    seq.end()
}

#[cfg(test)]
mod tests;
