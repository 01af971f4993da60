//! The monomial action of `GL_g(Z)` on lattice matrices and reduction of
//! polarized lattices into a polyhedral fundamental domain.
//!
//! `act` recombines rows: `(Ω·E)_kj = ∏_i e_ij^{ω_ki}`, so that
//! `trop(Ω·E) = Ω·Ē`. [`ActionConvention::Transposed`] uses `ω_ik` instead.
//!
//! Reduction acts on the form `Q = ΛĒ` by congruence `Q ↦ ΩQΩ^T`. On lattice
//! matrices this is `Ē ↦ ΩĒΩ^T` together with `Λ ↦ ΩΛΩ^{-1}`; see
//! [`reduce`].

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::lattice::{LatticeMatrix, PolarizationType, TropMatrix};
use crate::linalg::{self, QMatrix, ZMatrix};
use crate::rational::{int, rat, round_half_up, to_i64, Integer};
use crate::valfield::Monomial;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    entries: Vec<Vec<i64>>,
}

impl UnimodularMatrix {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let g = entries.len();
        if g == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        for row in &entries {
            check_dim(g, row.len())?;
        }
        let det = linalg::det_z(&linalg::from_i64(&entries));
        if det.abs() != int(1) {
            return Err(Error::NotUnimodular { det: det.to_string() });
        }
        Ok(UnimodularMatrix { entries })
    }

    pub fn identity(g: usize) -> Self {
        UnimodularMatrix {
            entries: (0..g).map(|i| (0..g).map(|j| i64::from(i == j)).collect()).collect(),
        }
    }

    /// `diag(1, …, −1, …, 1)` with the sign at `i`.
    pub fn sign_flip(g: usize, i: usize) -> Self {
        let mut m = Self::identity(g);
        m.entries[i][i] = -1;
        m
    }

    /// `Id + k·E_ij`.
    pub fn transvection(g: usize, i: usize, j: usize, k: i64) -> Self {
        assert!(i != j, "transvection needs distinct indices");
        let mut m = Self::identity(g);
        m.entries[i][j] = k;
        m
    }

    /// Permutation matrix exchanging `i` and `j`.
    pub fn swap(g: usize, i: usize, j: usize) -> Self {
        let mut m = Self::identity(g);
        m.entries[i][i] = 0;
        m.entries[j][j] = 0;
        m.entries[i][j] = 1;
        m.entries[j][i] = 1;
        m
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

    pub fn det(&self) -> i64 {
        to_i64(&linalg::det_z(&self.to_z())).expect("determinant is ±1")
    }

    pub fn transpose(&self) -> Self {
        UnimodularMatrix {
            entries: linalg::transpose(&self.entries),
        }
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &UnimodularMatrix) -> Self {
        assert_eq!(self.g(), other.g(), "dimension mismatch in product");
        Self::from_z(&linalg::mul_z(&self.to_z(), &other.to_z()))
    }

    pub fn inverse(&self) -> Self {
        Self::from_z(&linalg::inverse_unimodular(&self.to_z()).expect("unimodular"))
    }

    fn from_z(m: &ZMatrix) -> Self {
        UnimodularMatrix {
            entries: m
                .iter()
                .map(|row| row.iter().map(|z| to_i64(z).expect("unimodular entry exceeds i64")).collect())
                .collect(),
        }
    }
}

/// The `g` sign flips followed by the `g(g−1)` transvections `Id + E_ij`,
/// `i ≠ j`, in lexicographic order of `(i, j)`.
pub fn generators(g: usize) -> Vec<UnimodularMatrix> {
    let mut out: Vec<_> = (0..g).map(|i| UnimodularMatrix::sign_flip(g, i)).collect();
    for i in 0..g {
        for j in 0..g {
            if i != j {
                out.push(UnimodularMatrix::transvection(g, i, j, 1));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActionConvention {
    /// `(Ω·E)_kj = ∏_i e_ij^{ω_ki}`, i.e. `Ē ↦ ΩĒ`.
    #[default]
    Standard,
    /// `(Ω·E)_kj = ∏_i e_ij^{ω_ik}`, i.e. `Ē ↦ Ω^T Ē`. This is a right action.
    Transposed,
}

pub fn act(omega: &UnimodularMatrix, e: &LatticeMatrix) -> Result<LatticeMatrix> {
    act_with(omega, e, ActionConvention::Standard)
}

pub fn act_with(omega: &UnimodularMatrix, e: &LatticeMatrix, conv: ActionConvention) -> Result<LatticeMatrix> {
    let g = e.g();
    check_dim(g, omega.g())?;
    let w = |k: usize, i: usize| match conv {
        ActionConvention::Standard => omega.entries[k][i],
        ActionConvention::Transposed => omega.entries[i][k],
    };
    let rows = (0..g)
        .map(|k| {
            (0..g)
                .map(|j| {
                    (0..g).fold(Monomial::one(), |acc, i| {
                        let p = w(k, i);
                        if p == 0 {
                            acc
                        } else {
                            acc.mul(&e.entry(i, j).pow(p))
                        }
                    })
                })
                .collect()
        })
        .collect();
    LatticeMatrix::new(rows)
}

/// `Ē ↦ ΩĒ` on tropical matrices.
pub fn act_trop(omega: &UnimodularMatrix, trop: &TropMatrix) -> Result<TropMatrix> {
    check_dim(trop.g(), omega.g())?;
    TropMatrix::new(linalg::mul_q(&omega.to_q(), trop.entries()))
}

/// `E ↦ (Ω·(Ω·E)^T)^T`, tropically `Ē ↦ ΩĒΩ^T`.
pub fn act_congruence(omega: &UnimodularMatrix, e: &LatticeMatrix) -> Result<LatticeMatrix> {
    Ok(act(omega, &act(omega, e)?.transpose())?.transpose())
}

/// `Λ ↦ ΩΛΩ^{-1}`, so that `Λ'·(ΩĒΩ^T) = Ω(ΛĒ)Ω^T`.
pub fn conjugate_polarization(omega: &UnimodularMatrix, pol: &PolarizationType) -> Result<PolarizationType> {
    check_dim(pol.g(), omega.g())?;
    let m = linalg::mul_z(&linalg::mul_z(&omega.to_z(), &pol.to_z()), &omega.inverse().to_z());
    PolarizationType::new(
        m.iter()
            .map(|row| row.iter().map(|z| to_i64(z).expect("polarization entry exceeds i64")).collect())
            .collect(),
    )
}

fn form_of(trop: &TropMatrix, pol: &PolarizationType) -> Result<QMatrix> {
    check_dim(trop.g(), pol.g())?;
    let q = pol.apply_trop(trop);
    if !linalg::is_symmetric(&q) || !linalg::is_positive_definite(&q) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(q)
}

/// Reduction conditions on `Q = ΛĒ`: `0 ≤ 2Q_{i,i+1} ≤ Q_ii` and
/// `Q_11 ≤ … ≤ Q_gg`.
pub fn in_fundamental_domain(trop: &TropMatrix, pol: &PolarizationType) -> Result<bool> {
    let q = form_of(trop, pol)?;
    Ok(form_is_reduced(&q))
}

pub fn form_is_reduced(q: &QMatrix) -> bool {
    let g = q.len();
    (0..g.saturating_sub(1)).all(|i| {
        let two_off = &q[i][i + 1] * rat(2);
        !two_off.is_negative() && two_off <= q[i][i] && q[i][i] <= q[i + 1][i + 1]
    })
}

/// One elementary move of the reduction, in the order applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    /// `row_target −= multiple · row_pivot`.
    SizeReduce { pivot: usize, target: usize, multiple: i64 },
    Swap { i: usize, j: usize },
    SignFlip { index: usize },
}

impl Step {
    fn matrix(&self, g: usize) -> UnimodularMatrix {
        match *self {
            Step::SizeReduce { pivot, target, multiple } => UnimodularMatrix::transvection(g, target, pivot, -multiple),
            Step::Swap { i, j } => UnimodularMatrix::swap(g, i, j),
            Step::SignFlip { index } => UnimodularMatrix::sign_flip(g, index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    /// `Ω·E·Ω^T` in monomial form.
    pub lattice: LatticeMatrix,
    /// `Ω`, expressed in the convention the reduction was asked for.
    pub transform: UnimodularMatrix,
    /// `ΩΛΩ^{-1}`.
    pub pol: PolarizationType,
    /// The reduced form `Λ_red Ē_red`.
    pub form: QMatrix,
    pub steps: Vec<Step>,
}

pub fn reduce(e: &LatticeMatrix, pol: &PolarizationType) -> Result<Reduction> {
    reduce_with(e, pol, ActionConvention::Standard)
}

/// Greedy reduction of `Q = ΛĒ` by congruence.
///
/// Repeats: size-reduce each consecutive pair with `2|Q_{i,i+1}| > Q_ii`,
/// swap adjacent indices whose diagonal entries are out of order. Each
/// size reduction lowers the trace strictly and swaps keep it while sorting
/// the diagonal, and `Q` stays PD with bounded denominators, so the loop
/// ends. Signs of `Q_{i,i+1}` are fixed last by flipping index `i+1`.
pub fn reduce_with(e: &LatticeMatrix, pol: &PolarizationType, conv: ActionConvention) -> Result<Reduction> {
    pol.ensure_injective()?;
    let mut q = form_of(&e.tropicalize(), pol)?;
    let g = q.len();
    let mut omega = UnimodularMatrix::identity(g);
    let mut steps = Vec::new();

    let mut apply = |step: Step, q: &mut QMatrix, omega: &mut UnimodularMatrix| {
        let t = step.matrix(g);
        let tq = t.to_q();
        *q = linalg::mul_q(&linalg::mul_q(&tq, q), &linalg::transpose(&tq));
        *omega = t.mul(omega);
        steps.push(step);
    };

    loop {
        let mut changed = false;
        for i in 0..g.saturating_sub(1) {
            if (&q[i][i + 1] * rat(2)).abs() > q[i][i] {
                let k = round_half_up(&(&q[i][i + 1] / &q[i][i]));
                let multiple = to_i64(&k).expect("size-reduction multiple exceeds i64");
                apply(Step::SizeReduce { pivot: i, target: i + 1, multiple }, &mut q, &mut omega);
                changed = true;
            }
        }
        for i in 0..g.saturating_sub(1) {
            if q[i][i] > q[i + 1][i + 1] {
                apply(Step::Swap { i, j: i + 1 }, &mut q, &mut omega);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for i in 0..g.saturating_sub(1) {
        if q[i][i + 1].is_negative() {
            apply(Step::SignFlip { index: i + 1 }, &mut q, &mut omega);
        }
    }
    debug_assert!(form_is_reduced(&q));

    let lattice = act_congruence(&omega, e)?;
    let pol_red = conjugate_polarization(&omega, pol)?;
    let transform = match conv {
        ActionConvention::Standard => omega,
        ActionConvention::Transposed => omega.transpose(),
    };
    Ok(Reduction {
        lattice,
        transform,
        pol: pol_red,
        form: q,
        steps,
    })
}

/// Congruence action on a rational form.
pub fn congruence(omega: &UnimodularMatrix, q: &QMatrix) -> QMatrix {
    let w = omega.to_q();
    linalg::mul_q(&linalg::mul_q(&w, q), &linalg::transpose(&w))
}

pub fn trace(q: &QMatrix) -> crate::Rational {
    (0..q.len()).fold(crate::Rational::zero(), |acc, i| acc + &q[i][i])
}

#[derive(Serialize, Deserialize)]
struct UnimodularRepr {
    g: usize,
    entries: Vec<Vec<i64>>,
}

impl Serialize for UnimodularMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        UnimodularRepr {
            g: self.g(),
            entries: self.entries.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnimodularMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = UnimodularRepr::deserialize(d)?;
        if r.g != r.entries.len() {
            return Err(serde::de::Error::custom(format!("g = {} but {} rows given", r.g, r.entries.len())));
        }
        UnimodularMatrix::new(r.entries).map_err(serde::de::Error::custom)
    }
}

/// Integer entries of a unimodular matrix, for callers holding big integers.
pub fn unimodular_from_z(m: &[Vec<Integer>]) -> Result<UnimodularMatrix> {
    let rows = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|z| to_i64(z).ok_or_else(|| Error::NotUnimodular { det: "out of range".into() }))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    UnimodularMatrix::new(rows)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use proptest::prelude::*;

    use super::*;
    use crate::lattice::is_polarization;
    use crate::rational::{frac, rat};

    fn trop(rows: &[Vec<i64>]) -> TropMatrix {
        TropMatrix::from_i64(rows).unwrap()
    }

    fn um(rows: &[Vec<i64>]) -> UnimodularMatrix {
        UnimodularMatrix::new(rows.to_vec()).unwrap()
    }

    #[test]
    fn generator_sets() {
        let g1 = generators(1);
        assert_eq!(g1, vec![um(&[vec![-1]])]);
        assert_eq!(generators(2).len(), 4);
        for g in 1..=5 {
            let gens = generators(g);
            assert_eq!(gens.len(), g + g * (g - 1));
            assert!(gens.iter().all(|m| m.det().abs() == 1));
        }
    }

    #[test]
    fn not_unimodular_rejected() {
        assert!(matches!(UnimodularMatrix::new(vec![vec![2, 0], vec![0, 1]]), Err(Error::NotUnimodular { .. })));
    }

    #[test]
    fn action_examples() {
        let e = LatticeMatrix::from_trop(&trop(&[vec![1, 0], vec![0, 1]]));
        assert_eq!(act(&UnimodularMatrix::identity(2), &e).unwrap(), e);

        let t = LatticeMatrix::diagonal(&[rat(1)]);
        let inv = act(&um(&[vec![-1]]), &t).unwrap();
        assert_eq!(inv.entry(0, 0), &Monomial::new(rat(1), rat(-1)).unwrap());

        let shear = UnimodularMatrix::transvection(2, 0, 1, 1);
        assert_eq!(act(&shear, &e).unwrap().tropicalize(), trop(&[vec![1, 1], vec![0, 1]]));
        let transposed = act_with(&shear, &e, ActionConvention::Transposed).unwrap();
        assert_eq!(transposed.tropicalize(), trop(&[vec![1, 0], vec![1, 1]]));
    }

    #[test]
    fn fundamental_domain_examples() {
        let id = PolarizationType::identity(2);
        assert_eq!(in_fundamental_domain(&trop(&[vec![1, 0], vec![0, 1]]), &id), Ok(true));
        assert_eq!(in_fundamental_domain(&trop(&[vec![2, -1], vec![-1, 2]]), &id), Ok(false));
        assert_eq!(in_fundamental_domain(&trop(&[vec![3, 1], vec![1, 1]]), &id), Ok(false));
        assert_eq!(
            in_fundamental_domain(&trop(&[vec![1, 2], vec![2, 1]]), &id),
            Err(Error::NotPositiveDefinite)
        );
        assert_eq!(
            in_fundamental_domain(&trop(&[vec![1, 0], vec![1, 1]]), &id),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn reduce_examples() {
        let id = PolarizationType::identity(2);
        let e = LatticeMatrix::from_trop(&trop(&[vec![1, 0], vec![0, 2]]));
        let r = reduce(&e, &id).unwrap();
        assert_eq!(r.transform, UnimodularMatrix::identity(2));
        assert_eq!(r.lattice, e);

        let e1 = LatticeMatrix::diagonal(&[frac(7, 3)]);
        let r = reduce(&e1, &PolarizationType::identity(1)).unwrap();
        assert_eq!(r.transform, UnimodularMatrix::identity(1));

        let scramble = UnimodularMatrix::transvection(2, 0, 1, 1).mul(&UnimodularMatrix::sign_flip(2, 0));
        let q0 = congruence(&scramble, &linalg::identity_q(2));
        let e = LatticeMatrix::from_trop(&TropMatrix::new(q0).unwrap());
        let r = reduce(&e, &id).unwrap();
        assert_eq!(r.form, linalg::identity_q(2));
        assert_eq!(r.lattice.tropicalize().entries(), &linalg::identity_q(2));
    }

    /// Minimum trace over all congruence images by products of at most six
    /// generators.
    fn orbit_min_trace(q: &QMatrix, depth: usize) -> crate::Rational {
        let gens = generators(q.len());
        let mut seen: HashSet<QMatrix> = HashSet::new();
        let mut frontier = vec![q.clone()];
        seen.insert(q.clone());
        for _ in 0..depth {
            let mut next = Vec::new();
            for f in &frontier {
                for w in &gens {
                    let h = congruence(w, f);
                    if seen.insert(h.clone()) {
                        next.push(h);
                    }
                }
            }
            frontier = next;
        }
        seen.iter().map(trace).min().unwrap()
    }

    #[test]
    fn scrambled_identity_orbit_minimum() {
        let scramble = UnimodularMatrix::transvection(2, 0, 1, 1).mul(&UnimodularMatrix::sign_flip(2, 0));
        let q0 = congruence(&scramble, &linalg::identity_q(2));
        assert_eq!(orbit_min_trace(&q0, 6), rat(2));
        let e = LatticeMatrix::from_trop(&TropMatrix::new(q0).unwrap());
        let r = reduce(&e, &PolarizationType::identity(2)).unwrap();
        assert_eq!(trace(&r.form), rat(2));
    }

    #[test]
    fn reduction_in_two_dimensions_reaches_orbit_minimum() {
        let forms = [
            vec![vec![5, 7], vec![7, 11]],
            vec![vec![13, -8], vec![-8, 5]],
            vec![vec![2, 3], vec![3, 5]],
        ];
        for f in forms {
            let q = linalg::to_q(&linalg::from_i64(&f));
            let e = LatticeMatrix::from_trop(&TropMatrix::new(q.clone()).unwrap());
            let r = reduce(&e, &PolarizationType::identity(2)).unwrap();
            assert_eq!(trace(&r.form), orbit_min_trace(&q, 6), "{f:?}");
        }
    }

    #[test]
    fn reduction_conjugates_polarization() {
        let e = LatticeMatrix::from_trop(&trop(&[vec![1, 0], vec![1, 2]]));
        let pol = PolarizationType::new(vec![vec![2, 0], vec![-1, 1]]).unwrap();
        assert_eq!(is_polarization(&e, &pol), Ok(true));
        let r = reduce(&e, &pol).unwrap();
        assert_eq!(is_polarization(&r.lattice, &r.pol), Ok(true));
        assert_eq!(r.pol.apply_trop(&r.lattice.tropicalize()), r.form);
        assert_eq!(in_fundamental_domain(&r.lattice.tropicalize(), &r.pol), Ok(true));
        let again = reduce(&r.lattice, &r.pol).unwrap();
        assert_eq!(again.transform, UnimodularMatrix::identity(2));
    }

    #[test]
    fn transposed_convention_reproduces_reduction() {
        let q = linalg::to_q(&linalg::from_i64(&[vec![5, 7], vec![7, 11]]));
        let e = LatticeMatrix::from_trop(&TropMatrix::new(q).unwrap());
        let id = PolarizationType::identity(2);
        let r = reduce_with(&e, &id, ActionConvention::Transposed).unwrap();
        let w = r.transform.clone();
        let via = act_with(&w, &act_with(&w, &e, ActionConvention::Transposed).unwrap().transpose(), ActionConvention::Transposed)
            .unwrap()
            .transpose();
        assert_eq!(via, r.lattice);
    }

    fn arb_unimodular(g: usize) -> impl Strategy<Value = UnimodularMatrix> {
        proptest::collection::vec((0..g + g * (g - 1)).prop_map(move |k| generators(g)[k].clone()), 0..6)
            .prop_map(move |ws| ws.iter().fold(UnimodularMatrix::identity(g), |acc, w| acc.mul(w)))
    }

    fn arb_lattice(g: usize) -> impl Strategy<Value = LatticeMatrix> {
        proptest::collection::vec(
            proptest::collection::vec(((-3i64..=3).prop_filter("nonzero", |c| *c != 0), -4i64..=4), g),
            g,
        )
        .prop_map(|rows| {
            LatticeMatrix::new(
                rows.into_iter()
                    .map(|r| r.into_iter().map(|(c, e)| Monomial::new(rat(c), rat(e)).unwrap()).collect())
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn action_is_a_group_action(
            (a, b, e) in (2usize..=3).prop_flat_map(|g| (arb_unimodular(g), arb_unimodular(g), arb_lattice(g)))
        ) {
            let g = e.g();
            prop_assert_eq!(act(&UnimodularMatrix::identity(g), &e).unwrap(), e.clone());
            prop_assert_eq!(act(&a.mul(&b), &e).unwrap(), act(&a, &act(&b, &e).unwrap()).unwrap());
            prop_assert_eq!(act(&a, &e).unwrap().tropicalize(), act_trop(&a, &e.tropicalize()).unwrap());
        }

        #[test]
        fn reduction_is_sound_and_idempotent(
            (w, upper) in (2usize..=3).prop_flat_map(|g| (arb_unimodular(g), proptest::collection::vec(-2i64..=2, g * g)))
        ) {
            let g = w.g();
            // a PD form: A A^T + Id
            let a: Vec<Vec<i64>> = (0..g).map(|i| upper[i * g..(i + 1) * g].to_vec()).collect();
            let aq = linalg::to_q(&linalg::from_i64(&a));
            let mut q = linalg::mul_q(&aq, &linalg::transpose(&aq));
            for (i, row) in q.iter_mut().enumerate() {
                row[i] += rat(1);
            }
            let q = congruence(&w, &q);
            let e = LatticeMatrix::from_trop(&TropMatrix::new(q).unwrap());
            let id = PolarizationType::identity(g);
            prop_assert_eq!(is_polarization(&e, &id), Ok(true));
            let r = reduce(&e, &id).unwrap();
            prop_assert_eq!(act_congruence(&r.transform, &e).unwrap(), r.lattice.clone());
            prop_assert_eq!(in_fundamental_domain(&r.lattice.tropicalize(), &r.pol), Ok(true));
            prop_assert_eq!(is_polarization(&r.lattice, &r.pol), Ok(true));
            let again = reduce(&r.lattice, &r.pol).unwrap();
            prop_assert_eq!(again.transform, UnimodularMatrix::identity(g));
            prop_assert!(again.steps.is_empty());
        }
    }
}
