use std::collections::HashSet;

use proptest::prelude::*;

use super::*;
use crate::linalg::{det_z, mul_z};
use crate::rational::{frac, int, rat};

fn mono(c: i64, e: i64) -> Monomial {
    Monomial::new(rat(c), rat(e)).unwrap()
}

fn t() -> Monomial {
    Monomial::uniformizer()
}

fn pol(rows: &[&[i64]]) -> PolarizationType {
    PolarizationType::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn lat(rows: Vec<Vec<Monomial>>) -> LatticeMatrix {
    LatticeMatrix::new(rows).unwrap()
}

fn trop_lat(rows: &[&[i64]]) -> LatticeMatrix {
    LatticeMatrix::from_trop(&TropMatrix::from_i64(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap())
}

/// Number of cosets of `Z²/(m·A)Z²` and a canonical key per coset, by
/// enumerating the image of `mA` modulo `N = |det mA|`.
struct CosetOracle {
    n: i64,
    image_mod_n: Vec<(i64, i64)>,
}

impl CosetOracle {
    fn new(a: [[i64; 2]; 2], m: i64) -> Self {
        let b = [[a[0][0] * m, a[0][1] * m], [a[1][0] * m, a[1][1] * m]];
        let n = (b[0][0] * b[1][1] - b[0][1] * b[1][0]).abs();
        assert!(n > 0);
        let mut image = HashSet::new();
        for k1 in 0..n {
            for k2 in 0..n {
                image.insert((
                    (b[0][0] * k1 + b[0][1] * k2).rem_euclid(n),
                    (b[1][0] * k1 + b[1][1] * k2).rem_euclid(n),
                ));
            }
        }
        let mut image_mod_n: Vec<_> = image.into_iter().collect();
        image_mod_n.sort();
        CosetOracle { n, image_mod_n }
    }

    fn order(&self) -> usize {
        (self.n * self.n) as usize / self.image_mod_n.len()
    }

    fn key(&self, x: (i64, i64)) -> (i64, i64) {
        self.image_mod_n
            .iter()
            .map(|&(l0, l1)| ((x.0 + l0).rem_euclid(self.n), (x.1 + l1).rem_euclid(self.n)))
            .min()
            .unwrap()
    }
}

/// `r(m) = ∏ r(ε_i)^{m_i} · ∏_{i<j} ⟨ε_i,ε_j⟩^{m_i m_j} · ∏_i ⟨ε_i,ε_i⟩^{m_i(m_i−1)/2}`.
fn multiplier_closed_form(datum: &AppellHumbertDatum, e: &LatticeMatrix, m: &[i64]) -> Monomial {
    let g = e.g();
    let unit = |i: usize| -> Vec<i64> { (0..g).map(|k| i64::from(k == i)).collect() };
    let mut out = Monomial::one();
    for i in 0..g {
        out = out.mul(&datum.basis_multipliers()[i].pow(m[i]));
        let self_pair = pairing(e, datum.pol(), &unit(i), &unit(i)).unwrap();
        out = out.mul(&self_pair.pow(m[i] * (m[i] - 1) / 2));
        for j in i + 1..g {
            let p = pairing(e, datum.pol(), &unit(i), &unit(j)).unwrap();
            out = out.mul(&p.pow(m[i] * m[j]));
        }
    }
    out
}

#[test]
fn tropicalize_examples() {
    assert_eq!(tropicalize_matrix(&lat(vec![vec![t()]])), TropMatrix::from_i64(&[vec![1]]).unwrap());
    let e = lat(vec![vec![t(), mono(1, 0)], vec![mono(1, 0), t()]]);
    assert_eq!(tropicalize_matrix(&e), TropMatrix::from_i64(&[vec![1, 0], vec![0, 1]]).unwrap());
    let e = lat(vec![vec![Monomial::new(rat(2), frac(3, 2)).unwrap()]]);
    assert_eq!(tropicalize_matrix(&e).entries()[0][0], frac(3, 2));
}

#[test]
fn pairing_examples() {
    let e1 = lat(vec![vec![t()]]);
    assert_eq!(pairing(&e1, &pol(&[&[1]]), &[1], &[1]).unwrap(), t());

    let e = lat(vec![
        vec![Monomial::new(frac(2, 3), rat(2)).unwrap(), mono(5, 1)],
        vec![mono(-1, 3), Monomial::new(rat(7), frac(1, 2)).unwrap()],
    ]);
    assert_eq!(pairing(&e, &pol(&[&[2, 1], &[0, 3]]), &[0, 0], &[3, -1]).unwrap(), Monomial::one());

    let e2 = lat(vec![vec![t(), mono(1, 0)], vec![mono(1, 0), t()]]);
    assert_eq!(pairing(&e2, &PolarizationType::identity(2), &[1, 0], &[0, 1]).unwrap(), Monomial::one());
}

#[test]
fn pairing_val_examples() {
    let id = PolarizationType::identity(2);
    let ebar = TropMatrix::from_i64(&[vec![1, 0], vec![0, 1]]).unwrap();
    assert_eq!(pairing_val(&ebar, &id, &[1, 0], &[1, 0]).unwrap(), rat(1));
    assert_eq!(pairing_val(&ebar, &pol(&[&[3, 1], &[1, 2]]), &[0, 0], &[4, 5]).unwrap(), rat(0));
    // (ΛĒa, b) with Ēa = (3, 3), b = (1, 1)
    let ebar = TropMatrix::from_i64(&[vec![2, 1], vec![1, 2]]).unwrap();
    assert_eq!(pairing_val(&ebar, &id, &[1, 1], &[1, 1]).unwrap(), rat(6));
}

#[test]
fn symmetry_examples() {
    let id = PolarizationType::identity(2);
    let sym = lat(vec![vec![t(), mono(3, 2)], vec![mono(3, 2), t()]]);
    assert!(symmetry_check(&sym, &id));
    let asym = lat(vec![vec![t(), mono(1, 0)], vec![t(), t()]]);
    assert!(!symmetry_check(&asym, &id));
    let one = lat(vec![vec![mono(4, -3)]]);
    assert!(symmetry_check(&one, &pol(&[&[7]])));
}

#[test]
fn symmetry_modes_differ_on_coefficients() {
    let id = PolarizationType::identity(2);
    let e = lat(vec![vec![t(), mono(2, 1)], vec![mono(3, 1), t()]]);
    assert!(!symmetry_check_with(&e, &id, SymmetryMode::Full));
    assert!(symmetry_check_with(&e, &id, SymmetryMode::ValuationOnly));
}

#[test]
fn polarization_examples() {
    let id = PolarizationType::identity(2);
    let e = LatticeMatrix::diagonal(&[rat(1), rat(1)]);
    assert_eq!(is_polarization(&e, &id), Ok(true));
    // leading minors of [[1,2],[2,1]] are 1, −3
    assert_eq!(is_polarization(&trop_lat(&[&[1, 2], &[2, 1]]), &id), Ok(false));
    assert_eq!(
        is_polarization(&e, &pol(&[&[1, 1], &[1, 1]])),
        Err(Error::NonInjectivePolarization)
    );
    // ΛĒ symmetric PD although Ē itself is not symmetric
    let e = trop_lat(&[&[1, 0], &[1, 2]]);
    assert_eq!(is_polarization(&e, &pol(&[&[2, 0], &[-1, 1]])), Ok(true));
}

#[test]
fn polarization_positive_on_small_vectors() {
    let cases: Vec<(LatticeMatrix, PolarizationType)> = vec![
        (trop_lat(&[&[2, -1], &[-1, 2]]), PolarizationType::identity(2)),
        (trop_lat(&[&[1, 0], &[1, 2]]), pol(&[&[2, 0], &[-1, 1]])),
        (trop_lat(&[&[3, 1, 0], &[1, 3, 1], &[0, 1, 3]]), PolarizationType::identity(3)),
        (trop_lat(&[&[5, 1], &[1, 1]]), pol(&[&[2, 0], &[0, 2]])),
    ];
    for (e, p) in cases {
        assert_eq!(is_polarization(&e, &p), Ok(true));
        let ebar = e.tropicalize();
        let g = e.g();
        let mut v = vec![-5i64; g];
        loop {
            if v.iter().any(|&x| x != 0) {
                assert!(pairing_val(&ebar, &p, &v, &v).unwrap() > rat(0), "{v:?}");
            }
            let mut i = 0;
            while i < g && v[i] == 5 {
                v[i] = -5;
                i += 1;
            }
            if i == g {
                break;
            }
            v[i] += 1;
        }
    }
}

#[test]
fn sylvester_agrees_with_rational_vectors() {
    // symmetric 2×2 with half-integer entries in [-3, 3]
    let vals: Vec<Rational> = (-6..=6).map(|k| frac(k, 2)).collect();
    let mut samples = Vec::new();
    for p0 in -6i64..=6 {
        for p1 in -6i64..=6 {
            for d in 1..=3 {
                if p0 != 0 || p1 != 0 {
                    samples.push([frac(p0, d), frac(p1, d)]);
                }
            }
        }
    }
    for a in &vals {
        for b in &vals {
            for c in &vals {
                let m = vec![vec![a.clone(), b.clone()], vec![b.clone(), c.clone()]];
                let by_minors = linalg::is_positive_definite(&m);
                let by_vectors = samples
                    .iter()
                    .all(|q| linalg::bilinear(&m, q, q) > rat(0));
                assert_eq!(by_minors, by_vectors, "{m:?}");
            }
        }
    }
}

#[test]
fn rank_examples() {
    assert_eq!(polarization_rank(&PolarizationType::identity(3)), Ok(int(1)));
    assert_eq!(polarization_rank(&pol(&[&[1, 0], &[0, 2]])), Ok(int(2)));
    assert_eq!(polarization_rank(&pol(&[&[2, 1], &[1, 2]])), Ok(int(3)));
    assert_eq!(CosetOracle::new([[1, 0], [0, 2]], 1).order(), 2);
    assert_eq!(CosetOracle::new([[2, 1], [1, 2]], 1).order(), 3);
    assert_eq!(
        polarization_rank(&pol(&[&[2, 4], &[1, 2]])),
        Err(Error::NonInjectivePolarization)
    );
}

#[test]
fn smith_examples() {
    let s = smith_of(&PolarizationType::identity(3));
    assert_eq!(s.u, linalg::identity_z(3));
    assert_eq!(s.v, linalg::identity_z(3));
    assert_eq!(s.d, linalg::identity_z(3));
    assert_eq!(smith_of(&pol(&[&[2, 1], &[1, 2]])).diagonal(), vec![int(1), int(3)]);
    assert_eq!(smith_of(&pol(&[&[2, 0], &[0, 4]])).diagonal(), vec![int(2), int(4)]);
}

#[test]
fn theta_reps_examples() {
    let one = pol(&[&[1]]);
    assert_eq!(theta_coset_reps(&one, 1).unwrap(), vec![vec![int(0)]]);
    let six = theta_coset_reps(&one, 6).unwrap();
    assert_eq!(six, (0..6).map(|k| vec![int(k)]).collect::<Vec<_>>());
    assert_eq!(BigIntLen(six.len()), BigIntLen(6));
    assert_eq!(theta_coset_reps(&PolarizationType::identity(2), 2).unwrap().len(), 4);
    assert_eq!(CosetOracle::new([[1, 0], [0, 1]], 2).order(), 4);
    assert_eq!(
        theta_coset_reps(&pol(&[&[1, 1], &[1, 1]]), 6),
        Err(Error::NonInjectivePolarization)
    );
}

#[derive(Debug, PartialEq)]
struct BigIntLen(usize);

#[test]
fn theta_reps_match_coset_enumeration() {
    for m in [1i64, 2, 3] {
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                for c in -2i64..=2 {
                    for d in -2i64..=2 {
                        if a * d - b * c == 0 {
                            continue;
                        }
                        let p = pol(&[&[a, b], &[c, d]]);
                        let reps = theta_coset_reps(&p, m as u64).unwrap();
                        let oracle = CosetOracle::new([[a, b], [c, d]], m);
                        assert_eq!(reps.len(), oracle.order());
                        let expected = rigidification_dimension(0, &(polarization_rank(&p).unwrap() * int(m * m)));
                        assert_eq!(int(reps.len() as i64), expected);
                        let keys: HashSet<_> = reps
                            .iter()
                            .map(|r| oracle.key((to_i64(&r[0]), to_i64(&r[1]))))
                            .collect();
                        assert_eq!(keys.len(), reps.len(), "redundant representatives for {p:?}");
                    }
                }
            }
        }
    }
}

fn to_i64(z: &Integer) -> i64 {
    crate::rational::to_i64(z).unwrap()
}

#[test]
fn multiplier_examples() {
    let e = lat(vec![vec![t()]]);
    let datum = AppellHumbertDatum::new(pol(&[&[1]]), vec![Monomial::one()]).unwrap();
    assert_eq!(multiplier_extend(&datum, &e, &[0]).unwrap(), Monomial::one());
    assert_eq!(multiplier_extend(&datum, &e, &[2]).unwrap(), t());

    let e2 = lat(vec![vec![mono(2, 3), mono(5, 1)], vec![mono(5, 1), mono(-1, 2)]]);
    let r = vec![mono(3, 1), Monomial::new(frac(1, 2), frac(-1, 3)).unwrap()];
    let datum2 = AppellHumbertDatum::new(PolarizationType::identity(2), r.clone()).unwrap();
    assert_eq!(multiplier_extend(&datum2, &e2, &[1, 0]).unwrap(), r[0]);
    assert_eq!(multiplier_extend(&datum2, &e2, &[0, 1]).unwrap(), r[1]);
}

#[test]
fn multiplier_requires_symmetry() {
    let id = PolarizationType::identity(2);
    let asym = lat(vec![vec![t(), mono(1, 0)], vec![t(), t()]]);
    let datum = AppellHumbertDatum::new(id, vec![t(), t()]).unwrap();
    assert_eq!(multiplier_extend(&datum, &asym, &[1, 1]), Err(Error::AsymmetricPairing));
}

#[test]
fn multiplier_satisfies_cocycle() {
    let e = lat(vec![
        vec![mono(2, 3), mono(5, 1), mono(1, 0)],
        vec![mono(5, 1), mono(-1, 2), mono(3, -1)],
        vec![mono(1, 0), mono(3, -1), mono(7, 4)],
    ]);
    let p = PolarizationType::identity(3);
    assert!(symmetry_check(&e, &p));
    let datum = AppellHumbertDatum::new(p.clone(), vec![mono(3, 1), mono(-2, 0), Monomial::new(frac(1, 3), frac(1, 2)).unwrap()]).unwrap();
    let range = -3i64..=3;
    let vecs: Vec<[i64; 3]> = range
        .clone()
        .flat_map(|a| range.clone().flat_map(move |b| (-3i64..=3).map(move |c| [a, b, c])))
        .collect();
    let r: std::collections::HashMap<[i64; 3], Monomial> = vecs
        .iter()
        .map(|v| (*v, multiplier_extend(&datum, &e, v).unwrap()))
        .collect();
    for v in &vecs {
        assert_eq!(r[v], multiplier_closed_form(&datum, &e, v));
    }
    for m1 in vecs.iter().step_by(5) {
        for m2 in vecs.iter().step_by(7) {
            let sum = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]];
            let lhs = multiplier_extend(&datum, &e, &sum).unwrap();
            let rhs = r[m1].mul(&r[m2]).mul(&pairing(&e, &p, m1, m2).unwrap());
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn multiplier_with_nontrivial_polarization_type() {
    // ΛE symmetric for Λ = [[2,0],[-1,1]] and Ē = [[1,0],[1,2]]
    let e = trop_lat(&[&[1, 0], &[1, 2]]);
    let p = pol(&[&[2, 0], &[-1, 1]]);
    assert!(symmetry_check(&e, &p));
    let datum = AppellHumbertDatum::new(p.clone(), vec![mono(2, 1), mono(1, -1)]).unwrap();
    for a in -3..=3 {
        for b in -3..=3 {
            assert_eq!(
                multiplier_extend(&datum, &e, &[a, b]).unwrap(),
                multiplier_closed_form(&datum, &e, &[a, b])
            );
        }
    }
}

#[test]
fn hilbert_and_riemann_roch() {
    assert_eq!(format_polynomial(&hilbert_polynomial(1, &int(1), HilbertVariant::Paper), "x"), "x");
    assert_eq!(format_polynomial(&hilbert_polynomial(2, &int(3), HilbertVariant::Paper), "x"), "3x^2");
    assert_eq!(format_polynomial(&hilbert_polynomial(2, &int(3), HilbertVariant::Rigidified), "x"), "108x^2");
    for g in 1..6 {
        assert_eq!(hilbert_polynomial(g, &int(2), HilbertVariant::Paper).len() - 1, g);
    }
    assert_eq!(riemann_roch_degree(&int(1)), int(1));
    assert_eq!(riemann_roch_degree(&int(3)), int(9));
    assert_eq!(riemann_roch_degree(&int(-2)), int(4));
    assert_eq!(rigidification_dimension(1, &int(1)), int(6));
}

#[test]
fn json_schemas() {
    let e: LatticeMatrix = serde_json::from_str(
        r#"{"g": 2, "entries": [[{"coeff": 1, "exp": 1}, {"coeff": "1", "exp": "0"}],
                                [{"coeff": 1, "exp": 0}, {"coeff": "2/3", "exp": "1/2"}]]}"#,
    )
    .unwrap();
    assert_eq!(e.tropicalize().entries()[1][1], frac(1, 2));
    assert!(serde_json::from_str::<LatticeMatrix>(r#"{"g": 2, "entries": [[{"coeff": 1, "exp": 1}]]}"#).is_err());
    let p: PolarizationType = serde_json::from_str(r#"{"g": 2, "entries": [[2, 1], [1, 2]]}"#).unwrap();
    assert_eq!(p, pol(&[&[2, 1], &[1, 2]]));
    let bare: PolarizationType = serde_json::from_str("[[2, 1], [1, 2]]").unwrap();
    assert_eq!(bare, p);
    assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"g":2,"entries":[[2,1],[1,2]]}"#);
}

fn arb_small_matrix(g: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::vec(proptest::collection::vec(-4i64..=4, g), g)
}

fn arb_monomial() -> impl Strategy<Value = Monomial> {
    ((-5i64..=5).prop_filter("nonzero", |c| *c != 0), 1i64..4, -6i64..=6, 1i64..4)
        .prop_map(|(c, cd, e, ed)| Monomial::new(frac(c, cd), frac(e, ed)).unwrap())
}

fn arb_lattice(g: usize) -> impl Strategy<Value = LatticeMatrix> {
    proptest::collection::vec(proptest::collection::vec(arb_monomial(), g), g)
        .prop_map(|rows| LatticeMatrix::new(rows).unwrap())
}

fn arb_symmetric_lattice(g: usize) -> impl Strategy<Value = LatticeMatrix> {
    proptest::collection::vec(arb_monomial(), g * (g + 1) / 2).prop_map(move |upper| {
        let mut rows = vec![vec![Monomial::one(); g]; g];
        let mut k = 0;
        for i in 0..g {
            for j in i..g {
                rows[i][j] = upper[k].clone();
                rows[j][i] = upper[k].clone();
                k += 1;
            }
        }
        LatticeMatrix::new(rows).unwrap()
    })
}

proptest! {
    #[test]
    fn trop_of_pairing_is_pairing_val(
        e in arb_lattice(3),
        p in arb_small_matrix(3),
        a in proptest::collection::vec(-3i64..=3, 3),
        b in proptest::collection::vec(-3i64..=3, 3),
    ) {
        let p = PolarizationType::new(p).unwrap();
        let lhs = pairing(&e, &p, &a, &b).unwrap().trop();
        let rhs = pairing_val(&e.tropicalize(), &p, &a, &b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn symmetric_pairing_is_symmetric(
        e in arb_symmetric_lattice(3),
        a in proptest::collection::vec(-3i64..=3, 3),
        b in proptest::collection::vec(-3i64..=3, 3),
    ) {
        let id = PolarizationType::identity(3);
        prop_assert!(symmetry_check(&e, &id));
        prop_assert_eq!(pairing(&e, &id, &a, &b).unwrap(), pairing(&e, &id, &b, &a).unwrap());
    }

    #[test]
    fn smith_is_sound(g in 1usize..=4, seed in proptest::collection::vec(-9i64..=9, 16)) {
        let a: Vec<Vec<i64>> = (0..g).map(|i| seed[i * g..(i + 1) * g].to_vec()).collect();
        let z = linalg::from_i64(&a);
        let s = smith(&z);
        prop_assert_eq!(mul_z(&mul_z(&s.u, &z), &s.v), s.d.clone());
        prop_assert!(det_z(&s.u).abs().is_one() && det_z(&s.v).abs().is_one());
        prop_assert_eq!(s.invariant_product(), det_z(&z).abs());
    }
}
