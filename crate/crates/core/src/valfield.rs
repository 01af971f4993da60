//! Monomials `c·t^q` of a rational-valued field and their tropicalization.
//!
//! The valuation is normalized by `val(t) = 1`, so `-log|c·t^q| = q`.

use std::fmt;
use std::ops::Mul;

use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, serde_rational, Rational};

/// A nonzero field element `coeff · t^exp`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    coeff: Rational,
    exp: Rational,
}

impl Monomial {
    pub fn new(coeff: Rational, exp: Rational) -> Result<Self> {
        if coeff.is_zero() {
            return Err(Error::ZeroCoefficient);
        }
        Ok(Monomial { coeff, exp })
    }

    pub fn one() -> Self {
        Monomial {
            coeff: Rational::one(),
            exp: Rational::zero(),
        }
    }

    /// The uniformizer `t`.
    pub fn uniformizer() -> Self {
        Monomial {
            coeff: Rational::one(),
            exp: Rational::one(),
        }
    }

    /// `t^exp` with unit coefficient.
    pub fn power_of_t(exp: Rational) -> Self {
        Monomial {
            coeff: Rational::one(),
            exp,
        }
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn exp(&self) -> &Rational {
        &self.exp
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            coeff: &self.coeff * &other.coeff,
            exp: &self.exp + &other.exp,
        }
    }

    pub fn inv(&self) -> Monomial {
        Monomial {
            coeff: self.coeff.recip(),
            exp: -self.exp.clone(),
        }
    }

    pub fn pow(&self, k: i64) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        let base = if k < 0 { self.coeff.recip() } else { self.coeff.clone() };
        Monomial {
            coeff: Pow::pow(base, k.unsigned_abs()),
            exp: &self.exp * Rational::from_integer(k.into()),
        }
    }

    /// `-log|x|` under `val(t) = 1`.
    pub fn trop(&self) -> Rational {
        self.exp.clone()
    }
}

impl Mul for &Monomial {
    type Output = Monomial;

    fn mul(self, rhs: &Monomial) -> Monomial {
        Monomial::mul(self, rhs)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = format_rational(&self.coeff);
        if self.exp.is_zero() {
            write!(f, "{c}")
        } else if self.coeff.is_one() {
            write!(f, "t^{}", format_rational(&self.exp))
        } else {
            write!(f, "{c}·t^{}", format_rational(&self.exp))
        }
    }
}

pub fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    a.mul(b)
}

pub fn mono_pow(a: &Monomial, k: i64) -> Monomial {
    a.pow(k)
}

pub fn trop(a: &Monomial) -> Rational {
    a.trop()
}

/// A point of `Γ^n = Q^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TropVector(pub Vec<Rational>);

impl TropVector {
    pub fn of(monomials: &[Monomial]) -> Self {
        TropVector(monomials.iter().map(Monomial::trop).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

#[derive(Serialize, Deserialize)]
struct MonomialRepr {
    #[serde(with = "serde_rational")]
    coeff: Rational,
    #[serde(with = "serde_rational")]
    exp: Rational,
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MonomialRepr {
            coeff: self.coeff.clone(),
            exp: self.exp.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MonomialRepr::deserialize(d)?;
        Monomial::new(r.coeff, r.exp).map_err(serde::de::Error::custom)
    }
}
