//! Classes in the subring `Z[L]` of the Grothendieck ring of varieties, and
//! motivic volumes `χ'(Δ)·(L−1)^n` of polyhedral domains `trop^{-1}(Δ)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::gammageo::{chi_prime, DefinableSet};
use crate::rational::{to_i64, Integer};

/// `Σ coeffs[i]·L^i` without trailing zeros; the zero class has no
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MotClass {
    coeffs: Vec<Integer>,
}

impl MotClass {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        MotClass { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn zero() -> Self {
        MotClass { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Integer::one())
    }

    pub fn constant(c: Integer) -> Self {
        Self::new(vec![c])
    }

    /// The Lefschetz class `L = [A^1]`.
    pub fn lefschetz() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero class.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn pow(&self, k: u32) -> MotClass {
        (0..k).fold(MotClass::one(), |acc, _| &acc * self)
    }

    pub fn scale(&self, c: &Integer) -> MotClass {
        MotClass::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Value of the polynomial at `L = x`.
    pub fn eval(&self, x: &Integer) -> Integer {
        self.coeffs.iter().rev().fold(Integer::zero(), |acc, c| acc * x + c)
    }

    /// `Some(q)` with `self = q·d` when `d` divides `self` in `Z[L]`.
    pub fn div_exact(&self, d: &MotClass) -> Option<MotClass> {
        let dd = d.degree()?;
        let lead = &d.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return if self.is_zero() { Some(MotClass::zero()) } else { None };
        }
        let mut q = vec![Integer::zero(); rem.len() - dd];
        for i in (0..q.len()).rev() {
            let top = &rem[i + dd];
            if (top % lead) != Integer::zero() {
                return None;
            }
            let f = top / lead;
            for (j, c) in d.coeffs.iter().enumerate() {
                rem[i + j] -= &f * c;
            }
            q[i] = f;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(MotClass::new(q))
        } else {
            None
        }
    }
}

/// `(L − 1)^n`, the class of the split torus `G_m^n`.
pub fn class_of_torus(n: u32) -> MotClass {
    MotClass::from_i64(&[-1, 1]).pow(n)
}

pub fn mot_add(a: &MotClass, b: &MotClass) -> MotClass {
    a + b
}

pub fn mot_mul(a: &MotClass, b: &MotClass) -> MotClass {
    a * b
}

pub fn mot_pow(a: &MotClass, k: u32) -> MotClass {
    a.pow(k)
}

/// `χ'(Δ)·(L−1)^n`.
pub fn vol_polyhedral(delta: &DefinableSet) -> Result<MotClass> {
    let chi = chi_prime(delta)?;
    Ok(class_of_torus(delta.dim() as u32).scale(&chi))
}

impl Add for &MotClass {
    type Output = MotClass;

    fn add(self, other: &MotClass) -> MotClass {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Integer::zero();
        MotClass::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + other.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

impl Neg for &MotClass {
    type Output = MotClass;

    fn neg(self) -> MotClass {
        MotClass::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &MotClass {
    type Output = MotClass;

    fn sub(self, other: &MotClass) -> MotClass {
        self + &(-other)
    }
}

impl Mul for &MotClass {
    type Output = MotClass;

    fn mul(self, other: &MotClass) -> MotClass {
        if self.is_zero() || other.is_zero() {
            return MotClass::zero();
        }
        let mut out = vec![Integer::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        MotClass::new(out)
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for MotClass {
            type Output = MotClass;

            fn $m(self, other: MotClass) -> MotClass {
                (&self).$m(&other)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl fmt::Display for MotClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if i == 0 || !mag.is_one() {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => f.write_str("L")?,
                _ => write!(f, "L^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MotRepr {
    poly: Vec<serde_json::Value>,
}

impl Serialize for MotClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MotRepr {
            poly: self
                .coeffs
                .iter()
                .map(|c| match to_i64(c) {
                    Some(v) => serde_json::Value::from(v),
                    None => serde_json::Value::from(c.to_string()),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MotClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MotRepr::deserialize(d)?;
        let coeffs = r
            .poly
            .into_iter()
            .map(|v| match v {
                serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string().parse::<Integer>().unwrap()),
                serde_json::Value::String(s) => s.trim().parse::<Integer>().map_err(serde::de::Error::custom),
                other => Err(serde::de::Error::custom(format!("not an integer coefficient: {other}"))),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(MotClass::new(coeffs))
    }
}
