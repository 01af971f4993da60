//! Exact computations with non-Archimedean analytic tori at the level of
//! their tropical data.
//!
//! The crate is organised bottom-up:
//!
//! - [`valfield`]: monomials `c·t^q` of a rational-valued field and the
//!   tropicalization map.
//! - [`lattice`]: lattice matrices, polarization types, Smith normal form,
//!   theta-section counting and the Appell–Humbert multiplier cocycle.
//! - [`glnz`]: the monomial `GL_g(Z)` action and reduction into a polyhedral
//!   fundamental domain.
//! - [`gammageo`]: definable subsets of `Q^n` cut out by linear constraints
//!   with integer coefficients, and the modified Euler characteristic `χ'`.
//! - [`motclass`]: polynomials in the Lefschetz class `L` and motivic volumes
//!   of polyhedral domains.
//! - [`volume`]: families of polarized tori over a polyhedral base and the
//!   vanishing of their motivic volume, computed directly and fibrewise.
//!
//! All arithmetic is exact; there is no floating point anywhere.

pub mod error;
pub mod gammageo;
pub mod glnz;
pub mod lattice;
pub mod linalg;
pub mod motclass;
pub mod rational;
pub mod valfield;
pub mod volume;

pub use error::{Error, Result};
pub use rational::{Integer, Rational};
