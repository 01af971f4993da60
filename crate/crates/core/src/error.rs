use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every domain error the library can raise.
///
/// [`Error::name`] gives a stable machine-readable identifier; the CLI prints
/// it verbatim, so renaming a variant is a breaking change.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("monomial coefficient must be nonzero")]
    ZeroCoefficient,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polarization type has determinant zero")]
    NonInjectivePolarization,
    #[error("pairing is not symmetric for this lattice and polarization type")]
    AsymmetricPairing,
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: String },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("truncated Euler characteristic did not stabilize ({small} at l={l_small}, {large} at l={l_large})")]
    NonStabilized {
        small: i64,
        large: i64,
        l_small: String,
        l_large: String,
    },
    #[error("lattice map is not symmetric after applying the polarization type")]
    SymmetryViolation,
    #[error("form is not positive definite at base point ({witness})")]
    NotPositiveDefiniteAt { witness: String },
    #[error("cannot certify positivity along recession direction ({direction})")]
    UnboundedUnverifiable { direction: String },
    #[error("total space is not polyhedral: row {row} of the lattice map is not a scalar multiple of a fixed vector")]
    NonPolyhedralTotalSpace { row: usize },
    #[error("fibre class is not a multiple of the torus class")]
    NonToricFiberClass,
    #[error("malformed input at line {line}, column {column}: {message}")]
    MalformedInput {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::ZeroCoefficient => "ZeroCoefficient",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonInjectivePolarization => "NonInjectivePolarization",
            Error::AsymmetricPairing => "AsymmetricPairing",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::NotUnimodular { .. } => "NotUnimodular",
            Error::SingularMatrix => "SingularMatrix",
            Error::NonStabilized { .. } => "NonStabilized",
            Error::SymmetryViolation => "SymmetryViolation",
            Error::NotPositiveDefiniteAt { .. } => "NotPositiveDefiniteAt",
            Error::UnboundedUnverifiable { .. } => "UnboundedUnverifiable",
            Error::NonPolyhedralTotalSpace { .. } => "NonPolyhedralTotalSpace",
            Error::NonToricFiberClass => "NonToricFiberClass",
            Error::MalformedInput { .. } => "MalformedInput",
        }
    }

    pub fn malformed(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::MalformedInput {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn is_malformed_input(&self) -> bool {
        matches!(self, Error::MalformedInput { .. })
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
