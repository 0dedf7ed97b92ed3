use crate::rational::ParseRationalError;

/// Errors raised by the geometry, function and measure layers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bilinear form is not symmetric")]
    NotSymmetric,
    #[error("bilinear form is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular")]
    Singular,
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
    #[error("complexes have incompatible periods")]
    IncompatiblePeriods,
    #[error("complex is not a level-0 barycentric triangulation: {0}")]
    NotBarycentric(String),
    #[error("no certified perturbation found within {halvings} halvings")]
    EpsilonSearchExhausted { halvings: u32 },
    #[error("function is not certified strongly convex")]
    NotCertified,
    #[error("test function level {test} is finer than function level {function}")]
    IncompatibleLevels { test: u32, function: u32 },
    #[error("no common refinement between test function and measure atoms")]
    NoCommonRefinement,
    #[error("affine map is not injective on an atom")]
    NotInjective,
    #[error("image volume is irrational; use the Monte Carlo pushforward")]
    IrrationalVolume,
    #[error("box radius {0} wraps around the torus")]
    DeltaTooLarge(String),
    #[error("no bump vanishing on the 1/{denominator} grid up to level {max_level}")]
    WitnessLevelTooCoarse { denominator: u64, max_level: u32 },
    #[error("face is not diagonal: {0}")]
    MalformedDiagonalFace(String),
    #[error("affine map does not send the source lattice into the target lattice")]
    NotIntegral,
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
