use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical pipelines.
///
/// Variants carry enough context to be reported as warnings in a partial
/// [`InvariantReport`](crate::decomp::InvariantReport).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("root finder did not converge after {iterations} iterations ({} partial roots)", partial.len())]
    NonConvergence {
        iterations: usize,
        partial: Vec<Complex64>,
    },
    #[error("denominator is the zero polynomial")]
    DenominatorZero,
    #[error("pole {pole} lies on the closed unit disk (|pole| = {modulus:.3e})", modulus = pole.norm())]
    PoleOnClosedDisk { pole: Complex64 },
    #[error("evaluation point {0} is a pole")]
    PoleHit(Complex64),
    #[error("compiled symbol has order {order}, above the cap {cap}")]
    DegreeOverflow { order: usize, cap: usize },
    #[error("symbol is constant")]
    ConstantSymbol,
    #[error("unknown builtin symbol `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("point lies on the curve (distance {distance:.3e} below margin {margin:.3e})")]
    PointOnCurve { distance: f64, margin: f64 },
    #[error("adaptive refinement exceeded {cap} segments")]
    RefinementOverflow { cap: usize },
    #[error("zero of the shifted symbol lies on the region boundary")]
    ZeroOnBoundary,
    #[error("pole inside the counting region")]
    PoleInRegion,
    #[error("boundary winding count {winding} disagrees with direct root count {roots}")]
    OracleMismatch { winding: i64, roots: usize },
    #[error("no valid interior sample among {tried} candidates")]
    NoValidSample { tried: usize },

    #[error("root at distance {distance:.3e} from the unit circle is inside the ambiguity band")]
    NumericalAmbiguity { distance: f64 },
    #[error("no reliable fiber among {tried} sampled base points")]
    NoReliableFiber { tried: usize },

    #[error("continuation jumped to another branch near t = {t:.6}")]
    BranchCollision { t: f64 },
    #[error("critical point of the symbol on the unit circle near angle {theta:.6}")]
    CriticalPointOnCircle { theta: f64 },
    #[error("continued local inverse does not close into a circle map ({reason})")]
    NoClosure { reason: String },
    #[error("no reliable base fiber for the symmetry group")]
    FiberUnreliable,

    #[error("rational fit is ill-conditioned (singular value ratio {ratio:.3e})")]
    FitIllConditioned { ratio: f64 },
    #[error("fitted Blaschke zero {0} lies outside the unit disk")]
    ZeroOutsideDisk(Complex64),
    #[error("fitted map is not unimodular on the circle (deviation {0:.3e})")]
    NotUnimodular(f64),
    #[error("cofactor interpolation is rank deficient (singular value ratio {ratio:.3e})")]
    InterpolationRankDeficient { ratio: f64 },
    #[error("composition residual {residual:.3e} exceeds {limit:.3e}")]
    ResidualTooLarge { residual: f64, limit: f64 },
    #[error("order identity violated: {0}")]
    EqualityViolation(String),
}
