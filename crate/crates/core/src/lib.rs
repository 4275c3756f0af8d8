//! Exact entropy functionals for integer/rational random vectors, extremal
//! witness search, certified bound combination, and finite-field Fourier
//! toolkits, plus the set-theoretic pipeline connecting them.
//!
//! The crate is organized around five subsystems:
//!
//! * [`dist`] — finitely supported joint distributions over rational vectors
//!   with an exact entropy calculus (conditioning, marginals, pushforwards,
//!   Shearer covers).
//! * [`ratios`] / [`search`] — the entropy ratio functionals whose suprema
//!   define the constants `beta(R)`, and a deterministic annealing search for
//!   witness distributions certifying lower bounds.
//! * [`bounds`] — the delta transform, product combination of one-dimensional
//!   bounds into d-dimensional ones, telescoping coefficients, and Minkowski
//!   dimension bounds for Besicovitch-type sets.
//! * [`fourier`] — expectation-normalized discrete Fourier analysis on the
//!   prime field, bump functions, additive energy, and dilated-sumset scans.
//! * [`pointset`] / [`typical`] / [`freiman`] / [`progression`] /
//!   [`pipeline`] — point-set graphs with projections, typical-set
//!   construction, randomized embedding into a prime field, random arithmetic
//!   progressions, and the end-to-end reduction gluing them together.
//!
//! All randomness is seeded; every value is reproducible bit-for-bit from its
//! inputs. Probabilities are exact rationals throughout; entropies are the
//! only floating-point quantities and are always in bits.

use thiserror::Error;

pub mod bounds;
pub mod dist;
pub mod fourier;
pub mod freiman;
pub mod pipeline;
pub mod pointset;
pub mod progression;
pub mod ratios;
pub mod rational;
pub mod rset;
pub mod search;
pub mod typical;
pub mod verify;

pub use dist::{CoordSet, JointDist, ShearerReport};
pub use rational::Rat;
pub use rset::RSet;

/// Comparison tolerance for entropy quantities (bits), fixed repo-wide.
pub const ENTROPY_TOL: f64 = 1e-9;

/// Comparison tolerance for closed-form identities in the formula layer.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probabilities must be strictly positive, got {0}")]
    NonPositiveProbability(String),

    #[error("probabilities sum to {got}, expected exactly 1")]
    ProbabilitySum { got: String },

    #[error("atom key has {got} coordinates, distribution has dimension {expected}")]
    KeyLength { expected: usize, got: usize },

    #[error("empty coordinate set")]
    EmptyCoordSet,

    #[error("coordinate {index} out of range for dimension {dim}")]
    CoordOutOfRange { index: usize, dim: usize },

    #[error("coordinate sets overlap at index {index}")]
    OverlappingCoordSets { index: usize },

    #[error("coefficient vector has length {got}, distribution has dimension {expected}")]
    CoeffLength { expected: usize, got: usize },

    #[error("coordinate {coord} is covered by {have} members of the family, need at least {need}")]
    ShearerCoverage { coord: usize, have: usize, need: usize },

    #[error("empty point set")]
    EmptyPointSet,

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("rational set has {got} elements, need at least {need}")]
    RSetTooSmall { need: usize, got: usize },

    #[error("element has {got} coordinates, set has dimension {expected}")]
    RSetDim { expected: usize, got: usize },

    #[error("set does not affinely span dimension {need}: affine dimension is {got}")]
    NonSpanning { need: usize, got: usize },

    #[error("distribution has dimension {got}, functional needs {expected}")]
    DistDim { expected: usize, got: usize },

    #[error("every projection entropy vanishes: the ratio witness is unbounded")]
    UnboundedWitness,

    #[error("bound carries no replayable witness")]
    MissingWitness,

    #[error("witness replay gives {replayed}, stored value is {stored}")]
    WitnessMismatch { stored: f64, replayed: f64 },

    #[error("invalid search configuration: {0}")]
    BadSearchConfig(String),

    #[error("beta = {beta} out of range ({lo}, {hi}]")]
    BetaOutOfRange { beta: f64, lo: f64, hi: f64 },

    #[error("need n >= d >= 1, got n = {n}, d = {d}")]
    BadDimensionPair { n: u32, d: u32 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("modulus too large: {0} exceeds the 10^6 trial-division cap")]
    ModulusTooLarge(u64),

    #[error("moduli differ: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("residue must be nonzero mod {p}")]
    ZeroResidue { p: u64 },

    #[error("interval length {m} out of range for modulus {p}")]
    BadInterval { m: u64, p: u64 },

    #[error("bump needs m >= d, got m = {m}, d = {d} (inner interval empty)")]
    BumpTooNarrow { m: u64, d: u64 },

    #[error("set has {got} elements, scan requires at least {need} (= ceil(p/m))")]
    ScanSetTooSmall { need: u64, got: u64 },

    #[error("denominator {den} is not invertible mod {p}")]
    NonInvertibleDenominator { den: String, p: u64 },

    #[error("support is not integral: found coordinate {0}")]
    NonIntegralSupport(String),

    #[error("enumeration of {size} tuples exceeds the 10^7 guard")]
    GuardExceeded { size: u128 },

    #[error("radix {base_m} too small for carry-free flattening, need > {need}")]
    RadixTooSmall { base_m: i64, need: i64 },

    #[error("integer overflow while flattening with radix {base_m}")]
    FlattenOverflow { base_m: i64 },

    #[error("prime {p} too small: embedding needs p >= {need}")]
    PrimeTooSmall { p: u64, need: u64 },

    #[error("prime {p} divides projection coefficient {value}")]
    PrimeDividesCoefficient { p: u64, value: String },

    #[error(
        "embedding failed after {retries} retries (last good fraction {last_fraction:.3})"
    )]
    EmbedRetriesExhausted { retries: u32, last_fraction: f64 },

    #[error("fiber coordinate y = 0 rejected: distinct interval indices no longer give distinct differences")]
    ZeroFiber,

    #[error("y = {y} is not in the vertical projection of the graph")]
    FiberMissing { y: u64 },

    #[error("pipeline stage {stage} produced an empty set after {attempts} attempts")]
    EmptyStage { stage: &'static str, attempts: u32 },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
