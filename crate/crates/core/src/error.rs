//! Error type shared by every module of the crate.

/// Crate-wide error enum.
///
/// Validation failures carry enough context to diagnose the offending input
/// (measured defects, the tolerance that was applied, required resources).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("hermiticity defect {defect:.3e} exceeds tolerance {tol:.0e}; refusing to symmetrize")]
    NotHermitian { defect: f64, tol: f64 },

    #[error(
        "dense dimension {dim} exceeds cap {cap}; a dense complex matrix of this size \
         needs {bytes} bytes"
    )]
    DimensionCap { dim: usize, cap: usize, bytes: u128 },

    #[error("dimension overflow: {d}^{sites} does not fit in usize")]
    DimensionOverflow { d: usize, sites: u32 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("site {site} lies outside the window [-{n}, {n}]")]
    SiteOutsideWindow { site: i64, n: u32 },

    #[error("block [{left}, {right}] does not fit in the window [-{n}, {n}]")]
    BlockOutsideWindow { left: i64, right: i64, n: u32 },

    #[error("interaction range {range} exceeds the window of {window} sites")]
    RangeExceedsWindow { range: u32, window: u32 },

    #[error("eigendecomposition failed: {0}")]
    Eig(String),

    #[error("function value {value} at eigenvalue {at} is not finite")]
    NonFiniteFunctionValue { value: f64, at: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver inconclusive: {0}")]
    Inconclusive(String),

    #[error("joint boxes over m >= 2 observables require a commuting model")]
    ModelRequired,

    #[error(
        "mesh resolution {resolution} is too coarse to certify 2-eta density \
         (worst certified gap {gap:.3e} exceeds {limit:.3e})"
    )]
    MeshTooCoarse {
        resolution: f64,
        gap: f64,
        limit: f64,
    },

    #[error("epsilon {epsilon} must be positive and strictly below C = {c}")]
    EpsilonVsC { epsilon: f64, c: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
