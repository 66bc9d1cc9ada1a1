use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a frame: {0}")]
    NotAFrame(String),

    #[error("not a tight frame: max deviation of the frame operator from the identity is {deviation:e} (tolerance {tolerance:e})")]
    NotTight { deviation: f64, tolerance: f64 },

    #[error("basis is not orthonormal: max Gram deviation {deviation:e} (tolerance {tolerance:e})")]
    NotOrthonormal { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("degenerate facet: {0}")]
    DegenerateFacet(String),

    #[error("generator {0} does not correspond to a facet")]
    NoFacet(usize),

    #[error("planar only: operation requires k = 2, got k = {0}")]
    PlanarOnly(usize),

    #[error("polygon is not cyclic: vertex norm spread {spread:e} exceeds tolerance {tolerance:e}")]
    NotCyclic { spread: f64, tolerance: f64 },

    #[error("combinatorial size {size} exceeds cap {cap}")]
    TooLarge { size: u128, cap: u128 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("not exactly representable: {0}")]
    Inexact(String),
}

pub type Result<T> = std::result::Result<T, Error>;
