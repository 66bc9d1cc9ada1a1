use serde::{Deserialize, Serialize};

/// Numerical thresholds shared across the crate.
///
/// `balance` and `cyclic` are relative; `centroid` is an absolute distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-norm deviation of a frame operator from the identity.
    pub tight: f64,
    /// Max-norm deviation of a basis Gram matrix from the identity.
    pub orth: f64,
    /// Eigenvalue floor used as the rank test for frame operators.
    pub rank: f64,
    /// Vertex feasibility and deduplication threshold; also the relative
    /// measure below which a face counts as degenerate.
    pub geom: f64,
    /// Unit normals (and relative offsets) closer than this are treated as
    /// parallel (coincident) hyperplanes.
    pub parallel: f64,
    /// Loose vertex–hyperplane incidence slack, used only to prune the face
    /// search; too large costs time, never accuracy.
    pub incidence: f64,
    pub centroid: f64,
    pub balance: f64,
    pub cyclic: f64,
    /// Allowed violation of the squared-length interval.
    pub length: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tight: 1e-10,
            orth: 1e-12,
            rank: 1e-12,
            geom: 1e-9,
            parallel: 1e-8,
            incidence: 1e-7,
            centroid: 1e-6,
            balance: 1e-6,
            cyclic: 1e-6,
            length: 1e-8,
        }
    }
}

impl Tolerances {
    /// Same geometry thresholds, with every condition check set to `tol`.
    pub fn with_condition_tol(mut self, tol: f64) -> Self {
        self.centroid = tol;
        self.balance = tol;
        self.cyclic = tol;
        self
    }
}
