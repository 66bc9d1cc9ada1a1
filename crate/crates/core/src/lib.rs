//! Central sections of the cube [-1,1]^n, studied through tight frames.
//!
//! A tight frame S = {v_1, …, v_n} ⊂ R^k (Σ v_i v_iᵀ = I_k) is the projection
//! of the standard basis of R^n onto a k-dimensional subspace H, and the
//! section [-1,1]^n ∩ H is isometric to the polytope
//! Q(S) = {x ∈ R^k : |⟨x, v_i⟩| ≤ 1 for all i}.

pub mod acceptance;
pub mod bounds;
pub mod conditions;
pub mod error;
pub mod exact;
pub mod frame;
pub mod linalg;
pub mod optimizer;
pub mod polytope;
pub mod tolerance;

pub use error::{Error, Result};
pub use frame::{Frame, Subspace, TightFrame};
pub use linalg::SymMatrix;
pub use tolerance::Tolerances;
