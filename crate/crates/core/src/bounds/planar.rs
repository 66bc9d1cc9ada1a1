//! Planar (k = 2) machinery: central half-angles of cyclic sections, the area
//! identity in terms of them, and the auxiliary functions g, h and q used to
//! rule out maximizers with more than two pairs of edges.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::polytope::SectionPolytope;
use crate::tolerance::Tolerances;

/// Half-angles φ_1..φ_f subtended by one edge from each opposite pair of a
/// cyclic, centrally symmetric polygon, with its circumradius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarAngles {
    pub phi: Vec<f64>,
    pub radius: f64,
}

impl PlanarAngles {
    /// Checks Σφ = π/2 (to 1e-9), φ_i ∈ (0, π/2) and R > 0.
    pub fn new(phi: Vec<f64>, radius: f64) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::Invalid("need at least one angle".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::Invalid("circumradius must be positive".into()));
        }
        if phi.iter().any(|&p| !(p > 0.0 && p < FRAC_PI_2)) {
            return Err(Error::Invalid("half-angles must lie in (0, π/2)".into()));
        }
        let sum: f64 = phi.iter().sum();
        if (sum - FRAC_PI_2).abs() > 1e-9 {
            return Err(Error::Invalid(format!("half-angles sum to {sum}, not π/2")));
        }
        Ok(Self { phi, radius })
    }

    /// The regular 2f-gon of circumradius R.
    pub fn regular(f: usize, radius: f64) -> Result<Self> {
        if f < 2 {
            return Err(Error::Invalid("a centrally symmetric polygon has f ≥ 2".into()));
        }
        Self::new(vec![PI / (2 * f) as f64; f], radius)
    }

    /// Number of edge pairs.
    pub fn f(&self) -> usize {
        self.phi.len()
    }
}

/// Extracts circumradius and half-angles, edges taken clockwise.
pub fn planar_angles(p: &SectionPolytope, tol: &Tolerances) -> Result<PlanarAngles> {
    if p.dim() != 2 {
        return Err(Error::PlanarOnly(p.dim()));
    }
    let norms: Vec<f64> = p.vertices().iter().map(|v| norm(v)).collect();
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let spread = norms.iter().copied().fold(f64::MIN, f64::max) - norms.iter().copied().fold(f64::MAX, f64::min);
    if spread > tol.cyclic * mean {
        return Err(Error::NotCyclic {
            spread: spread / mean,
            tolerance: tol.cyclic,
        });
    }
    let mut facets: Vec<_> = p.facets().iter().collect();
    // clockwise: decreasing polar angle of the outer normal
    facets.sort_by(|a, b| {
        let ta = a.normal[1].atan2(a.normal[0]);
        let tb = b.normal[1].atan2(b.normal[0]);
        tb.total_cmp(&ta)
    });
    let f = facets.len() / 2;
    let phi = facets[..f]
        .iter()
        .map(|facet| {
            let ends: Vec<&Vec<f64>> = facet.vertices.iter().map(|&v| &p.vertices()[v]).collect();
            let (a, b) = farthest(&ends);
            let cross = a[0] * b[1] - a[1] * b[0];
            cross.abs().atan2(dot(a, b)) / 2.0
        })
        .collect();
    PlanarAngles::new(phi, mean)
}

fn farthest<'a>(pts: &[&'a Vec<f64>]) -> (&'a Vec<f64>, &'a Vec<f64>) {
    let mut best = (pts[0], pts[0], -1.0);
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let d = crate::linalg::dist(a, b);
            if d > best.2 {
                best = (a, b, d);
            }
        }
    }
    (best.0, best.1)
}

/// Area of the cyclic polygon: R² Σ sin 2φ_i.
pub fn planar_area(a: &PlanarAngles) -> f64 {
    a.radius * a.radius * a.phi.iter().map(|p| (2.0 * p).sin()).sum::<f64>()
}

/// g(f) = f tan(π / 2f), strictly decreasing towards π/2.
pub fn g(f: f64) -> f64 {
    f * (PI / (2.0 * f)).tan()
}

/// h(n) = 4/(n+1) · √(⌊n/2⌋⌈n/2⌉), extended to real n ≥ 2.
pub fn h(n: f64) -> f64 {
    let half = n / 2.0;
    4.0 / (n + 1.0) * (half.floor() * half.ceil()).sqrt()
}

/// Largest number of edge pairs a planar maximizer can have: the largest
/// f ∈ [2, 64] with g(f) ≥ h(n). Equality is accepted to 1e-12 since
/// g(3) = h(7) exactly.
pub fn claim_bounds(n: usize) -> usize {
    let target = h(n as f64);
    (2..=MAX_EDGE_PAIRS)
        .take_while(|&f| g(f as f64) >= target - 1e-12)
        .last()
        .unwrap_or(1)
}

pub const MAX_EDGE_PAIRS: usize = 64;

/// The three quantities of the pinned-angle isoperimetric chain, divided by R².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricChain {
    /// f sin(π/f): the regular polygon.
    pub regular: f64,
    /// sin 2φ_i + (f−1) sin((π − 2φ_i)/(f−1)): φ_i pinned, others equalized.
    pub pinned: f64,
    /// Σ sin 2φ_j: the polygon itself.
    pub actual: f64,
}

impl IsoperimetricChain {
    pub fn holds(&self, slack: f64) -> bool {
        self.regular >= self.pinned - slack && self.pinned >= self.actual - slack
    }
}

pub fn isoperimetric_chain(a: &PlanarAngles, pinned: usize) -> Result<IsoperimetricChain> {
    let f = a.f();
    if f < 2 {
        return Err(Error::Invalid("isoperimetric chain needs f ≥ 2".into()));
    }
    let p = *a
        .phi
        .get(pinned)
        .ok_or_else(|| Error::Invalid(format!("angle index {pinned} out of range")))?;
    let rest = (f - 1) as f64;
    Ok(IsoperimetricChain {
        regular: f as f64 * (PI / f as f64).sin(),
        pinned: (2.0 * p).sin() + rest * ((PI - 2.0 * p) / rest).sin(),
        actual: a.phi.iter().map(|x| (2.0 * x).sin()).sum(),
    })
}

/// Verifies the isoperimetric chain for pinned angle `pinned` up to 1e-12.
pub fn isoperimetric_check(a: &PlanarAngles, pinned: usize) -> Result<bool> {
    Ok(isoperimetric_chain(a, pinned)?.holds(1e-12))
}

/// q(φ) = cos²φ · sin 2φ.
pub fn q(phi: f64) -> f64 {
    phi.cos().powi(2) * (2.0 * phi).sin()
}
