//! First-order necessary conditions for local maximizers of vol_k Q(S) over
//! tight frames, evaluated as residuals on a candidate frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::linalg::{self, dot, norm};
use crate::polytope::{build_section, facet_centroid, SectionPolytope};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub passed: bool,
    /// Nonnegative; `f64::INFINITY` (serialized as null) when the check
    /// could not be evaluated.
    pub residual: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn from_residual(residual: f64, tolerance: f64) -> Self {
        Self {
            passed: residual <= tolerance,
            residual,
            tolerance,
            note: None,
        }
    }

    fn from_result(r: Result<f64>, tolerance: f64) -> Self {
        match r {
            Ok(res) => Self::from_residual(res, tolerance),
            Err(e) => Self {
                passed: false,
                residual: f64::INFINITY,
                tolerance,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    /// Q(S) is the slab intersection by construction; recorded, not tested.
    pub section_identity: String,
    pub facet_correspondence: CheckResult,
    pub centroid: CheckResult,
    pub facet_balance: CheckResult,
    /// `None` when n ≤ k.
    pub length_bounds: Option<CheckResult>,
    /// Planar sections only.
    pub cyclic: Option<CheckResult>,
    pub tolerances: Tolerances,
}

impl ConditionsReport {
    pub fn passed(&self) -> bool {
        self.checks().all(|(_, c)| c.passed)
    }

    pub fn checks(&self) -> impl Iterator<Item = (&'static str, &CheckResult)> {
        [
            ("facet_correspondence", Some(&self.facet_correspondence)),
            ("centroid", Some(&self.centroid)),
            ("facet_balance", Some(&self.facet_balance)),
            ("length_bounds", self.length_bounds.as_ref()),
            ("cyclic", self.cyclic.as_ref()),
        ]
        .into_iter()
        .filter_map(|(name, c)| c.map(|c| (name, c)))
    }
}

/// Number of generators that are zero or whose hyperplane {⟨x, v_i⟩ = 1}
/// does not meet Q(S) in a facet.
pub fn check_facet_correspondence(frame: &Frame, p: &SectionPolytope) -> usize {
    (0..frame.n())
        .filter(|&i| norm(frame.vector(i)) == 0.0 || p.generator_facets[i].is_none())
        .count()
}

/// max_i |centroid(F_{v_i}) − v_i/|v_i|²|.
pub fn check_centroid(frame: &Frame, p: &SectionPolytope, tol: &Tolerances) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, v) in frame.vectors().enumerate() {
        let f = p.generator_facets[i].ok_or(Error::NoFacet(i))?;
        let c = facet_centroid(&p.facets()[f], tol)?;
        let len2 = dot(v, v);
        let pierce: Vec<f64> = v.iter().map(|x| x / len2).collect();
        worst = worst.max(linalg::dist(&c, &pierce));
    }
    Ok(worst)
}

/// Relative residual of (2/|v|)·vol_{k−1}F_v = d·|v|²·vol_k Q(S), maximized over facets.
pub fn check_facet_balance(p: &SectionPolytope) -> f64 {
    let vol = p.volume();
    p.facets()
        .iter()
        .map(|f| {
            let len = norm(&f.normal);
            let lhs = 2.0 / len * f.measure;
            let rhs = f.multiplicity() as f64 * len * len * vol;
            (lhs - rhs).abs() / rhs
        })
        .fold(0.0, f64::max)
}

/// Relative spread of the vertex norms, (max − min)/mean.
pub fn check_cyclic(p: &SectionPolytope) -> Result<f64> {
    if p.dim() != 2 {
        return Err(Error::PlanarOnly(p.dim()));
    }
    let norms: Vec<f64> = p.vertices().iter().map(|v| norm(v)).collect();
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let max = norms.iter().copied().fold(f64::MIN, f64::max);
    let min = norms.iter().copied().fold(f64::MAX, f64::min);
    Ok((max - min) / mean)
}

/// Interval that |v|² must lie in for every vector of a global maximizer:
/// [2/(n+1), 2/(n−1)] in the plane, [k/(n+k), k/(n−k)] otherwise.
pub fn length_interval(n: usize, k: usize) -> Result<(f64, f64)> {
    if n <= k {
        return Err(Error::Invalid(format!("length bounds need n > k (n = {n}, k = {k})")));
    }
    let (n, k) = (n as f64, k as f64);
    Ok(if k == 2.0 && n >= 3.0 {
        (2.0 / (n + 1.0), 2.0 / (n - 1.0))
    } else {
        (k / (n + k), k / (n - k))
    })
}

/// Largest violation of the squared-length interval.
pub fn check_length_bounds(frame: &Frame) -> Result<f64> {
    let (lo, hi) = length_interval(frame.n(), frame.k())?;
    Ok(frame
        .norms_sq()
        .into_iter()
        .map(|l| (lo - l).max(l - hi).max(0.0))
        .fold(0.0, f64::max))
}

/// Runs every applicable check on Q(S).
pub fn verify(frame: &Frame, tol: &Tolerances) -> Result<ConditionsReport> {
    let p = build_section(frame, tol)?;
    Ok(verify_section(frame, &p, tol))
}

pub fn verify_section(frame: &Frame, p: &SectionPolytope, tol: &Tolerances) -> ConditionsReport {
    let correspondence = check_facet_correspondence(frame, p);
    ConditionsReport {
        section_identity: "holds by construction".into(),
        facet_correspondence: CheckResult::from_residual(correspondence as f64, 0.0),
        centroid: CheckResult::from_result(check_centroid(frame, p, tol), tol.centroid),
        facet_balance: CheckResult::from_residual(check_facet_balance(p), tol.balance),
        length_bounds: (frame.n() > frame.k())
            .then(|| CheckResult::from_result(check_length_bounds(frame), tol.length)),
        cyclic: (p.dim() == 2).then(|| CheckResult::from_result(check_cyclic(p), tol.cyclic)),
        tolerances: *tol,
    }
}
