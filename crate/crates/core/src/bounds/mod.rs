//! Closed-form volume bounds for k-sections of [-1,1]^n and the affine-cube
//! sections that attain the conjectured optimum.

pub mod planar;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, TightFrame};
use crate::polytope::section_volume;
use crate::tolerance::Tolerances;

fn check_dims(n: usize, k: usize) -> Result<()> {
    if k == 0 || n < k {
        return Err(Error::Invalid(format!("need n ≥ k ≥ 1, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// C²(n, k) = ⌈n/k⌉^r ⌊n/k⌋^(k−r) with r = n mod k, as an exact integer.
pub fn c_cube_squared(n: usize, k: usize) -> u128 {
    let (q, r) = (n / k, n % k);
    let ceil = if r == 0 { q } else { q + 1 } as u128;
    ceil.pow(r as u32) * (q as u128).pow((k - r) as u32)
}

/// The conjectured optimal ratio vol_k(section) / 2^k.
pub fn c_cube(n: usize, k: usize) -> f64 {
    (c_cube_squared(n, k) as f64).sqrt()
}

/// Vaaler's lower bound on every k-section: vol □^k = 2^k.
pub fn vaaler_lower(k: usize) -> f64 {
    2f64.powi(k as i32)
}

/// The two upper-bound factors (n/k)^{k/2} and 2^{(n−k)/2}.
pub fn ball_factors(n: usize, k: usize) -> (f64, f64) {
    let (nf, kf) = (n as f64, k as f64);
    ((nf / kf).powf(kf / 2.0), 2f64.powf((nf - kf) / 2.0))
}

pub fn ball_ratio(n: usize, k: usize) -> f64 {
    let (a, b) = ball_factors(n, k);
    a.min(b)
}

/// Upper bound on vol_k(□^n ∩ H): min of the two factors times 2^k.
pub fn ball_upper(n: usize, k: usize) -> f64 {
    ball_ratio(n, k) * vaaler_lower(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub k: usize,
    pub vaaler: f64,
    pub ball_ratio: f64,
    pub ball_upper: f64,
    pub c_cube: f64,
    /// 2^k · C(n, k), the affine-cube volume.
    pub conjectured_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub achieved: Option<f64>,
    /// (achieved − vaaler) / (ball_upper − vaaler); 0 when the interval is a point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<f64>,
}

pub fn bounds_report(n: usize, k: usize, frame: Option<&Frame>, tol: &Tolerances) -> Result<BoundsReport> {
    check_dims(n, k)?;
    let achieved = match frame {
        Some(f) => {
            if f.n() != n || f.k() != k {
                return Err(Error::DimensionMismatch(format!(
                    "frame has n = {}, k = {} but report requested for n = {n}, k = {k}",
                    f.n(),
                    f.k()
                )));
            }
            Some(section_volume(f, tol)?)
        }
        None => None,
    };
    let vaaler = vaaler_lower(k);
    let upper = ball_upper(n, k);
    let position = achieved.map(|v| {
        if upper > vaaler {
            (v - vaaler) / (upper - vaaler)
        } else {
            0.0
        }
    });
    Ok(BoundsReport {
        n,
        k,
        vaaler,
        ball_ratio: ball_ratio(n, k),
        ball_upper: upper,
        c_cube: c_cube(n, k),
        conjectured_max: vaaler * c_cube(n, k),
        achieved,
        position,
    })
}

/// Balanced partition of 0..n into k consecutive blocks; the first n mod k
/// blocks get ⌈n/k⌉ indices.
pub fn balanced_partition(n: usize, k: usize) -> Vec<Vec<usize>> {
    let (q, r) = (n / k, n % k);
    let mut start = 0;
    (0..k)
        .map(|j| {
            let len = q + usize::from(j < r);
            let block = (start..start + len).collect();
            start += len;
            block
        })
        .collect()
}

fn validate_partition(n: usize, k: usize, partition: &[Vec<usize>]) -> Result<()> {
    if partition.len() != k {
        return Err(Error::Invalid(format!("partition has {} parts, need {k}", partition.len())));
    }
    let mut seen = vec![false; n];
    for part in partition {
        if part.is_empty() {
            return Err(Error::Invalid("partition parts must be nonempty".into()));
        }
        for &i in part {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Invalid(format!("index {i} out of range or repeated")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Invalid("partition does not cover every index".into()));
    }
    Ok(())
}

/// Tight frame whose section is an affine cube: the indices in part j all map
/// to ±e_j/√d_j, where d_j is the part size.
pub fn extremal_frame(
    n: usize,
    k: usize,
    partition: Option<&[Vec<usize>]>,
    signs: Option<&[i8]>,
    tol: &Tolerances,
) -> Result<TightFrame> {
    check_dims(n, k)?;
    let default;
    let partition = match partition {
        Some(p) => p,
        None => {
            default = balanced_partition(n, k);
            &default
        }
    };
    validate_partition(n, k, partition)?;
    if let Some(s) = signs {
        if s.len() != n || s.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::Invalid("signs must be n entries of ±1".into()));
        }
    }
    let mut vectors = vec![vec![0.0; k]; n];
    for (j, part) in partition.iter().enumerate() {
        let len = 1.0 / (part.len() as f64).sqrt();
        for &i in part {
            let sign = signs.map_or(1.0, |s| f64::from(s[i]));
            vectors[i][j] = sign * len;
        }
    }
    TightFrame::from_vecs(k, vectors, tol)
}

/// 2^k √(d_1 ⋯ d_k) for the given part sizes.
pub fn affine_cube_volume(part_sizes: &[usize]) -> f64 {
    let prod: f64 = part_sizes.iter().map(|&d| d as f64).product();
    vaaler_lower(part_sizes.len()) * prod.sqrt()
}
