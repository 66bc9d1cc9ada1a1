//! Exact arithmetic for frames whose entries are signed square roots of
//! rationals, such as the affine-cube frames. Squared volumes of
//! parallelotope sections come out as exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bounds::balanced_partition;
use crate::error::{Error, Result};
use crate::polytope::SectionPolytope;

/// sign · √square, with square ≥ 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtRational {
    pub sign: i8,
    pub square: BigRational,
}

impl SqrtRational {
    pub fn zero() -> Self {
        Self {
            sign: 0,
            square: BigRational::zero(),
        }
    }

    pub fn new(sign: i8, square: BigRational) -> Self {
        if square.is_zero() {
            Self::zero()
        } else {
            Self { sign, square }
        }
    }

    /// Exact product when r·s is the square of a rational.
    pub fn mul(&self, other: &SqrtRational) -> Result<BigRational> {
        if self.sign == 0 || other.sign == 0 {
            return Ok(BigRational::zero());
        }
        let root = rational_sqrt(&(&self.square * &other.square))?;
        Ok(if self.sign * other.sign > 0 { root } else { -root })
    }

    pub fn to_f64(&self) -> f64 {
        let sq = ratio_to_f64(&self.square);
        f64::from(self.sign) * sq.sqrt()
    }
}

fn rational_sqrt(x: &BigRational) -> Result<BigRational> {
    let (num, den) = (x.numer(), x.denom());
    let (rn, rd) = (num.sqrt(), den.sqrt());
    if &(&rn * &rn) != num || &(&rd * &rd) != den {
        return Err(Error::Inexact(format!("{x} is not the square of a rational")));
    }
    Ok(BigRational::new(rn, rd))
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    // numerators and denominators here stay far below 2^53
    let to = |b: &BigInt| b.to_string().parse::<f64>().unwrap_or(f64::NAN);
    to(x.numer()) / to(x.denom())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactFrame {
    pub k: usize,
    pub vectors: Vec<Vec<SqrtRational>>,
}

impl ExactFrame {
    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn inner(&self, i: usize, j: usize) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (a, b) in self.vectors[i].iter().zip(&self.vectors[j]) {
            acc += a.mul(b)?;
        }
        Ok(acc)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(SqrtRational::to_f64).collect())
            .collect()
    }
}

/// Exact form of the affine-cube frame: index i in part j maps to ±e_j/√d_j.
pub fn exact_extremal_frame(n: usize, k: usize, partition: Option<&[Vec<usize>]>) -> ExactFrame {
    let default;
    let partition = match partition {
        Some(p) => p,
        None => {
            default = balanced_partition(n, k);
            &default
        }
    };
    let mut vectors = vec![vec![SqrtRational::zero(); k]; n];
    for (j, part) in partition.iter().enumerate() {
        let sq = BigRational::new(BigInt::one(), BigInt::from(part.len()));
        for &i in part {
            vectors[i][j] = SqrtRational::new(1, sq.clone());
        }
    }
    ExactFrame { k, vectors }
}

pub fn det(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let k = m.len();
    let mut det = BigRational::one();
    for col in 0..k {
        let Some(piv) = (col..k).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..k {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &p;
            for c in col..k {
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}

/// Exact vol_k² of a section that is a parallelotope (exactly k pairs of
/// facets): 4^k / det(Gram of one generator per facet pair). The facet
/// structure is read from the floating-point build `p` of the same frame.
pub fn parallelotope_volume_squared(frame: &ExactFrame, p: &SectionPolytope) -> Result<BigRational> {
    let k = frame.k;
    if p.facets().len() != 2 * k {
        return Err(Error::Invalid(format!(
            "section has {} facets, a parallelotope has {}",
            p.facets().len(),
            2 * k
        )));
    }
    // F and −F carry the same generator indices with opposite signs
    let mut reps: Vec<usize> = p
        .facets()
        .iter()
        .map(|f| f.normal_indices.iter().map(|s| s.index).min().unwrap_or(usize::MAX))
        .collect();
    reps.sort_unstable();
    reps.dedup();
    if reps.len() != k {
        return Err(Error::Invalid("could not pick one generator per facet pair".into()));
    }
    let mut gram = vec![vec![BigRational::zero(); k]; k];
    for a in 0..k {
        for b in 0..k {
            gram[a][b] = frame.inner(reps[a], reps[b])?;
        }
    }
    let d = det(gram);
    if !d.is_positive() {
        return Err(Error::Invalid("facet normals are linearly dependent".into()));
    }
    let four_k = BigRational::from_integer(BigInt::from(4).pow(k as u32));
    Ok(four_k / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Frame;
    use crate::polytope::build_section;
    use crate::tolerance::Tolerances;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn sqrt_products() {
        let a = SqrtRational::new(1, r(1, 3));
        let b = SqrtRational::new(-1, r(3, 4));
        assert_eq!(a.mul(&b).unwrap(), r(-1, 2));
        let c = SqrtRational::new(1, r(1, 2));
        assert!(matches!(a.mul(&c), Err(Error::Inexact(_))));
        assert_eq!(SqrtRational::zero().mul(&c).unwrap(), r(0, 1));
    }

    #[test]
    fn rational_det() {
        let m = vec![vec![r(1, 2), r(1, 3)], vec![r(1, 4), r(1, 5)]];
        assert_eq!(det(m), r(1, 10) - r(1, 12));
        assert_eq!(det(vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]]), r(-1, 1));
    }

    #[test]
    fn extremal_five_two_exact() {
        let tol = Tolerances::default();
        let ex = exact_extremal_frame(5, 2, None);
        let f = Frame::new(2, ex.to_f64()).unwrap();
        let p = build_section(&f, &tol).unwrap();
        let v2 = parallelotope_volume_squared(&ex, &p).unwrap();
        assert_eq!(v2, r(96, 1));
    }
}
