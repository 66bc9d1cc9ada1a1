//! Small dense linear algebra: packed symmetric matrices and the handful of
//! k×k kernels (k ≤ ~6) the geometry code needs on its hot path.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real symmetric k×k matrix. Only the upper triangle is stored, so symmetry
/// holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    k: usize,
    packed: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            packed: vec![0.0; k * (k + 1) / 2],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k);
        for i in 0..k {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from a full matrix, reading the upper triangle only.
    pub fn from_upper(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let k = m.nrows();
        let mut s = Self::zeros(k);
        for i in 0..k {
            for j in i..k {
                s.set(i, j, m[(i, j)]);
            }
        }
        s
    }

    /// Σ u uᵀ over the given vectors.
    pub fn sum_of_outer<'a>(k: usize, vectors: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut m = Self::zeros(k);
        for v in vectors {
            m.add_outer(v, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.k - i * i.saturating_sub(1) / 2 + (j - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[self.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let idx = self.index(i, j);
        self.packed[idx] = value;
    }

    /// self += scale · u uᵀ
    pub fn add_outer(&mut self, u: &[f64], scale: f64) {
        debug_assert_eq!(u.len(), self.k);
        let mut idx = 0;
        for i in 0..self.k {
            for j in i..self.k {
                self.packed[idx] += scale * u[i] * u[j];
                idx += 1;
            }
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.k, |i, j| self.get(i, j))
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.get(i, j) * u[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise |self − other|.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.k, other.k);
        self.packed
            .iter()
            .zip(&other.packed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from the identity.
    pub fn identity_deviation(&self) -> f64 {
        self.max_abs_diff(&Self::identity(self.k))
    }

    pub fn det(&self) -> f64 {
        let mut a = self.to_dmatrix();
        det_in_place(a.as_mut_slice(), self.k)
    }

    pub fn eigen(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        SymmetricEigen::new(self.to_dmatrix())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().eigenvalues.iter().copied().collect()
    }

    /// Applies `f` to the spectrum: Q f(Λ) Qᵀ. Fails if some eigenvalue is
    /// below `floor`.
    pub fn spectral_map(&self, floor: f64, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let eig = self.eigen();
        if eig.eigenvalues.iter().any(|&l| l <= floor) {
            return Err(Error::NotPositiveDefinite);
        }
        let q = &eig.eigenvectors;
        let mapped = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
        Ok(SymMatrix::from_upper(&(q * mapped * q.transpose())))
    }

    /// A^{-1/2} for positive definite A.
    pub fn inverse_sqrt(&self, floor: f64) -> Result<SymMatrix> {
        self.spectral_map(floor, |l| 1.0 / l.sqrt())
    }

    pub fn sqrt(&self, floor: f64) -> Result<SymMatrix> {
        self.spectral_map(floor, f64::sqrt)
    }
}

/// Determinant of a column-major k×k matrix by partial-pivot elimination.
/// Destroys the input.
pub fn det_in_place(a: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        let mut best = a[col * k + col].abs();
        for row in col + 1..k {
            let v = a[col * k + row].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..k {
                a.swap(c * k + col, c * k + piv);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for row in col + 1..k {
            let factor = a[col * k + row] / p;
            if factor != 0.0 {
                for c in col..k {
                    a[c * k + row] -= factor * a[c * k + col];
                }
            }
        }
    }
    det
}

/// Solves `rows · x = rhs` where `rows` holds k row vectors of length k,
/// row-major. Returns `None` when a pivot falls below `rel_tol` times the
/// largest row norm.
pub fn solve_rows(rows: &[&[f64]], rhs: &[f64], rel_tol: f64) -> Option<Vec<f64>> {
    let k = rows.len();
    let mut a: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let mut b = rhs.to_vec();
    let scale = rows
        .iter()
        .map(|r| norm(r))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    for col in 0..k {
        let mut piv = col;
        let mut best = a[col * k + col].abs();
        for row in col + 1..k {
            let v = a[row * k + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best <= rel_tol * scale {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
            }
            b.swap(col, piv);
        }
        let p = a[col * k + col];
        for row in col + 1..k {
            let factor = a[row * k + col] / p;
            if factor != 0.0 {
                for c in col..k {
                    a[row * k + c] -= factor * a[col * k + c];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut s = b[row];
        for c in row + 1..k {
            s -= a[row * k + c] * x[c];
        }
        x[row] = s / a[row * k + row];
    }
    Some(x)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Numerical rank of the rows (each of length `dim`) via singular values,
/// counting those above `tol` times the largest.
pub fn rank_of_rows(rows: &[Vec<f64>], dim: usize, tol: f64) -> usize {
    if rows.is_empty() || dim == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax.max(1.0)).count()
}

/// Volume of the d-simplex spanned by `edges` (d vectors in R^k, d ≤ k):
/// √det(EᵀE) / d!.
pub fn simplex_measure(edges: &[Vec<f64>]) -> f64 {
    let d = edges.len();
    if d == 0 {
        return 1.0;
    }
    let mut gram = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            gram[j * d + i] = dot(&edges[i], &edges[j]);
        }
    }
    let g = det_in_place(&mut gram, d).max(0.0);
    g.sqrt() / factorial(d)
}

pub fn factorial(d: usize) -> f64 {
    (1..=d).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indexing_covers_upper_triangle() {
        let k = 4;
        let mut m = SymMatrix::zeros(k);
        let mut seen = std::collections::HashSet::new();
        for i in 0..k {
            for j in i..k {
                assert!(seen.insert(m.index(i, j)));
                m.set(i, j, (10 * i + j) as f64);
            }
        }
        assert_eq!(seen.len(), k * (k + 1) / 2);
        assert_eq!(m.get(3, 1), 13.0);
        assert_eq!(m.get(1, 3), 13.0);
    }

    #[test]
    fn det_matches_known_values() {
        let mut m = SymMatrix::from_diag(&[4.0, 1.0]);
        assert!((m.det() - 4.0).abs() < 1e-15);
        m.set(0, 1, 1.0);
        assert!((m.det() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_sqrt_of_diagonal() {
        let b = SymMatrix::from_diag(&[4.0, 1.0]).inverse_sqrt(1e-12).unwrap();
        assert!(b.max_abs_diff(&SymMatrix::from_diag(&[0.5, 1.0])) < 1e-14);
        assert!(SymMatrix::from_diag(&[1.0, 0.0]).inverse_sqrt(1e-12).is_err());
    }

    #[test]
    fn solve_rows_and_singular_detection() {
        let r0 = [2.0, 1.0];
        let r1 = [1.0, 3.0];
        let x = solve_rows(&[&r0, &r1], &[1.0, 2.0], 1e-12).unwrap();
        assert!((2.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        let s1 = [4.0, 2.0];
        assert!(solve_rows(&[&r0, &s1], &[1.0, 1.0], 1e-12).is_none());
    }

    #[test]
    fn simplex_measure_triangle() {
        let e = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert!((simplex_measure(&e) - 0.5).abs() < 1e-15);
    }
}
