//! Frames and tight frames in R^k, their frame operators, whitening, the
//! rank-one determinant identity, and the correspondence between tight frames
//! and k-dimensional subspaces of R^n.

use std::ops::Deref;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm, SymMatrix};
use crate::tolerance::Tolerances;

/// Ordered n-tuple of vectors spanning R^k. Zero vectors are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameFile", into = "FrameFile")]
pub struct Frame {
    k: usize,
    // vector i occupies data[i*k..(i+1)*k]
    data: Vec<f64>,
}

/// On-disk frame schema: `{"n": .., "k": .., "vectors": [[..]; n]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameFile {
    pub n: usize,
    pub k: usize,
    pub vectors: Vec<Vec<f64>>,
    /// Path of the run manifest that produced this file, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

impl TryFrom<FrameFile> for Frame {
    type Error = Error;

    fn try_from(file: FrameFile) -> Result<Self> {
        if file.vectors.len() != file.n {
            return Err(Error::DimensionMismatch(format!(
                "header says n = {} but {} vectors given",
                file.n,
                file.vectors.len()
            )));
        }
        Frame::new(file.k, file.vectors)
    }
}

impl From<Frame> for FrameFile {
    fn from(frame: Frame) -> Self {
        FrameFile {
            n: frame.n(),
            k: frame.k(),
            vectors: frame.to_vecs(),
            manifest: None,
        }
    }
}

impl Frame {
    /// Validates dimensions and the spanning condition with default tolerances.
    pub fn new(k: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerances(k, vectors, &Tolerances::default())
    }

    pub fn with_tolerances(k: usize, vectors: Vec<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("k must be at least 1".into()));
        }
        if vectors.len() < k {
            return Err(Error::NotAFrame(format!(
                "{} vectors cannot span R^{k}",
                vectors.len()
            )));
        }
        let mut data = Vec::with_capacity(k * vectors.len());
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "vector {i} has length {}, expected {k}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("vector {i} has a non-finite entry")));
            }
            data.extend_from_slice(v);
        }
        Self::from_flat(k, data, tol)
    }

    /// `data` holds the vectors back to back.
    pub fn from_flat(k: usize, data: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if k == 0 || data.len() % k != 0 {
            return Err(Error::DimensionMismatch(format!(
                "flat data of length {} does not split into vectors of length {k}",
                data.len()
            )));
        }
        let frame = Frame { k, data };
        frame.check_spans(tol)?;
        Ok(frame)
    }

    fn check_spans(&self, tol: &Tolerances) -> Result<()> {
        let eig = self.operator().eigenvalues();
        let max = eig.iter().copied().fold(0.0, f64::max);
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > tol.rank * max.max(1.0)) {
            return Err(Error::NotAFrame(format!(
                "vectors do not span R^{} (smallest frame operator eigenvalue {min:e})",
                self.k
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.k
    }

    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.k)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.vectors().map(<[f64]>::to_vec).collect()
    }

    pub fn norms_sq(&self) -> Vec<f64> {
        self.vectors().map(|v| dot(v, v)).collect()
    }

    /// A_S = Σ v_i v_iᵀ.
    pub fn operator(&self) -> SymMatrix {
        SymMatrix::sum_of_outer(self.k, self.vectors())
    }

    /// n×n Gram matrix ⟨v_i, v_j⟩, the O(k)-invariant fingerprint of a frame.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| dot(self.vector(i), self.vector(j)))
    }

    /// k×n matrix whose columns are the frame vectors.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.k, self.n(), &self.data)
    }

    /// Applies a linear map to every vector.
    pub fn mapped(&self, map: &SymMatrix, tol: &Tolerances) -> Result<Frame> {
        let data = self.vectors().flat_map(|v| map.apply(v)).collect();
        Frame::from_flat(self.k, data, tol)
    }

    /// Whether two frames agree up to an orthogonal transform of R^k.
    pub fn congruent(&self, other: &Frame, tol: f64) -> bool {
        self.n() == other.n()
            && self.k == other.k
            && (self.gram() - other.gram()).amax() <= tol
    }
}

/// A frame whose frame operator is the identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "FrameFile")]
pub struct TightFrame(Frame);

impl From<TightFrame> for FrameFile {
    fn from(t: TightFrame) -> Self {
        t.0.into()
    }
}

impl TightFrame {
    pub fn new(frame: Frame, tol: &Tolerances) -> Result<Self> {
        let deviation = frame.operator().identity_deviation();
        if deviation > tol.tight || !deviation.is_finite() {
            return Err(Error::NotTight {
                deviation,
                tolerance: tol.tight,
            });
        }
        Ok(TightFrame(frame))
    }

    pub fn from_vecs(k: usize, vectors: Vec<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        Self::new(Frame::with_tolerances(k, vectors, tol)?, tol)
    }

    pub fn as_frame(&self) -> &Frame {
        &self.0
    }

    pub fn into_frame(self) -> Frame {
        self.0
    }
}

impl Deref for TightFrame {
    type Target = Frame;

    fn deref(&self) -> &Frame {
        &self.0
    }
}

impl<'de> Deserialize<'de> for TightFrame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let frame = Frame::deserialize(d)?;
        TightFrame::new(frame, &Tolerances::default()).map_err(serde::de::Error::custom)
    }
}

/// The frame operator A_S = Σ v_i ⊗ v_i.
pub fn frame_operator(frame: &Frame) -> SymMatrix {
    frame.operator()
}

/// Returns B = A_S^{-1/2} together with the tight frame {B v_i}.
pub fn whiten(frame: &Frame, tol: &Tolerances) -> Result<(SymMatrix, TightFrame)> {
    let a = frame.operator();
    let floor = tol.rank * a.trace().max(1.0);
    let b = a.inverse_sqrt(floor).map_err(|_| {
        Error::NotAFrame("frame operator has an eigenvalue below the rank floor".into())
    })?;
    let tight = TightFrame::new(frame.mapped(&b, tol)?, tol)?;
    Ok((b, tight))
}

/// Sign of the rank-one update in [`det_rank_one`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateSign {
    Plus,
    Minus,
}

/// det(A ± u uᵀ) = (1 ± |A^{-1/2} u|²) det A, for positive definite A.
pub fn det_rank_one(a: &SymMatrix, u: &[f64], sign: UpdateSign) -> Result<f64> {
    if u.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "u has length {}, matrix is {}×{}",
            u.len(),
            a.dim(),
            a.dim()
        )));
    }
    let b = a.inverse_sqrt(0.0)?;
    let w = b.apply(u);
    let s = dot(&w, &w);
    let det_a = a.det();
    Ok(match sign {
        UpdateSign::Plus => (1.0 + s) * det_a,
        UpdateSign::Minus => {
            if s >= 1.0 {
                log::warn!("A - u⊗u is not positive definite (|A^-1/2 u|² = {s})");
            }
            (1.0 - s) * det_a
        }
    })
}

/// First-order coefficient of √det A_{S + tX} at t = 0 for tight S: Σ⟨x_i, v_i⟩.
pub fn sqrt_det_first_order(frame: &TightFrame, perturbation: &[Vec<f64>]) -> Result<f64> {
    check_perturbation(frame, perturbation)?;
    Ok(frame
        .vectors()
        .zip(perturbation)
        .map(|(v, x)| dot(v, x))
        .sum())
}

/// Finite-difference companion of [`sqrt_det_first_order`]:
/// (√det A_{S+tX} − √det A_S) / t.
pub fn sqrt_det_slope(frame: &Frame, perturbation: &[Vec<f64>], t: f64) -> Result<f64> {
    check_perturbation(frame, perturbation)?;
    let mut a = SymMatrix::zeros(frame.k());
    let mut moved = vec![0.0; frame.k()];
    for (v, x) in frame.vectors().zip(perturbation) {
        for j in 0..frame.k() {
            moved[j] = v[j] + t * x[j];
        }
        a.add_outer(&moved, 1.0);
    }
    let base = frame.operator().det().sqrt();
    Ok((a.det().max(0.0).sqrt() - base) / t)
}

fn check_perturbation(frame: &Frame, perturbation: &[Vec<f64>]) -> Result<()> {
    if perturbation.len() != frame.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} perturbation vectors for a frame of {}",
            perturbation.len(),
            frame.n()
        )));
    }
    if let Some(i) = perturbation.iter().position(|x| x.len() != frame.k()) {
        return Err(Error::DimensionMismatch(format!(
            "perturbation vector {i} has wrong length"
        )));
    }
    Ok(())
}

/// Elementary frame edits.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameEdit {
    /// Drop the vector at an index.
    RemoveIndex(usize),
    /// Drop the first occurrence of a vector (exact match within 1e-15).
    RemoveVector(Vec<f64>),
    Substitute { index: usize, vector: Vec<f64> },
    Append(Vec<f64>),
}

pub fn frame_edit(frame: &Frame, edit: &FrameEdit, tol: &Tolerances) -> Result<Frame> {
    let k = frame.k();
    let mut vecs = frame.to_vecs();
    let check_len = |v: &[f64]| {
        if v.len() == k {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "edit vector has length {}, expected {k}",
                v.len()
            )))
        }
    };
    match edit {
        FrameEdit::RemoveIndex(i) => {
            if *i >= vecs.len() {
                return Err(Error::Invalid(format!("index {i} out of range")));
            }
            vecs.remove(*i);
        }
        FrameEdit::RemoveVector(v) => {
            check_len(v)?;
            let pos = vecs
                .iter()
                .position(|w| w.iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-15))
                .ok_or_else(|| Error::Invalid("vector not present in frame".into()))?;
            vecs.remove(pos);
        }
        FrameEdit::Substitute { index, vector } => {
            check_len(vector)?;
            let slot = vecs
                .get_mut(*index)
                .ok_or_else(|| Error::Invalid(format!("index {index} out of range")))?;
            slot.clone_from(vector);
        }
        FrameEdit::Append(v) => {
            check_len(v)?;
            vecs.push(v.clone());
        }
    }
    Frame::with_tolerances(k, vecs, tol)
}

/// k-dimensional subspace of R^n given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    n: usize,
    k: usize,
    /// Basis vectors, row-major k×n.
    basis: Vec<f64>,
}

impl Subspace {
    pub fn new(n: usize, basis: Vec<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        let k = basis.len();
        if k == 0 || k > n {
            return Err(Error::Invalid(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
        }
        if basis.iter().any(|b| b.len() != n) {
            return Err(Error::DimensionMismatch("basis vectors must have length n".into()));
        }
        let mut deviation: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((dot(&basis[i], &basis[j]) - target).abs());
            }
        }
        if deviation > tol.orth {
            return Err(Error::NotOrthonormal {
                deviation,
                tolerance: tol.orth,
            });
        }
        Ok(Subspace {
            n,
            k,
            basis: basis.concat(),
        })
    }

    /// Orthonormalizes an arbitrary spanning set of the subspace.
    pub fn from_spanning(n: usize, vectors: &[Vec<f64>], tol: &Tolerances) -> Result<Self> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch("spanning vectors must have length n".into()));
            }
            let mut w = v.clone();
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let len = norm(&w);
            if len > 1e-10 * norm(v).max(1.0) {
                w.iter_mut().for_each(|x| *x /= len);
                basis.push(w);
            }
        }
        Self::new(n, basis, tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis_vector(&self, i: usize) -> &[f64] {
        &self.basis[i * self.n..(i + 1) * self.n]
    }

    /// Orthogonal projector of R^n onto the subspace.
    pub fn projection(&self) -> DMatrix<f64> {
        let b = DMatrix::from_row_slice(self.k, self.n, &self.basis);
        b.transpose() * b
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.n == other.n && self.k == other.k && (self.projection() - other.projection()).amax() <= tol
    }
}

/// H = row span of the k×n matrix of a tight frame; its rows are orthonormal.
pub fn subspace_from_frame(frame: &TightFrame, tol: &Tolerances) -> Result<Subspace> {
    let (k, n) = (frame.k(), frame.n());
    let rows = (0..k)
        .map(|r| (0..n).map(|i| frame.vector(i)[r]).collect())
        .collect();
    // tightness bounds the row Gram deviation by tol.tight
    let relaxed = Tolerances {
        orth: tol.orth.max(tol.tight),
        ..*tol
    };
    Subspace::new(n, rows, &relaxed)
}

/// Projections of the standard basis of R^n onto H, in H's basis coordinates.
pub fn frame_from_subspace(subspace: &Subspace, tol: &Tolerances) -> Result<TightFrame> {
    let (k, n) = (subspace.k, subspace.n);
    let data = (0..n)
        .flat_map(|i| (0..k).map(move |r| (r, i)))
        .map(|(r, i)| subspace.basis[r * n + i])
        .collect();
    let relaxed = Tolerances {
        tight: tol.tight.max(tol.orth),
        ..*tol
    };
    TightFrame::new(Frame::from_flat(k, data, tol)?, &relaxed)
}

/// Cross product of k−1 vectors in R^k: ⟨x, y⟩ = det(x_1, …, x_{k−1}, y).
pub fn cross_product(vectors: &[&[f64]]) -> Vec<f64> {
    let k = vectors.len() + 1;
    let mut out = vec![0.0; k];
    let mut m = vec![0.0; k * k];
    for (j, slot) in out.iter_mut().enumerate() {
        for (c, v) in vectors.iter().enumerate() {
            m[c * k..(c + 1) * k].copy_from_slice(v);
        }
        let last = &mut m[(k - 1) * k..];
        last.fill(0.0);
        last[j] = 1.0;
        *slot = linalg::det_in_place(&mut m.clone(), k);
    }
    out
}

/// Default cap on the number of cross products [`cross_product_frame`] will form.
pub const CROSS_PRODUCT_CAP: u128 = 1_000_000;

pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Cross products [v_L] over all (k−1)-subsets L of [n], lexicographic in L.
pub fn cross_product_frame(frame: &TightFrame, cap: u128) -> Result<Vec<Vec<f64>>> {
    let (n, k) = (frame.n(), frame.k());
    if k < 2 {
        return Err(Error::Invalid("cross products need k ≥ 2".into()));
    }
    let size = binomial(n, k - 1);
    if size > cap {
        return Err(Error::TooLarge { size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    for subset in Combinations::new(n, k - 1) {
        let vs: Vec<&[f64]> = subset.iter().map(|&i| frame.vector(i)).collect();
        out.push(cross_product(&vs));
    }
    Ok(out)
}

/// Lexicographic r-subsets of 0..n.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, r: usize) -> Self {
        Combinations {
            n,
            current: (0..r).collect(),
            done: r > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self.current.clone();
        let r = self.current.len();
        let mut i = r;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.n - r + i {
                self.current[i] += 1;
                for j in i + 1..r {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(item)
    }
}

/// Frame of n standard Gaussian vectors in R^k; resamples on the (measure
/// zero) event that they fail to span.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Frame {
    let tol = Tolerances::default();
    loop {
        let data: Vec<f64> = (0..n * k).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(f) = Frame::from_flat(k, data, &tol) {
            return f;
        }
    }
}

/// Whitened Gaussian frame: a random point of the tight-frame manifold.
pub fn random_tight_frame<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> TightFrame {
    loop {
        let f = random_frame(rng, n, k);
        if let Ok((_, t)) = whiten(&f, &Tolerances::default()) {
            return t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn hexagonal() -> Frame {
        let r = (2.0f64 / 3.0).sqrt();
        let vecs = (0..3)
            .map(|j| {
                let a = j as f64 * std::f64::consts::PI / 3.0;
                vec![r * a.cos(), r * a.sin()]
            })
            .collect();
        Frame::new(2, vecs).unwrap()
    }

    #[test]
    fn frame_operator_examples() {
        let s = Frame::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(frame_operator(&s).identity_deviation() < 1e-15);
        let s = Frame::new(2, vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let a = frame_operator(&s);
        assert_eq!((a.get(0, 0), a.get(0, 1), a.get(1, 1)), (2.0, 1.0, 1.0));
        assert!(frame_operator(&hexagonal()).identity_deviation() < 1e-15);
    }

    #[test]
    fn rank_deficient_input_is_not_a_frame() {
        let err = Frame::new(2, vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::NotAFrame(_)));
        assert!(matches!(
            Frame::new(3, vec![vec![1.0, 0.0, 0.0]]),
            Err(Error::NotAFrame(_))
        ));
        assert!(matches!(
            Frame::new(2, vec![vec![1.0, 0.0], vec![0.0]]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn whiten_diagonal_and_identity() {
        let s = Frame::new(2, vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (b, t) = whiten(&s, &tol()).unwrap();
        assert!(b.max_abs_diff(&SymMatrix::from_diag(&[0.5, 1.0])) < 1e-14);
        assert!(t.operator().identity_deviation() < 1e-14);

        let h = hexagonal();
        let (b, t) = whiten(&h, &tol()).unwrap();
        assert!(b.identity_deviation() < 1e-14);
        assert!(t.congruent(&h, 1e-14));
    }

    #[test]
    fn whiten_after_removal_is_a_stretch() {
        // Removing v = (a, 0) from a tight frame gives
        // B = diag((1 - a²)^{-1/2}, 1).
        let a = 0.6;
        let rest = (1.0 - a * a) / 2.0;
        let s = TightFrame::from_vecs(
            2,
            vec![
                vec![a, 0.0],
                vec![rest.sqrt(), std::f64::consts::FRAC_1_SQRT_2],
                vec![-rest.sqrt(), std::f64::consts::FRAC_1_SQRT_2],
            ],
            &tol(),
        )
        .unwrap();
        let removed = frame_edit(&s, &FrameEdit::RemoveIndex(0), &tol()).unwrap();
        let (b, _) = whiten(&removed, &tol()).unwrap();
        let expected = SymMatrix::from_diag(&[(1.0 - a * a).powf(-0.5), 1.0]);
        assert!(b.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn det_rank_one_examples() {
        let i2 = SymMatrix::identity(2);
        assert!((det_rank_one(&i2, &[1.0, 0.0], UpdateSign::Plus).unwrap() - 2.0).abs() < 1e-15);
        let d = SymMatrix::from_diag(&[4.0, 1.0]);
        assert!((det_rank_one(&d, &[1.0, 0.0], UpdateSign::Plus).unwrap() - 5.0).abs() < 1e-14);
        assert!(det_rank_one(&i2, &[1.0, 0.0], UpdateSign::Minus).unwrap().abs() < 1e-15);
        assert!(matches!(
            det_rank_one(&SymMatrix::from_diag(&[1.0, -1.0]), &[1.0, 0.0], UpdateSign::Plus),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn sqrt_det_first_order_examples() {
        let h = TightFrame::new(hexagonal(), &tol()).unwrap();
        let same: Vec<Vec<f64>> = h.to_vecs();
        assert!((sqrt_det_first_order(&h, &same).unwrap() - 2.0).abs() < 1e-14);
        let perp: Vec<Vec<f64>> = h.vectors().map(|v| vec![-v[1], v[0]]).collect();
        assert!(sqrt_det_first_order(&h, &perp).unwrap().abs() < 1e-15);
        let e = TightFrame::from_vecs(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], &tol()).unwrap();
        let x = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        assert!((sqrt_det_first_order(&e, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(sqrt_det_first_order(&e, &x[..1]).is_err());
    }

    #[test]
    fn frame_edit_examples() {
        let s = Frame::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let r = frame_edit(&s, &FrameEdit::RemoveVector(vec![0.0, 1.0]), &tol()).unwrap();
        assert_eq!(r.to_vecs(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);

        let v = vec![0.3, -0.4];
        let app = frame_edit(&s, &FrameEdit::Append(v.clone()), &tol()).unwrap();
        let mut expected = s.operator();
        expected.add_outer(&v, 1.0);
        assert!(app.operator().max_abs_diff(&expected) < 1e-15);

        let h = hexagonal();
        let w = vec![0.1, 0.7];
        let sub = frame_edit(
            &h,
            &FrameEdit::Substitute { index: 1, vector: w.clone() },
            &tol(),
        )
        .unwrap();
        let mut expected = SymMatrix::identity(2);
        expected.add_outer(h.vector(1), -1.0);
        expected.add_outer(&w, 1.0);
        assert!(sub.operator().max_abs_diff(&expected) < 1e-14);

        let two = Frame::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            frame_edit(&two, &FrameEdit::RemoveIndex(0), &tol()),
            Err(Error::NotAFrame(_))
        ));
    }

    #[test]
    fn subspace_frame_correspondence() {
        // H = {x1 = x2 = x3, x4 = x5}
        let h = Subspace::from_spanning(
            5,
            &[vec![1.0, 1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0, 1.0]],
            &tol(),
        )
        .unwrap();
        let f = frame_from_subspace(&h, &tol()).unwrap();
        let lens = f.norms_sq();
        for (i, l) in lens.iter().enumerate() {
            let expected = if i < 3 { 1.0 / 3.0 } else { 0.5 };
            assert!((l - expected).abs() < 1e-15, "{i}: {l}");
        }
        assert!((lens.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let g = f.gram();
        assert!((&g * &g - &g).amax() < 1e-14);
        assert!((&g - g.transpose()).amax() == 0.0);
        assert!((g - h.projection()).amax() < 1e-14);

        let back = subspace_from_frame(&f, &tol()).unwrap();
        assert!(back.same_as(&h, 1e-14));

        let coord = Subspace::new(
            4,
            vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]],
            &tol(),
        )
        .unwrap();
        let f = frame_from_subspace(&coord, &tol()).unwrap();
        assert_eq!(f.vector(2), &[0.0, 0.0]);
        assert_eq!(f.vector(0), &[1.0, 0.0]);
    }

    #[test]
    fn non_tight_frame_rejected_by_subspace_conversion() {
        let f = Frame::new(2, vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(TightFrame::new(f, &tol()), Err(Error::NotTight { .. })));
    }

    #[test]
    fn cross_products() {
        assert_eq!(cross_product(&[&[1.0, 2.0]]), vec![-2.0, 1.0]);
        let c = cross_product(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(c, vec![0.0, 0.0, 1.0]);
        let e3 = TightFrame::from_vecs(
            3,
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            &tol(),
        )
        .unwrap();
        let cp = cross_product_frame(&e3, CROSS_PRODUCT_CAP).unwrap();
        assert_eq!(cp.len(), 3);
        let a = SymMatrix::sum_of_outer(3, cp.iter().map(Vec::as_slice));
        assert!(a.identity_deviation() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let big = random_tight_frame(&mut rng, 12, 4);
        assert!(matches!(
            cross_product_frame(&big, 10),
            Err(Error::TooLarge { size: 220, cap: 10 })
        ));
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
        assert_eq!(binomial(12, 3), 220);
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_tight_frame(&mut rng, 6, 3);
        let text = serde_json::to_string(&f).unwrap();
        let back: TightFrame = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"n": 3, "k": 2, "vectors": [[1, 0], [0, 1]]}"#;
        assert!(serde_json::from_str::<Frame>(bad).is_err());
    }
}
