//! Polytopes cut out by halfspaces {⟨x, w⟩ ≤ 1}, and in particular the cube
//! section Q(S) = ⋂ {|⟨x, v_i⟩| ≤ 1} generated by a frame.
//!
//! Vertices come from brute-force enumeration of k-subsets of the distinct
//! bounding hyperplanes. Face measures and first moments use Lasserre's
//! recursion on the halfspace description, vol_d F = (1/d) Σ_j h_j vol_{d−1} F_j,
//! which varies continuously when hyperplanes nearly coincide. Vertex
//! incidences only prune the recursion. A separate coning triangulation built
//! from incidences gives an independent volume check.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Combinations, Frame};
use crate::linalg::{self, dot, norm};
use crate::tolerance::Tolerances;

/// A generator index with the sign of the hyperplane it supports:
/// `sign = +1` for {⟨x, v_i⟩ = 1}, `-1` for {⟨x, v_i⟩ = −1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignedIndex {
    pub index: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetRecord {
    /// Generators whose hyperplane contains this facet.
    pub normal_indices: Vec<SignedIndex>,
    /// Scaled outer normal w with F ⊂ {⟨x, w⟩ = 1}.
    pub normal: Vec<f64>,
    /// Indices into the polytope's vertex list.
    pub vertices: Vec<usize>,
    /// (k−1)-dimensional volume.
    pub measure: f64,
    pub centroid: Vec<f64>,
}

impl FacetRecord {
    /// Number of generators corresponding to this facet.
    pub fn multiplicity(&self) -> usize {
        self.normal_indices
            .iter()
            .map(|s| s.index)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Distance from the origin to the facet hyperplane, 1/|w|.
    pub fn height(&self) -> f64 {
        1.0 / norm(&self.normal)
    }

    /// Volume of the pyramid co{0, F}.
    pub fn pyramid_volume(&self) -> f64 {
        self.measure * self.height() / self.normal.len() as f64
    }
}

/// Bounded polytope {x : ⟨x, w_j⟩ ≤ 1 for all j}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polytope {
    k: usize,
    halfspaces: Vec<Vec<f64>>,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<FacetRecord>,
    volume: f64,
    #[serde(skip)]
    tol: Tolerances,
}

/// Distinct bounding hyperplane with the halfspaces that share it.
struct Plane {
    normal: Vec<f64>,
    members: Vec<usize>,
}

impl Polytope {
    /// Builds P(W). The caller guarantees that P(W) is bounded; zero normals
    /// impose no constraint.
    pub fn from_halfspaces(k: usize, halfspaces: Vec<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        Self::build(k, halfspaces, tol, |j| SignedIndex { index: j, sign: 1 })
    }

    fn build(
        k: usize,
        halfspaces: Vec<Vec<f64>>,
        tol: &Tolerances,
        label: impl Fn(usize) -> SignedIndex,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        if let Some(j) = halfspaces.iter().position(|w| w.len() != k) {
            return Err(Error::DimensionMismatch(format!("halfspace {j} has wrong length")));
        }
        let planes = group_planes(&halfspaces, tol.parallel);
        let (vertices, _) = enumerate_vertices(k, &planes, tol);
        if vertices.len() < k + 1 {
            return Err(Error::NotAFrame("halfspaces do not bound a full-dimensional polytope".into()));
        }

        // Loose incidences only prune the face search.
        let loose = incidences(&planes, &vertices, None, tol.incidence);

        let mut solver = FaceSolver {
            k,
            incidences: &loose,
            parallel: tol.parallel,
            facets: HashMap::new(),
        };
        let root = Face {
            set: Vec::new(),
            origin: vec![0.0; k],
            basis: (0..k).map(|i| unit(k, i)).collect(),
            constraints: planes
                .iter()
                .enumerate()
                .map(|(p, plane)| {
                    let len = norm(&plane.normal);
                    Constraint {
                        plane: p,
                        normal: plane.normal.iter().map(|x| x / len).collect(),
                        offset: 1.0 / len,
                    }
                })
                .collect(),
            vertices: (0..vertices.len()).collect(),
        };
        let (volume, _) = solver.measure(&root);

        // A group of planes
        // merged as coincident shares one facet on its tightest plane.
        let mut found: Vec<(&Vec<usize>, f64, &Vec<f64>)> = solver
            .facets
            .iter()
            .map(|(key, (m, moment))| (&key[0], *m, moment))
            .collect();
        found.sort_by(|a, b| a.0.cmp(b.0));
        let max_measure = found.iter().map(|f| f.1).fold(0.0, f64::max);
        let mut facets: Vec<FacetRecord> = Vec::new();
        for (group, measure, moment) in found {
            if measure <= tol.geom * max_measure.max(1.0) {
                continue;
            }
            let p = *group
                .iter()
                .max_by(|a, b| norm(&planes[**a].normal).total_cmp(&norm(&planes[**b].normal)))
                .expect("nonempty group");
            let mut normal_indices: Vec<SignedIndex> = group
                .iter()
                .flat_map(|&q| planes[q].members.iter().map(|&j| label(j)))
                .collect();
            normal_indices.sort();
            facets.push(FacetRecord {
                normal_indices,
                normal: planes[p].normal.clone(),
                vertices: loose[p].clone(),
                measure,
                centroid: moment.iter().map(|m| m / measure).collect(),
            });
        }

        Ok(Polytope {
            k,
            halfspaces,
            vertices,
            facets,
            volume,
            tol: *tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn halfspaces(&self) -> &[Vec<f64>] {
        &self.halfspaces
    }

    /// Pyramid decomposition: Σ_F (1/k)·dist(0, aff F)·vol_{k−1}(F), summed
    /// over every bounding hyperplane (slivers below the facet threshold
    /// included).
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Volume from the simplicial triangulation obtained by coning every
    /// facet simplex to the origin; independent of the facet measures.
    /// Reliable for polytopes without nearly coincident facet hyperplanes.
    pub fn triangulated_volume(&self) -> f64 {
        let k = self.k;
        let planes = group_planes(&self.halfspaces, self.tol.parallel);
        let (vertices, defining) = enumerate_vertices(k, &planes, &self.tol);
        // Strict incidences: the defining planes plus a tight slack.
        let strict = incidences(&planes, &vertices, Some(&defining), STRICT_INCIDENCE);
        let lattice = Lattice {
            vertices: &vertices,
            incidences: &strict,
            geom: STRICT_INCIDENCE,
        };
        let mut simplices = Vec::new();
        let mut seen: BTreeSet<&[usize]> = BTreeSet::new();
        for (p, verts) in strict.iter().enumerate() {
            if verts.len() < k || lattice.affine_dim(verts) != k - 1 || !seen.insert(verts) {
                continue;
            }
            simplices.extend(lattice.triangulate(verts, k - 1, &mut vec![p]));
        }
        let mut total = 0.0;
        let mut m = vec![0.0; self.k * self.k];
        for s in &simplices {
            for (c, p) in s.iter().enumerate() {
                m[c * self.k..(c + 1) * self.k].copy_from_slice(p);
            }
            total += linalg::det_in_place(&mut m, self.k).abs();
        }
        total / linalg::factorial(self.k)
    }

    /// Facet whose hyperplane is {⟨x, w⟩ = 1}, if that hyperplane supports a facet.
    pub fn facet_with_normal(&self, w: &[f64], tol: f64) -> Option<usize> {
        let scale = norm(w).max(1.0);
        self.facets
            .iter()
            .position(|f| linalg::dist(&f.normal, w) <= tol * scale)
    }

    /// Rebuilds with every halfspace of facet `facet` replaced by `f(w)`.
    fn rebuilt_with(&self, facet: usize, tol: &Tolerances, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Polytope> {
        let target = &self.facets[facet].normal;
        let scale = norm(target).max(1.0);
        let hs = self
            .halfspaces
            .iter()
            .map(|w| {
                if linalg::dist(w, target) <= tol.geom * scale {
                    f(w)
                } else {
                    w.clone()
                }
            })
            .collect();
        Polytope::from_halfspaces(self.k, hs, tol)
    }

    /// Polytope with the facet's hyperplane moved outward by distance `h`.
    pub fn with_shifted_facet(&self, facet: usize, h: f64, tol: &Tolerances) -> Result<Polytope> {
        self.rebuilt_with(facet, tol, |w| {
            let s = 1.0 / (1.0 + h * norm(w));
            w.iter().map(|x| x * s).collect()
        })
    }

    /// Polytope with the facet normal w replaced by w + t·u.
    pub fn with_rotated_facet(&self, facet: usize, u: &[f64], t: f64, tol: &Tolerances) -> Result<Polytope> {
        self.rebuilt_with(facet, tol, |w| w.iter().zip(u).map(|(a, b)| a + t * b).collect())
    }
}

/// Incidence slack for the triangulation check.
const STRICT_INCIDENCE: f64 = 1e-11;

/// For each plane, the (sorted) vertices lying on it within `slack`, plus
/// those it helped define.
fn incidences(
    planes: &[Plane],
    vertices: &[Vec<f64>],
    defining: Option<&[BTreeSet<usize>]>,
    slack: f64,
) -> Vec<Vec<usize>> {
    planes
        .iter()
        .enumerate()
        .map(|(p, plane)| {
            let scale = norm(&plane.normal);
            vertices
                .iter()
                .enumerate()
                .filter(|(i, x)| {
                    defining.is_some_and(|d| d[*i].contains(&p))
                        || (dot(x, &plane.normal) - 1.0).abs() <= slack * (1.0 + norm(x) * scale)
                })
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

/// Groups halfspaces whose unit normals and offsets agree to `parallel`.
fn group_planes(halfspaces: &[Vec<f64>], parallel: f64) -> Vec<Plane> {
    let mut planes: Vec<Plane> = Vec::new();
    for (j, w) in halfspaces.iter().enumerate() {
        let len = norm(w);
        if len <= parallel * parallel {
            continue;
        }
        match planes.iter_mut().find(|p| {
            let plen = norm(&p.normal);
            let (o, po) = (1.0 / len, 1.0 / plen);
            (o - po).abs() <= parallel * o.max(po)
                && p.normal.iter().zip(w).map(|(a, b)| (a / plen - b / len).powi(2)).sum::<f64>().sqrt() <= parallel
        }) {
            Some(p) => p.members.push(j),
            None => planes.push(Plane {
                normal: w.clone(),
                members: vec![j],
            }),
        }
    }
    planes
}

/// Vertices of the polytope, each with the planes whose intersection
/// produced it (merged over duplicates).
fn enumerate_vertices(k: usize, planes: &[Plane], tol: &Tolerances) -> (Vec<Vec<f64>>, Vec<BTreeSet<usize>>) {
    let ones = vec![1.0; k];
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut defining: Vec<BTreeSet<usize>> = Vec::new();
    let mut rows: Vec<&[f64]> = Vec::with_capacity(k);
    for subset in Combinations::new(planes.len(), k) {
        rows.clear();
        rows.extend(subset.iter().map(|&p| planes[p].normal.as_slice()));
        let Some(x) = linalg::solve_rows(&rows, &ones, 1e-12) else {
            continue;
        };
        let xn = norm(&x);
        let feasible = planes
            .iter()
            .all(|p| dot(&x, &p.normal) <= 1.0 + tol.geom * (1.0 + xn * norm(&p.normal)));
        if !feasible {
            continue;
        }
        let merge = tol.geom * xn.max(1.0);
        match vertices.iter().position(|v| linalg::dist(v, &x) <= merge) {
            Some(i) => defining[i].extend(subset.iter().copied()),
            None => {
                vertices.push(x);
                defining.push(subset.iter().copied().collect());
            }
        }
    }
    (vertices, defining)
}

/// Halfspace ⟨n, y⟩ ≤ offset in a face's local coordinates, |n| = 1.
#[derive(Clone)]
struct Constraint {
    plane: usize,
    normal: Vec<f64>,
    offset: f64,
}

/// Relatively open region of the flat origin + span(basis) cut out by
/// `constraints`; `set` lists the planes the flat lies on, grouped by the
/// planes that were merged as coincident when it was reached.
struct Face {
    set: Vec<Vec<usize>>,
    origin: Vec<f64>,
    basis: Vec<Vec<f64>>,
    constraints: Vec<Constraint>,
    vertices: Vec<usize>,
}

struct FaceSolver<'a> {
    k: usize,
    incidences: &'a [Vec<usize>],
    parallel: f64,
    /// Measure and first moment ∫x (ambient coordinates) of each facet.
    facets: HashMap<Vec<Vec<usize>>, (f64, Vec<f64>)>,
}

impl FaceSolver<'_> {
    fn measure(&mut self, face: &Face) -> (f64, Vec<f64>) {
        let d = face.basis.len();
        if d == 1 {
            return self.segment(face);
        }
        let mut vol = 0.0;
        let mut rel = vec![0.0; self.k];
        // Candidate ridges, grouped by constraints that coincide within this
        // flat; each group is represented by its tightest member.
        let mut groups: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
        for (ci, c) in face.constraints.iter().enumerate() {
            let inc = &self.incidences[c.plane];
            let verts: Vec<usize> = face.vertices.iter().copied().filter(|v| inc.binary_search(v).is_ok()).collect();
            if verts.len() < d {
                continue;
            }
            let same = |t: &Constraint| {
                (t.offset - c.offset).abs() <= self.parallel * (1.0 + c.offset.abs())
                    && linalg::dist(&t.normal, &c.normal) <= self.parallel
            };
            match groups.iter_mut().find(|g| same(&face.constraints[g.0])) {
                Some(g) => {
                    g.1.push(c.plane);
                    if c.offset < face.constraints[g.0].offset {
                        (g.0, g.2) = (ci, verts);
                    }
                }
                None => groups.push((ci, vec![c.plane], verts)),
            }
        }
        for (ci, members, verts) in groups {
            let c = &face.constraints[ci];
            let mut group = members.clone();
            group.sort_unstable();
            let mut set = face.set.clone();
            set.push(group);
            set.sort_unstable();
            // Faces are recomputed per path rather than cached: how nearly
            // parallel constraints resolve depends on the parent face, and
            // only the sum over one face's ridges is consistent.
            let (m, moment) = match self.restrict(face, c, &members, set.clone(), verts) {
                Some(child) => self.measure(&child),
                None => (0.0, vec![0.0; self.k]),
            };
            if face.set.is_empty() {
                self.facets.insert(set, (m, moment.clone()));
            }
            if m <= 0.0 {
                continue;
            }
            vol += c.offset * m / d as f64;
            for ((r, mo), o) in rel.iter_mut().zip(&moment).zip(&face.origin) {
                *r += c.offset * (mo - o * m) / (d + 1) as f64;
            }
        }
        let moment = rel.iter().zip(&face.origin).map(|(r, o)| r + o * vol).collect();
        (vol, moment)
    }

    /// The facet of `face` on constraint `c`, or None if it is empty.
    /// Planes in `coincident` lie on the same flat as `c` and are skipped.
    fn restrict(
        &self,
        face: &Face,
        c: &Constraint,
        coincident: &[usize],
        set: Vec<Vec<usize>>,
        vertices: Vec<usize>,
    ) -> Option<Face> {
        let tangent = orthogonal_complement(&c.normal);
        let mut origin = face.origin.clone();
        for (b, n) in face.basis.iter().zip(&c.normal) {
            origin.iter_mut().zip(b).for_each(|(o, x)| *o += c.offset * n * x);
        }
        let basis = tangent
            .iter()
            .map(|t| {
                let mut v = vec![0.0; self.k];
                for (b, ti) in face.basis.iter().zip(t) {
                    v.iter_mut().zip(b).for_each(|(a, x)| *a += ti * x);
                }
                v
            })
            .collect();
        let mut constraints = Vec::with_capacity(face.constraints.len());
        for other in &face.constraints {
            if coincident.contains(&other.plane) {
                continue;
            }
            let normal: Vec<f64> = tangent.iter().map(|t| dot(t, &other.normal)).collect();
            let offset = other.offset - c.offset * dot(&other.normal, &c.normal);
            let len = norm(&normal);
            if len <= self.parallel {
                if offset < -self.parallel * (1.0 + other.offset.abs()) {
                    return None;
                }
                continue;
            }
            constraints.push(Constraint {
                plane: other.plane,
                normal: normal.iter().map(|x| x / len).collect(),
                offset: offset / len,
            });
        }
        Some(Face {
            set,
            origin,
            basis,
            constraints,
            vertices,
        })
    }

    fn segment(&mut self, face: &Face) -> (f64, Vec<f64>) {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut lo_plane, mut hi_plane) = (0, 0);
        for c in &face.constraints {
            if c.normal[0] > 0.0 {
                if c.offset < hi {
                    (hi, hi_plane) = (c.offset, c.plane);
                }
            } else if -c.offset > lo {
                (lo, lo_plane) = (-c.offset, c.plane);
            }
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return (0.0, vec![0.0; self.k]);
        }
        if face.set.is_empty() {
            // k = 1: the facets are the two endpoints.
            for (plane, t) in [(lo_plane, lo), (hi_plane, hi)] {
                let point = face.origin.iter().zip(&face.basis[0]).map(|(o, b)| o + t * b).collect();
                self.facets.insert(vec![vec![plane]], (1.0, point));
            }
        }
        let len = hi - lo;
        let mid = 0.5 * (hi + lo);
        let moment = face
            .origin
            .iter()
            .zip(&face.basis[0])
            .map(|(o, b)| (o + mid * b) * len)
            .collect();
        (len, moment)
    }
}

fn unit(k: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; k];
    e[i] = 1.0;
    e
}

/// Orthonormal basis of n^⊥ for a unit vector n, from the Householder
/// reflection that sends e_1 to ∓n.
fn orthogonal_complement(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let mut u = n.to_vec();
    u[0] += if n[0] >= 0.0 { 1.0 } else { -1.0 };
    let uu = dot(&u, &u);
    (1..d)
        .map(|c| (0..d).map(|r| f64::from(u8::from(r == c)) - 2.0 * u[r] * u[c] / uu).collect())
        .collect()
}

struct Lattice<'a> {
    vertices: &'a [Vec<f64>],
    incidences: &'a [Vec<usize>],
    geom: f64,
}

impl Lattice<'_> {
    fn affine_dim(&self, verts: &[usize]) -> usize {
        if verts.len() <= 1 {
            return 0;
        }
        let base = &self.vertices[verts[0]];
        let rows: Vec<Vec<f64>> = verts[1..]
            .iter()
            .map(|&v| self.vertices[v].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        linalg::rank_of_rows(&rows, base.len(), self.geom)
    }

    /// Simplices (each as dim+1 points) triangulating the face spanned by
    /// `verts`, which lies on every plane in `on_planes`.
    fn triangulate(&self, verts: &[usize], dim: usize, on_planes: &mut Vec<usize>) -> Vec<Vec<Vec<f64>>> {
        match dim {
            0 => return vec![vec![self.vertices[verts[0]].clone()]],
            1 => {
                let (a, b) = self.extreme_pair(verts);
                return vec![vec![self.vertices[a].clone(), self.vertices[b].clone()]];
            }
            _ => {}
        }
        let k = self.vertices[0].len();
        let mut apex = vec![0.0; k];
        for &v in verts {
            apex.iter_mut().zip(&self.vertices[v]).for_each(|(a, x)| *a += x);
        }
        apex.iter_mut().for_each(|a| *a /= verts.len() as f64);

        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut out = Vec::new();
        for (p, inc) in self.incidences.iter().enumerate() {
            if on_planes.contains(&p) {
                continue;
            }
            let sub: Vec<usize> = verts.iter().copied().filter(|v| inc.contains(v)).collect();
            if sub.len() < dim || sub.len() == verts.len() || seen.contains(&sub) {
                continue;
            }
            if self.affine_dim(&sub) != dim - 1 {
                continue;
            }
            on_planes.push(p);
            for simplex in self.triangulate(&sub, dim - 1, on_planes) {
                let mut s = Vec::with_capacity(dim + 1);
                s.push(apex.clone());
                s.extend(simplex);
                out.push(s);
            }
            on_planes.pop();
            seen.insert(sub);
        }
        out
    }

    fn extreme_pair(&self, verts: &[usize]) -> (usize, usize) {
        let mut best = (verts[0], verts[0], -1.0);
        for (i, &a) in verts.iter().enumerate() {
            for &b in &verts[i + 1..] {
                let d = linalg::dist(&self.vertices[a], &self.vertices[b]);
                if d > best.2 {
                    best = (a, b, d);
                }
            }
        }
        (best.0, best.1)
    }
}

/// Section of the cube generated by a frame, Q(S) = ⋂ {|⟨x, v_i⟩| ≤ 1}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionPolytope {
    pub frame: Frame,
    #[serde(flatten)]
    pub polytope: Polytope,
    /// For each generator i, the facet on {⟨x, v_i⟩ = 1}, if there is one.
    pub generator_facets: Vec<Option<usize>>,
}

/// Builds Q(S). Zero vectors contribute no constraint.
pub fn build_section(frame: &Frame, tol: &Tolerances) -> Result<SectionPolytope> {
    let (n, k) = (frame.n(), frame.k());
    let mut halfspaces = Vec::with_capacity(2 * n);
    halfspaces.extend(frame.vectors().map(<[f64]>::to_vec));
    halfspaces.extend(frame.vectors().map(|v| v.iter().map(|x| -x).collect::<Vec<_>>()));
    let polytope = Polytope::build(k, halfspaces, tol, |j| {
        if j < n {
            SignedIndex { index: j, sign: 1 }
        } else {
            SignedIndex { index: j - n, sign: -1 }
        }
    })?;
    let mut generator_facets = vec![None; n];
    for (f, facet) in polytope.facets.iter().enumerate() {
        for s in &facet.normal_indices {
            if s.sign == 1 {
                generator_facets[s.index] = Some(f);
            }
        }
    }
    Ok(SectionPolytope {
        frame: frame.clone(),
        polytope,
        generator_facets,
    })
}

/// vol_k Q(S).
pub fn section_volume(frame: &Frame, tol: &Tolerances) -> Result<f64> {
    Ok(build_section(frame, tol)?.volume())
}

impl SectionPolytope {
    pub fn volume(&self) -> f64 {
        self.polytope.volume()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.polytope.vertices
    }

    pub fn facets(&self) -> &[FacetRecord] {
        &self.polytope.facets
    }

    pub fn dim(&self) -> usize {
        self.polytope.k
    }
}

/// Returns the facet centroid, rejecting facets of (numerically) zero measure.
pub fn facet_centroid(facet: &FacetRecord, tol: &Tolerances) -> Result<Vec<f64>> {
    let scale = facet.centroid.iter().map(|x| x.abs()).fold(1.0, f64::max);
    if facet.measure <= tol.geom * scale {
        return Err(Error::DegenerateFacet(format!(
            "measure {:e} is below tolerance",
            facet.measure
        )));
    }
    Ok(facet.centroid.clone())
}

/// First-order volume change when the facet's hyperplane moves outward by `h`:
/// h·vol_{k−1}(F).
pub fn shift_facet_predict(facet: &FacetRecord, h: f64) -> f64 {
    h * facet.measure
}

/// First-order volume change when the facet normal w becomes w + t·u, with u a
/// unit vector orthogonal to w. Points of F on the +u side of the pivot are
/// cut away, so the change is −(vol_{k−1}F / |w|)·⟨c − c_w, u⟩·t with c the
/// facet centroid and c_w = w/|w|².
pub fn rotate_facet_predict(facet: &FacetRecord, u: &[f64], t: f64) -> Result<f64> {
    let w = &facet.normal;
    if u.len() != w.len() {
        return Err(Error::DimensionMismatch("direction has wrong length".into()));
    }
    let wn = norm(w);
    if dot(u, w).abs() > 1e-12 * wn {
        return Err(Error::Invalid("direction is not orthogonal to the facet normal".into()));
    }
    if (norm(u) - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid("direction is not a unit vector".into()));
    }
    let c_w: Vec<f64> = w.iter().map(|x| x / (wn * wn)).collect();
    let offset: f64 = facet
        .centroid
        .iter()
        .zip(&c_w)
        .zip(u)
        .map(|((c, cw), ui)| (c - cw) * ui)
        .sum();
    Ok(-facet.measure / wn * offset * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{random_frame, random_tight_frame};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn frame(k: usize, v: &[&[f64]]) -> Frame {
        Frame::new(k, v.iter().map(|x| x.to_vec()).collect()).unwrap()
    }

    fn hexagonal() -> Frame {
        let r = (2.0f64 / 3.0).sqrt();
        Frame::new(
            2,
            (0..3)
                .map(|j| {
                    let a = j as f64 * std::f64::consts::PI / 3.0;
                    vec![r * a.cos(), r * a.sin()]
                })
                .collect(),
        )
        .unwrap()
    }

    /// Shoelace area of the convex hull of planar points (sorted by angle).
    fn shoelace(points: &[Vec<f64>]) -> f64 {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
        let m = pts.len();
        (0..m)
            .map(|i| {
                let (p, q) = (&pts[i], &pts[(i + 1) % m]);
                p[0] * q[1] - p[1] * q[0]
            })
            .sum::<f64>()
            / 2.0
    }

    #[test]
    fn unit_square() {
        let p = build_section(&frame(2, &[&[1.0, 0.0], &[0.0, 1.0]]), &tol()).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        assert!((p.volume() - 4.0).abs() < 1e-14);
        let f = p.generator_facets[0].unwrap();
        let c = facet_centroid(&p.facets()[f], &tol()).unwrap();
        assert!(linalg::dist(&c, &[1.0, 0.0]) < 1e-15);
        assert!((p.facets()[f].measure - 2.0).abs() < 1e-15);
    }

    #[test]
    fn regular_hexagon() {
        let p = build_section(&hexagonal(), &tol()).unwrap();
        assert_eq!(p.vertices().len(), 6);
        assert_eq!(p.facets().len(), 6);
        let apothem = 1.5f64.sqrt();
        for f in p.facets() {
            assert!((f.height() - apothem).abs() < 1e-14);
        }
        let expected = 3.0 * 3f64.sqrt();
        assert!((p.volume() - expected).abs() < 1e-13);
        assert!((shoelace(p.vertices()) - expected).abs() < 1e-13);
    }

    #[test]
    fn extremal_rectangle_for_five() {
        let a = (1.0f64 / 3.0).sqrt();
        let b = 0.5f64.sqrt();
        let s = frame(2, &[&[a, 0.0], &[a, 0.0], &[a, 0.0], &[0.0, b], &[0.0, b]]);
        let p = build_section(&s, &tol()).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        for v in p.vertices() {
            assert!((v[0].abs() - 3f64.sqrt()).abs() < 1e-14);
            assert!((v[1].abs() - 2f64.sqrt()).abs() < 1e-14);
        }
        assert!((p.volume() - 4.0 * 6f64.sqrt()).abs() < 1e-13);
        let fx = &p.facets()[p.generator_facets[0].unwrap()];
        assert_eq!(fx.multiplicity(), 3);
        assert_eq!(p.generator_facets[1], p.generator_facets[0]);
        assert!(linalg::dist(&fx.centroid, &[3f64.sqrt(), 0.0]) < 1e-14);
        assert!((shift_facet_predict(fx, 0.01) - 0.01 * 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tangent_slab_has_no_facet() {
        let s = frame(2, &[&[1.0, 0.0], &[0.0, 1.0], &[0.5, 0.5]]);
        let p = build_section(&s, &tol()).unwrap();
        assert_eq!(p.facets().len(), 4);
        assert_eq!(p.generator_facets[2], None);
        assert!((p.volume() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn zero_vector_contributes_nothing() {
        let s = frame(2, &[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]);
        let p = build_section(&s, &tol()).unwrap();
        assert_eq!(p.generator_facets[1], None);
        assert!((p.volume() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_section() {
        let s = frame(1, &[&[0.5], &[-0.25], &[0.1]]);
        let p = build_section(&s, &tol()).unwrap();
        assert_eq!(p.vertices().len(), 2);
        assert!((p.volume() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn cube_triangle_facets_and_centroid() {
        // cube cut by a corner slab: the corner facet is a triangle
        let s = frame(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.4, 0.4, 0.4]]);
        let p = build_section(&s, &tol()).unwrap();
        let f = &p.facets()[p.generator_facets[3].unwrap()];
        assert_eq!(f.vertices.len(), 3);
        let pts: Vec<&Vec<f64>> = f.vertices.iter().map(|&v| &p.vertices()[v]).collect();
        let bary: Vec<f64> = (0..3).map(|j| pts.iter().map(|x| x[j]).sum::<f64>() / 3.0).collect();
        assert!(linalg::dist(&f.centroid, &bary) < 1e-14);
        // corner cut off: tetrahedron with legs 0.5 removed from each of 2 corners
        let expected = 8.0 - 2.0 * 0.5f64.powi(3) / 6.0;
        assert!((p.volume() - expected).abs() < 1e-13);
        assert!((p.polytope.triangulated_volume() - expected).abs() < 1e-13);
    }

    #[test]
    fn random_sections_are_symmetric_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(n, k) in &[(4, 2), (7, 2), (5, 3), (8, 3), (6, 4)] {
            for _ in 0..10 {
                let s = random_tight_frame(&mut rng, n, k);
                let p = build_section(&s, &tol()).unwrap();
                for v in p.vertices() {
                    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
                    assert!(p.vertices().iter().any(|w| linalg::dist(w, &neg) < 1e-9));
                }
                for f in p.facets() {
                    for &v in &f.vertices {
                        assert!((dot(&p.vertices()[v], &f.normal) - 1.0).abs() < 1e-9);
                    }
                }
                let (a, b) = (p.volume(), p.polytope.triangulated_volume());
                assert!((a - b).abs() <= 1e-9 * a, "{n} {k}: {a} vs {b}");
                if k == 2 {
                    assert!((a - shoelace(p.vertices())).abs() <= 1e-10 * a);
                }
            }
        }
    }

    #[test]
    fn degenerate_facet_rejected() {
        let f = FacetRecord {
            normal_indices: vec![],
            normal: vec![1.0, 0.0],
            vertices: vec![],
            measure: 0.0,
            centroid: vec![1.0, 0.0],
        };
        assert!(matches!(facet_centroid(&f, &tol()), Err(Error::DegenerateFacet(_))));
    }

    #[test]
    fn rotation_prediction_on_square_is_zero_and_validates_input() {
        let p = build_section(&frame(2, &[&[1.0, 0.0], &[0.0, 1.0]]), &tol()).unwrap();
        let f = &p.facets()[p.generator_facets[0].unwrap()];
        assert_eq!(rotate_facet_predict(f, &[0.0, 1.0], 0.3).unwrap(), 0.0);
        assert_eq!(rotate_facet_predict(f, &[0.0, 1.0], 0.0).unwrap(), 0.0);
        assert!(rotate_facet_predict(f, &[0.6, 0.8], 0.1).is_err());
        assert_eq!(shift_facet_predict(f, 0.1), 0.2);
        assert_eq!(shift_facet_predict(f, 0.0), 0.0);
    }

    #[test]
    fn rotation_sign_on_off_center_facet() {
        // square cut by x + y ≤ 1.5: facet x = 1 spans y ∈ [-1, 0.5]
        let hs = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
            vec![1.0 / 1.5, 1.0 / 1.5],
        ];
        let p = Polytope::from_halfspaces(2, hs, &tol()).unwrap();
        let f = p.facet_with_normal(&[1.0, 0.0], 1e-12).unwrap();
        let pred = rotate_facet_predict(&p.facets[f], &[0.0, 1.0], 1.0).unwrap();
        assert!((pred - 0.375).abs() < 1e-14);
        let t = 1e-6;
        let fd = (p.with_rotated_facet(f, &[0.0, 1.0], t, &tol()).unwrap().volume() - p.volume()) / t;
        assert!((fd - pred).abs() < 1e-5, "{fd} vs {pred}");
    }

    #[test]
    fn removing_a_vector_never_shrinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let s = random_frame(&mut rng, 6, 2);
            let full = section_volume(&s, &tol()).unwrap();
            let mut vecs = s.to_vecs();
            vecs.remove(0);
            let fewer = section_volume(&Frame::new(2, vecs).unwrap(), &tol()).unwrap();
            assert!(fewer >= full * (1.0 - 1e-12));
        }
    }

    #[test]
    fn nearly_duplicate_generators_are_not_double_counted() {
        // v0 and v2 differ by ~1e-9: the section is (up to that) the
        // parallelogram |⟨x, v0⟩|, |⟨x, v1⟩| ≤ 1.
        let s = frame(
            2,
            &[
                &[0.45029898862789364, -0.5451887930404319],
                &[0.7710133857759266, 0.6368189373396035],
                &[0.4502989893337958, -0.5451887938950827],
            ],
        );
        let (a, b) = (s.vector(0), s.vector(1));
        let expect = 4.0 / (a[0] * b[1] - a[1] * b[0]).abs();
        let p = build_section(&s, &tol()).unwrap();
        assert!((p.volume() - expect).abs() < 1e-7, "{} vs {expect}", p.volume());
        assert!((p.polytope.triangulated_volume() - expect).abs() < 1e-7);
        // Whether v2's plane keeps a sliver facet depends on where it crosses
        // v0's; either way the big edges are counted once.
        let long = p.facets().iter().filter(|f| f.measure > 1e-3).count();
        assert_eq!(long, 4);
    }
}
