//! Metric and extrinsic measurements of a realization: edge lengths, corner
//! angles and cotangents, face normals and areas, circumcenters, signed
//! dihedral angles, and length cross-ratios.

use nalgebra::{DVector, Vector3};

use crate::mesh::TriMesh;
use crate::parallel::map_range;
use crate::{Error, Result, Tolerances};

pub type Vec3 = Vector3<f64>;

/// Vertex positions in `R^n` (n = 2, 3 or 4), stored vertex-major.
///
/// Also used for per-vertex velocity fields (see [`InfDeformation`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    dim: usize,
    data: Vec<f64>,
}

/// An infinitesimal deformation: one velocity vector per vertex, same
/// storage layout as a realization.
pub type InfDeformation = Realization;

impl Realization {
    pub fn zeros(dim: usize, vertex_count: usize) -> Self {
        Realization {
            dim,
            data: vec![0.0; dim * vertex_count],
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim < 2 || dim > 4 {
            return Err(Error::DimensionMismatch { got: dim, need: 3 });
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::SizeMismatch {
                got: data.len(),
                expected: (data.len() / dim) * dim,
            });
        }
        Ok(Realization { dim, data })
    }

    pub fn from_points3(points: &[Vec3]) -> Self {
        let mut data = Vec::with_capacity(3 * points.len());
        for p in points {
            data.extend_from_slice(&[p.x, p.y, p.z]);
        }
        Realization { dim: 3, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn coords(&self, v: usize) -> &[f64] {
        &self.data[v * self.dim..(v + 1) * self.dim]
    }

    pub fn coords_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.data[v * self.dim..(v + 1) * self.dim]
    }

    pub fn point3(&self, v: usize) -> Vec3 {
        debug_assert_eq!(self.dim, 3);
        let c = self.coords(v);
        Vec3::new(c[0], c[1], c[2])
    }

    pub fn set_point3(&mut self, v: usize, p: Vec3) {
        debug_assert_eq!(self.dim, 3);
        self.coords_mut(v).copy_from_slice(&[p.x, p.y, p.z]);
    }

    /// `<f_j - f_i, g_l - g_k>` with `self` providing the first difference.
    pub fn diff_dot(&self, j: usize, i: usize, other: &Realization, l: usize, k: usize) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let (a, b) = (self.coords(j), self.coords(i));
        let (c, d) = (other.coords(l), other.coords(k));
        (0..self.dim).map(|t| (a[t] - b[t]) * (c[t] - d[t])).sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.diff_dot(j, i, self, j, i).sqrt()
    }

    pub fn norm_sq(&self, v: usize) -> f64 {
        self.coords(v).iter().map(|x| x * x).sum()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.data)
    }

    pub fn from_dvector(dim: usize, v: &DVector<f64>) -> Self {
        Realization {
            dim,
            data: v.iter().copied().collect(),
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = self.vertex_count();
        let mut c = vec![0.0; self.dim];
        for v in 0..n {
            for (t, x) in self.coords(v).iter().enumerate() {
                c[t] += x;
            }
        }
        c.iter_mut().for_each(|x| *x /= n as f64);
        c
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let n = self.vertex_count();
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in 0..n {
            for (t, &x) in self.coords(v).iter().enumerate() {
                lo[t] = lo[t].min(x);
                hi[t] = hi[t].max(x);
            }
        }
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Append zero coordinates up to `dim`.
    pub fn lifted_zero(&self, dim: usize) -> Realization {
        assert!(dim >= self.dim);
        let n = self.vertex_count();
        let mut data = vec![0.0; dim * n];
        for v in 0..n {
            data[v * dim..v * dim + self.dim].copy_from_slice(self.coords(v));
        }
        Realization { dim, data }
    }

    /// Drop trailing coordinates down to `dim`.
    pub fn truncated(&self, dim: usize) -> Realization {
        assert!(dim <= self.dim);
        let n = self.vertex_count();
        let mut data = vec![0.0; dim * n];
        for v in 0..n {
            data[v * dim..(v + 1) * dim].copy_from_slice(&self.coords(v)[..dim]);
        }
        Realization { dim, data }
    }

    /// Largest velocity norm; the natural scale of a deformation.
    pub fn max_norm(&self) -> f64 {
        (0..self.vertex_count())
            .map(|v| self.norm_sq(v).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Edge lengths `l_ij > 0`, indexed like `mesh.edges()`.
#[derive(Debug, Clone)]
pub struct EdgeMetric {
    pub lengths: Vec<f64>,
}

impl EdgeMetric {
    pub fn length(&self, edge: usize) -> f64 {
        self.lengths[edge]
    }
}

/// The discrete metric induced by a realization: `l_ij = |f_j - f_i|`.
pub fn edge_metric(mesh: &TriMesh, f: &Realization) -> Result<EdgeMetric> {
    let floor = 1e-14 * f.bbox_diagonal();
    let mut lengths = Vec::with_capacity(mesh.edge_count());
    for &[a, b] in mesh.edges() {
        let l = f.distance(a, b);
        if l <= floor {
            return Err(Error::DegenerateEdge(a, b));
        }
        lengths.push(l);
    }
    Ok(EdgeMetric { lengths })
}

/// Vertex scaling `l~_ij = exp((u_i + u_j)/2) l_ij`, with the triangle
/// inequality re-checked on every face.
pub fn vertex_scale(mesh: &TriMesh, metric: &EdgeMetric, u: &[f64]) -> Result<EdgeMetric> {
    if u.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch {
            got: u.len(),
            expected: mesh.vertex_count(),
        });
    }
    let mut lengths = Vec::with_capacity(mesh.edge_count());
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        lengths.push(((u[a] + u[b]) / 2.0).exp() * metric.lengths[e]);
    }
    let scaled = EdgeMetric { lengths };
    for (fi, f) in mesh.faces().iter().enumerate() {
        let l01 = scaled.lengths[mesh.edge_between(f[0], f[1]).unwrap()];
        let l12 = scaled.lengths[mesh.edge_between(f[1], f[2]).unwrap()];
        let l20 = scaled.lengths[mesh.edge_between(f[2], f[0]).unwrap()];
        if l01 + l12 <= l20 || l12 + l20 <= l01 || l20 + l01 <= l12 {
            return Err(Error::TriangleInequalityViolated(fi));
        }
    }
    Ok(scaled)
}

/// Length cross-ratios per edge: for the edge oriented `i -> j` with left
/// face `{i j k}` and right face `{i l j}`,
/// `lcr_ij = (l_il * l_jk) / (l_lj * l_ki)`.
/// Boundary edges carry `NaN`; use [`lcr_at`] for a checked accessor.
pub fn length_cross_ratios(mesh: &TriMesh, metric: &EdgeMetric) -> Vec<f64> {
    mesh.edges()
        .iter()
        .enumerate()
        .map(|(e, &[a, b])| {
            if mesh.is_boundary_edge(e) {
                f64::NAN
            } else {
                lcr_unchecked(mesh, metric, e, a, b)
            }
        })
        .collect()
}

/// Length cross-ratio of a single interior edge.
pub fn lcr_at(mesh: &TriMesh, metric: &EdgeMetric, edge: usize) -> Result<f64> {
    let [a, b] = mesh.edges()[edge];
    if mesh.is_boundary_edge(edge) {
        return Err(Error::BoundaryEdge(a, b));
    }
    Ok(lcr_unchecked(mesh, metric, edge, a, b))
}

fn lcr_unchecked(mesh: &TriMesh, metric: &EdgeMetric, edge: usize, i: usize, j: usize) -> f64 {
    let oe = crate::mesh::OrientedEdge { edge, forward: true };
    let k = mesh.apex(mesh.left_face(oe).unwrap(), i, j);
    let l = mesh.apex(mesh.right_face(oe).unwrap(), i, j);
    let len = |p: usize, q: usize| metric.lengths[mesh.edge_between(p, q).unwrap()];
    (len(i, l) * len(j, k)) / (len(l, j) * len(k, i))
}

struct FaceData {
    normal: Vec3,
    area: f64,
    circumcenter: Vec3,
    circumradius: f64,
    plane_dist: f64,
    angles: [f64; 3],
    cots: [f64; 3],
}

/// All per-face and per-edge extrinsic measurements of a realization in
/// `R^3`: unit normals, areas, corner angles and cotangents, circumcenters,
/// origin-plane distances and signed dihedral angles.
#[derive(Debug, Clone)]
pub struct GeometryCache {
    face_normal: Vec<Vec3>,
    face_area: Vec<f64>,
    circumcenter: Vec<Vec3>,
    circumradius: Vec<f64>,
    plane_dist: Vec<f64>,
    corner_angle: Vec<[f64; 3]>,
    corner_cot: Vec<[f64; 3]>,
    /// Signed dihedral angle in (-pi, pi] per edge; NaN on boundary edges.
    dihedral: Vec<f64>,
    bbox_diag: f64,
}

impl GeometryCache {
    pub fn new(mesh: &TriMesh, f: &Realization, _tol: &Tolerances) -> Result<GeometryCache> {
        Self::build(mesh, f, false)
    }

    /// Sequential construction; bit-identical results to [`GeometryCache::new`].
    pub fn new_seq(mesh: &TriMesh, f: &Realization, _tol: &Tolerances) -> Result<GeometryCache> {
        Self::build(mesh, f, true)
    }

    fn build(mesh: &TriMesh, f: &Realization, force_seq: bool) -> Result<GeometryCache> {
        if f.dim() != 3 {
            return Err(Error::DimensionMismatch { got: f.dim(), need: 3 });
        }
        if f.vertex_count() != mesh.vertex_count() {
            return Err(Error::SizeMismatch {
                got: f.vertex_count(),
                expected: mesh.vertex_count(),
            });
        }
        let bbox_diag = f.bbox_diagonal();
        let area_floor = 1e-12 * bbox_diag * bbox_diag;

        let face_data = |fi: usize| -> Result<FaceData> {
            let [i, j, k] = mesh.faces()[fi];
            let (p0, p1, p2) = (f.point3(i), f.point3(j), f.point3(k));
            let a = p1 - p0;
            let b = p2 - p0;
            let cr = a.cross(&b);
            let cr_norm = cr.norm();
            if cr_norm / 2.0 <= area_floor {
                return Err(Error::DegenerateFace(fi));
            }
            let normal = cr / cr_norm;
            let circumcenter =
                p0 + (a.norm_squared() * b - b.norm_squared() * a).cross(&cr) / (2.0 * cr_norm * cr_norm);
            let circumradius = (circumcenter - p0).norm();
            let mut angles = [0.0; 3];
            let mut cots = [0.0; 3];
            let pts = [p0, p1, p2];
            for c in 0..3 {
                let u = pts[(c + 1) % 3] - pts[c];
                let w = pts[(c + 2) % 3] - pts[c];
                let cross = u.cross(&w).norm();
                let dot = u.dot(&w);
                angles[c] = cross.atan2(dot);
                cots[c] = dot / cross;
            }
            Ok(FaceData {
                normal,
                area: cr_norm / 2.0,
                circumcenter,
                circumradius,
                plane_dist: normal.dot(&p0),
                angles,
                cots,
            })
        };
        let per_face = if force_seq {
            crate::parallel::map_range_seq(mesh.face_count(), face_data)
        } else {
            map_range(mesh.face_count(), face_data)
        };

        let mut face_normal = Vec::with_capacity(mesh.face_count());
        let mut face_area = Vec::with_capacity(mesh.face_count());
        let mut circumcenter = Vec::with_capacity(mesh.face_count());
        let mut circumradius = Vec::with_capacity(mesh.face_count());
        let mut plane_dist = Vec::with_capacity(mesh.face_count());
        let mut corner_angle = Vec::with_capacity(mesh.face_count());
        let mut corner_cot = Vec::with_capacity(mesh.face_count());
        for fd in per_face {
            let fd = fd?;
            face_normal.push(fd.normal);
            face_area.push(fd.area);
            circumcenter.push(fd.circumcenter);
            circumradius.push(fd.circumradius);
            plane_dist.push(fd.plane_dist);
            corner_angle.push(fd.angles);
            corner_cot.push(fd.cots);
        }

        let dihedral = mesh
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &[a, b])| {
                let oe = crate::mesh::OrientedEdge { edge: e, forward: true };
                match (mesh.left_face(oe), mesh.right_face(oe)) {
                    (Some(l), Some(r)) => {
                        let nl = face_normal[l];
                        let nr = face_normal[r];
                        let ehat = (f.point3(b) - f.point3(a)).normalize();
                        let sin = nl.cross(&nr).dot(&ehat);
                        let cos = nl.dot(&nr);
                        sin.atan2(cos)
                    }
                    _ => f64::NAN,
                }
            })
            .collect();

        Ok(GeometryCache {
            face_normal,
            face_area,
            circumcenter,
            circumradius,
            plane_dist,
            corner_angle,
            corner_cot,
            dihedral,
            bbox_diag,
        })
    }

    pub fn normal(&self, face: usize) -> Vec3 {
        self.face_normal[face]
    }

    pub fn area(&self, face: usize) -> f64 {
        self.face_area[face]
    }

    pub fn circumcenter(&self, face: usize) -> Vec3 {
        self.circumcenter[face]
    }

    pub fn circumradius(&self, face: usize) -> f64 {
        self.circumradius[face]
    }

    /// Signed distance from the origin to the plane of `face`:
    /// `<N_face, f_vertex>` for any vertex of the face.
    pub fn plane_dist(&self, face: usize) -> f64 {
        self.plane_dist[face]
    }

    /// Signed dihedral angle in `(-pi, pi]` across an interior edge.
    pub fn dihedral(&self, edge: usize) -> Option<f64> {
        let d = self.dihedral[edge];
        if d.is_nan() {
            None
        } else {
            Some(d)
        }
    }

    pub fn bbox_diagonal(&self) -> f64 {
        self.bbox_diag
    }

    fn corner_slot(mesh: &TriMesh, face: usize, v: usize) -> usize {
        mesh.faces()[face]
            .iter()
            .position(|&w| w == v)
            .expect("vertex not in face")
    }

    /// Interior angle of `face` at its vertex `v`.
    pub fn corner_angle(&self, mesh: &TriMesh, face: usize, v: usize) -> f64 {
        self.corner_angle[face][Self::corner_slot(mesh, face, v)]
    }

    /// Cotangent of the interior angle of `face` at `v`.
    pub fn corner_cot(&self, mesh: &TriMesh, face: usize, v: usize) -> f64 {
        self.corner_cot[face][Self::corner_slot(mesh, face, v)]
    }

    /// Cotangent of the angle opposite to edge `(i, j)` within `face`.
    pub fn cot_opposite(&self, mesh: &TriMesh, face: usize, i: usize, j: usize) -> f64 {
        self.corner_cot(mesh, face, mesh.apex(face, i, j))
    }
}
