//! Oriented triangulated-surface combinatorics.
//!
//! A [`TriMesh`] is immutable after construction. Faces are stored as vertex
//! triples up to cyclic rotation (canonicalized to start at the smallest
//! index), edges as sorted vertex pairs indexed lexicographically, and each
//! oriented edge knows its left and right face. The dual mesh is never
//! materialized: dual edges are addressed through their primal oriented
//! edge, oriented from the right face to the left face.

use std::collections::HashMap;

use crate::{Error, Result};

/// An oriented edge, encoded as an edge index plus a direction bit.
/// `forward` means the direction from the smaller to the larger vertex
/// index of the canonical pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrientedEdge {
    pub edge: usize,
    pub forward: bool,
}

impl OrientedEdge {
    pub fn reversed(self) -> Self {
        OrientedEdge {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// Immutable combinatorics of an oriented triangulated surface.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    /// Per edge `[a, b]` (a < b): the face containing the directed edge
    /// `a -> b` (the left face of the forward orientation) and the face
    /// containing `b -> a`.
    edge_faces: Vec<[Option<usize>; 2]>,
    edge_index: HashMap<(usize, usize), usize>,
    /// Cyclically ordered neighbors, consistent with the surface
    /// orientation. For boundary vertices the list is the open fan from
    /// one boundary edge to the other.
    vertex_stars: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    interior_edges: Vec<usize>,
    interior_vertices: Vec<usize>,
    components: usize,
}

impl TriMesh {
    /// Build and validate a mesh from oriented faces. Vertex indices must be
    /// dense in `0..max+1`; orientation consistency is verified edge by edge.
    pub fn from_faces(input: &[[usize; 3]]) -> Result<TriMesh> {
        Self::build(input, false)
    }

    /// Like [`TriMesh::from_faces`] but also rejects disconnected surfaces.
    pub fn from_faces_connected(input: &[[usize; 3]]) -> Result<TriMesh> {
        Self::build(input, true)
    }

    fn build(input: &[[usize; 3]], require_connected: bool) -> Result<TriMesh> {
        if input.is_empty() {
            return Err(Error::InvalidFace(0, "empty face list".into()));
        }
        let mut faces = Vec::with_capacity(input.len());
        let mut vertex_count = 0;
        for (fi, f) in input.iter().enumerate() {
            if f[0] == f[1] || f[1] == f[2] || f[2] == f[0] {
                return Err(Error::InvalidFace(fi, format!("repeated vertex in {f:?}")));
            }
            vertex_count = vertex_count.max(f[0].max(f[1]).max(f[2]) + 1);
            // canonical cyclic rotation: smallest vertex first
            let m = (0..3).min_by_key(|&k| f[k]).unwrap();
            faces.push([f[m], f[(m + 1) % 3], f[(m + 2) % 3]]);
        }

        let mut referenced = vec![false; vertex_count];
        for f in &faces {
            for &v in f {
                referenced[v] = true;
            }
        }
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(Error::UnreferencedVertex(v));
        }

        // Collect directed-edge incidences per unordered pair.
        let mut incidence: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (p, q) = (f[k], f[(k + 1) % 3]);
                let key = (p.min(q), p.max(q));
                incidence.entry(key).or_default().push((fi, p < q));
            }
        }
        let mut keys: Vec<(usize, usize)> = incidence.keys().copied().collect();
        keys.sort_unstable();

        let mut edges = Vec::with_capacity(keys.len());
        let mut edge_faces = Vec::with_capacity(keys.len());
        let mut edge_index = HashMap::with_capacity(keys.len());
        for (ei, key) in keys.into_iter().enumerate() {
            let inc = &incidence[&key];
            if inc.len() > 2 {
                return Err(Error::NonManifoldEdge(key.0, key.1));
            }
            let mut slots = [None, None];
            for &(fi, fwd) in inc {
                let slot = if fwd { 0 } else { 1 };
                if let Some(prev) = slots[slot] {
                    return Err(Error::InconsistentOrientation {
                        i: key.0,
                        j: key.1,
                        face_a: prev,
                        face_b: fi,
                    });
                }
                slots[slot] = Some(fi);
            }
            edges.push([key.0, key.1]);
            edge_faces.push(slots);
            edge_index.insert(key, ei);
        }

        let vertex_stars = build_stars(vertex_count, &faces)?;

        let mut boundary_vertex = vec![false; vertex_count];
        let mut interior_edges = Vec::new();
        for (ei, slots) in edge_faces.iter().enumerate() {
            if slots[0].is_some() && slots[1].is_some() {
                interior_edges.push(ei);
            } else {
                boundary_vertex[edges[ei][0]] = true;
                boundary_vertex[edges[ei][1]] = true;
            }
        }
        let interior_vertices = (0..vertex_count).filter(|&v| !boundary_vertex[v]).collect();

        let components = face_components(&faces, &edge_index, &edge_faces);
        if require_connected && components > 1 {
            return Err(Error::DisconnectedSurface { components });
        }

        Ok(TriMesh {
            vertex_count,
            faces,
            edges,
            edge_faces,
            edge_index,
            vertex_stars,
            boundary_vertex,
            interior_edges,
            interior_vertices,
            components,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Edges as sorted vertex pairs, indexed lexicographically.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        self.edge_index.get(&(i.min(j), i.max(j))).copied()
    }

    /// The oriented edge from `i` to `j`.
    pub fn oriented(&self, i: usize, j: usize) -> Result<OrientedEdge> {
        let edge = self.edge_between(i, j).ok_or(Error::UnknownEdge(i, j))?;
        Ok(OrientedEdge {
            edge,
            forward: i < j,
        })
    }

    /// Source and destination vertices of an oriented edge.
    pub fn endpoints(&self, oe: OrientedEdge) -> (usize, usize) {
        let [a, b] = self.edges[oe.edge];
        if oe.forward {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// The face lying to the left of the oriented edge (containing it in its
    /// oriented boundary), if any.
    pub fn left_face(&self, oe: OrientedEdge) -> Option<usize> {
        self.edge_faces[oe.edge][if oe.forward { 0 } else { 1 }]
    }

    /// The face to the right of the oriented edge (absent on the boundary).
    pub fn right_face(&self, oe: OrientedEdge) -> Option<usize> {
        self.edge_faces[oe.edge][if oe.forward { 1 } else { 0 }]
    }

    /// Left and right faces of the oriented edge from `i` to `j`.
    /// The left face always exists when (i, j) is traversed by some face;
    /// on a consistently oriented mesh at least one of the two is present.
    pub fn left_right_faces(&self, i: usize, j: usize) -> Result<(Option<usize>, Option<usize>)> {
        let oe = self.oriented(i, j)?;
        Ok((self.left_face(oe), self.right_face(oe)))
    }

    /// The vertex of `face` opposite to edge `(i, j)`.
    pub fn apex(&self, face: usize, i: usize, j: usize) -> usize {
        let f = self.faces[face];
        *f.iter().find(|&&v| v != i && v != j).expect("edge not in face")
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.edge_faces[edge][0].is_none() || self.edge_faces[edge][1].is_none()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_closed(&self) -> bool {
        self.interior_edges.len() == self.edges.len()
    }

    pub fn interior_edges(&self) -> &[usize] {
        &self.interior_edges
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    /// Cyclically ordered neighbors of `v`, consistent with orientation.
    pub fn star(&self, v: usize) -> &[usize] {
        &self.vertex_stars[v]
    }

    pub fn euler_characteristic(&self) -> isize {
        self.vertex_count as isize - self.edges.len() as isize + self.faces.len() as isize
    }

    /// Genus of a closed connected surface: `g = (2 - chi) / 2`.
    pub fn genus(&self) -> Result<usize> {
        if !self.is_closed() {
            return Err(Error::NotClosed);
        }
        let chi = self.euler_characteristic();
        debug_assert_eq!((2 - chi) % 2, 0);
        Ok(((2 - chi) / 2) as usize)
    }

    /// All oriented edges `(i, j)` with `i` ranging over vertices and `j`
    /// over the star of `i`; each edge appears once per direction.
    pub fn oriented_star(&self, v: usize) -> impl Iterator<Item = (usize, OrientedEdge)> + '_ {
        self.vertex_stars[v].iter().map(move |&j| {
            (
                j,
                OrientedEdge {
                    edge: self.edge_between(v, j).unwrap(),
                    forward: v < j,
                },
            )
        })
    }

    /// Faces of the star of `v` in cyclic order: for consecutive star
    /// neighbors `(j, k)` the face `{v, j, k}`. For interior vertices this
    /// wraps around; for boundary vertices it stops at the fan end.
    pub fn star_faces(&self, v: usize) -> Vec<usize> {
        let star = &self.vertex_stars[v];
        let n = star.len();
        let m = if self.boundary_vertex[v] { n.saturating_sub(1) } else { n };
        let mut out = Vec::with_capacity(m);
        for s in 0..m {
            let j = star[s];
            let oe = self.oriented(v, j).unwrap();
            out.push(self.left_face(oe).expect("star face missing"));
        }
        out
    }
}

/// Cyclic neighbor order around each vertex: in a face canonically rotated
/// to `(v, j, k)` the neighbor `k` follows `j` around `v`.
fn build_stars(vertex_count: usize, faces: &[[usize; 3]]) -> Result<Vec<Vec<usize>>> {
    let mut succ: Vec<HashMap<usize, usize>> = vec![HashMap::new(); vertex_count];
    for f in faces {
        for k in 0..3 {
            let (v, a, b) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            if succ[v].insert(a, b).is_some() {
                return Err(Error::NonManifoldVertex(v));
            }
        }
    }
    let mut stars = Vec::with_capacity(vertex_count);
    for v in 0..vertex_count {
        let map = &succ[v];
        let mut has_pred: HashMap<usize, bool> = map.keys().map(|&k| (k, false)).collect();
        for (&_, &b) in map {
            has_pred.entry(b).or_insert(false);
            has_pred.insert(b, true);
        }
        // Interior stars close into a cycle; a boundary star has a unique
        // neighbor with no predecessor. Start there, or at the smallest
        // neighbor for determinism on cycles.
        let mut starts: Vec<usize> = has_pred
            .iter()
            .filter(|(_, &p)| !p)
            .map(|(&k, _)| k)
            .collect();
        starts.sort_unstable();
        if starts.len() > 1 {
            return Err(Error::NonManifoldVertex(v));
        }
        let start = starts.first().copied().unwrap_or_else(|| {
            *map.keys().min().expect("vertex with empty star")
        });
        let degree = has_pred.len();
        let mut chain = Vec::with_capacity(degree);
        let mut cur = start;
        loop {
            chain.push(cur);
            match map.get(&cur) {
                Some(&next) if next != start => cur = next,
                _ => break,
            }
            if chain.len() > degree {
                return Err(Error::NonManifoldVertex(v));
            }
        }
        if chain.len() != degree {
            return Err(Error::NonManifoldVertex(v));
        }
        stars.push(chain);
    }
    Ok(stars)
}

fn face_components(
    faces: &[[usize; 3]],
    edge_index: &HashMap<(usize, usize), usize>,
    edge_faces: &[[Option<usize>; 2]],
) -> usize {
    let mut seen = vec![false; faces.len()];
    let mut components = 0;
    for start in 0..faces.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(fi) = stack.pop() {
            let f = faces[fi];
            for k in 0..3 {
                let (p, q) = (f[k], f[(k + 1) % 3]);
                let ei = edge_index[&(p.min(q), p.max(q))];
                for slot in edge_faces[ei].iter().flatten() {
                    if !seen[*slot] {
                        seen[*slot] = true;
                        stack.push(*slot);
                    }
                }
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn tetrahedron_faces() -> Vec<[usize; 3]> {
        vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]]
    }

    pub fn octahedron_faces() -> Vec<[usize; 3]> {
        vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ]
    }

    #[test]
    fn tetrahedron_counts() {
        let m = TriMesh::from_faces(&tetrahedron_faces()).unwrap();
        assert_eq!(m.vertex_count(), 4);
        assert_eq!(m.edge_count(), 6);
        assert_eq!(m.face_count(), 4);
        assert!(m.is_closed());
        assert_eq!(m.genus().unwrap(), 0);
    }

    #[test]
    fn octahedron_counts_and_closedness() {
        let m = TriMesh::from_faces(&octahedron_faces()).unwrap();
        assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (6, 12, 8));
        assert_eq!(3 * m.face_count(), 2 * m.edge_count());
        assert_eq!(m.genus().unwrap(), 0);
        // brute-force incidence check: every edge has two distinct faces
        for e in 0..m.edge_count() {
            let [a, b] = m.edges()[e];
            let (l, r) = m.left_right_faces(a, b).unwrap();
            assert!(l.is_some() && r.is_some() && l != r);
            let (l2, r2) = m.left_right_faces(b, a).unwrap();
            assert_eq!((l2, r2), (r, l), "reversal swaps left and right");
        }
    }

    #[test]
    fn single_triangle_is_all_boundary() {
        let m = TriMesh::from_faces(&[[0, 1, 2]]).unwrap();
        assert_eq!(m.edge_count(), 3);
        assert_eq!(m.interior_edges().len(), 0);
        assert!(!m.is_closed());
        assert!(m.genus().is_err());
    }

    #[test]
    fn inconsistent_orientation_detected() {
        // {0,1,2} and {1,2,3} both traverse 1->2
        let err = TriMesh::from_faces(&[[0, 1, 2], [1, 2, 3]]).unwrap_err();
        assert!(matches!(err, Error::InconsistentOrientation { .. }));
    }

    #[test]
    fn non_manifold_edge_detected() {
        let err = TriMesh::from_faces(&[[0, 1, 2], [0, 3, 1], [0, 4, 1]]).unwrap_err();
        assert!(matches!(err, Error::NonManifoldEdge(0, 1)));
    }

    #[test]
    fn tetrahedron_left_right_pairs_cover_each_face_three_times() {
        let m = TriMesh::from_faces(&tetrahedron_faces()).unwrap();
        let mut count = vec![0usize; m.face_count()];
        for e in 0..m.edge_count() {
            let [a, b] = m.edges()[e];
            let (l, r) = m.left_right_faces(a, b).unwrap();
            count[l.unwrap()] += 1;
            count[r.unwrap()] += 1;
        }
        assert!(count.iter().all(|&c| c == 3));
    }

    #[test]
    fn star_sizes_sum_to_twice_edges() {
        let m = TriMesh::from_faces(&octahedron_faces()).unwrap();
        let total: usize = (0..m.vertex_count()).map(|v| m.star(v).len()).sum();
        assert_eq!(total, 2 * m.edge_count());
    }

    #[test]
    fn star_order_consistent_with_faces() {
        let m = TriMesh::from_faces(&octahedron_faces()).unwrap();
        for v in 0..m.vertex_count() {
            let star = m.star(v);
            for s in 0..star.len() {
                let j = star[s];
                let k = star[(s + 1) % star.len()];
                // face {v, j, k} must exist with this cyclic orientation
                let oe = m.oriented(v, j).unwrap();
                let f = m.left_face(oe).unwrap();
                assert_eq!(m.apex(f, v, j), k);
            }
        }
    }

    #[test]
    fn deterministic_rebuild() {
        let faces = octahedron_faces();
        let a = TriMesh::from_faces(&faces).unwrap();
        let b = TriMesh::from_faces(&faces).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.faces(), b.faces());
        assert_eq!(a.interior_edges(), b.interior_edges());
    }

    #[test]
    fn disconnected_detected_in_strict_mode() {
        let faces = [[0, 1, 2], [3, 4, 5]];
        assert!(TriMesh::from_faces(&faces).is_ok());
        let err = TriMesh::from_faces_connected(&faces).unwrap_err();
        assert!(matches!(err, Error::DisconnectedSurface { components: 2 }));
    }

    #[test]
    fn boundary_fan_star_is_open_chain() {
        // fan of three triangles around vertex 0
        let m = TriMesh::from_faces(&[[0, 1, 2], [0, 2, 3], [0, 3, 4]]).unwrap();
        assert_eq!(m.star(0), &[1, 2, 3, 4]);
        assert!(m.is_boundary_vertex(0));
        let oe = m.oriented(0, 1).unwrap();
        assert!(m.right_face(oe).is_none(), "boundary edge lacks right face");
        assert!(m.left_face(oe).is_some());
    }
}
