//! Infinitesimal conformal deformations of triangulated surfaces in Euclidean space.
//!
//! A deformation of vertex positions is *conformal* if it preserves all length
//! cross-ratios, or equivalently if the first-order change of every edge length
//! is governed by a per-vertex scale factor `u`. This crate builds the linear
//! systems behind that theory — rigidity matrices, the cross-ratio
//! linearization, and a discrete Dirac operator mapping `(u, Z)` pairs to the
//! change in mean-curvature half-density — and solves and cross-checks them on
//! desk-scale meshes with dense SVD.
//!
//! Module layout:
//! - [`mesh`]: oriented triangle-mesh combinatorics (edges, stars, left/right faces)
//! - [`io`]: OFF/OBJ readers and writers
//! - [`geometry`]: lengths, angles, normals, dihedrals, circumcenters, cross-ratios
//! - [`conformal`]: conformal/isometric deformation spaces, scale-factor solves,
//!   face rotation fields, rate quantities, 1-form integration
//! - [`dirac`]: the discrete Dirac operator, its adjoint, kernel analysis and
//!   the solve-from-`rho` pipeline
//! - [`moebius`]: Möbius maps, stereographic lifts and the conformal/isometric
//!   correspondence
//! - [`homology`]: discrete 1-forms, cohomology obstruction bases, high-genus solves
//! - [`zoo`]: deterministic generators for the named example surfaces
//!
//! When built with the `parallel` feature (default), per-face and per-edge
//! loops run on rayon with order-preserving collection, so results are
//! bit-identical to the sequential fallback.

pub mod conformal;
pub mod dirac;
mod error;
pub mod geometry;
pub mod homology;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod moebius;
pub mod parallel;
pub mod report;
pub mod zoo;

pub use error::{Error, Result};
pub use geometry::{EdgeMetric, GeometryCache, Realization};
pub use mesh::{OrientedEdge, TriMesh};

/// Numerical tolerances shared across all solvers and predicates.
///
/// `rel` scales with the quantity being tested (bounding-box diagonal for
/// lengths, vector norms for deformations). `rank_rel` is the SVD rank
/// cutoff: singular values at or below `rank_rel * sigma_max` count as zero.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub rank_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-10,
            rank_rel: 1e-9,
        }
    }
}

impl Tolerances {
    /// Default tolerances, with `rel` overridden by the `CONFDEFO_TOL`
    /// environment variable when it is set and parses as a float.
    pub fn from_env() -> Self {
        let mut tol = Tolerances::default();
        if let Ok(s) = std::env::var("CONFDEFO_TOL") {
            if let Ok(v) = s.trim().parse::<f64>() {
                if v > 0.0 {
                    tol.rel = v;
                }
            }
        }
        tol
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }
}
