//! Infinitesimal conformal and isometric deformations.
//!
//! The conformal condition on a deformation `fdot` of a realization `f` is
//! that some scale factor `u: V -> R` satisfies, on every edge,
//!
//! ```text
//! <fdot_j - fdot_i, f_j - f_i> = (u_i + u_j)/2 * |f_j - f_i|^2 .
//! ```
//!
//! This module fits scale factors, computes nullspace bases of the
//! cross-ratio and rigidity linearizations, solves for deformations with
//! prescribed scale factor, recovers the per-face rotation field `Z`,
//! evaluates the rate quantities (dihedral-angle rates, corner-angle rates,
//! mean-curvature half-density rate), and integrates closed vector-valued
//! 1-forms back to deformations.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{EdgeMetric, GeometryCache, InfDeformation, Realization, Vec3};
use crate::linalg::{self, SvWindow};
use crate::mesh::TriMesh;
use crate::parallel::map_range;
use crate::{Error, Result, Tolerances};

/// Least-squares fit of a scale factor to a deformation.
#[derive(Debug, Clone)]
pub struct ScaleFactorFit {
    pub u: Vec<f64>,
    /// Per-edge residual `<df, e>/|e|^2 - (u_i + u_j)/2`.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    /// Scale of the fitted quantities, `max |fdot| / min edge length`.
    pub scale: f64,
}

impl ScaleFactorFit {
    pub fn is_conformal(&self, tol: &Tolerances) -> bool {
        self.max_residual <= tol.rel * self.scale
    }
}

/// Fit the scale factor of `fdot` over all edges in the least-squares
/// sense. The residual vector reports non-conformality; there is no error
/// path.
pub fn scale_factor_of(mesh: &TriMesh, f: &Realization, fdot: &InfDeformation) -> ScaleFactorFit {
    let nv = mesh.vertex_count();
    let ne = mesh.edge_count();
    let mut a = DMatrix::zeros(ne, nv);
    let mut b = DVector::zeros(ne);
    let mut min_len = f64::INFINITY;
    for (e, &[p, q]) in mesh.edges().iter().enumerate() {
        let len2 = f.diff_dot(q, p, f, q, p);
        min_len = min_len.min(len2.sqrt());
        a[(e, p)] = 0.5;
        a[(e, q)] = 0.5;
        b[e] = fdot.diff_dot(q, p, f, q, p) / len2;
    }
    let (u, _) = linalg::min_norm_lstsq(&a, &b, 1e-13);
    let residual: Vec<f64> = (0..ne).map(|e| b[e] - (&a * &u)[e]).collect();
    let max_residual = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let scale = fdot.max_norm() / min_len;
    ScaleFactorFit {
        u: u.iter().copied().collect(),
        residual,
        max_residual,
        scale,
    }
}

/// A nullspace of deformations with its dimension and the singular values
/// at the rank cutoff.
#[derive(Debug, Clone)]
pub struct DeformationSpace {
    pub dimension: usize,
    pub basis: Vec<InfDeformation>,
    pub sv_window: SvWindow,
}

/// Rigidity matrix: one row per edge, `<fdot_j - fdot_i, f_j - f_i> = 0`.
pub fn rigidity_matrix(mesh: &TriMesh, f: &Realization) -> DMatrix<f64> {
    let dim = f.dim();
    let rows = map_range(mesh.edge_count(), |e| {
        let [p, q] = mesh.edges()[e];
        let mut row = vec![0.0; dim * mesh.vertex_count()];
        for t in 0..dim {
            let d = f.coords(q)[t] - f.coords(p)[t];
            row[dim * q + t] = d;
            row[dim * p + t] = -d;
        }
        row
    });
    DMatrix::from_fn(mesh.edge_count(), dim * mesh.vertex_count(), |r, c| rows[r][c])
}

/// Nullspace of the rigidity matrix: all infinitesimal isometric
/// deformations, Euclidean motions included. The surface is
/// infinitesimally rigid iff the dimension equals `n(n+1)/2` (6 in space).
pub fn isometric_space(mesh: &TriMesh, f: &Realization, tol: &Tolerances) -> DeformationSpace {
    let a = rigidity_matrix(mesh, f);
    let (vecs, sv_window) = linalg::nullspace(&a, tol.rank_rel);
    DeformationSpace {
        dimension: vecs.len(),
        basis: vecs
            .iter()
            .map(|v| InfDeformation::from_dvector(f.dim(), v))
            .collect(),
        sv_window,
    }
}

/// The conformal deformation space with its cross-validation data.
#[derive(Debug, Clone)]
pub struct ConformalSpace {
    pub dimension: usize,
    pub basis: Vec<InfDeformation>,
    pub sv_window: SvWindow,
    /// Nullity of the augmented `(fdot, u)` system; must equal `dimension`.
    pub augmented_dimension: usize,
}

/// Linearized cross-ratio constraints: one row per interior edge,
/// `d/dt log lcr = 0` expanded in the vertex velocities.
pub fn lcr_constraint_matrix(mesh: &TriMesh, f: &Realization) -> DMatrix<f64> {
    let dim = f.dim();
    let nv = mesh.vertex_count();
    let rows = map_range(mesh.interior_edges().len(), |idx| {
        let e = mesh.interior_edges()[idx];
        let [i, j] = mesh.edges()[e];
        let oe = mesh.oriented(i, j).unwrap();
        let k = mesh.apex(mesh.left_face(oe).unwrap(), i, j);
        let l = mesh.apex(mesh.right_face(oe).unwrap(), i, j);
        let mut row = vec![0.0; dim * nv];
        // d log lcr_ij = dlog l_il + dlog l_jk - dlog l_lj - dlog l_ki
        for (p, q, sign) in [(i, l, 1.0), (j, k, 1.0), (l, j, -1.0), (k, i, -1.0)] {
            let len2 = f.diff_dot(q, p, f, q, p);
            for t in 0..dim {
                let d = sign * (f.coords(q)[t] - f.coords(p)[t]) / len2;
                row[dim * q + t] += d;
                row[dim * p + t] -= d;
            }
        }
        row
    });
    DMatrix::from_fn(rows.len(), dim * nv, |r, c| rows[r][c])
}

/// Nullspace of the cross-ratio linearization, cross-validated against the
/// augmented `(fdot, u)` edge system (their nullities must agree).
pub fn conformal_space(mesh: &TriMesh, f: &Realization, tol: &Tolerances) -> Result<ConformalSpace> {
    let a = lcr_constraint_matrix(mesh, f);
    let (vecs, sv_window) = linalg::nullspace(&a, tol.rank_rel);

    // augmented route: unknowns (fdot, u), one row per edge
    let dim = f.dim();
    let nv = mesh.vertex_count();
    let cols = dim * nv + nv;
    let mut aug = DMatrix::zeros(mesh.edge_count(), cols);
    for (e, &[p, q]) in mesh.edges().iter().enumerate() {
        let len2 = f.diff_dot(q, p, f, q, p);
        for t in 0..dim {
            let d = (f.coords(q)[t] - f.coords(p)[t]) / len2;
            aug[(e, dim * q + t)] = d;
            aug[(e, dim * p + t)] = -d;
        }
        aug[(e, dim * nv + p)] = -0.5;
        aug[(e, dim * nv + q)] = -0.5;
    }
    let augmented_dimension = cols - linalg::rank(&aug, tol.rank_rel);

    Ok(ConformalSpace {
        dimension: vecs.len(),
        basis: vecs
            .iter()
            .map(|v| InfDeformation::from_dvector(dim, v))
            .collect(),
        sv_window,
        augmented_dimension,
    })
}

/// Orthonormal basis of the trivial motions of `f`: `n` translations plus
/// `n(n-1)/2` rotations about the centroid, as flat vectors.
pub fn euclidean_motion_basis(f: &Realization) -> Vec<DVector<f64>> {
    let dim = f.dim();
    let nv = f.vertex_count();
    let c = f.centroid();
    let mut raw = Vec::new();
    for t in 0..dim {
        let mut v = DVector::zeros(dim * nv);
        for p in 0..nv {
            v[dim * p + t] = 1.0;
        }
        raw.push(v);
    }
    for s in 0..dim {
        for t in s + 1..dim {
            let mut v = DVector::zeros(dim * nv);
            for p in 0..nv {
                let x = f.coords(p);
                v[dim * p + s] = x[t] - c[t];
                v[dim * p + t] = -(x[s] - c[s]);
            }
            raw.push(v);
        }
    }
    linalg::orthonormalize(&raw)
}

/// Result of a scale-factor solve.
#[derive(Debug, Clone)]
pub struct USolve {
    pub fdot: InfDeformation,
    /// Least-squares residual of the edge system.
    pub residual: f64,
    pub rhs_norm: f64,
}

/// Solve for a deformation with prescribed scale factor `u` (Euclidean
/// motions gauged out: `sum fdot = 0`, `sum (f - c) x fdot = 0`).
///
/// Fails with [`Error::Unrealizable`] when the edge system is inconsistent,
/// reporting the pairings of the right-hand side with the self-stress
/// directions that obstruct it.
pub fn solve_from_u(mesh: &TriMesh, f: &Realization, u: &[f64], tol: &Tolerances) -> Result<USolve> {
    if f.dim() != 3 {
        return Err(Error::DimensionMismatch { got: f.dim(), need: 3 });
    }
    if u.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch {
            got: u.len(),
            expected: mesh.vertex_count(),
        });
    }
    let a = rigidity_matrix(mesh, f);
    let mut b = DVector::zeros(mesh.edge_count());
    for (e, &[p, q]) in mesh.edges().iter().enumerate() {
        b[e] = (u[p] + u[q]) / 2.0 * f.diff_dot(q, p, f, q, p);
    }
    let (mut x, residual) = linalg::min_norm_lstsq(&a, &b, tol.rank_rel);
    let rhs_norm = b.norm();
    if residual > tol.rel * rhs_norm.max(1e-300) {
        let stresses = linalg::left_nullspace(&a, tol.rank_rel);
        let pairings = stresses.iter().map(|s| s.dot(&b)).collect();
        return Err(Error::Unrealizable { residual, pairings });
    }
    linalg::project_out(&mut x, &euclidean_motion_basis(f));
    Ok(USolve {
        fdot: InfDeformation::from_dvector(3, &x),
        residual,
        rhs_norm,
    })
}

/// Recover the unique per-face rotation field `Z` of a conformal
/// deformation: on every boundary edge `(p, q)` of a face,
///
/// ```text
/// fdot_q - fdot_p = (u_p+u_q)/2 (f_q-f_p)
///                 + (f_q-f_p) x (Z + cot(opp)/2 (u_q-u_p) N) .
/// ```
///
/// The three edge equations form a rank-3 system per face. After the
/// per-face solves, the left/right compatibility is verified on every
/// interior edge.
pub fn recover_z(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    fdot: &InfDeformation,
    fit: &ScaleFactorFit,
    tol: &Tolerances,
) -> Result<Vec<Vec3>> {
    if !fit.is_conformal(tol) {
        return Err(Error::NotConformal {
            residual: fit.max_residual,
        });
    }
    let u = &fit.u;
    let z = map_range(mesh.face_count(), |fi| {
        let fc = mesh.faces()[fi];
        let n = cache.normal(fi);
        let mut m = nalgebra::Matrix3::<f64>::zeros();
        let mut rhs = Vec3::zeros();
        for k in 0..3 {
            let (p, q) = (fc[k], fc[(k + 1) % 3]);
            let e = f.point3(q) - f.point3(p);
            let df = fdot.point3(q) - fdot.point3(p);
            let sigma = (u[p] + u[q]) / 2.0;
            let cot = cache.corner_cot(mesh, fi, fc[(k + 2) % 3]);
            let r = df - sigma * e - e.cross(&(cot / 2.0 * (u[q] - u[p]) * n));
            m += e.norm_squared() * nalgebra::Matrix3::identity() - e * e.transpose();
            rhs += -e.cross(&r);
        }
        m.lu().solve(&rhs).unwrap_or_else(Vec3::zeros)
    });
    verify_eq2(mesh, f, cache, u, &z, tol)?;
    Ok(z)
}

/// Check the left/right compatibility (the perpendicular component of the
/// jump of `Z` across every interior edge).
fn verify_eq2(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    u: &[f64],
    z: &[Vec3],
    tol: &Tolerances,
) -> Result<()> {
    let mut max_viol: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &e in mesh.interior_edges() {
        let [p, q] = mesh.edges()[e];
        let oe = mesh.oriented(p, q).unwrap();
        let (l, r) = (mesh.left_face(oe).unwrap(), mesh.right_face(oe).unwrap());
        let ev = f.point3(q) - f.point3(p);
        let w = (z[l] - z[r])
            + (u[q] - u[p])
                * (cache.cot_opposite(mesh, l, p, q) / 2.0 * cache.normal(l)
                    + cache.cot_opposite(mesh, r, p, q) / 2.0 * cache.normal(r));
        max_viol = max_viol.max(ev.cross(&w).norm());
        scale = scale.max(ev.norm() * (z[l].norm() + z[r].norm()).max(u[q].abs() + u[p].abs()));
    }
    if max_viol > 10.0 * tol.rel * scale.max(1e-300) {
        return Err(Error::Eq2Violated {
            max: max_viol / scale.max(1e-300),
        });
    }
    Ok(())
}

/// Rate quantities of a conformal deformation given `(u, Z)`.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// Change in dihedral angle per edge (NaN on boundary edges).
    pub alpha_dot: Vec<f64>,
    /// Corner-angle rates, slot-aligned with `mesh.faces()`.
    pub beta_dot: Vec<[f64; 3]>,
    /// Change in mean-curvature half-density per vertex
    /// (NaN on boundary vertices).
    pub rho: Vec<f64>,
}

/// Evaluate all rate quantities:
/// `alpha_dot_ij = <f_j - f_i, Z_left - Z_right> / |f_j - f_i|`,
/// the corner formula for `beta_dot`, and
/// `rho_i = 1/2 sum_j alpha_dot_ij |f_j - f_i|`.
pub fn rates(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    u: &[f64],
    z: &[Vec3],
) -> RateReport {
    let alpha_dot: Vec<f64> = mesh
        .edges()
        .iter()
        .map(|&[p, q]| {
            let oe = mesh.oriented(p, q).unwrap();
            match (mesh.left_face(oe), mesh.right_face(oe)) {
                (Some(l), Some(r)) => {
                    let ev = f.point3(q) - f.point3(p);
                    ev.dot(&(z[l] - z[r])) / ev.norm()
                }
                _ => f64::NAN,
            }
        })
        .collect();

    let beta_dot: Vec<[f64; 3]> = (0..mesh.face_count())
        .map(|fi| {
            let fc = mesh.faces()[fi];
            let mut out = [0.0; 3];
            for s in 0..3 {
                let (v0, v1, v2) = (fc[s], fc[(s + 1) % 3], fc[(s + 2) % 3]);
                out[s] = (u[v1] - u[v0]) * cache.corner_cot(mesh, fi, v2) / 2.0
                    + (u[v2] - u[v0]) * cache.corner_cot(mesh, fi, v1) / 2.0;
            }
            out
        })
        .collect();

    let rho: Vec<f64> = (0..mesh.vertex_count())
        .map(|i| {
            if mesh.is_boundary_vertex(i) {
                return f64::NAN;
            }
            0.5 * mesh
                .star(i)
                .iter()
                .map(|&j| {
                    let e = mesh.edge_between(i, j).unwrap();
                    alpha_dot[e] * f.distance(i, j)
                })
                .sum::<f64>()
        })
        .collect();

    RateReport {
        alpha_dot,
        beta_dot,
        rho,
    }
}

/// Residual of the angular velocity equation per interior vertex:
/// `sum_j alpha_dot_ij e_hat_ij - sum_faces beta_dot(corner at i) N_face`.
/// Boundary vertices carry NaN.
pub fn check_angular_velocity(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    report: &RateReport,
) -> Vec<f64> {
    (0..mesh.vertex_count())
        .map(|i| {
            if mesh.is_boundary_vertex(i) {
                return f64::NAN;
            }
            let mut lhs = Vec3::zeros();
            for &j in mesh.star(i) {
                let e = mesh.edge_between(i, j).unwrap();
                lhs += report.alpha_dot[e] * (f.point3(j) - f.point3(i)).normalize();
            }
            let mut rhs = Vec3::zeros();
            for fi in mesh.star_faces(i) {
                let slot = mesh.faces()[fi].iter().position(|&v| v == i).unwrap();
                rhs += report.beta_dot[fi][slot] * cache.normal(fi);
            }
            (lhs - rhs).norm()
        })
        .collect()
}

/// The vector-valued primal 1-form of a `(u, Z)` pair:
/// `eta(e_pq) = (u_p+u_q)/2 (f_q-f_p) + (f_q-f_p) x (Z_left + cot/2 (u_q-u_p) N_left)`,
/// stored per edge in the canonical (smaller to larger vertex) orientation.
/// The left and right expressions are verified to agree; their mean is
/// returned.
pub fn build_eta(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    u: &[f64],
    z: &[Vec3],
    tol: &Tolerances,
) -> Result<Vec<Vec3>> {
    let mut eta = Vec::with_capacity(mesh.edge_count());
    let mut max_gap: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &[p, q] in mesh.edges() {
        let oe = mesh.oriented(p, q).unwrap();
        let ev = f.point3(q) - f.point3(p);
        let sigma = (u[p] + u[q]) / 2.0;
        // du enters with opposite signs on the two sides of the edge
        let expr = |face: usize, du: f64| {
            sigma * ev
                + ev.cross(&(z[face] + cache.cot_opposite(mesh, face, p, q) / 2.0 * du * cache.normal(face)))
        };
        let val = match (mesh.left_face(oe), mesh.right_face(oe)) {
            (Some(l), Some(r)) => {
                let a = expr(l, u[q] - u[p]);
                let b = expr(r, -(u[q] - u[p]));
                max_gap = max_gap.max((a - b).norm());
                scale = scale.max(a.norm() + b.norm());
                0.5 * (a + b)
            }
            (Some(l), None) => expr(l, u[q] - u[p]),
            (None, Some(r)) => expr(r, -(u[q] - u[p])),
            _ => unreachable!("edge without faces"),
        };
        scale = scale.max(val.norm());
        eta.push(val);
    }
    if max_gap > 10.0 * tol.rel * scale.max(1e-300) {
        return Err(Error::Eq2Violated {
            max: max_gap / scale.max(1e-300),
        });
    }
    Ok(eta)
}

/// Integrate a closed vector-valued primal 1-form to a vertex field with
/// `field[root] = 0`, by spanning-tree traversal followed by verification
/// on every edge. Fails with [`Error::FormNotClosed`] when a face sum is
/// nonzero and [`Error::FormNotExact`] when a non-tree edge disagrees
/// (possible only on surfaces of positive genus).
pub fn integrate_one_form(
    mesh: &TriMesh,
    eta: &[Vec3],
    root: usize,
    tol: &Tolerances,
) -> Result<InfDeformation> {
    if eta.len() != mesh.edge_count() {
        return Err(Error::SizeMismatch {
            got: eta.len(),
            expected: mesh.edge_count(),
        });
    }
    let eta_scale = eta.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);

    // closedness on every face
    let mut max_face = 0.0_f64;
    for fc in mesh.faces() {
        let mut s = Vec3::zeros();
        for k in 0..3 {
            let (p, q) = (fc[k], fc[(k + 1) % 3]);
            s += eval_form(mesh, eta, p, q);
        }
        max_face = max_face.max(s.norm());
    }
    if max_face > tol.rel * 3.0 * eta_scale.max(1e-300) {
        return Err(Error::FormNotClosed { max: max_face });
    }

    // spanning-tree integration
    let nv = mesh.vertex_count();
    let mut field = vec![Vec3::zeros(); nv];
    let mut seen = vec![false; nv];
    seen[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(p) = queue.pop_front() {
        for &q in mesh.star(p) {
            if !seen[q] {
                seen[q] = true;
                field[q] = field[p] + eval_form(mesh, eta, p, q);
                queue.push_back(q);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::DisconnectedSurface { components: 2 });
    }

    // full-edge verification: periods around independent cycles must vanish
    let mut max_period = 0.0_f64;
    for (e, &[p, q]) in mesh.edges().iter().enumerate() {
        let gap = (field[q] - field[p] - eta[e]).norm();
        max_period = max_period.max(gap);
    }
    if max_period > tol.rel * (nv as f64) * eta_scale.max(1e-300) {
        return Err(Error::FormNotExact { max: max_period });
    }

    let mut out = InfDeformation::zeros(3, nv);
    for (v, val) in field.iter().enumerate() {
        out.set_point3(v, *val);
    }
    Ok(out)
}

/// Value of a canonical-orientation edge form on the directed edge `p -> q`.
pub fn eval_form(mesh: &TriMesh, form: &[Vec3], p: usize, q: usize) -> Vec3 {
    let e = mesh.edge_between(p, q).expect("unknown edge");
    if p < q {
        form[e]
    } else {
        -form[e]
    }
}

/// Isothermic test: nontrivial `k: E -> R` with
/// `sum_j k_ij |f_j - f_i|^2 = 0` and `sum_j k_ij (f_j - f_i) = 0` at every
/// interior vertex.
#[derive(Debug, Clone)]
pub struct IsothermicReport {
    pub isothermic: bool,
    pub dimension: usize,
    pub sv_window: SvWindow,
    /// Basis of the solution space, one value per edge.
    pub basis: Vec<Vec<f64>>,
}

pub fn is_isothermic(mesh: &TriMesh, f: &Realization, tol: &Tolerances) -> IsothermicReport {
    let dim = f.dim();
    let ne = mesh.edge_count();
    let rows_per_vertex = 1 + dim;
    let nrows = rows_per_vertex * mesh.interior_vertices().len();
    let mut a = DMatrix::zeros(nrows.max(1), ne);
    for (vi, &i) in mesh.interior_vertices().iter().enumerate() {
        for &j in mesh.star(i) {
            let e = mesh.edge_between(i, j).unwrap();
            let len2 = f.diff_dot(j, i, f, j, i);
            a[(rows_per_vertex * vi, e)] = len2;
            for t in 0..dim {
                a[(rows_per_vertex * vi + 1 + t, e)] = f.coords(j)[t] - f.coords(i)[t];
            }
        }
    }
    let (basis, sv_window) = linalg::nullspace(&a, tol.rank_rel);
    IsothermicReport {
        isothermic: !basis.is_empty(),
        dimension: basis.len(),
        sv_window,
        basis: basis.iter().map(|v| v.iter().copied().collect()).collect(),
    }
}

/// Deformation scale: the largest entry magnitude of `u` plus rate scale,
/// used to normalize identity checks in tests and reports.
pub fn rate_scale(mesh: &TriMesh, metric: &EdgeMetric, report: &RateReport) -> f64 {
    mesh.interior_edges()
        .iter()
        .map(|&e| report.alpha_dot[e].abs() * metric.lengths[e])
        .sum()
}

/// The rotation velocity field `w x f` (a trivial isometric deformation).
pub fn rotation_field(w: Vec3, f: &Realization) -> InfDeformation {
    let mut out = InfDeformation::zeros(3, f.vertex_count());
    for v in 0..f.vertex_count() {
        out.set_point3(v, w.cross(&f.point3(v)));
    }
    out
}

/// The non-trivial infinitesimal flexes: an orthonormal basis of the
/// isometric nullspace with the Euclidean motions projected out. Empty for
/// infinitesimally rigid surfaces.
pub fn nontrivial_flexes(mesh: &TriMesh, f: &Realization, tol: &Tolerances) -> Vec<InfDeformation> {
    let iso = isometric_space(mesh, f, tol);
    let trivial = euclidean_motion_basis(f);
    let mut flexes: Vec<DVector<f64>> = Vec::new();
    for b in &iso.basis {
        let mut v = b.to_dvector();
        linalg::project_out(&mut v, &trivial);
        linalg::project_out(&mut v, &linalg::orthonormalize(&flexes));
        if v.norm() > 1e-6 {
            flexes.push(v.normalize());
        }
    }
    flexes
        .iter()
        .map(|v| InfDeformation::from_dvector(f.dim(), v))
        .collect()
}

/// Full analysis pipeline of a conformal deformation: scale-factor fit,
/// face rotation field, and all rate quantities.
pub fn analyze_deformation(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    fdot: &InfDeformation,
    tol: &Tolerances,
) -> Result<(ScaleFactorFit, Vec<Vec3>, RateReport)> {
    let fit = scale_factor_of(mesh, f, fdot);
    let z = recover_z(mesh, f, cache, fdot, &fit, tol)?;
    let report = rates(mesh, f, cache, &fit.u, &z);
    Ok((fit, z, report))
}
