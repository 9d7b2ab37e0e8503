//! The discrete Dirac operator of a realized triangulated surface.
//!
//! `D` maps a vertex function `u` and a face vector field `Z` to the pair
//! `(rho, U)`: the change in mean-curvature half-density the pair would
//! induce, and a normal-bundle section measuring the failure of `(u, Z)`
//! to integrate to a deformation:
//!
//! ```text
//! rho_i = 1/2 sum_j <f_j - f_i, Z_left - Z_right>
//! U_ij  = -(f_j - f_i) x (Z_left - Z_right) + (c_left - c_right)(u_j - u_i)
//! ```
//!
//! with `c` the face circumcenters. Its kernel beyond the four trivial
//! directions (constant `u`, constant `Z`) detects conformal flexibility
//! with vanishing `rho`; when the kernel is exactly four-dimensional, any
//! mean-zero `rho` is realized by an essentially unique conformal
//! deformation, recovered here by a least-squares solve followed by 1-form
//! integration.

use nalgebra::{DMatrix, DVector};

use crate::conformal::{self, RateReport};
use crate::geometry::{GeometryCache, InfDeformation, Realization, Vec3};
use crate::linalg::{self, SvWindow};
use crate::mesh::TriMesh;
use crate::parallel::map_range;
use crate::{Error, Result, Tolerances};

/// Classification thresholds for `dim Ker D` (relative to `sigma_max`):
/// the four trivial singular values must fall below `KERNEL_ZERO_REL`, and
/// a clear kernel of dimension 4 requires the fifth-smallest singular value
/// to exceed `KERNEL_GAP_REL`.
pub const KERNEL_ZERO_REL: f64 = 1e-10;
pub const KERNEL_GAP_REL: f64 = 1e-6;

/// Orthonormal frames of the edge-normal planes `(f_q - f_p)^perp`, per
/// canonical edge: `t1` is the left face normal (which is perpendicular to
/// the edge by construction, re-projected for numerical exactness), and
/// `t2 = e_hat x t1`.
#[derive(Debug, Clone)]
pub struct EdgeFrames {
    pub t1: Vec<Vec3>,
    pub t2: Vec<Vec3>,
}

pub fn edge_frames(mesh: &TriMesh, f: &Realization, cache: &GeometryCache) -> EdgeFrames {
    let mut t1 = Vec::with_capacity(mesh.edge_count());
    let mut t2 = Vec::with_capacity(mesh.edge_count());
    for &[p, q] in mesh.edges() {
        let ehat = (f.point3(q) - f.point3(p)).normalize();
        let oe = mesh.oriented(p, q).unwrap();
        let n = mesh
            .left_face(oe)
            .or(mesh.right_face(oe))
            .map(|fc| cache.normal(fc))
            .expect("edge without faces");
        let a = (n - ehat.dot(&n) * ehat).normalize();
        t1.push(a);
        t2.push(ehat.cross(&a));
    }
    EdgeFrames { t1, t2 }
}

/// A section of the edge-normal bundle, stored as two coordinates per edge
/// in the fixed frames; perpendicularity to the edge is exact by
/// construction.
#[derive(Debug, Clone)]
pub struct NormalSection {
    pub coords: Vec<[f64; 2]>,
}

impl NormalSection {
    pub fn zeros(edge_count: usize) -> Self {
        NormalSection {
            coords: vec![[0.0; 2]; edge_count],
        }
    }

    pub fn to_vectors(&self, frames: &EdgeFrames) -> Vec<Vec3> {
        self.coords
            .iter()
            .enumerate()
            .map(|(e, c)| c[0] * frames.t1[e] + c[1] * frames.t2[e])
            .collect()
    }

    /// Project ambient vectors into the frames (drops any component along
    /// the edge).
    pub fn from_vectors(frames: &EdgeFrames, vecs: &[Vec3]) -> Self {
        NormalSection {
            coords: vecs
                .iter()
                .enumerate()
                .map(|(e, v)| [v.dot(&frames.t1[e]), v.dot(&frames.t2[e])])
                .collect(),
        }
    }
}

fn require_closed(mesh: &TriMesh) -> Result<()> {
    if mesh.is_closed() {
        Ok(())
    } else {
        Err(Error::NotClosed)
    }
}

/// Left and right faces plus the edge vector of the canonical edge `e`.
fn edge_env(mesh: &TriMesh, f: &Realization, e: usize) -> (usize, usize, usize, usize, Vec3) {
    let [p, q] = mesh.edges()[e];
    let oe = mesh.oriented(p, q).unwrap();
    let l = mesh.left_face(oe).unwrap();
    let r = mesh.right_face(oe).unwrap();
    (p, q, l, r, f.point3(q) - f.point3(p))
}

/// Apply the Dirac operator to `(u, Z)` on a closed surface, returning
/// `rho` per vertex and `U` per canonical edge (as ambient vectors,
/// perpendicular to their edges).
pub fn dirac_apply(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    u: &[f64],
    z: &[Vec3],
) -> Result<(Vec<f64>, Vec<Vec3>)> {
    require_closed(mesh)?;
    let rho = map_range(mesh.vertex_count(), |i| {
        0.5 * mesh
            .star(i)
            .iter()
            .map(|&j| {
                let oe = mesh.oriented(i, j).unwrap();
                let (l, r) = (mesh.left_face(oe).unwrap(), mesh.right_face(oe).unwrap());
                (f.point3(j) - f.point3(i)).dot(&(z[l] - z[r]))
            })
            .sum::<f64>()
    });
    let us = map_range(mesh.edge_count(), |e| {
        let (p, q, l, r, ev) = edge_env(mesh, f, e);
        -ev.cross(&(z[l] - z[r])) + (cache.circumcenter(l) - cache.circumcenter(r)) * (u[q] - u[p])
    });
    Ok((rho, us))
}

/// Apply the adjoint operator to `(alpha, W)`:
///
/// ```text
/// rho~_i = -sum_j <c_left - c_right, W_ij>
/// Y_face = sum_boundary (f_q - f_p) x W_pq + (alpha_p + alpha_q)/2 (f_q - f_p)
/// ```
pub fn dirac_adjoint_apply(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    alpha: &[f64],
    w: &[Vec3],
) -> Result<(Vec<f64>, Vec<Vec3>)> {
    require_closed(mesh)?;
    let rho = map_range(mesh.vertex_count(), |i| {
        -mesh
            .star(i)
            .iter()
            .map(|&j| {
                let oe = mesh.oriented(i, j).unwrap();
                let (l, r) = (mesh.left_face(oe).unwrap(), mesh.right_face(oe).unwrap());
                (cache.circumcenter(l) - cache.circumcenter(r)).dot(&w[oe.edge])
            })
            .sum::<f64>()
    });
    let y = map_range(mesh.face_count(), |fi| {
        let fc = mesh.faces()[fi];
        let mut acc = Vec3::zeros();
        for k in 0..3 {
            let (p, q) = (fc[k], fc[(k + 1) % 3]);
            let ev = f.point3(q) - f.point3(p);
            let e = mesh.edge_between(p, q).unwrap();
            acc += ev.cross(&w[e]) + (alpha[p] + alpha[q]) / 2.0 * ev;
        }
        acc
    });
    Ok((rho, y))
}

/// Matrix of `D` in orthonormal coordinates: rows are `V` rho-entries then
/// two frame coordinates per edge; columns are `V` u-entries then three
/// per face. On a closed surface the matrix is square.
pub fn dirac_matrix(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    frames: &EdgeFrames,
) -> DMatrix<f64> {
    let nv = mesh.vertex_count();
    let ne = mesh.edge_count();
    let nf = mesh.face_count();
    let mut m = DMatrix::zeros(nv + 2 * ne, nv + 3 * nf);
    for i in 0..nv {
        for &j in mesh.star(i) {
            let oe = mesh.oriented(i, j).unwrap();
            let (l, r) = (mesh.left_face(oe).unwrap(), mesh.right_face(oe).unwrap());
            let ev = f.point3(j) - f.point3(i);
            for t in 0..3 {
                m[(i, nv + 3 * l + t)] += 0.5 * ev[t];
                m[(i, nv + 3 * r + t)] -= 0.5 * ev[t];
            }
        }
    }
    for e in 0..ne {
        let (p, q, l, r, ev) = edge_env(mesh, f, e);
        let dc = cache.circumcenter(l) - cache.circumcenter(r);
        for (s, t_frame) in [&frames.t1, &frames.t2].into_iter().enumerate() {
            let row = nv + 2 * e + s;
            let coef = ev.cross(&t_frame[e]); // <-(e x Z), t> = <e x t, Z>
            for t in 0..3 {
                m[(row, nv + 3 * l + t)] += coef[t];
                m[(row, nv + 3 * r + t)] -= coef[t];
            }
            let du_coef = dc.dot(&t_frame[e]);
            m[(row, q)] += du_coef;
            m[(row, p)] -= du_coef;
        }
    }
    m
}

/// Matrix of the adjoint in the same coordinates; equals the transpose of
/// [`dirac_matrix`] up to roundoff, which the tests assert.
pub fn dirac_adjoint_matrix(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    frames: &EdgeFrames,
) -> DMatrix<f64> {
    let nv = mesh.vertex_count();
    let ne = mesh.edge_count();
    let nf = mesh.face_count();
    let mut m = DMatrix::zeros(nv + 3 * nf, nv + 2 * ne);
    for i in 0..nv {
        for &j in mesh.star(i) {
            let oe = mesh.oriented(i, j).unwrap();
            let (l, r) = (mesh.left_face(oe).unwrap(), mesh.right_face(oe).unwrap());
            let dc = cache.circumcenter(l) - cache.circumcenter(r);
            for (s, t_frame) in [&frames.t1, &frames.t2].into_iter().enumerate() {
                m[(i, nv + 2 * oe.edge + s)] -= dc.dot(&t_frame[oe.edge]);
            }
        }
    }
    for fi in 0..nf {
        let fc = mesh.faces()[fi];
        for k in 0..3 {
            let (p, q) = (fc[k], fc[(k + 1) % 3]);
            let e = mesh.edge_between(p, q).unwrap();
            let ev = f.point3(q) - f.point3(p);
            for t in 0..3 {
                let row = nv + 3 * fi + t;
                m[(row, p)] += 0.5 * ev[t];
                m[(row, q)] += 0.5 * ev[t];
            }
            for (s, t_frame) in [&frames.t1, &frames.t2].into_iter().enumerate() {
                let coef = ev.cross(&t_frame[e]);
                for t in 0..3 {
                    m[(nv + 3 * fi + t, nv + 2 * e + s)] += coef[t];
                }
            }
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelClass {
    /// Exactly the four trivial directions, with a clear spectral gap.
    DimFour,
    /// Five or more singular values below the zero threshold.
    TooLarge(usize),
    /// The gap criteria are not met in either direction.
    Indeterminate,
}

#[derive(Debug, Clone)]
pub struct KernelReport {
    /// Number of singular values below `KERNEL_ZERO_REL * sigma_max`.
    pub dimension: usize,
    pub class: KernelClass,
    pub sv_window: SvWindow,
    /// Kernel basis as `(u, Z)` pairs; the four trivial directions
    /// (constant `u`; the three constant `Z` fields) come first.
    pub basis: Vec<(Vec<f64>, Vec<Vec3>)>,
}

/// SVD kernel analysis of the assembled Dirac matrix.
pub fn kernel(mesh: &TriMesh, f: &Realization, tol: &Tolerances) -> Result<KernelReport> {
    require_closed(mesh)?;
    let cache = GeometryCache::new(mesh, f, tol)?;
    let frames = edge_frames(mesh, f, &cache);
    let d = dirac_matrix(mesh, f, &cache, &frames);
    let (vecs, sv_window) = linalg::nullspace(&d, KERNEL_ZERO_REL);
    let dimension = vecs.len();

    let svs_asc: Vec<f64> = {
        let mut s = linalg::singular_values(&d);
        s.reverse();
        s
    };
    let smax = sv_window.sigma_max;
    let class = if dimension == 4 && svs_asc.len() > 4 && svs_asc[4] > KERNEL_GAP_REL * smax {
        KernelClass::DimFour
    } else if dimension > 4 {
        KernelClass::TooLarge(dimension)
    } else {
        KernelClass::Indeterminate
    };

    // order the basis with the trivial directions first
    let nv = mesh.vertex_count();
    let nf = mesh.face_count();
    let mut ordered: Vec<DVector<f64>> = Vec::new();
    let mut trivial = DVector::zeros(nv + 3 * nf);
    for i in 0..nv {
        trivial[i] = 1.0;
    }
    ordered.push(trivial);
    for t in 0..3 {
        let mut v = DVector::zeros(nv + 3 * nf);
        for fi in 0..nf {
            v[nv + 3 * fi + t] = 1.0;
        }
        ordered.push(v);
    }
    ordered.extend(vecs);
    let basis = linalg::orthonormalize(&ordered)
        .into_iter()
        .take(dimension.max(4))
        .map(|v| split_domain(mesh, &v))
        .collect();

    Ok(KernelReport {
        dimension,
        class,
        sv_window,
        basis,
    })
}

fn split_domain(mesh: &TriMesh, v: &DVector<f64>) -> (Vec<f64>, Vec<Vec3>) {
    let nv = mesh.vertex_count();
    let u = v.iter().take(nv).copied().collect();
    let z = (0..mesh.face_count())
        .map(|fi| Vec3::new(v[nv + 3 * fi], v[nv + 3 * fi + 1], v[nv + 3 * fi + 2]))
        .collect();
    (u, z)
}

/// Result of the solve-from-`rho` pipeline.
#[derive(Debug, Clone)]
pub struct RhoSolve {
    pub u: Vec<f64>,
    pub z: Vec<Vec3>,
    pub fdot: InfDeformation,
    /// Residual of the `D (u, Z) = (rho, 0)` least-squares solve.
    pub solve_residual: f64,
    /// Max difference between the prescribed `rho` and the value recovered
    /// from the integrated deformation.
    pub rho_roundtrip_error: f64,
    pub kernel: KernelReport,
}

/// Realize a prescribed change in mean-curvature half-density on a closed
/// genus-0 surface with `dim Ker D = 4`: solve `D (u, Z) = (rho, 0)`, build
/// the 1-form and integrate it. Gauge: `u` and `Z` mean-zero, deformation
/// zero at vertex 0.
pub fn solve_from_rho(
    mesh: &TriMesh,
    f: &Realization,
    rho: &[f64],
    tol: &Tolerances,
) -> Result<RhoSolve> {
    require_closed(mesh)?;
    let genus = mesh.genus()?;
    if genus != 0 {
        return Err(Error::NotSphere { genus });
    }
    if rho.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch {
            got: rho.len(),
            expected: mesh.vertex_count(),
        });
    }
    let sum: f64 = rho.iter().sum();
    let scale: f64 = rho.iter().map(|r| r.abs()).sum::<f64>().max(1e-300);
    if sum.abs() > 1e-9 * scale {
        return Err(Error::RhoSumNonzero { sum });
    }
    let kernel = kernel(mesh, f, tol)?;
    match kernel.class {
        KernelClass::DimFour => {}
        KernelClass::TooLarge(dim) => {
            return Err(Error::KernelTooLarge {
                dim,
                sv_window: kernel.sv_window.values.clone(),
            })
        }
        KernelClass::Indeterminate => {
            return Err(Error::IndeterminateKernel {
                sv_window: kernel.sv_window.values.clone(),
            })
        }
    }

    let cache = GeometryCache::new(mesh, f, tol)?;
    let frames = edge_frames(mesh, f, &cache);
    let d = dirac_matrix(mesh, f, &cache, &frames);
    let mut rhs = DVector::zeros(d.nrows());
    for (i, &r) in rho.iter().enumerate() {
        rhs[i] = r;
    }
    let (x, solve_residual) = linalg::min_norm_lstsq(&d, &rhs, tol.rank_rel);
    let (mut u, mut z) = split_domain(mesh, &x);
    let u_mean = u.iter().sum::<f64>() / u.len() as f64;
    u.iter_mut().for_each(|v| *v -= u_mean);
    let z_mean: Vec3 = z.iter().sum::<Vec3>() / z.len() as f64;
    z.iter_mut().for_each(|v| *v -= z_mean);

    let eta = conformal::build_eta(mesh, f, &cache, &u, &z, tol)?;
    let fdot = conformal::integrate_one_form(mesh, &eta, 0, tol)?;

    // round trip through the deformation itself
    let fit = conformal::scale_factor_of(mesh, f, &fdot);
    let z2 = conformal::recover_z(mesh, f, &cache, &fdot, &fit, tol)?;
    let back = conformal::rates(mesh, f, &cache, &fit.u, &z2);
    let rho_roundtrip_error = rho
        .iter()
        .zip(&back.rho)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);

    Ok(RhoSolve {
        u,
        z,
        fdot,
        solve_residual,
        rho_roundtrip_error,
        kernel,
    })
}

/// The dual representation of a conformal deformation:
/// `fdot_q - fdot_p = (u_p + u_q)/2 (f_q - f_p) + (f_q - f_p) x W_pq`
/// with `W` a normal section, and `D*(u, W) = (rho, 0)`.
#[derive(Debug, Clone)]
pub struct DualSolve {
    pub u: Vec<f64>,
    pub w: NormalSection,
    /// The vertex component of `D*(u, W)`; equals the rate report's `rho`.
    pub rho: Vec<f64>,
    /// Largest face component of `D*(u, W)`; must vanish.
    pub y_max: f64,
}

pub fn dual_solve(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    frames: &EdgeFrames,
    fdot: &InfDeformation,
    tol: &Tolerances,
) -> Result<DualSolve> {
    require_closed(mesh)?;
    let fit = conformal::scale_factor_of(mesh, f, fdot);
    if !fit.is_conformal(tol) {
        return Err(Error::NotConformal {
            residual: fit.max_residual,
        });
    }
    let u = fit.u.clone();
    let w_vecs: Vec<Vec3> = (0..mesh.edge_count())
        .map(|e| {
            let [p, q] = mesh.edges()[e];
            let ev = f.point3(q) - f.point3(p);
            let df = fdot.point3(q) - fdot.point3(p);
            let r = df - (u[p] + u[q]) / 2.0 * ev;
            r.cross(&ev) / ev.norm_squared()
        })
        .collect();
    let w = NormalSection::from_vectors(frames, &w_vecs);
    let (rho, y) = dirac_adjoint_apply(mesh, f, cache, &u, &w_vecs)?;
    let y_max = y.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    Ok(DualSolve { u, w, rho, y_max })
}

/// `D (1/A) D* (alpha, 0)`: apply the adjoint, divide the face component by
/// the face areas, and apply `D`. This factors the cotangent Laplacian:
///
/// ```text
/// rho_i = -1/2 sum_j (cot jki + cot ilj)(alpha_j - alpha_i)
/// U_ij  = -(alpha_j - alpha_i)(N_left - N_right)
/// ```
pub fn laplacian_factorization(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    alpha: &[f64],
) -> Result<(Vec<f64>, Vec<Vec3>)> {
    let zero_w = vec![Vec3::zeros(); mesh.edge_count()];
    let (rho_tilde, y) = dirac_adjoint_apply(mesh, f, cache, alpha, &zero_w)?;
    let z: Vec<Vec3> = y
        .iter()
        .enumerate()
        .map(|(fi, v)| v / cache.area(fi))
        .collect();
    dirac_apply(mesh, f, cache, &rho_tilde, &z)
}

/// Rate report computed directly from a `(u, Z)` Dirac preimage, without
/// integrating the deformation.
pub fn rates_of_pair(
    mesh: &TriMesh,
    f: &Realization,
    cache: &GeometryCache,
    u: &[f64],
    z: &[Vec3],
) -> RateReport {
    conformal::rates(mesh, f, cache, u, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{self, ZooSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn setup(spec: &ZooSpec) -> (TriMesh, Realization, GeometryCache, EdgeFrames) {
        let (mesh, f) = zoo::generate(spec).unwrap();
        let cache = GeometryCache::new(&mesh, &f, &tol()).unwrap();
        let frames = edge_frames(&mesh, &f, &cache);
        (mesh, f, cache, frames)
    }

    fn random_uz(mesh: &TriMesh, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Vec3>) {
        let u = (0..mesh.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z = (0..mesh.face_count())
            .map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        (u, z)
    }

    fn random_normal_section(mesh: &TriMesh, frames: &EdgeFrames, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
        (0..mesh.edge_count())
            .map(|e| rng.gen_range(-1.0..1.0) * frames.t1[e] + rng.gen_range(-1.0..1.0) * frames.t2[e])
            .collect()
    }

    #[test]
    fn trivial_directions_are_in_the_kernel() {
        let (mesh, f, cache, _) = setup(&ZooSpec::Perturbed {
            base: Box::new(ZooSpec::Octahedron),
            seed: 1,
            magnitude: 0.05,
        });
        let u = vec![0.7; mesh.vertex_count()];
        let z0 = vec![Vec3::zeros(); mesh.face_count()];
        let (rho, us) = dirac_apply(&mesh, &f, &cache, &u, &z0).unwrap();
        assert!(rho.iter().all(|r| r.abs() < 1e-13));
        assert!(us.iter().all(|v| v.norm() < 1e-13));

        let w = Vec3::new(0.2, -0.8, 0.5);
        let zc = vec![w; mesh.face_count()];
        let (rho2, us2) = dirac_apply(&mesh, &f, &cache, &vec![0.0; mesh.vertex_count()], &zc).unwrap();
        assert!(rho2.iter().all(|r| r.abs() < 1e-13));
        assert!(us2.iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn image_sums_vanish() {
        // Lemma 8.5 necessity: sum rho = 0 and sum U = 0 for anything in Im D
        let (mesh, f, cache, _) = setup(&ZooSpec::Octahedron);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (u, z) = random_uz(&mesh, &mut rng);
        let (rho, us) = dirac_apply(&mesh, &f, &cache, &u, &z).unwrap();
        let su: f64 = rho.iter().sum();
        let sv: Vec3 = us.iter().sum();
        assert!(su.abs() < 1e-12);
        assert!(sv.norm() < 1e-12);
        // U is perpendicular to its edge
        for (e, &[p, q]) in mesh.edges().iter().enumerate() {
            let ev = f.point3(q) - f.point3(p);
            assert!(us[e].dot(&ev).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_agrees_with_apply() {
        let (mesh, f, cache, frames) = setup(&ZooSpec::Perturbed {
            base: Box::new(ZooSpec::Octahedron),
            seed: 3,
            magnitude: 0.08,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (u, z) = random_uz(&mesh, &mut rng);
        let (rho, us) = dirac_apply(&mesh, &f, &cache, &u, &z).unwrap();

        let d = dirac_matrix(&mesh, &f, &cache, &frames);
        let nv = mesh.vertex_count();
        let mut x = DVector::zeros(d.ncols());
        for (i, &ui) in u.iter().enumerate() {
            x[i] = ui;
        }
        for (fi, zf) in z.iter().enumerate() {
            for t in 0..3 {
                x[nv + 3 * fi + t] = zf[t];
            }
        }
        let y = &d * &x;
        for i in 0..nv {
            assert!((y[i] - rho[i]).abs() < 1e-12);
        }
        for e in 0..mesh.edge_count() {
            assert!((y[nv + 2 * e] - us[e].dot(&frames.t1[e])).abs() < 1e-12);
            assert!((y[nv + 2 * e + 1] - us[e].dot(&frames.t2[e])).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_matrix_is_transpose() {
        for spec in [
            ZooSpec::Octahedron,
            ZooSpec::Jessen,
            ZooSpec::Perturbed {
                base: Box::new(ZooSpec::Icosahedron),
                seed: 5,
                magnitude: 0.02,
            },
        ] {
            let (mesh, f, cache, frames) = setup(&spec);
            let d = dirac_matrix(&mesh, &f, &cache, &frames);
            let ds = dirac_adjoint_matrix(&mesh, &f, &cache, &frames);
            let scale = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let diff = (&ds - &d.transpose()).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            assert!(diff <= 1e-14 * scale, "{spec:?}: {diff}");
        }
    }

    #[test]
    fn adjointness_of_applications() {
        let (mesh, f, cache, frames) = setup(&ZooSpec::Perturbed {
            base: Box::new(ZooSpec::Octahedron),
            seed: 6,
            magnitude: 0.06,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (u, z) = random_uz(&mesh, &mut rng);
            let alpha: Vec<f64> = (0..mesh.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = random_normal_section(&mesh, &frames, &mut rng);
            let (rho, us) = dirac_apply(&mesh, &f, &cache, &u, &z).unwrap();
            let (rho_t, y) = dirac_adjoint_apply(&mesh, &f, &cache, &alpha, &w).unwrap();
            let lhs: f64 = rho.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>()
                + us.iter().zip(&w).map(|(a, b)| a.dot(b)).sum::<f64>();
            let rhs: f64 = u.iter().zip(&rho_t).map(|(a, b)| a * b).sum::<f64>()
                + z.iter().zip(&y).map(|(a, b)| a.dot(b)).sum::<f64>();
            let scale = (lhs.abs() + rhs.abs()).max(1.0);
            assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn adjoint_kernel_contains_constants() {
        let (mesh, f, cache, _) = setup(&ZooSpec::Perturbed {
            base: Box::new(ZooSpec::Octahedron),
            seed: 8,
            magnitude: 0.04,
        });
        let wconst = Vec3::new(0.3, 0.4, -0.6);
        let w: Vec<Vec3> = mesh
            .edges()
            .iter()
            .map(|&[p, q]| {
                let ehat = (f.point3(q) - f.point3(p)).normalize();
                wconst - ehat.dot(&wconst) * ehat
            })
            .collect();
        let alpha = vec![1.3; mesh.vertex_count()];
        let (rho, y) = dirac_adjoint_apply(&mesh, &f, &cache, &alpha, &w).unwrap();
        assert!(rho.iter().all(|r| r.abs() < 1e-12));
        assert!(y.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn octahedron_kernel_is_four_dimensional() {
        let (mesh, f) = zoo::generate(&ZooSpec::Octahedron).unwrap();
        let rep = kernel(&mesh, &f, &tol()).unwrap();
        assert_eq!(rep.dimension, 4);
        assert_eq!(rep.class, KernelClass::DimFour);
        assert!(rep.basis.len() >= 4);
    }

    #[test]
    fn jessen_and_bricard_kernels_exceed_four() {
        let (mesh, f) = zoo::generate(&ZooSpec::Jessen).unwrap();
        let rep = kernel(&mesh, &f, &tol()).unwrap();
        assert!(rep.dimension >= 5, "jessen: {}", rep.dimension);
        assert!(matches!(rep.class, KernelClass::TooLarge(_)));

        let (mesh2, f2) = zoo::generate(&ZooSpec::Bricard { seed: 1 }).unwrap();
        let rep2 = kernel(&mesh2, &f2, &tol()).unwrap();
        assert!(rep2.dimension >= 5, "bricard: {}", rep2.dimension);
    }

    #[test]
    fn solve_from_rho_round_trip() {
        let (mesh, f) = zoo::generate(&ZooSpec::Octahedron).unwrap();
        let rho = vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        let sol = solve_from_rho(&mesh, &f, &rho, &tol()).unwrap();
        assert!(sol.solve_residual < 1e-10);
        assert!(sol.rho_roundtrip_error <= 1e-8, "{}", sol.rho_roundtrip_error);
    }

    #[test]
    fn solve_from_rho_rejects_nonzero_sum() {
        let (mesh, f) = zoo::generate(&ZooSpec::Octahedron).unwrap();
        let rho = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            solve_from_rho(&mesh, &f, &rho, &tol()),
            Err(Error::RhoSumNonzero { .. })
        ));
    }

    #[test]
    fn solve_from_rho_zero_gives_zero() {
        let (mesh, f) = zoo::generate(&ZooSpec::Perturbed {
            base: Box::new(ZooSpec::Octahedron),
            seed: 9,
            magnitude: 0.05,
        })
        .unwrap();
        let sol = solve_from_rho(&mesh, &f, &vec![0.0; 6], &tol()).unwrap();
        assert!(sol.fdot.max_norm() < 1e-12);
    }

    #[test]
    fn solve_from_rho_rejects_flexible_and_high_genus() {
        let (mesh, f) = zoo::generate(&ZooSpec::Jessen).unwrap();
        let mut rho = vec![0.0; mesh.vertex_count()];
        rho[0] = 1.0;
        rho[1] = -1.0;
        assert!(matches!(
            solve_from_rho(&mesh, &f, &rho, &tol()),
            Err(Error::KernelTooLarge { .. })
        ));

        let (mt, ft) = zoo::generate(&ZooSpec::Torus { nu: 6, nv: 6 }).unwrap();
        let mut rho_t = vec![0.0; mt.vertex_count()];
        rho_t[0] = 1.0;
        rho_t[1] = -1.0;
        assert!(matches!(
            solve_from_rho(&mt, &ft, &rho_t, &tol()),
            Err(Error::NotSphere { genus: 1 })
        ));
    }

    #[test]
    fn dual_solve_of_rotation_is_kernel_direction() {
        let (mesh, f, cache, frames) = setup(&ZooSpec::Perturbed {
            base: Box::new(ZooSpec::Octahedron),
            seed: 10,
            magnitude: 0.05,
        });
        let w = Vec3::new(0.5, -0.1, 0.8);
        let fdot = crate::conformal::rotation_field(w, &f);
        let sol = dual_solve(&mesh, &f, &cache, &frames, &fdot, &tol()).unwrap();
        assert!(sol.u.iter().all(|x| x.abs() < 1e-12));
        // fdot_q - fdot_p = w x e = e x (-w): W is the perpendicular part
        // of the constant -w, a kernel direction of the adjoint
        let wv = sol.w.to_vectors(&frames);
        for (e, &[p, q]) in mesh.edges().iter().enumerate() {
            let ehat = (f.point3(q) - f.point3(p)).normalize();
            let expect = -(w - ehat.dot(&w) * ehat);
            assert!((wv[e] - expect).norm() < 1e-12);
        }
        assert!(sol.y_max < 1e-12);
        assert!(sol.rho.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn dual_solve_rho_matches_rates() {
        let (mesh, f, cache, frames) = setup(&ZooSpec::Perturbed {
            base: Box::new(ZooSpec::Octahedron),
            seed: 11,
            magnitude: 0.05,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u: Vec<f64> = (0..mesh.vertex_count()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let usol = crate::conformal::solve_from_u(&mesh, &f, &u, &tol()).unwrap();
        let sol = dual_solve(&mesh, &f, &cache, &frames, &usol.fdot, &tol()).unwrap();
        assert!(sol.y_max < 1e-10);

        let fit = crate::conformal::scale_factor_of(&mesh, &f, &usol.fdot);
        let z = crate::conformal::recover_z(&mesh, &f, &cache, &usol.fdot, &fit, &tol()).unwrap();
        let r = crate::conformal::rates(&mesh, &f, &cache, &fit.u, &z);
        for (a, b) in sol.rho.iter().zip(&r.rho) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn jessen_flex_dual_solve_has_zero_rho() {
        // Prop 9.1: isometric deformations of inscribed surfaces have
        // vanishing mean-curvature half-density rate
        let (mesh, f, cache, frames) = setup(&ZooSpec::Jessen);
        let flexes = crate::conformal::nontrivial_flexes(&mesh, &f, &tol());
        assert_eq!(flexes.len(), 1);
        let sol = dual_solve(&mesh, &f, &cache, &frames, &flexes[0], &tol()).unwrap();
        let scale: f64 = sol.rho.iter().map(|r| r.abs()).sum::<f64>().max(1e-300);
        let _ = scale;
        for r in &sol.rho {
            assert!(r.abs() < 1e-9, "flex rho entry {r}");
        }
        assert!(sol.y_max < 1e-9);
    }

    #[test]
    fn laplacian_factorization_matches_cotangent_formulas() {
        let (mesh, f, cache, _) = setup(&ZooSpec::Octahedron);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..8 {
            let alpha: Vec<f64> = (0..mesh.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (rho, us) = laplacian_factorization(&mesh, &f, &cache, &alpha).unwrap();
            for i in 0..mesh.vertex_count() {
                let mut want = 0.0;
                for &j in mesh.star(i) {
                    let oe = mesh.oriented(i, j).unwrap();
                    let l = mesh.left_face(oe).unwrap();
                    let r = mesh.right_face(oe).unwrap();
                    want += -0.5
                        * (cache.cot_opposite(&mesh, l, i, j) + cache.cot_opposite(&mesh, r, i, j))
                        * (alpha[j] - alpha[i]);
                }
                assert!((rho[i] - want).abs() < 1e-10, "vertex {i}");
            }
            for (e, &[p, q]) in mesh.edges().iter().enumerate() {
                let oe = mesh.oriented(p, q).unwrap();
                let l = mesh.left_face(oe).unwrap();
                let r = mesh.right_face(oe).unwrap();
                let want = -(alpha[q] - alpha[p]) * (cache.normal(l) - cache.normal(r));
                assert!((us[e] - want).norm() < 1e-10, "edge {e}");
            }
        }
    }

    #[test]
    fn inscribed_normal_deformation_closed_forms() {
        // fdot = u f on an inscribed mesh: conformal, Z = d (N x grad u),
        // and 2 rho_i = -sum (u_j - u_i)(d_L cot_L + d_R cot_R)
        let (mesh, f, cache, _) = setup(&ZooSpec::UvSphere { nu: 8, nv: 6 });
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let u: Vec<f64> = (0..mesh.vertex_count()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let mut fdot = InfDeformation::zeros(3, mesh.vertex_count());
        for v in 0..mesh.vertex_count() {
            fdot.set_point3(v, u[v] * f.point3(v));
        }
        let fit = crate::conformal::scale_factor_of(&mesh, &f, &fdot);
        assert!(fit.is_conformal(&tol()));
        for (a, b) in fit.u.iter().zip(&u) {
            assert!((a - b).abs() < 1e-11);
        }
        let z = crate::conformal::recover_z(&mesh, &f, &cache, &fdot, &fit, &tol()).unwrap();
        for (fi, fc) in mesh.faces().iter().enumerate() {
            let d = cache.plane_dist(fi);
            let (i, j, k) = (fc[0], fc[1], fc[2]);
            let bracket = u[i] * (f.point3(k) - f.point3(j))
                + u[j] * (f.point3(i) - f.point3(k))
                + u[k] * (f.point3(j) - f.point3(i));
            let want = -d / (2.0 * cache.area(fi)) * bracket;
            assert!((z[fi] - want).norm() < 1e-10, "face {fi}");
        }
        let r = crate::conformal::rates(&mesh, &f, &cache, &u, &z);
        for i in 0..mesh.vertex_count() {
            let mut want = 0.0;
            for &j in mesh.star(i) {
                let oe = mesh.oriented(i, j).unwrap();
                let l = mesh.left_face(oe).unwrap();
                let rt = mesh.right_face(oe).unwrap();
                want -= (u[j] - u[i])
                    * (cache.plane_dist(l) * cache.cot_opposite(&mesh, l, i, j)
                        + cache.plane_dist(rt) * cache.cot_opposite(&mesh, rt, i, j));
            }
            assert!((2.0 * r.rho[i] - want).abs() < 1e-9, "vertex {i}");
        }
    }

    #[test]
    fn dirac_requires_closed_mesh() {
        let (mesh, f) = zoo::generate(&ZooSpec::PlanarDisk { rings: 2 }).unwrap();
        let cache = GeometryCache::new(&mesh, &f, &tol()).unwrap();
        let u = vec![0.0; mesh.vertex_count()];
        let z = vec![Vec3::zeros(); mesh.face_count()];
        assert!(matches!(
            dirac_apply(&mesh, &f, &cache, &u, &z),
            Err(Error::NotClosed)
        ));
        assert!(matches!(kernel(&mesh, &f, &tol()), Err(Error::NotClosed)));
    }
}

