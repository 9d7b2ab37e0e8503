//! Möbius transformations and the stereographic correspondence between
//! conformal deformations in `R^n` and isometric deformations of the lifted
//! surface in `R^{n+1}`.

use crate::conformal::{self, scale_factor_of};
use crate::geometry::{InfDeformation, Realization};
use crate::mesh::TriMesh;
use crate::{Error, Result, Tolerances};

/// Generators of the Möbius group, plus the stereographic lift onto the
/// unit sphere one dimension up.
#[derive(Debug, Clone, PartialEq)]
pub enum MoebiusMap {
    /// `f -> -f / |f|^2`; undefined at the origin.
    Inversion,
    Translation(Vec<f64>),
    Dilation(f64),
    /// `x -> (2x, |x|^2 - 1) / (|x|^2 + 1)`, mapping `R^n` onto
    /// `S^n \ {north pole}`.
    StereographicLift,
}

/// Apply a map to every vertex position.
pub fn apply(map: &MoebiusMap, f: &Realization) -> Result<Realization> {
    let dim = f.dim();
    let n = f.vertex_count();
    let floor = 1e-12 * f.bbox_diagonal().max(1.0);
    match map {
        MoebiusMap::Inversion => {
            let mut out = Realization::zeros(dim, n);
            for v in 0..n {
                let r2 = f.norm_sq(v);
                if r2.sqrt() <= floor {
                    return Err(Error::SingularVertex(v));
                }
                for (t, x) in f.coords(v).iter().enumerate() {
                    out.coords_mut(v)[t] = -x / r2;
                }
            }
            Ok(out)
        }
        MoebiusMap::Translation(d) => {
            if d.len() != dim {
                return Err(Error::DimensionMismatch { got: d.len(), need: dim });
            }
            let mut out = f.clone();
            for v in 0..n {
                for (t, x) in out.coords_mut(v).iter_mut().enumerate() {
                    *x += d[t];
                }
            }
            Ok(out)
        }
        MoebiusMap::Dilation(s) => {
            let mut out = f.clone();
            for v in 0..n {
                out.coords_mut(v).iter_mut().for_each(|x| *x *= s);
            }
            Ok(out)
        }
        MoebiusMap::StereographicLift => {
            let mut out = Realization::zeros(dim + 1, n);
            for v in 0..n {
                let r2 = f.norm_sq(v);
                let s = r2 + 1.0;
                let o = out.coords_mut(v);
                for (t, x) in f.coords(v).iter().enumerate() {
                    o[t] = 2.0 * x / s;
                }
                o[dim] = (r2 - 1.0) / s;
            }
            Ok(out)
        }
    }
}

/// Push a velocity field forward through the differential of the map.
pub fn pushforward(
    map: &MoebiusMap,
    f: &Realization,
    fdot: &InfDeformation,
) -> Result<InfDeformation> {
    let dim = f.dim();
    let n = f.vertex_count();
    let floor = 1e-12 * f.bbox_diagonal().max(1.0);
    match map {
        MoebiusMap::Inversion => {
            // dPhi(v) = -v/|f|^2 + 2 <v, f> f / |f|^4
            let mut out = InfDeformation::zeros(dim, n);
            for v in 0..n {
                let r2 = f.norm_sq(v);
                if r2.sqrt() <= floor {
                    return Err(Error::SingularVertex(v));
                }
                let fp = f.coords(v);
                let vp = fdot.coords(v);
                let dot: f64 = fp.iter().zip(vp).map(|(a, b)| a * b).sum();
                for t in 0..dim {
                    out.coords_mut(v)[t] = -vp[t] / r2 + 2.0 * dot * fp[t] / (r2 * r2);
                }
            }
            Ok(out)
        }
        MoebiusMap::Translation(_) => Ok(fdot.clone()),
        MoebiusMap::Dilation(s) => {
            let mut out = fdot.clone();
            for v in 0..n {
                out.coords_mut(v).iter_mut().for_each(|x| *x *= s);
            }
            Ok(out)
        }
        MoebiusMap::StereographicLift => {
            let mut out = InfDeformation::zeros(dim + 1, n);
            for v in 0..n {
                let r2 = f.norm_sq(v);
                let s = r2 + 1.0;
                let fp = f.coords(v);
                let vp = fdot.coords(v);
                let ds: f64 = 2.0 * fp.iter().zip(vp).map(|(a, b)| a * b).sum::<f64>();
                let o = out.coords_mut(v);
                for t in 0..dim {
                    o[t] = 2.0 * vp[t] / s - 2.0 * fp[t] * ds / (s * s);
                }
                o[dim] = ds / s - (r2 - 1.0) * ds / (s * s);
            }
            Ok(out)
        }
    }
}

/// Scale of an edge-rate quantity: `max |v| / min edge length`.
fn rate_scale(mesh: &TriMesh, f: &Realization, v: &InfDeformation) -> f64 {
    let min_len = mesh
        .edges()
        .iter()
        .map(|&[p, q]| f.distance(p, q))
        .fold(f64::INFINITY, f64::min);
    v.max_norm() / min_len
}

/// Largest normalized edge-length rate `|<v_q - v_p, f_q - f_p>| / l^2`;
/// zero for isometric deformations.
pub fn isometry_residual(mesh: &TriMesh, f: &Realization, v: &InfDeformation) -> f64 {
    mesh.edges()
        .iter()
        .map(|&[p, q]| (v.diff_dot(q, p, f, q, p) / f.diff_dot(q, p, f, q, p)).abs())
        .fold(0.0_f64, f64::max)
}

/// Project an isometric deformation of an inscribed surface to the sphere
/// tangent space: `v^T = v - <v, f> f`, a conformal deformation with scale
/// factor `u = -<v, f>`. Returns `(v^T, u)`.
pub fn tangent_projection(
    mesh: &TriMesh,
    f: &Realization,
    v: &InfDeformation,
    tol: &Tolerances,
) -> Result<(InfDeformation, Vec<f64>)> {
    let n = f.vertex_count();
    for p in 0..n {
        let norm = f.norm_sq(p).sqrt();
        if (norm - 1.0).abs() > tol.rel.max(1e-12) * 10.0 {
            return Err(Error::NotOnSphere { vertex: p, norm });
        }
    }
    let resid = isometry_residual(mesh, f, v);
    if resid > tol.rel * rate_scale(mesh, f, v).max(1e-300) {
        return Err(Error::NotIsometric { residual: resid });
    }
    let dim = f.dim();
    let mut w = InfDeformation::zeros(dim, n);
    let mut u = Vec::with_capacity(n);
    for p in 0..n {
        let fp = f.coords(p);
        let vp = v.coords(p);
        let dot: f64 = fp.iter().zip(vp).map(|(a, b)| a * b).sum();
        for t in 0..dim {
            w.coords_mut(p)[t] = vp[t] - dot * fp[t];
        }
        u.push(-dot);
    }
    Ok((w, u))
}

/// Inverse of [`tangent_projection`]: `v = w - u f` is isometric when `w`
/// is conformal tangent to the sphere with scale factor `u`.
pub fn lift_tangent(f: &Realization, w: &InfDeformation, u: &[f64]) -> InfDeformation {
    let dim = f.dim();
    let n = f.vertex_count();
    let mut v = InfDeformation::zeros(dim, n);
    for p in 0..n {
        for t in 0..dim {
            v.coords_mut(p)[t] = w.coords(p)[t] - u[p] * f.coords(p)[t];
        }
    }
    v
}

/// Dimensions and the explicit-bijection residual of the stereographic
/// correspondence.
#[derive(Debug, Clone)]
pub struct CorrespondenceReport {
    pub conformal_dim: usize,
    pub lifted_isometric_dim: usize,
    /// Max rigidity residual over the mapped conformal basis.
    pub bijection_residual: f64,
}

/// Check that the conformal deformations of `f` in `R^n` correspond to the
/// isometric deformations of the stereographic lift in `R^{n+1}`: the two
/// nullspace dimensions must agree, and every conformal basis vector,
/// pushed forward and lifted off the tangent space, must be isometric.
pub fn correspondence_check(
    mesh: &TriMesh,
    f: &Realization,
    tol: &Tolerances,
) -> Result<CorrespondenceReport> {
    if f.dim() > 3 {
        return Err(Error::DimensionMismatch { got: f.dim(), need: 3 });
    }
    let conf = conformal::conformal_space(mesh, f, tol)?;
    let lifted = apply(&MoebiusMap::StereographicLift, f)?;
    let iso = conformal::isometric_space(mesh, &lifted, tol);

    let mut bijection_residual = 0.0_f64;
    for fdot in &conf.basis {
        let w = pushforward(&MoebiusMap::StereographicLift, f, fdot)?;
        let fit = scale_factor_of(mesh, &lifted, &w);
        let v = lift_tangent(&lifted, &w, &fit.u);
        let r = isometry_residual(mesh, &lifted, &v)
            / rate_scale(mesh, &lifted, &v).max(1e-300);
        bijection_residual = bijection_residual.max(r);
    }

    Ok(CorrespondenceReport {
        conformal_dim: conf.dimension,
        lifted_isometric_dim: iso.dimension,
        bijection_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{conformal_space, isometric_space, rotation_field, solve_from_u};
    use crate::geometry::{edge_metric, length_cross_ratios};
    use crate::zoo::{self, ZooSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn shifted_octa() -> (crate::TriMesh, Realization) {
        // keep vertices away from the inversion's singular point
        let (mesh, f) = zoo::generate(&ZooSpec::Perturbed {
            base: Box::new(ZooSpec::Octahedron),
            seed: 31,
            magnitude: 0.05,
        })
        .unwrap();
        let f = apply(&MoebiusMap::Translation(vec![2.0, 0.3, -0.4]), &f).unwrap();
        (mesh, f)
    }

    #[test]
    fn inversion_is_an_involution() {
        let (mesh, f) = shifted_octa();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut fdot = InfDeformation::zeros(3, mesh.vertex_count());
        for v in 0..mesh.vertex_count() {
            for t in 0..3 {
                fdot.coords_mut(v)[t] = rng.gen_range(-1.0..1.0);
            }
        }
        let g = apply(&MoebiusMap::Inversion, &f).unwrap();
        let gdot = pushforward(&MoebiusMap::Inversion, &f, &fdot).unwrap();
        let f2 = apply(&MoebiusMap::Inversion, &g).unwrap();
        let fdot2 = pushforward(&MoebiusMap::Inversion, &g, &gdot).unwrap();
        for v in 0..mesh.vertex_count() {
            for t in 0..3 {
                assert!((f2.coords(v)[t] - f.coords(v)[t]).abs() < 1e-12);
                assert!((fdot2.coords(v)[t] - fdot.coords(v)[t]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lcr_is_moebius_invariant() {
        let (mesh, f) = shifted_octa();
        let base = length_cross_ratios(&mesh, &edge_metric(&mesh, &f).unwrap());
        for map in [
            MoebiusMap::Inversion,
            MoebiusMap::Translation(vec![0.7, -1.1, 0.4]),
            MoebiusMap::Dilation(2.3),
            MoebiusMap::StereographicLift,
        ] {
            let g = apply(&map, &f).unwrap();
            let lcr = length_cross_ratios(&mesh, &edge_metric(&mesh, &g).unwrap());
            for (&a, &b) in base.iter().zip(&lcr) {
                if !a.is_nan() {
                    assert!((a - b).abs() <= 1e-10 * a.abs(), "{map:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn pushforward_preserves_conformality_with_lemma_scale_factor() {
        let (mesh, f) = shifted_octa();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let u: Vec<f64> = (0..mesh.vertex_count()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let sol = solve_from_u(&mesh, &f, &u, &tol()).unwrap();
        let fit = scale_factor_of(&mesh, &f, &sol.fdot);
        assert!(fit.is_conformal(&tol()));

        let g = apply(&MoebiusMap::Inversion, &f).unwrap();
        let gdot = pushforward(&MoebiusMap::Inversion, &f, &sol.fdot).unwrap();
        let gfit = scale_factor_of(&mesh, &g, &gdot);
        assert!(gfit.is_conformal(&tol()), "residual {}", gfit.max_residual);
        // new scale factor: u - 2 <fdot, f> / |f|^2
        for v in 0..mesh.vertex_count() {
            let fp = f.point3(v);
            let want = fit.u[v] - 2.0 * sol.fdot.point3(v).dot(&fp) / fp.norm_squared();
            assert!((gfit.u[v] - want).abs() < 1e-9, "vertex {v}");
        }
    }

    #[test]
    fn stereographic_lift_lands_on_unit_sphere() {
        let (mesh, f) = zoo::generate(&ZooSpec::PlanarDisk { rings: 2 }).unwrap();
        let f2 = f.truncated(2);
        let lifted = apply(&MoebiusMap::StereographicLift, &f2).unwrap();
        assert_eq!(lifted.dim(), 3);
        for v in 0..mesh.vertex_count() {
            assert!((lifted.norm_sq(v) - 1.0).abs() < 1e-12);
        }
        // pushforwards are tangent to the sphere
        let mut fdot = InfDeformation::zeros(2, mesh.vertex_count());
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for v in 0..mesh.vertex_count() {
            for t in 0..2 {
                fdot.coords_mut(v)[t] = rng.gen_range(-1.0..1.0);
            }
        }
        let w = pushforward(&MoebiusMap::StereographicLift, &f2, &fdot).unwrap();
        for v in 0..mesh.vertex_count() {
            let dot: f64 = lifted
                .coords(v)
                .iter()
                .zip(w.coords(v))
                .map(|(a, b)| a * b)
                .sum();
            assert!(dot.abs() < 1e-12, "tangency at {v}");
        }
    }

    #[test]
    fn tangent_projection_round_trip() {
        let (mesh, f) = zoo::generate(&ZooSpec::UvSphere { nu: 8, nv: 6 }).unwrap();
        let v = rotation_field(crate::geometry::Vec3::new(0.2, 0.7, -0.4), &f);
        let (w, u) = tangent_projection(&mesh, &f, &v, &tol()).unwrap();
        // w is conformal with scale factor u = -<v, f>
        let fit = scale_factor_of(&mesh, &f, &w);
        assert!(fit.is_conformal(&tol()));
        for (a, b) in fit.u.iter().zip(&u) {
            assert!((a - b).abs() < 1e-10);
        }
        let back = lift_tangent(&f, &w, &u);
        for p in 0..mesh.vertex_count() {
            for t in 0..3 {
                assert!((back.coords(p)[t] - v.coords(p)[t]).abs() < 1e-12);
            }
        }
        // zero maps to zero (injectivity anchor)
        let zero = InfDeformation::zeros(3, mesh.vertex_count());
        let (wz, _) = tangent_projection(&mesh, &f, &zero, &tol()).unwrap();
        assert!(wz.max_norm() < 1e-300);
    }

    #[test]
    fn tangent_projection_rejects_bad_inputs() {
        let (mesh, f) = zoo::generate(&ZooSpec::Octahedron).unwrap();
        let mut off = f.clone();
        off.coords_mut(0)[0] = 2.0;
        let v = InfDeformation::zeros(3, mesh.vertex_count());
        assert!(matches!(
            tangent_projection(&mesh, &off, &v, &tol()),
            Err(Error::NotOnSphere { .. })
        ));
        let bad = f.clone(); // radial field is conformal but not isometric
        assert!(matches!(
            tangent_projection(&mesh, &f, &bad, &tol()),
            Err(Error::NotIsometric { .. })
        ));
    }

    #[test]
    fn correspondence_on_tetrahedron() {
        let (mesh, f) = zoo::generate(&ZooSpec::Tetrahedron).unwrap();
        let rep = correspondence_check(&mesh, &f, &tol()).unwrap();
        assert_eq!(rep.conformal_dim, 10);
        assert_eq!(rep.lifted_isometric_dim, 10);
        assert!(rep.bijection_residual <= 1e-9, "{}", rep.bijection_residual);
    }

    #[test]
    fn correspondence_on_planar_grid_disk() {
        let (mesh, f) = zoo::generate(&ZooSpec::PlanarDisk { rings: 2 }).unwrap();
        let rep = correspondence_check(&mesh, &f.truncated(2), &tol()).unwrap();
        assert_eq!(rep.conformal_dim, rep.lifted_isometric_dim);
        assert!(rep.bijection_residual <= 1e-9);
    }

    #[test]
    fn correspondence_on_octahedron() {
        let (mesh, f) = shifted_octa();
        let rep = correspondence_check(&mesh, &f, &tol()).unwrap();
        assert_eq!(rep.conformal_dim, rep.lifted_isometric_dim);
        assert!(rep.bijection_residual <= 1e-9);
    }

    #[test]
    fn lifted_isometric_space_matches_conformal_dimension_count() {
        // inscribed octahedron: conformal tangent fields vs isometric in R^3
        let (mesh, f) = zoo::generate(&ZooSpec::Octahedron).unwrap();
        let conf = conformal_space(&mesh, &f, &tol()).unwrap();
        let iso4 = isometric_space(&mesh, &apply(&MoebiusMap::StereographicLift, &f).unwrap(), &tol());
        assert_eq!(conf.dimension, iso4.dimension);
    }

    #[test]
    fn singular_vertex_detected() {
        let mesh = crate::TriMesh::from_faces(&[[0, 1, 2]]).unwrap();
        let f = Realization::from_points3(&[
            crate::geometry::Vec3::new(0.0, 0.0, 0.0),
            crate::geometry::Vec3::new(1.0, 0.0, 0.0),
            crate::geometry::Vec3::new(0.0, 1.0, 0.0),
        ]);
        let _ = mesh;
        assert!(matches!(
            apply(&MoebiusMap::Inversion, &f),
            Err(Error::SingularVertex(0))
        ));
    }
}
