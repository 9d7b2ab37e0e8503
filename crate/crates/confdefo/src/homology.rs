//! Discrete 1-form calculus: closedness and exactness predicates for primal
//! and dual forms, a `2g`-dimensional obstruction basis of closed dual
//! 1-forms whose pairing detects exactness of closed primal forms, and the
//! high-genus realization of a prescribed mean-curvature half-density rate.
//!
//! Forms store one value per unoriented edge; the sign convention follows
//! the canonical orientation (smaller to larger vertex index), and the dual
//! edge of `e_pq` runs from the right face of `e_pq` to its left face.

use nalgebra::{DMatrix, DVector};

use crate::conformal;
use crate::dirac::{self, KernelClass, NormalSection};
use crate::geometry::{GeometryCache, InfDeformation, Realization, Vec3};
use crate::linalg;
use crate::mesh::TriMesh;
use crate::{Error, Result, Tolerances};

/// Real-valued primal 1-form (value on the canonical orientation per edge).
#[derive(Debug, Clone)]
pub struct PrimalForm {
    pub values: Vec<f64>,
}

/// Real-valued dual 1-form (value on the dual of the canonical orientation).
#[derive(Debug, Clone)]
pub struct DualForm {
    pub values: Vec<f64>,
}

/// Value of a primal form on the directed edge `p -> q`.
pub fn eval_primal(mesh: &TriMesh, values: &[f64], p: usize, q: usize) -> f64 {
    let e = mesh.edge_between(p, q).expect("unknown edge");
    if p < q {
        values[e]
    } else {
        -values[e]
    }
}

/// Value of a dual form on the dual of the directed edge `p -> q`.
pub fn eval_dual(mesh: &TriMesh, values: &[f64], p: usize, q: usize) -> f64 {
    eval_primal(mesh, values, p, q)
}

/// Largest face-boundary sum of a primal form; zero iff closed.
pub fn primal_closedness_violation(mesh: &TriMesh, form: &PrimalForm) -> f64 {
    mesh.faces()
        .iter()
        .map(|fc| {
            (0..3)
                .map(|k| eval_primal(mesh, &form.values, fc[k], fc[(k + 1) % 3]))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Largest vertex sum `sum_j omega(e*_ij)` of a dual form over interior
/// vertices; zero iff closed.
pub fn dual_closedness_violation(mesh: &TriMesh, form: &DualForm) -> f64 {
    mesh.interior_vertices()
        .iter()
        .map(|&i| {
            mesh.star(i)
                .iter()
                .map(|&j| eval_dual(mesh, &form.values, i, j))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

fn form_scale(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300)
}

pub fn primal_is_closed(mesh: &TriMesh, form: &PrimalForm, tol: &Tolerances) -> (bool, f64) {
    let v = primal_closedness_violation(mesh, form);
    (v <= 3.0 * tol.rel * form_scale(&form.values), v)
}

pub fn dual_is_closed(mesh: &TriMesh, form: &DualForm, tol: &Tolerances) -> (bool, f64) {
    let v = dual_closedness_violation(mesh, form);
    (v <= 16.0 * tol.rel * form_scale(&form.values), v)
}

/// Exactness by least squares: fit a vertex potential with `df = form` and
/// report the residual.
pub fn primal_is_exact(mesh: &TriMesh, form: &PrimalForm, tol: &Tolerances) -> (bool, f64) {
    let ne = mesh.edge_count();
    let mut a = DMatrix::zeros(ne, mesh.vertex_count());
    let mut b = DVector::zeros(ne);
    for (e, &[p, q]) in mesh.edges().iter().enumerate() {
        a[(e, q)] = 1.0;
        a[(e, p)] = -1.0;
        b[e] = form.values[e];
    }
    let (_, res) = linalg::min_norm_lstsq(&a, &b, 1e-13);
    let max = res;
    (
        max <= tol.rel * (ne as f64).sqrt() * form_scale(&form.values),
        max,
    )
}

/// Exactness of a dual form: fit a face potential with
/// `h_left - h_right = form` on every interior edge.
pub fn dual_is_exact(mesh: &TriMesh, form: &DualForm, tol: &Tolerances) -> (bool, f64) {
    let rows = mesh.interior_edges().len();
    let mut a = DMatrix::zeros(rows, mesh.face_count());
    let mut b = DVector::zeros(rows);
    for (r, &e) in mesh.interior_edges().iter().enumerate() {
        let [p, q] = mesh.edges()[e];
        let oe = mesh.oriented(p, q).unwrap();
        a[(r, mesh.left_face(oe).unwrap())] = 1.0;
        a[(r, mesh.right_face(oe).unwrap())] = -1.0;
        b[r] = form.values[e];
    }
    let (_, res) = linalg::min_norm_lstsq(&a, &b, 1e-13);
    (
        res <= tol.rel * (rows as f64).sqrt() * form_scale(&form.values),
        res,
    )
}

/// `2g` closed dual 1-forms spanning the dual cohomology: a closed primal
/// 1-form is exact iff it pairs to zero with all of them. Computed as the
/// orthogonal complement of the exact dual forms inside the closed dual
/// forms.
pub fn obstruction_basis(mesh: &TriMesh, tol: &Tolerances) -> Result<Vec<DualForm>> {
    if !mesh.is_closed() {
        return Err(Error::NotClosed);
    }
    let genus = mesh.genus()?;
    let ne = mesh.edge_count();

    // closed dual forms: nullspace of the per-vertex sums
    let mut a = DMatrix::zeros(mesh.vertex_count(), ne);
    for i in 0..mesh.vertex_count() {
        for &j in mesh.star(i) {
            let e = mesh.edge_between(i, j).unwrap();
            a[(i, e)] += if i < j { 1.0 } else { -1.0 };
        }
    }
    let (closed, _) = linalg::nullspace(&a, tol.rank_rel);

    // exact dual forms: span of d(face indicator)
    let mut exact_raw = Vec::with_capacity(mesh.face_count());
    for fi in 0..mesh.face_count() {
        let mut v = DVector::zeros(ne);
        let fc = mesh.faces()[fi];
        for k in 0..3 {
            let (p, q) = (fc[k], fc[(k + 1) % 3]);
            let e = mesh.edge_between(p, q).unwrap();
            // fi is the left face of p -> q; on the canonical orientation
            // the contribution is +1 there, -1 when fi sits on the right
            v[e] += if p < q { 1.0 } else { -1.0 };
        }
        exact_raw.push(v);
    }
    let exact = linalg::orthonormalize(&exact_raw);

    let mut reps = Vec::new();
    for c in &closed {
        let mut w = c.clone();
        linalg::project_out(&mut w, &exact);
        linalg::project_out(&mut w, &linalg::orthonormalize(&reps));
        let n = w.norm();
        if n > 1e-8 {
            reps.push(w / n);
        }
    }
    debug_assert_eq!(reps.len(), 2 * genus);
    Ok(reps
        .into_iter()
        .map(|v| DualForm {
            values: v.iter().copied().collect(),
        })
        .collect())
}

/// Pairing `sum_edges omega(e*) eta(e)` of a dual and a primal form.
pub fn pairing(_mesh: &TriMesh, omega: &DualForm, eta: &PrimalForm) -> f64 {
    omega
        .values
        .iter()
        .zip(&eta.values)
        .map(|(a, b)| a * b)
        .sum()
}

/// High-genus realization of a prescribed `rho`.
#[derive(Debug, Clone)]
pub struct HighGenusSolve {
    pub u: Vec<f64>,
    pub z: Vec<Vec3>,
    pub fdot: InfDeformation,
    /// The `6g` exactness pairings `sum_i rho_i u_kl,i` (all below
    /// tolerance when the solve succeeds).
    pub pairings: Vec<f64>,
    pub solve_residual: f64,
}

/// Solve `D (u, Z) = (rho, 0)` on a closed surface of positive genus and
/// decide exactness of the resulting 1-form by the `6g` scalar pairings
/// with the auxiliary solutions `(u_kl, Z_kl)`; integrate on success.
pub fn high_genus_solve(
    mesh: &TriMesh,
    f: &Realization,
    rho: &[f64],
    tol: &Tolerances,
) -> Result<HighGenusSolve> {
    if !mesh.is_closed() {
        return Err(Error::NotClosed);
    }
    let genus = mesh.genus()?;
    let sum: f64 = rho.iter().sum();
    let scale: f64 = rho.iter().map(|r| r.abs()).sum::<f64>().max(1e-300);
    if sum.abs() > 1e-9 * scale {
        return Err(Error::RhoSumNonzero { sum });
    }
    let kernel = dirac::kernel(mesh, f, tol)?;
    if !matches!(kernel.class, KernelClass::DimFour) {
        return Err(Error::KernelTooLarge {
            dim: kernel.dimension,
            sv_window: kernel.sv_window.values.clone(),
        });
    }

    let cache = GeometryCache::new(mesh, f, tol)?;
    let frames = dirac::edge_frames(mesh, f, &cache);
    let d = dirac::dirac_matrix(mesh, f, &cache, &frames);
    let nv = mesh.vertex_count();

    // auxiliary solves D(u_kl, Z_kl) = (alpha_kl, W_kl)
    let omegas = obstruction_basis(mesh, tol)?;
    let basis_e = [Vec3::x(), Vec3::y(), Vec3::z()];
    let mut aux_u: Vec<Vec<f64>> = Vec::with_capacity(6 * genus);
    for omega in &omegas {
        for el in &basis_e {
            let mut rhs = DVector::zeros(d.nrows());
            for i in 0..nv {
                rhs[i] = mesh
                    .star(i)
                    .iter()
                    .map(|&j| {
                        eval_dual(mesh, &omega.values, i, j)
                            * el.dot(&(f.point3(j) - f.point3(i)))
                    })
                    .sum::<f64>();
            }
            let w_vecs: Vec<Vec3> = mesh
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &[p, q])| {
                    omega.values[e] * el.cross(&(f.point3(q) - f.point3(p)))
                })
                .collect();
            let w = NormalSection::from_vectors(&frames, &w_vecs);
            for (e, c) in w.coords.iter().enumerate() {
                rhs[nv + 2 * e] = c[0];
                rhs[nv + 2 * e + 1] = c[1];
            }
            let (x, res) = linalg::min_norm_lstsq(&d, &rhs, tol.rank_rel);
            if res > 1e-8 * rhs.norm().max(1e-300) {
                return Err(Error::DegenerateRealization(format!(
                    "auxiliary Dirac solve inconsistent (residual {res:.3e})"
                )));
            }
            aux_u.push(x.iter().take(nv).copied().collect());
        }
    }

    // main solve D(u, Z) = (rho, 0)
    let mut rhs = DVector::zeros(d.nrows());
    for (i, &r) in rho.iter().enumerate() {
        rhs[i] = r;
    }
    let (x, solve_residual) = linalg::min_norm_lstsq(&d, &rhs, tol.rank_rel);
    let (u, z) = {
        let u: Vec<f64> = x.iter().take(nv).copied().collect();
        let z: Vec<Vec3> = (0..mesh.face_count())
            .map(|fi| Vec3::new(x[nv + 3 * fi], x[nv + 3 * fi + 1], x[nv + 3 * fi + 2]))
            .collect();
        (u, z)
    };

    let rho_norm = rho.iter().map(|r| r * r).sum::<f64>().sqrt();
    let pairings: Vec<f64> = aux_u
        .iter()
        .map(|ukl| rho.iter().zip(ukl).map(|(a, b)| a * b).sum())
        .collect();
    let ok = pairings.iter().enumerate().all(|(idx, p)| {
        let un = aux_u[idx].iter().map(|v| v * v).sum::<f64>().sqrt();
        p.abs() <= 1e-9 * (rho_norm * un).max(1e-300)
    });
    if !ok {
        return Err(Error::PairingFailed { values: pairings });
    }

    let eta = conformal::build_eta(mesh, f, &cache, &u, &z, tol)?;
    let fdot = conformal::integrate_one_form(mesh, &eta, 0, tol)?;
    Ok(HighGenusSolve {
        u,
        z,
        fdot,
        pairings,
        solve_residual,
    })
}
