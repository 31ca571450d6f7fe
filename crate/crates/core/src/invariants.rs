//! Executable stability checks: symmetry and boundedness of `A_h(r)`, coercivity on
//! the kernel, the inf-sup witness, spectral bounds of `H(r)`, the Jacobian, and the
//! parameter robustness of the preconditioned condition number.
//!
//! Every check runs on meshes with at most 32 subdivisions and reports its worst
//! observed value next to the bound it was tested against.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::assembly::{
    assemble_p1_mass, build_block_field, newton_rhs, x_inner, BlockField, Discretization, Layout, Method, SaddleOperator, State,
};
use crate::krylov::{estimate_condition_number, minres, LinearOperator};
use crate::local_ops::{h_matrix, h_matrix_bounds, h_matrix_inverse, Beta, Vec2};
use crate::mesh::TriMesh;
use crate::nonlinear::{nonlinear_solve, SolveConfig};
use crate::precond::{BlockPreconditioner, PrecondMode, RieszMap};
use crate::sparse::{dot, norm2};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

const ALPHAS: [f64; 3] = [1e-3, 1.0, 1e3];
const BETAS: [f64; 2] = [1e-5, 1.0];

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// Per-triangle vectors with magnitudes spread over four decades.
fn random_p_field(rng: &mut ChaCha8Rng, nt: usize) -> Vec<Vec2> {
    (0..nt)
        .map(|_| {
            let scale = 10f64.powf(rng.random_range(-2.0..2.0));
            Vec2::new(normal(rng) * scale, normal(rng) * scale)
        })
        .collect()
}

fn random_state(rng: &mut ChaCha8Rng, layout: Layout) -> State {
    State::from_vec(layout, random_vec(rng, layout.len())).expect("layout length")
}

fn apply(op: &SaddleOperator<'_>, x: &State) -> Vec<f64> {
    let mut y = vec![0.0; x.as_slice().len()];
    op.apply(x.as_slice(), &mut y);
    y
}

struct Case {
    mesh: TriMesh,
    mass: crate::sparse::SparseOperator,
    field: BlockField,
    alpha: f64,
}

/// Random linearization points over the parameter grid on two small meshes.
fn cases(rng: &mut ChaCha8Rng) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    for n in [4, 16] {
        for &alpha in &ALPHAS {
            for &b in &BETAS {
                let mesh = TriMesh::uniform(n)?;
                let p = random_p_field(rng, mesh.num_triangles());
                let field = build_block_field(&p, Beta::new(b)?, Method::Newton);
                out.push(Case {
                    mass: assemble_p1_mass(&mesh),
                    mesh,
                    field,
                    alpha,
                });
            }
        }
    }
    Ok(out)
}

/// `⟨A x, y⟩ = ⟨A y, x⟩` relative to `‖A x‖ ‖y‖`.
pub fn check_symmetry(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for c in cases(&mut rng)? {
        let op = SaddleOperator::new(&c.mesh, &c.mass, &c.field, c.alpha);
        let layout = Layout::of(&c.mesh);
        for _ in 0..3 {
            let x = random_state(&mut rng, layout);
            let y = random_state(&mut rng, layout);
            let (ax, ay) = (apply(&op, &x), apply(&op, &y));
            let scale = (norm2(&ax) * norm2(y.as_slice())).max(norm2(&ay) * norm2(x.as_slice()));
            worst = worst.max((dot(&ax, y.as_slice()) - dot(&ay, x.as_slice())).abs() / scale);
        }
    }
    Ok(Check::new("symmetry of A", worst <= 1e-12, format!("max relative asymmetry {worst:.3e} (bound 1e-12)")))
}

/// `|⟨A x, y⟩| ≤ 2 ‖x‖_X ‖y‖_X`.
pub fn check_continuity(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for c in cases(&mut rng)? {
        let op = SaddleOperator::new(&c.mesh, &c.mass, &c.field, c.alpha);
        let layout = Layout::of(&c.mesh);
        for _ in 0..3 {
            let x = random_state(&mut rng, layout);
            let y = random_state(&mut rng, layout);
            let nx = x_inner(&c.mesh, &c.mass, &c.field, c.alpha, &x, &x).sqrt();
            let ny = x_inner(&c.mesh, &c.mass, &c.field, c.alpha, &y, &y).sqrt();
            worst = worst.max(dot(&apply(&op, &x), y.as_slice()).abs() / (nx * ny));
        }
    }
    Ok(Check::new("boundedness (c0 = 2)", worst <= 2.0, format!("max |<Ax,y>|/(|x||y|) = {worst:.6} (bound 2)")))
}

/// `⟨A x, x⟩ ≥ ½ ‖x‖²_X` for `x = (∇u, u, 0)`.
pub fn check_kernel_coercivity(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for c in cases(&mut rng)? {
        let op = SaddleOperator::new(&c.mesh, &c.mass, &c.field, c.alpha);
        let layout = Layout::of(&c.mesh);
        for _ in 0..3 {
            let mut x = State::zeros(layout);
            x.u_mut().copy_from_slice(&random_vec(&mut rng, layout.nodes));
            for t in 0..layout.triangles {
                let g = c.mesh.gradient(t, x.u());
                x.set_p(t, g);
            }
            let n2 = x_inner(&c.mesh, &c.mass, &c.field, c.alpha, &x, &x);
            worst = worst.min(dot(&apply(&op, &x), x.as_slice()) / n2);
        }
    }
    Ok(Check::new(
        "kernel coercivity (c1 = 1/2)",
        worst >= 0.5 - 1e-10,
        format!("min <Ax,x>/|x|^2 = {worst:.12} (bound 0.5 - 1e-10)"),
    ))
}

/// The witness `q = −α⁻¹ H⁻¹ λ`, `v = 0` attains the inf-sup ratio 1. Forming
/// `‖q‖_X` multiplies `H` by `H⁻¹`, so the attainable accuracy is `ε κ(H)`.
pub fn check_inf_sup(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut kappa_h = 1.0f64;
    for c in cases(&mut rng)? {
        let op = SaddleOperator::new(&c.mesh, &c.mass, &c.field, c.alpha);
        let layout = Layout::of(&c.mesh);
        for t in 0..layout.triangles {
            let (lo, hi) = c.field.block(t).eigenvalues();
            kappa_h = kappa_h.max(hi / lo);
        }
        for _ in 0..3 {
            let mut lam = State::zeros(layout);
            let mut q = State::zeros(layout);
            for t in 0..layout.triangles {
                let l = Vec2::new(normal(&mut rng), normal(&mut rng));
                lam.set_lam(t, l);
                q.set_p(t, c.field.inverse_block(t).apply(l) * (-1.0 / c.alpha));
            }
            let pairing = dot(&apply(&op, &lam), q.as_slice());
            let nq = x_inner(&c.mesh, &c.mass, &c.field, c.alpha, &q, &q).sqrt();
            let nl = x_inner(&c.mesh, &c.mass, &c.field, c.alpha, &lam, &lam).sqrt();
            worst = worst.min(pairing / (nq * nl));
        }
    }
    let tol = 1e-10f64.max(16.0 * f64::EPSILON * kappa_h);
    Ok(Check::new(
        "inf-sup witness (c2 = 1)",
        worst >= 1.0 - tol,
        format!("min ratio {worst:.12} (bound 1 - {tol:.1e}, max cond(H) {kappa_h:.1e})"),
    ))
}

fn random_r_beta(rng: &mut ChaCha8Rng) -> (Vec2, Beta) {
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let r = Vec2::new(normal(rng) * scale, normal(rng) * scale);
    let b = 10f64.powf(rng.random_range(-8.0..1.0));
    (r, Beta::new(b).expect("positive beta"))
}

/// Rayleigh quotients of `H(r)` lie in `[β/|r|_β³, 1/|r|_β]`, tested along `r`, its
/// normal, a random direction and at the computed eigenvalues. Entries carry an
/// absolute error of order `ε/|r|_β`, which is the slack on the lower bound.
pub fn check_h_bounds(seed: u64, samples: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (r, b) = random_r_beta(&mut rng);
        let h = h_matrix(r, b);
        let (blo, bhi) = h_matrix_bounds(r, b);
        let v = Vec2::new(normal(&mut rng), normal(&mut rng));
        let mut quotients = vec![h.eigenvalues().0, h.eigenvalues().1, h.form(v, v) / v.norm_sq()];
        if r.norm() > 0.0 {
            let n = Vec2::new(-r.y, r.x);
            quotients.push(h.form(r, r) / r.norm_sq());
            quotients.push(h.form(n, n) / n.norm_sq());
        }
        let slack = 8.0 * f64::EPSILON * bhi;
        for q in quotients {
            worst = worst.max((blo - slack - q) / blo).max((q - bhi) / bhi);
        }
    }
    Check::new(
        "eigenvalue bounds of H",
        worst <= 1e-10,
        format!("{samples} samples, max relative violation {worst:.3e} (bound 1e-10)"),
    )
}

/// `H(r) H(r)⁻¹ = I`, entrywise relative to `(|H| |H⁻¹|)_ij` where that exceeds 1.
pub fn check_h_inverse(seed: u64, samples: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (r, b) = random_r_beta(&mut rng);
        let (h, g) = (h_matrix(r, b), h_matrix_inverse(r, b));
        let prod = h.matmul(&g);
        let abs = h.abs().matmul(&g.abs());
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[i][j] - id).abs() / abs[i][j].max(1.0));
            }
        }
    }
    Check::new("H times its inverse", worst <= 1e-12, format!("{samples} samples, max scaled error {worst:.3e} (bound 1e-12)"))
}

/// Central differences of the residual against `−A(p) d` on the two-triangle mesh.
pub fn check_jacobian_fd(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = TriMesh::uniform(1)?;
    let layout = Layout::of(&mesh);
    let disc = Discretization::new(&mesh, random_vec(&mut rng, layout.nodes))?;
    let mut worst = 0.0f64;
    for &(alpha, b) in &[(1.0, 1.0), (0.3, 0.1), (2.0, 1e-2)] {
        let beta = Beta::new(b)?;
        for _ in 0..5 {
            let x = random_state(&mut rng, layout);
            let d = random_state(&mut rng, layout);
            let field = build_block_field(&x.p_field(), beta, Method::Newton);
            let jd = apply(&SaddleOperator::new(&mesh, &disc.mass, &field, alpha), &d);
            let eps = 1e-6;
            let plus = newton_rhs(&mesh, &disc, &x.axpy(eps, &d), alpha, beta)?;
            let minus = newton_rhs(&mesh, &disc, &x.axpy(-eps, &d), alpha, beta)?;
            let fd: Vec<f64> = plus.as_slice().iter().zip(minus.as_slice()).map(|(a, b)| -(a - b) / (2.0 * eps)).collect();
            let err: Vec<f64> = fd.iter().zip(&jd).map(|(a, b)| a - b).collect();
            worst = worst.max(norm2(&err) / norm2(&jd));
        }
    }
    Ok(Check::new("Jacobian vs finite differences", worst <= 1e-5, format!("max relative error {worst:.3e} (bound 1e-5)")))
}

/// Smooth vector field with seeded frequencies and phases, sampled at centroids
/// so that the same field is used on every mesh.
fn smooth_field(mesh: &TriMesh, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..6).map(|_| rng.random_range(0.5..3.0)).collect();
    (0..mesh.num_triangles())
        .map(|t| {
            let v = mesh.vertices(t);
            let x = (v[0][0] + v[1][0] + v[2][0]) / 3.0;
            let y = (v[0][1] + v[1][1] + v[2][1]) / 3.0;
            Vec2::new(c[0] * (c[1] * x + c[2] * y).sin(), c[3] * (c[4] * y - c[5] * x).cos())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaSample {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub converged: bool,
}

/// `κ(B A)` with the exact preconditioner for `n ∈ {16, 32}`, `α ∈ {1e-3, 1, 1e3}`
/// and `β ∈ {1e-5, 1}`.
pub fn condition_numbers(seed: u64, probes: usize) -> Result<Vec<KappaSample>> {
    let mut out = Vec::new();
    for n in [16, 32] {
        let mesh = TriMesh::uniform(n)?;
        let mass = assemble_p1_mass(&mesh);
        let p = smooth_field(&mesh, seed);
        for &alpha in &ALPHAS {
            for &b in &BETAS {
                let field = build_block_field(&p, Beta::new(b)?, Method::Newton);
                let a = SaddleOperator::new(&mesh, &mass, &field, alpha);
                let pre = BlockPreconditioner::from_field(&mesh, &field, alpha, PrecondMode::Exact)?;
                let est = estimate_condition_number(&a, &pre, probes, seed)?;
                out.push(KappaSample {
                    n,
                    alpha,
                    beta: b,
                    kappa: est.kappa,
                    converged: est.converged,
                });
            }
        }
    }
    Ok(out)
}

pub fn check_condition_robustness(seed: u64) -> Result<Check> {
    let samples = condition_numbers(seed, 200)?;
    let lo = samples.iter().map(|s| s.kappa).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.kappa).fold(0.0, f64::max);
    let all_converged = samples.iter().all(|s| s.converged);
    Ok(Check::new(
        "condition number robustness",
        hi / lo <= 2.0 && all_converged,
        format!("kappa in [{lo:.4}, {hi:.4}], ratio {:.4} (bound 2), estimates converged: {all_converged}", hi / lo),
    ))
}

/// Every recorded MINRES residual history is nonincreasing; covers both
/// preconditioner modes and both outer methods on the smooth problem.
pub fn check_minres_monotone(seed: u64) -> Result<Check> {
    let mesh = TriMesh::uniform(16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let load = random_vec(&mut rng, mesh.num_nodes());
    let disc = Discretization::new(&mesh, assemble_p1_mass(&mesh).mul_vec(&load))?;
    let mut solves = 0;
    let mut violations = 0;
    for method in [Method::Newton, Method::Picard] {
        for mode in [PrecondMode::Exact, PrecondMode::Inexact] {
            let cfg = SolveConfig {
                precond_mode: mode,
                nl_maxit: 8,
                ..SolveConfig::new(0.1, 1e-2, method)
            };
            let (_, rep) = nonlinear_solve(&mesh, &disc, &cfg, State::zeros(Layout::of(&mesh)))?;
            for it in &rep.iterations {
                solves += 1;
                if it.minres_history.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
                    violations += 1;
                }
            }
        }
    }
    Ok(Check::new(
        "MINRES residual monotonicity",
        violations == 0 && solves > 0,
        format!("{solves} solves, {violations} with an increasing residual"),
    ))
}

fn dense_of(op: &dyn LinearOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        m.set_column(j, &DVector::from_column_slice(&col));
    }
    m
}

/// Preconditioned MINRES on the two-triangle mesh against a dense direct solve, in the
/// Riesz norm, and the preconditioner against the inverse of the dense Riesz map.
pub fn check_dense_oracle(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = TriMesh::uniform(1)?;
    let layout = Layout::of(&mesh);
    let mass = assemble_p1_mass(&mesh);
    let mut worst_solve = 0.0f64;
    let mut worst_pre = 0.0f64;
    for &(alpha, b) in &[(1.0, 1.0), (1e-3, 1e-5), (1e3, 1e-2)] {
        let p = random_p_field(&mut rng, layout.triangles);
        let field = build_block_field(&p, Beta::new(b)?, Method::Newton);
        let a = SaddleOperator::new(&mesh, &mass, &field, alpha);
        let pre = BlockPreconditioner::from_field(&mesh, &field, alpha, PrecondMode::Exact)?;
        let rhs = random_vec(&mut rng, layout.len());
        let (x, _) = minres(&a, &pre, &rhs, 1e-14, 200)?;
        let da = dense_of(&a);
        let exact = da.lu().solve(&DVector::from_column_slice(&rhs)).expect("nonsingular saddle-point matrix");
        let riesz = dense_of(&RieszMap(&pre));
        let e = DVector::from_column_slice(&x) - &exact;
        let err = (e.dot(&(&riesz * &e)) / exact.dot(&(&riesz * &exact))).sqrt();
        worst_solve = worst_solve.max(err);

        let inv = riesz.try_inverse().expect("positive definite Riesz map");
        let bd = dense_of(&pre);
        worst_pre = worst_pre.max((bd - &inv).norm() / inv.norm());
    }
    Ok(Check::new(
        "dense oracle on two triangles",
        worst_solve <= 1e-9 && worst_pre <= 1e-9,
        format!("solve error {worst_solve:.3e}, preconditioner error {worst_pre:.3e} (bound 1e-9)"),
    ))
}

/// All checks in a fixed order.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        check_symmetry(seed)?,
        check_continuity(seed)?,
        check_kernel_coercivity(seed)?,
        check_inf_sup(seed)?,
        check_h_bounds(seed, 10_000),
        check_h_inverse(seed, 10_000),
        check_jacobian_fd(seed)?,
        check_condition_robustness(seed)?,
        check_minres_monotone(seed)?,
        check_dense_oracle(seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_checks_pass() {
        for c in [
            check_symmetry(1).unwrap(),
            check_continuity(2).unwrap(),
            check_kernel_coercivity(3).unwrap(),
            check_inf_sup(4).unwrap(),
            check_h_bounds(5, 2000),
            check_h_inverse(6, 2000),
            check_jacobian_fd(7).unwrap(),
            check_dense_oracle(8).unwrap(),
        ] {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
