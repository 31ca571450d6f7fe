//! Block-diagonal Riesz-map preconditioner.
//!
//! The three diagonal blocks are `(area·α·H_T)⁻¹` on `p`, the inverse of
//! `S = M + K_{αH}` on `u`, and `(area·α⁻¹·H_T⁻¹)⁻¹` on `λ`. The element blocks are
//! inverted in closed form; `S` is solved by PCG preconditioned with one AMG
//! V-cycle, to a tight tolerance in exact mode and a loose one in inexact mode.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::amg::{amg_setup_with, inexact_middle_solve, AmgConfig, AmgHierarchy};
use crate::assembly::{assemble_middle_block, build_block_field, BlockField, Layout, Method};
use crate::krylov::LinearOperator;
use crate::local_ops::{SymMat2, Vec2};
use crate::mesh::TriMesh;
use crate::par::{self, Execution};
use crate::{Beta, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrecondMode {
    #[default]
    Exact,
    Inexact,
}

impl PrecondMode {
    /// Relative l² tolerance of the inner PCG solve.
    pub fn middle_tolerance(self) -> f64 {
        match self {
            PrecondMode::Exact => 1e-12,
            PrecondMode::Inexact => 1e-3,
        }
    }

    pub fn middle_maxit(self) -> usize {
        match self {
            PrecondMode::Exact => 1000,
            PrecondMode::Inexact => 200,
        }
    }
}

/// Counters accumulated over applications.
#[derive(Debug, Default)]
pub struct PrecondStats {
    applications: AtomicUsize,
    inner_iterations: AtomicUsize,
    unconverged: AtomicUsize,
}

impl PrecondStats {
    pub fn applications(&self) -> usize {
        self.applications.load(Ordering::Relaxed)
    }

    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations.load(Ordering::Relaxed)
    }

    /// Number of middle solves that stopped at the iteration cap.
    pub fn unconverged(&self) -> usize {
        self.unconverged.load(Ordering::Relaxed)
    }
}

#[derive(Debug)]
pub struct BlockPreconditioner {
    mode: PrecondMode,
    layout: Layout,
    areas: Vec<f64>,
    alpha: f64,
    h: Vec<SymMat2>,
    h_inv: Vec<SymMat2>,
    hier: AmgHierarchy,
    tol: f64,
    maxit: usize,
    exec: Execution,
    stats: PrecondStats,
}

/// Builds the preconditioner for the linearization at `p`.
pub fn build_preconditioner(
    mesh: &TriMesh,
    p: &[Vec2],
    alpha: f64,
    beta: Beta,
    method: Method,
    mode: PrecondMode,
) -> Result<BlockPreconditioner> {
    if p.len() != mesh.num_triangles() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_triangles(),
            actual: p.len(),
        });
    }
    let field = build_block_field(p, beta, method);
    BlockPreconditioner::from_field(mesh, &field, alpha, mode)
}

impl BlockPreconditioner {
    pub fn from_field(mesh: &TriMesh, field: &BlockField, alpha: f64, mode: PrecondMode) -> Result<Self> {
        Self::from_field_with(mesh, field, alpha, mode, &AmgConfig::default())
    }

    pub fn from_field_with(
        mesh: &TriMesh,
        field: &BlockField,
        alpha: f64,
        mode: PrecondMode,
        amg: &AmgConfig,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if field.len() != mesh.num_triangles() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_triangles(),
                actual: field.len(),
            });
        }
        let s = assemble_middle_block(mesh, field, alpha);
        let hier = amg_setup_with(&s, amg)?;
        let nt = mesh.num_triangles();
        Ok(Self {
            mode,
            layout: Layout::of(mesh),
            areas: mesh.areas().to_vec(),
            alpha,
            h: (0..nt).map(|t| field.block(t)).collect(),
            h_inv: (0..nt).map(|t| field.inverse_block(t)).collect(),
            hier,
            tol: mode.middle_tolerance(),
            maxit: mode.middle_maxit(),
            exec: Execution::default(),
            stats: PrecondStats::default(),
        })
    }

    /// Overrides the inner PCG tolerance and iteration cap.
    pub fn with_middle_solver(mut self, tol: f64, maxit: usize) -> Self {
        self.tol = tol;
        self.maxit = maxit;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn mode(&self) -> PrecondMode {
        self.mode
    }

    pub fn middle_tolerance(&self) -> f64 {
        self.tol
    }

    pub fn hierarchy(&self) -> &AmgHierarchy {
        &self.hier
    }

    pub fn stats(&self) -> &PrecondStats {
        &self.stats
    }

    /// Inverse of the first block on triangle `t`.
    pub fn first_block_inverse(&self, t: usize) -> SymMat2 {
        self.h_inv[t].scale(1.0 / (self.areas[t] * self.alpha))
    }

    /// Inverse of the third block on triangle `t`.
    pub fn third_block_inverse(&self, t: usize) -> SymMat2 {
        self.h[t].scale(self.alpha / self.areas[t])
    }

    fn element_blocks(&self, x: &[f64], y: &mut [f64], first: impl Fn(usize) -> SymMat2 + Sync, third: impl Fn(usize) -> SymMat2 + Sync) {
        let l0 = self.layout.lam_range().start;
        let nt = self.layout.triangles;
        let at = |o: usize| Vec2::new(x[o], x[o + 1]);
        let blocks = par::map_range(self.exec, nt, |t| (first(t).apply(at(2 * t)), third(t).apply(at(l0 + 2 * t))));
        for (t, (a, b)) in blocks.into_iter().enumerate() {
            y[2 * t] = a.x;
            y[2 * t + 1] = a.y;
            y[l0 + 2 * t] = b.x;
            y[l0 + 2 * t + 1] = b.y;
        }
    }

    /// `x = B y`. A middle solve that misses its tolerance is counted in
    /// [`stats`](Self::stats) and its iterate is used anyway.
    pub fn apply(&self, y: &[f64], x: &mut [f64]) -> Result<()> {
        let n = self.layout.len();
        for len in [y.len(), x.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, actual: len });
            }
        }
        self.element_blocks(y, x, |t| self.first_block_inverse(t), |t| self.third_block_inverse(t));
        let ur = self.layout.u_range();
        let (sol, report) = inexact_middle_solve(&self.hier, &y[ur.clone()], self.tol, self.maxit)?;
        x[ur].copy_from_slice(&sol);
        self.stats.applications.fetch_add(1, Ordering::Relaxed);
        self.stats.inner_iterations.fetch_add(report.iterations, Ordering::Relaxed);
        if !report.converged {
            self.stats.unconverged.fetch_add(1, Ordering::Relaxed);
        }
        Ok(())
    }

    /// `y = B⁻¹ x`, the Riesz map itself.
    pub fn forward(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.layout.len();
        for len in [y.len(), x.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, actual: len });
            }
        }
        let alpha = self.alpha;
        self.element_blocks(
            x,
            y,
            |t| self.h[t].scale(self.areas[t] * alpha),
            |t| self.h_inv[t].scale(self.areas[t] / alpha),
        );
        let ur = self.layout.u_range();
        self.hier.operator().mul_vec_into_with(self.exec, &x[ur.clone()], &mut y[ur]);
        Ok(())
    }
}

impl LinearOperator for BlockPreconditioner {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        BlockPreconditioner::apply(self, x, y).expect("preconditioner application");
    }
}

/// `B⁻¹` as an operator.
pub struct RieszMap<'a>(pub &'a BlockPreconditioner);

impl LinearOperator for RieszMap<'_> {
    fn dim(&self) -> usize {
        self.0.layout.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.forward(x, y).expect("Riesz map application");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_p1_mass, assemble_weighted_stiffness};
    use crate::sparse::dot;
    use approx::assert_relative_eq;

    fn zero_p(mesh: &TriMesh) -> Vec<Vec2> {
        vec![Vec2::ZERO; mesh.num_triangles()]
    }

    #[test]
    fn identity_field_blocks() {
        let mesh = TriMesh::uniform(4).unwrap();
        let b = build_preconditioner(&mesh, &zero_p(&mesh), 1.0, Beta::new(1.0).unwrap(), Method::Newton, PrecondMode::Exact).unwrap();
        for t in 0..mesh.num_triangles() {
            let inv_area = 1.0 / mesh.area(t);
            for m in [b.first_block_inverse(t), b.third_block_inverse(t)] {
                assert_relative_eq!(m.a11, inv_area, max_relative = 1e-14);
                assert_relative_eq!(m.a22, inv_area, max_relative = 1e-14);
                assert_eq!(m.a12, 0.0);
            }
        }
        let field = BlockField::identity(mesh.num_triangles());
        let mut s = assemble_p1_mass(&mesh).to_dense();
        s += assemble_weighted_stiffness(&mesh, &field, 1.0).to_dense();
        assert!((b.hierarchy().operator().to_dense() - s).abs().max() < 1e-14);
    }

    #[test]
    fn alpha_scaling() {
        let mesh = TriMesh::uniform(2).unwrap();
        let beta = Beta::new(0.5).unwrap();
        let p: Vec<Vec2> = (0..mesh.num_triangles()).map(|t| Vec2::new(t as f64 * 0.3, 1.0 - t as f64 * 0.1)).collect();
        let b1 = build_preconditioner(&mesh, &p, 1.0, beta, Method::Newton, PrecondMode::Exact).unwrap();
        let b4 = build_preconditioner(&mesh, &p, 4.0, beta, Method::Newton, PrecondMode::Exact).unwrap();
        for t in 0..mesh.num_triangles() {
            assert_relative_eq!(b4.first_block_inverse(t).a12, b1.first_block_inverse(t).a12 / 4.0, max_relative = 1e-13);
            assert_relative_eq!(b4.third_block_inverse(t).a11, b1.third_block_inverse(t).a11 * 4.0, max_relative = 1e-13);
        }
        let inexact = build_preconditioner(&mesh, &p, 1.0, beta, Method::Newton, PrecondMode::Inexact).unwrap();
        assert_eq!(inexact.middle_tolerance(), 1e-3);
        assert_eq!(b1.middle_tolerance(), 1e-12);
        assert_eq!(inexact.hierarchy().operator(), b1.hierarchy().operator());
    }

    #[test]
    fn inverse_of_forward_and_symmetry() {
        let mesh = TriMesh::uniform(6).unwrap();
        let beta = Beta::new(1e-2).unwrap();
        let p: Vec<Vec2> = (0..mesh.num_triangles()).map(|t| Vec2::new((t as f64).sin(), (t as f64 * 0.7).cos())).collect();
        let b = build_preconditioner(&mesh, &p, 0.3, beta, Method::Newton, PrecondMode::Exact).unwrap();
        let n = b.dim();
        let y: Vec<f64> = (0..n).map(|i| ((i * 31 % 17) as f64) / 17.0 - 0.5).collect();
        let z: Vec<f64> = (0..n).map(|i| ((i * 13 % 7) as f64) / 7.0 - 0.3).collect();
        let mut by = vec![0.0; n];
        let mut bz = vec![0.0; n];
        b.apply(&y, &mut by).unwrap();
        b.apply(&z, &mut bz).unwrap();
        let mut back = vec![0.0; n];
        b.forward(&by, &mut back).unwrap();
        let scale = crate::sparse::norm2(&y);
        for i in 0..n {
            assert!((back[i] - y[i]).abs() <= 1e-8 * scale);
        }
        assert!(dot(&by, &y) > 0.0);
        assert_relative_eq!(dot(&by, &z), dot(&bz, &y), max_relative = 1e-10);
        assert_eq!(b.stats().applications(), 2);

        let zero = vec![0.0; n];
        let mut out = vec![1.0; n];
        b.apply(&zero, &mut out).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }
}
