//! Discrete operators of the mixed (P0, P1, P0) system.
//!
//! Unknowns are stored as one flat vector ordered `[p | u | λ]`: `p` and `λ`
//! triangle-major with the two components adjacent, `u` in node order. Dual vectors
//! (right-hand sides, operator outputs) use the same layout with the test functions
//! `(q, v, μ)` in place of the unknowns.
//!
//! All P0×P0 pairings are exact (area times a dot product). The P1 mass matrix uses
//! the closed-form element matrix; only data with no polynomial structure
//! (right-hand sides, exact solutions) goes through quadrature.

use crate::local_ops::{beta_norm, h_hat, h_matrix, h_matrix_inverse, Beta, SymMat2, Vec2};
use crate::mesh::TriMesh;
use crate::par::{self, Execution};
use crate::quadrature::TriangleRule;
use crate::sparse::{dot, SparseOperator};
use crate::{Error, Result};

/// Outer linearization: full Newton matrix `H(r)` or lagged-diffusivity scalar `Ĥ(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Newton,
    Picard,
}

/// Block sizes of the `[p | u | λ]` layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub triangles: usize,
    pub nodes: usize,
}

impl Layout {
    pub fn of(mesh: &TriMesh) -> Self {
        Self {
            triangles: mesh.num_triangles(),
            nodes: mesh.num_nodes(),
        }
    }

    pub fn len(&self) -> usize {
        4 * self.triangles + self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn p_range(&self) -> std::ops::Range<usize> {
        0..2 * self.triangles
    }

    pub fn u_range(&self) -> std::ops::Range<usize> {
        2 * self.triangles..2 * self.triangles + self.nodes
    }

    pub fn lam_range(&self) -> std::ops::Range<usize> {
        2 * self.triangles + self.nodes..self.len()
    }
}

macro_rules! block_vector {
    ($name:ident) => {
        impl $name {
            pub fn zeros(layout: Layout) -> Self {
                Self {
                    layout,
                    data: vec![0.0; layout.len()],
                }
            }

            pub fn from_vec(layout: Layout, data: Vec<f64>) -> Result<Self> {
                if data.len() != layout.len() {
                    return Err(Error::DimensionMismatch {
                        expected: layout.len(),
                        actual: data.len(),
                    });
                }
                Ok(Self { layout, data })
            }

            pub fn layout(&self) -> Layout {
                self.layout
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.data
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.data
            }

            pub fn first(&self, t: usize) -> Vec2 {
                Vec2::new(self.data[2 * t], self.data[2 * t + 1])
            }

            pub fn set_first(&mut self, t: usize, v: Vec2) {
                self.data[2 * t] = v.x;
                self.data[2 * t + 1] = v.y;
            }

            pub fn middle(&self) -> &[f64] {
                &self.data[self.layout.u_range()]
            }

            pub fn middle_mut(&mut self) -> &mut [f64] {
                let r = self.layout.u_range();
                &mut self.data[r]
            }

            pub fn third(&self, t: usize) -> Vec2 {
                let o = self.layout.lam_range().start + 2 * t;
                Vec2::new(self.data[o], self.data[o + 1])
            }

            pub fn set_third(&mut self, t: usize, v: Vec2) {
                let o = self.layout.lam_range().start + 2 * t;
                self.data[o] = v.x;
                self.data[o + 1] = v.y;
            }

            pub fn norm2(&self) -> f64 {
                dot(&self.data, &self.data).sqrt()
            }
        }
    };
}

/// Coefficients of `(p_h, u_h, λ_h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    layout: Layout,
    data: Vec<f64>,
}

block_vector!(State);

impl State {
    pub fn p(&self, t: usize) -> Vec2 {
        self.first(t)
    }

    pub fn set_p(&mut self, t: usize, v: Vec2) {
        self.set_first(t, v)
    }

    pub fn u(&self) -> &[f64] {
        self.middle()
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        self.middle_mut()
    }

    pub fn lam(&self, t: usize) -> Vec2 {
        self.third(t)
    }

    pub fn set_lam(&mut self, t: usize, v: Vec2) {
        self.set_third(t, v)
    }

    pub fn p_field(&self) -> Vec<Vec2> {
        (0..self.layout.triangles).map(|t| self.p(t)).collect()
    }

    /// `self + s · dir`
    pub fn axpy(&self, s: f64, dir: &State) -> State {
        let data = self.data.iter().zip(&dir.data).map(|(a, b)| a + s * b).collect();
        State {
            layout: self.layout,
            data,
        }
    }

    pub fn scaled(&self, s: f64) -> State {
        State {
            layout: self.layout,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }
}

/// Coefficients of a functional on `V_h × U_h × W_h`, ordered `(R_p, R_u, R_λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    layout: Layout,
    data: Vec<f64>,
}

block_vector!(DualVector);

/// Per-triangle linearization weights.
#[derive(Debug, Clone)]
pub enum BlockField {
    /// `H(p_T)` and its closed-form inverse.
    Newton { h: Vec<SymMat2>, h_inv: Vec<SymMat2> },
    /// `Ĥ(p_T) = 1/|p_T|_β`.
    Picard { h: Vec<f64> },
}

impl BlockField {
    pub fn method(&self) -> Method {
        match self {
            BlockField::Newton { .. } => Method::Newton,
            BlockField::Picard { .. } => Method::Picard,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BlockField::Newton { h, .. } => h.len(),
            BlockField::Picard { h } => h.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block(&self, t: usize) -> SymMat2 {
        match self {
            BlockField::Newton { h, .. } => h[t],
            BlockField::Picard { h } => SymMat2::scaled_identity(h[t]),
        }
    }

    pub fn inverse_block(&self, t: usize) -> SymMat2 {
        match self {
            BlockField::Newton { h_inv, .. } => h_inv[t],
            BlockField::Picard { h } => SymMat2::scaled_identity(1.0 / h[t]),
        }
    }

    /// Identity blocks (`H = I`), e.g. for model elliptic problems.
    pub fn identity(triangles: usize) -> Self {
        BlockField::Newton {
            h: vec![SymMat2::IDENTITY; triangles],
            h_inv: vec![SymMat2::IDENTITY; triangles],
        }
    }
}

/// `H(p_T)` (Newton) or `Ĥ(p_T)` (Picard) on every triangle.
pub fn build_block_field(p: &[Vec2], beta: Beta, method: Method) -> BlockField {
    build_block_field_with(Execution::default(), p, beta, method)
}

pub fn build_block_field_with(exec: Execution, p: &[Vec2], beta: Beta, method: Method) -> BlockField {
    match method {
        Method::Newton => {
            let pairs = par::map_slice(exec, p, |&r| (h_matrix(r, beta), h_matrix_inverse(r, beta)));
            let (h, h_inv) = pairs.into_iter().unzip();
            BlockField::Newton { h, h_inv }
        }
        Method::Picard => BlockField::Picard {
            h: par::map_slice(exec, p, |&r| h_hat(r, beta)),
        },
    }
}

/// Sparsity of P1 operators with, for every triangle, the nine value slots of its
/// element matrix.
struct P1Pattern {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    slots: Vec<[usize; 9]>,
}

impl P1Pattern {
    fn new(mesh: &TriMesh) -> Self {
        let n = mesh.num_nodes();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for tri in mesh.triangles() {
            for &a in tri {
                adj[a].extend_from_slice(tri);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let find = |i: usize, j: usize| {
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            row_ptr[i] + cols.binary_search(&j).expect("pattern covers element")
        };
        let slots = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut s = [0; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        s[3 * a + b] = find(tri[a], tri[b]);
                    }
                }
                s
            })
            .collect();
        Self {
            row_ptr,
            col_idx,
            slots,
        }
    }

    /// Element matrices are computed independently, then summed in triangle order.
    fn assemble<F>(self, exec: Execution, mesh: &TriMesh, local: F) -> SparseOperator
    where
        F: Fn(usize) -> [f64; 9] + Sync + Send,
    {
        let n = mesh.num_nodes();
        let locals = par::map_range(exec, mesh.num_triangles(), local);
        let mut values = vec![0.0; self.col_idx.len()];
        for (slots, m) in self.slots.iter().zip(&locals) {
            for k in 0..9 {
                values[slots[k]] += m[k];
            }
        }
        SparseOperator::from_csr(n, n, self.row_ptr, self.col_idx, values)
    }
}

fn local_mass(area: f64) -> [f64; 9] {
    let d = area / 6.0;
    let o = area / 12.0;
    [d, o, o, o, d, o, o, o, d]
}

fn local_stiffness(area: f64, g: &[Vec2; 3], h: &SymMat2, alpha: f64) -> [f64; 9] {
    let mut m = [0.0; 9];
    for a in 0..3 {
        for b in 0..3 {
            m[3 * a + b] = alpha * area * h.form(g[a], g[b]);
        }
    }
    m
}

/// P1 mass matrix `⟨φ_j, φ_i⟩`.
pub fn assemble_p1_mass(mesh: &TriMesh) -> SparseOperator {
    assemble_p1_mass_with(Execution::default(), mesh)
}

pub fn assemble_p1_mass_with(exec: Execution, mesh: &TriMesh) -> SparseOperator {
    P1Pattern::new(mesh).assemble(exec, mesh, |t| local_mass(mesh.area(t)))
}

/// Weighted Neumann stiffness `⟨α H ∇φ_j, ∇φ_i⟩`.
pub fn assemble_weighted_stiffness(mesh: &TriMesh, field: &BlockField, alpha: f64) -> SparseOperator {
    assemble_weighted_stiffness_with(Execution::default(), mesh, field, alpha)
}

pub fn assemble_weighted_stiffness_with(
    exec: Execution,
    mesh: &TriMesh,
    field: &BlockField,
    alpha: f64,
) -> SparseOperator {
    P1Pattern::new(mesh).assemble(exec, mesh, |t| {
        local_stiffness(mesh.area(t), mesh.grad_basis(t), &field.block(t), alpha)
    })
}

/// `S = M + K_{αH}`, the middle block of the Riesz map.
pub fn assemble_middle_block(mesh: &TriMesh, field: &BlockField, alpha: f64) -> SparseOperator {
    assemble_middle_block_with(Execution::default(), mesh, field, alpha)
}

pub fn assemble_middle_block_with(
    exec: Execution,
    mesh: &TriMesh,
    field: &BlockField,
    alpha: f64,
) -> SparseOperator {
    P1Pattern::new(mesh).assemble(exec, mesh, |t| {
        let mut m = local_stiffness(mesh.area(t), mesh.grad_basis(t), &field.block(t), alpha);
        let mass = local_mass(mesh.area(t));
        m.iter_mut().zip(mass).for_each(|(a, b)| *a += b);
        m
    })
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Linearized saddle-point operator `A_h(r)` for a given block field.
///
/// Rows: `⟨αH p, q⟩ − ⟨λ, q⟩`; `⟨u, v⟩ + ⟨λ, ∇v⟩`; `−⟨p, μ⟩ + ⟨∇u, μ⟩`.
pub struct SaddleOperator<'a> {
    mesh: &'a TriMesh,
    mass: &'a SparseOperator,
    field: &'a BlockField,
    alpha: f64,
    exec: Execution,
}

impl<'a> SaddleOperator<'a> {
    pub fn new(mesh: &'a TriMesh, mass: &'a SparseOperator, field: &'a BlockField, alpha: f64) -> Self {
        Self {
            mesh,
            mass,
            field,
            alpha,
            exec: Execution::default(),
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn dim(&self) -> usize {
        Layout::of(self.mesh).len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let layout = Layout::of(self.mesh);
        assert_eq!(x.len(), layout.len());
        assert_eq!(y.len(), layout.len());
        let nt = layout.triangles;
        let (u0, l0) = (layout.u_range().start, layout.lam_range().start);
        let mesh = self.mesh;
        let alpha = self.alpha;
        let vec_at = |o: usize| Vec2::new(x[o], x[o + 1]);

        let rows = par::map_range(self.exec, nt, |t| {
            let area = mesh.area(t);
            let p = vec_at(2 * t);
            let lam = vec_at(l0 + 2 * t);
            let grad_u = mesh.gradient(t, &x[u0..l0]);
            let rp = (self.field.block(t).apply(p) * alpha - lam) * area;
            let rl = (grad_u - p) * area;
            (rp, rl, lam * area)
        });

        let (yp, rest) = y.split_at_mut(u0);
        let (yu, yl) = rest.split_at_mut(l0 - u0);
        self.mass.mul_vec_into_with(self.exec, &x[u0..l0], yu);
        for (t, (rp, rl, lam_area)) in rows.into_iter().enumerate() {
            yp[2 * t] = rp.x;
            yp[2 * t + 1] = rp.y;
            yl[2 * t] = rl.x;
            yl[2 * t + 1] = rl.y;
            let g = mesh.grad_basis(t);
            for (k, &node) in mesh.triangles()[t].iter().enumerate() {
                yu[node] += lam_area.dot(g[k]);
            }
        }
    }
}

/// `A_h(r) x` as a dual vector.
pub fn apply_a(mesh: &TriMesh, field: &BlockField, alpha: f64, x: &State) -> Result<DualVector> {
    let layout = Layout::of(mesh);
    check_len(layout.len(), x.as_slice().len())?;
    check_len(mesh.num_triangles(), field.len())?;
    let mass = assemble_p1_mass(mesh);
    let mut y = DualVector::zeros(layout);
    SaddleOperator::new(mesh, &mass, field, alpha).apply(x.as_slice(), y.as_mut_slice());
    Ok(y)
}

/// Data of the nonlinear problem: the load `⟨f, φ_i⟩` and the mass matrix.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mass: SparseOperator,
    pub load: Vec<f64>,
}

impl Discretization {
    pub fn new(mesh: &TriMesh, load: Vec<f64>) -> Result<Self> {
        check_len(mesh.num_nodes(), load.len())?;
        Ok(Self {
            mass: assemble_p1_mass(mesh),
            load,
        })
    }
}

/// Newton/Picard right-hand side `(R_p, R_u, R_λ)` at `state`; this is minus the
/// residual of the discrete nonlinear system and is the same for both methods.
pub fn newton_rhs(
    mesh: &TriMesh,
    disc: &Discretization,
    state: &State,
    alpha: f64,
    beta: Beta,
) -> Result<DualVector> {
    let layout = Layout::of(mesh);
    check_len(layout.len(), state.as_slice().len())?;
    let nt = layout.triangles;
    let rows = par::map_range(Execution::default(), nt, |t| {
        let area = mesh.area(t);
        let p = state.p(t);
        let lam = state.lam(t);
        let rp = (lam - p * (alpha / beta_norm(p, beta))) * area;
        let rl = (p - mesh.gradient(t, state.u())) * area;
        (rp, rl, lam * area)
    });
    let mut b = DualVector::zeros(layout);
    {
        let ru = b.middle_mut();
        disc.mass.mul_vec_into(state.u(), ru);
        for (r, l) in ru.iter_mut().zip(&disc.load) {
            *r = l - *r;
        }
    }
    for (t, (rp, rl, lam_area)) in rows.into_iter().enumerate() {
        b.set_first(t, rp);
        b.set_third(t, rl);
        let g = mesh.grad_basis(t);
        for (k, &node) in mesh.triangles()[t].iter().enumerate() {
            b.middle_mut()[node] -= lam_area.dot(g[k]);
        }
    }
    Ok(b)
}

/// Weighted inner product `(x, y)_{X_r}`.
pub fn x_inner(mesh: &TriMesh, mass: &SparseOperator, field: &BlockField, alpha: f64, x: &State, y: &State) -> f64 {
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        let h = field.block(t);
        let hinv = field.inverse_block(t);
        total += area * alpha * h.form(x.p(t), y.p(t));
        total += area * alpha * h.form(mesh.gradient(t, x.u()), mesh.gradient(t, y.u()));
        total += area / alpha * hinv.form(x.lam(t), y.lam(t));
    }
    total + dot(&mass.mul_vec(x.u()), y.u())
}

/// Weighted norm `‖x‖_{X_r}`.
pub fn x_norm(mesh: &TriMesh, field: &BlockField, alpha: f64, x: &State) -> f64 {
    let mass = assemble_p1_mass(mesh);
    x_inner(mesh, &mass, field, alpha, x, x).max(0.0).sqrt()
}

/// Pointwise exact solution `(u, ∇u, p, λ)`.
pub trait ExactSolution: Sync {
    fn u(&self, x: f64, y: f64) -> f64;
    fn grad_u(&self, x: f64, y: f64) -> Vec2;
    fn p(&self, x: f64, y: f64) -> Vec2;
    fn lam(&self, x: f64, y: f64) -> Vec2;
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub p_l2: f64,
    pub lam_l2: f64,
    pub u_l2: f64,
    /// H¹ seminorm of `u − u_h`.
    pub u_h1: f64,
}

/// L² errors of `p`, `λ`, `u` and the H¹-seminorm error of `u`, integrated with
/// `rule` on every triangle.
pub fn error_norms(mesh: &TriMesh, state: &State, exact: &dyn ExactSolution, rule: &TriangleRule) -> ErrorNorms {
    let parts = par::map_range(Execution::default(), mesh.num_triangles(), |t| {
        let tri = mesh.triangles()[t];
        let x = mesh.vertices(t);
        let (ph, lh) = (state.p(t), state.lam(t));
        let gh = mesh.gradient(t, state.u());
        let u = state.u();
        let mut e = [0.0; 4];
        for (pt, l, w) in rule.on(&x, mesh.area(t)) {
            let uh = l[0] * u[tri[0]] + l[1] * u[tri[1]] + l[2] * u[tri[2]];
            e[0] += w * (exact.p(pt[0], pt[1]) - ph).norm_sq();
            e[1] += w * (exact.lam(pt[0], pt[1]) - lh).norm_sq();
            e[2] += w * (exact.u(pt[0], pt[1]) - uh).powi(2);
            e[3] += w * (exact.grad_u(pt[0], pt[1]) - gh).norm_sq();
        }
        e
    });
    let mut sum = [0.0; 4];
    for e in parts {
        for k in 0..4 {
            sum[k] += e[k];
        }
    }
    ErrorNorms {
        p_l2: sum[0].sqrt(),
        lam_l2: sum[1].sqrt(),
        u_l2: sum[2].sqrt(),
        u_h1: sum[3].sqrt(),
    }
}

/// L² distance between a P1 function and `f`.
pub fn p1_l2_error(mesh: &TriMesh, u: &[f64], f: &(dyn Fn(f64, f64) -> f64 + Sync), rule: &TriangleRule) -> f64 {
    let parts = par::map_range(Execution::default(), mesh.num_triangles(), |t| {
        let tri = mesh.triangles()[t];
        rule.on(&mesh.vertices(t), mesh.area(t))
            .map(|(pt, l, w)| {
                let uh = l[0] * u[tri[0]] + l[1] * u[tri[1]] + l[2] * u[tri[2]];
                w * (f(pt[0], pt[1]) - uh).powi(2)
            })
            .sum::<f64>()
    });
    parts.into_iter().sum::<f64>().sqrt()
}

/// Load vector `⟨f, φ_i⟩` by quadrature.
pub fn load_vector(mesh: &TriMesh, f: &(dyn Fn(f64, f64) -> f64 + Sync), rule: &TriangleRule) -> Vec<f64> {
    let locals = par::map_range(Execution::default(), mesh.num_triangles(), |t| {
        let mut l = [0.0; 3];
        for (pt, bary, w) in rule.on(&mesh.vertices(t), mesh.area(t)) {
            let fv = f(pt[0], pt[1]);
            for k in 0..3 {
                l[k] += w * fv * bary[k];
            }
        }
        l
    });
    let mut b = vec![0.0; mesh.num_nodes()];
    for (tri, l) in mesh.triangles().iter().zip(locals) {
        for k in 0..3 {
            b[tri[k]] += l[k];
        }
    }
    b
}

/// Load vector from the integrated-by-parts identity `⟨f, v⟩ = ⟨u, v⟩ + ⟨λ, ∇v⟩`,
/// valid when `λ·n = 0` on the boundary.
pub fn load_from_weak_form(mesh: &TriMesh, exact: &dyn ExactSolution, rule: &TriangleRule) -> Vec<f64> {
    let locals = par::map_range(Execution::default(), mesh.num_triangles(), |t| {
        let g = mesh.grad_basis(t);
        let mut l = [0.0; 3];
        for (pt, bary, w) in rule.on(&mesh.vertices(t), mesh.area(t)) {
            let u = exact.u(pt[0], pt[1]);
            let lam = exact.lam(pt[0], pt[1]);
            for k in 0..3 {
                l[k] += w * (u * bary[k] + lam.dot(g[k]));
            }
        }
        l
    });
    let mut b = vec![0.0; mesh.num_nodes()];
    for (tri, l) in mesh.triangles().iter().zip(locals) {
        for k in 0..3 {
            b[tri[k]] += l[k];
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn beta(b: f64) -> Beta {
        Beta::new(b).unwrap()
    }

    #[test]
    fn block_field_cases() {
        let f = build_block_field(&[Vec2::ZERO; 4], beta(1.0), Method::Newton);
        assert!((0..4).all(|t| f.block(t) == SymMat2::IDENTITY));

        let f = build_block_field(&[Vec2::new(1.0, 0.0); 3], beta(3.0), Method::Newton);
        for t in 0..3 {
            let b = f.block(t);
            assert_relative_eq!(b.a11, 3.0 / 8.0, epsilon = 1e-15);
            assert_relative_eq!(b.a22, 0.5, epsilon = 1e-15);
        }
        let f = build_block_field(&[Vec2::new(1.0, 0.0); 3], beta(3.0), Method::Picard);
        assert!(matches!(&f, BlockField::Picard { h } if h.iter().all(|&v| v == 0.5)));
        assert_eq!(f.inverse_block(0), SymMat2::scaled_identity(2.0));
    }

    #[test]
    fn reference_element_matrices() {
        let m = local_mass(0.5);
        assert_relative_eq!(m[0], 1.0 / 12.0);
        assert_relative_eq!(m[1], 1.0 / 24.0);
        let g = [Vec2::new(-1.0, -1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let k = local_stiffness(0.5, &g, &SymMat2::IDENTITY, 1.0);
        let expected = [2.0, -1.0, -1.0, -1.0, 1.0, 0.0, -1.0, 0.0, 1.0].map(|v| 0.5 * v);
        for i in 0..9 {
            assert_abs_diff_eq!(k[i], expected[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn mass_matrix_properties() {
        let mesh = TriMesh::uniform(5).unwrap();
        let m = assemble_p1_mass(&mesh);
        assert!(m.is_structurally_symmetric());
        assert_abs_diff_eq!(m.asymmetry(), 0.0);
        let ones = vec![1.0; mesh.num_nodes()];
        assert_relative_eq!(dot(&m.mul_vec(&ones), &ones), 1.0, epsilon = 1e-13);
        // row sums: a third of the patch area
        let mut patch = vec![0.0; mesh.num_nodes()];
        for (tri, &a) in mesh.triangles().iter().zip(mesh.areas()) {
            for &k in tri {
                patch[k] += a / 3.0;
            }
        }
        for (i, r) in m.mul_vec(&ones).iter().enumerate() {
            assert_relative_eq!(*r, patch[i], epsilon = 1e-15);
        }
        // positive definite on a random vector
        let x: Vec<f64> = (0..mesh.num_nodes()).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!(dot(&m.mul_vec(&x), &x) > 0.0);
    }

    #[test]
    fn stiffness_properties() {
        let mesh = TriMesh::uniform(4).unwrap();
        let p: Vec<Vec2> = (0..mesh.num_triangles()).map(|t| Vec2::new((t as f64).sin(), 0.3)).collect();
        let field = build_block_field(&p, beta(0.1), Method::Newton);
        let k1 = assemble_weighted_stiffness(&mesh, &field, 1.0);
        let k2 = assemble_weighted_stiffness(&mesh, &field, 2.0);
        assert!(k1.asymmetry() < 1e-15);
        let ones = vec![1.0; mesh.num_nodes()];
        assert!(k1.mul_vec(&ones).iter().all(|v| v.abs() < 1e-13));
        for (a, b) in k1.values().iter().zip(k2.values()) {
            assert_relative_eq!(2.0 * a, *b, epsilon = 1e-15);
        }
        let s = assemble_middle_block(&mesh, &field, 1.0);
        let m = assemble_p1_mass(&mesh);
        for k in 0..s.nnz() {
            assert_relative_eq!(s.values()[k], m.values()[k] + k1.values()[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn sequential_and_parallel_assembly_identical() {
        let mesh = TriMesh::uniform(40).unwrap();
        let p: Vec<Vec2> = (0..mesh.num_triangles()).map(|t| Vec2::new((t as f64).cos(), 1.0)).collect();
        let f1 = build_block_field_with(Execution::Sequential, &p, beta(1e-3), Method::Newton);
        let f2 = build_block_field_with(Execution::Parallel, &p, beta(1e-3), Method::Newton);
        let a = assemble_middle_block_with(Execution::Sequential, &mesh, &f1, 2.0);
        let b = assemble_middle_block_with(Execution::Parallel, &mesh, &f2, 2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let mesh = TriMesh::uniform(2).unwrap();
        let field = BlockField::identity(mesh.num_triangles());
        let y = apply_a(&mesh, &field, 1.0, &State::zeros(Layout::of(&mesh))).unwrap();
        assert!(y.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_checks() {
        let mesh = TriMesh::uniform(2).unwrap();
        let other = TriMesh::uniform(3).unwrap();
        let field = BlockField::identity(mesh.num_triangles());
        let x = State::zeros(Layout::of(&other));
        assert!(matches!(apply_a(&mesh, &field, 1.0, &x), Err(Error::DimensionMismatch { .. })));
        assert!(State::from_vec(Layout::of(&mesh), vec![0.0; 3]).is_err());
        assert!(Discretization::new(&mesh, vec![0.0; 2]).is_err());
    }

    #[test]
    fn rhs_at_zero_state() {
        let mesh = TriMesh::uniform(3).unwrap();
        let load: Vec<f64> = (0..mesh.num_nodes()).map(|i| i as f64 * 0.1).collect();
        let disc = Discretization::new(&mesh, load.clone()).unwrap();
        let b = newton_rhs(&mesh, &disc, &State::zeros(Layout::of(&mesh)), 1.0, beta(1.0)).unwrap();
        assert!(b.as_slice()[Layout::of(&mesh).p_range()].iter().all(|&v| v == 0.0));
        assert!(b.as_slice()[Layout::of(&mesh).lam_range()].iter().all(|&v| v == 0.0));
        assert_eq!(b.middle(), &load[..]);
    }

    #[test]
    fn x_norm_cases() {
        let mesh = TriMesh::uniform(3).unwrap();
        let layout = Layout::of(&mesh);
        let p: Vec<Vec2> = (0..mesh.num_triangles()).map(|t| Vec2::new(t as f64, -1.0)).collect();
        let field = build_block_field(&p, beta(0.5), Method::Newton);
        assert_eq!(x_norm(&mesh, &field, 2.0, &State::zeros(layout)), 0.0);

        let mut x = State::zeros(layout);
        x.u_mut().iter_mut().for_each(|v| *v = 1.0);
        assert_relative_eq!(x_norm(&mesh, &field, 2.0, &x), 1.0, epsilon = 1e-13);

        let mut y = State::zeros(layout);
        y.as_mut_slice().iter_mut().enumerate().for_each(|(i, v)| *v = (i as f64).sin());
        let n1 = x_norm(&mesh, &field, 2.0, &y);
        assert_relative_eq!(x_norm(&mesh, &field, 2.0, &y.scaled(3.5)), 3.5 * n1, epsilon = 1e-12);
    }

    struct Zero;
    impl ExactSolution for Zero {
        fn u(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn grad_u(&self, _: f64, _: f64) -> Vec2 {
            Vec2::ZERO
        }
        fn p(&self, _: f64, _: f64) -> Vec2 {
            Vec2::ZERO
        }
        fn lam(&self, _: f64, _: f64) -> Vec2 {
            Vec2::ZERO
        }
    }

    #[test]
    fn error_norms_vanish_for_zero() {
        let mesh = TriMesh::uniform(3).unwrap();
        let e = error_norms(&mesh, &State::zeros(Layout::of(&mesh)), &Zero, &TriangleRule::degree4());
        assert_eq!(e, ErrorNorms::default());
    }

    #[test]
    fn load_vector_of_constant() {
        let mesh = TriMesh::uniform(4).unwrap();
        let b = load_vector(&mesh, &|_, _| 2.0, &TriangleRule::degree4());
        let m = assemble_p1_mass(&mesh);
        let expected = m.mul_vec(&vec![2.0; mesh.num_nodes()]);
        for (a, e) in b.iter().zip(expected) {
            assert_relative_eq!(*a, e, epsilon = 1e-14);
        }
    }
}
