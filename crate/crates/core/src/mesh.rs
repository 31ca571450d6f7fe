//! Structured triangulations of the unit square.
//!
//! Nodes are numbered lexicographically by (row, column), i.e. node `j*(n+1)+i`
//! sits at `(i/n, j/n)`. Every grid square is cut along its "/" diagonal; the lower
//! triangle comes first, then the upper one, squares in the same row-major order.
//! All triangles are counter-clockwise.

use crate::local_ops::Vec2;
use crate::{Error, Result};

const BOUNDARY_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TriMesh {
    n: usize,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    grad_basis: Vec<[Vec2; 3]>,
    boundary_nodes: Vec<usize>,
}

impl TriMesh {
    /// Uniform mesh with `n` subdivisions per side: `(n+1)²` nodes, `2n²` triangles.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMesh);
        }
        let np = n + 1;
        let nodes: Vec<[f64; 2]> = (0..np * np)
            .map(|k| {
                let (i, j) = (k % np, k / np);
                [i as f64 / n as f64, j as f64 / n as f64]
            })
            .collect();

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let a = j * np + i;
                let b = a + 1;
                let c = a + np + 1;
                let d = a + np;
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }

        let (areas, grad_basis) = triangles
            .iter()
            .map(|t| element_geometry([nodes[t[0]], nodes[t[1]], nodes[t[2]]]))
            .unzip();

        let on_boundary = |v: f64| v.abs() <= BOUNDARY_TOL || (v - 1.0).abs() <= BOUNDARY_TOL;
        let boundary_nodes = nodes
            .iter()
            .enumerate()
            .filter(|(_, p)| on_boundary(p[0]) || on_boundary(p[1]))
            .map(|(k, _)| k)
            .collect();

        Ok(Self {
            n,
            nodes,
            triangles,
            areas,
            grad_basis,
            boundary_nodes,
        })
    }

    /// Mesh for refinement level `k` (1-based): `n = 16 · 2^(k-1)`.
    pub fn level(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("mesh levels start at 1".into()));
        }
        Self::uniform(16usize << (k - 1))
    }

    pub fn subdivisions(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn grad_basis(&self, t: usize) -> &[Vec2; 3] {
        &self.grad_basis[t]
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]]
    }

    /// Area and P1 basis gradients of triangle `t`.
    pub fn element_geometry(&self, t: usize) -> (f64, [Vec2; 3]) {
        (self.areas[t], self.grad_basis[t])
    }

    /// Constant gradient of the P1 function with nodal values `u` on triangle `t`.
    pub fn gradient(&self, t: usize, u: &[f64]) -> Vec2 {
        let tri = self.triangles[t];
        let g = &self.grad_basis[t];
        g[0] * u[tri[0]] + g[1] * u[tri[1]] + g[2] * u[tri[2]]
    }

    /// Nodal interpolation of `f`.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|p| f(p[0], p[1])).collect()
    }

    /// DOF counts `(p, u, λ)` of the mixed spaces.
    pub fn dof_counts(&self) -> (usize, usize, usize) {
        let nt = self.num_triangles();
        (2 * nt, self.num_nodes(), 2 * nt)
    }
}

/// Area and basis gradients of an arbitrary triangle with vertices `x`.
///
/// The gradient of basis function `i` is orthogonal to the opposite edge and scaled
/// by the inverse height, so that it is 1 at vertex `i` and 0 at the other two.
pub fn element_geometry(x: [[f64; 2]; 3]) -> (f64, [Vec2; 3]) {
    let det = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]);
    let grad = |i: usize| {
        let (a, b) = (x[(i + 1) % 3], x[(i + 2) % 3]);
        Vec2::new((a[1] - b[1]) / det, (b[0] - a[0]) / det)
    };
    (0.5 * det.abs(), [grad(0), grad(1), grad(2)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn counts_match_dof_table() {
        // (n, nodes, triangles, total DOFs)
        for (n, nodes, tris, total) in [
            (16, 289, 512, 2_337),
            (32, 1_089, 2_048, 9_281),
            (64, 4_225, 8_192, 36_993),
            (128, 16_641, 32_768, 147_713),
        ] {
            let m = TriMesh::uniform(n).unwrap();
            assert_eq!(m.num_nodes(), nodes);
            assert_eq!(m.num_triangles(), tris);
            let (p, u, l) = m.dof_counts();
            assert_eq!(p + u + l, total);
        }
        assert_abs_diff_eq!(TriMesh::level(1).unwrap().h(), 6.25e-2);
        assert_abs_diff_eq!(TriMesh::level(4).unwrap().h(), 7.8125e-3);
    }

    #[test]
    fn smallest_mesh() {
        let m = TriMesh::uniform(1).unwrap();
        assert_eq!(m.num_nodes(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_abs_diff_eq!(m.areas().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_eq!(m.boundary_nodes(), &[0, 1, 2, 3]);
    }

    #[test]
    fn rejects_zero() {
        assert!(matches!(TriMesh::uniform(0), Err(Error::EmptyMesh)));
        assert!(TriMesh::level(0).is_err());
    }

    #[test]
    fn geometry_invariants() {
        let m = TriMesh::uniform(7).unwrap();
        let mut total = 0.0;
        for t in 0..m.num_triangles() {
            let (area, g) = m.element_geometry(t);
            assert!(area > 0.0);
            total += area;
            let s = g[0] + g[1] + g[2];
            assert!(s.x.abs() < 1e-12 && s.y.abs() < 1e-12);
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        // interior nodes: (n-1)^2
        assert_eq!(m.boundary_nodes().len(), m.num_nodes() - 36);
    }

    #[test]
    fn reference_triangles() {
        let (a, g) = element_geometry([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_abs_diff_eq!(a, 0.5);
        assert_eq!(g, [Vec2::new(-1.0, -1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]);

        // Oracle: solve for the nodal basis coefficients c0 + c1 x + c2 y directly.
        let x = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]];
        let vander = nalgebra::Matrix3::from_fn(|r, c| if c == 0 { 1.0 } else { x[r][c - 1] });
        let coeffs = vander.try_inverse().unwrap();
        let (a, g) = element_geometry(x);
        assert_abs_diff_eq!(a, 0.125);
        for i in 0..3 {
            assert_abs_diff_eq!(g[i].x, coeffs[(1, i)], epsilon = 1e-14);
            assert_abs_diff_eq!(g[i].y, coeffs[(2, i)], epsilon = 1e-14);
        }
        assert_eq!(g, [Vec2::new(-2.0, -2.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0)]);
    }

    #[test]
    fn linear_functions_have_exact_gradients() {
        let m = TriMesh::uniform(9).unwrap();
        let u = m.interpolate(|x, y| 0.3 - 1.7 * x + 2.5 * y);
        for t in 0..m.num_triangles() {
            let g = m.gradient(t, &u);
            assert_abs_diff_eq!(g.x, -1.7, epsilon = 1e-13);
            assert_abs_diff_eq!(g.y, 2.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn triangles_are_counter_clockwise() {
        let m = TriMesh::uniform(4).unwrap();
        for t in 0..m.num_triangles() {
            let x = m.vertices(t);
            let det = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1])
                - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]);
            assert!(det > 0.0);
        }
    }
}
