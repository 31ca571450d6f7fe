//! Classical Ruge–Stüben algebraic multigrid.
//!
//! Setup: strength of connection over negative off-diagonals, the two-pass RS
//! C/F splitting, direct interpolation from strong coarse neighbours, Galerkin
//! coarse operators. Cycle: V(1,1) with a forward Gauss–Seidel pre-sweep and a
//! backward post-sweep, which makes the cycle a symmetric operator.

use std::collections::BinaryHeap;

use nalgebra::{Cholesky, Dyn};

use crate::krylov::{pcg, LinearOperator, SolveReport};
use crate::sparse::SparseOperator;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmgConfig {
    pub strength_threshold: f64,
    /// Stop coarsening once a level has at most this many unknowns.
    pub coarse_size: usize,
    pub max_levels: usize,
    /// Largest coarsest level factored densely; beyond it symmetric Gauss–Seidel
    /// sweeps stand in for the coarse solve.
    pub max_dense: usize,
    pub coarse_sweeps: usize,
}

impl Default for AmgConfig {
    fn default() -> Self {
        Self {
            strength_threshold: 0.25,
            coarse_size: 64,
            max_levels: 20,
            max_dense: 800,
            coarse_sweeps: 4,
        }
    }
}

#[derive(Debug, Clone)]
struct Level {
    a: SparseOperator,
    diag: Vec<f64>,
    /// Prolongation to this level from the next coarser one, and its transpose.
    transfer: Option<(SparseOperator, SparseOperator)>,
}

#[derive(Debug, Clone)]
enum CoarseSolver {
    Dense(Cholesky<f64, Dyn>),
    Sweeps(usize),
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    levels: Vec<Level>,
    coarse: CoarseSolver,
}

/// Builds a hierarchy with default settings and the given strength threshold.
pub fn amg_setup(s: &SparseOperator, strength_threshold: f64) -> Result<AmgHierarchy> {
    amg_setup_with(
        s,
        &AmgConfig {
            strength_threshold,
            ..AmgConfig::default()
        },
    )
}

pub fn amg_setup_with(s: &SparseOperator, cfg: &AmgConfig) -> Result<AmgHierarchy> {
    if s.nrows() != s.ncols() {
        return Err(Error::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    if !(cfg.strength_threshold > 0.0 && cfg.strength_threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "strength threshold must lie in (0,1), got {}",
            cfg.strength_threshold
        )));
    }
    let mut levels = Vec::new();
    let mut a = s.clone();
    loop {
        let diag = a.diagonal();
        if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::Factorization(format!(
                "non-positive diagonal entry {} at row {i} on level {}",
                diag[i],
                levels.len()
            )));
        }
        let n = a.nrows();
        if n <= cfg.coarse_size || levels.len() + 1 >= cfg.max_levels {
            levels.push(Level {
                a,
                diag,
                transfer: None,
            });
            break;
        }
        let strong = strength(&a, cfg.strength_threshold);
        let is_c = rs_splitting(&strong);
        let nc = is_c.iter().filter(|&&c| c).count();
        if nc == 0 || nc >= n {
            levels.push(Level {
                a,
                diag,
                transfer: None,
            });
            break;
        }
        let p = direct_interpolation(&a, &strong, &is_c);
        let r = p.transpose();
        let coarse = r.matmul(&a.matmul(&p)?)?;
        levels.push(Level {
            a,
            diag,
            transfer: Some((p, r)),
        });
        a = coarse;
    }

    let last = &levels.last().expect("at least one level").a;
    let coarse = if last.nrows() <= cfg.max_dense.max(cfg.coarse_size) {
        let dense = last.to_dense();
        let chol = Cholesky::new(dense).ok_or_else(|| {
            Error::Factorization(format!("coarsest operator of size {} is not positive definite", last.nrows()))
        })?;
        CoarseSolver::Dense(chol)
    } else {
        CoarseSolver::Sweeps(cfg.coarse_sweeps.max(1))
    };
    Ok(AmgHierarchy { levels, coarse })
}

/// Strong connections of each row: `j` with `−a_ij ≥ θ · max_k(−a_ik)` over
/// negative off-diagonals. Returned as a list per row.
fn strength(a: &SparseOperator, theta: f64) -> Vec<Vec<usize>> {
    (0..a.nrows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            let m = cols
                .iter()
                .zip(vals)
                .filter(|(&j, _)| j != i)
                .fold(0.0f64, |m, (_, &v)| m.max(-v));
            if m <= 0.0 {
                return Vec::new();
            }
            cols.iter()
                .zip(vals)
                .filter(|(&j, &v)| j != i && -v >= theta * m)
                .map(|(&j, _)| j)
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Undecided,
    Coarse,
    Fine,
}

/// Two-pass Ruge–Stüben C/F splitting; `true` marks a coarse point.
fn rs_splitting(strong: &[Vec<usize>]) -> Vec<bool> {
    let n = strong.len();
    // influence[j] = points that strongly depend on j
    let mut influence: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, s) in strong.iter().enumerate() {
        for &j in s {
            influence[j].push(i);
        }
    }
    let mut mark = vec![Mark::Undecided; n];
    let mut lambda: Vec<usize> = influence.iter().map(Vec::len).collect();
    for i in 0..n {
        if strong[i].is_empty() && influence[i].is_empty() {
            mark[i] = Mark::Fine;
        }
    }
    let mut heap: BinaryHeap<(usize, std::cmp::Reverse<usize>)> = (0..n)
        .filter(|&i| mark[i] == Mark::Undecided)
        .map(|i| (lambda[i], std::cmp::Reverse(i)))
        .collect();
    while let Some((lam, std::cmp::Reverse(i))) = heap.pop() {
        if mark[i] != Mark::Undecided || lam != lambda[i] {
            continue;
        }
        mark[i] = Mark::Coarse;
        for &j in &influence[i] {
            if mark[j] != Mark::Undecided {
                continue;
            }
            mark[j] = Mark::Fine;
            for &k in &strong[j] {
                if mark[k] == Mark::Undecided {
                    lambda[k] += 1;
                    heap.push((lambda[k], std::cmp::Reverse(k)));
                }
            }
        }
        for &k in &strong[i] {
            if mark[k] == Mark::Undecided && lambda[k] > 0 {
                lambda[k] -= 1;
                heap.push((lambda[k], std::cmp::Reverse(k)));
            }
        }
    }

    // second pass: strongly coupled F–F pairs need a common strong C point
    for i in 0..n {
        if mark[i] != Mark::Fine {
            continue;
        }
        for idx in 0..strong[i].len() {
            let j = strong[i][idx];
            if mark[j] != Mark::Fine {
                continue;
            }
            let shared = strong[i]
                .iter()
                .any(|&k| mark[k] == Mark::Coarse && strong[j].contains(&k));
            if !shared {
                mark[j] = Mark::Coarse;
            }
        }
    }
    mark.into_iter().map(|m| m == Mark::Coarse).collect()
}

/// Direct interpolation. Positive off-diagonals are lumped into the diagonal.
fn direct_interpolation(a: &SparseOperator, strong: &[Vec<usize>], is_c: &[bool]) -> SparseOperator {
    let n = a.nrows();
    let mut coarse_index = vec![usize::MAX; n];
    let mut nc = 0;
    for i in 0..n {
        if is_c[i] {
            coarse_index[i] = nc;
            nc += 1;
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for i in 0..n {
        if is_c[i] {
            col_idx.push(coarse_index[i]);
            values.push(1.0);
        } else {
            let (cols, vals) = a.row(i);
            let mut diag = 0.0;
            let mut neg_all = 0.0;
            let mut neg_c = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    diag += v;
                } else if v > 0.0 {
                    diag += v;
                } else {
                    neg_all += v;
                    if is_c[j] && strong[i].contains(&j) {
                        neg_c += v;
                    }
                }
            }
            if neg_c < 0.0 {
                let scale = neg_all / neg_c;
                let mut entries: Vec<(usize, f64)> = cols
                    .iter()
                    .zip(vals)
                    .filter(|(&j, &v)| j != i && v < 0.0 && is_c[j] && strong[i].contains(&j))
                    .map(|(&j, &v)| (coarse_index[j], -scale * v / diag))
                    .collect();
                entries.sort_by_key(|e| e.0);
                for (j, w) in entries {
                    col_idx.push(j);
                    values.push(w);
                }
            }
        }
        row_ptr.push(col_idx.len());
    }
    SparseOperator::from_csr(n, nc, row_ptr, col_idx, values)
}

fn gauss_seidel(a: &SparseOperator, diag: &[f64], b: &[f64], x: &mut [f64], forward: bool) {
    let n = a.nrows();
    let mut sweep = |i: usize| {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i {
                s -= v * x[j];
            }
        }
        x[i] = s / diag[i];
    };
    if forward {
        (0..n).for_each(&mut sweep);
    } else {
        (0..n).rev().for_each(&mut sweep);
    }
}

impl AmgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).collect()
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.levels[0].a
    }

    pub fn level_operator(&self, l: usize) -> &SparseOperator {
        &self.levels[l].a
    }

    /// Prolongation from level `l + 1` to level `l`.
    pub fn prolongation(&self, l: usize) -> Option<&SparseOperator> {
        self.levels[l].transfer.as_ref().map(|t| &t.0)
    }

    pub fn has_dense_coarse_solve(&self) -> bool {
        matches!(self.coarse, CoarseSolver::Dense(_))
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let level = &self.levels[l];
        match &level.transfer {
            None => match &self.coarse {
                CoarseSolver::Dense(chol) => {
                    let sol = chol.solve(&nalgebra::DVector::from_column_slice(b));
                    x.copy_from_slice(sol.as_slice());
                }
                CoarseSolver::Sweeps(k) => {
                    for _ in 0..*k {
                        gauss_seidel(&level.a, &level.diag, b, x, true);
                        gauss_seidel(&level.a, &level.diag, b, x, false);
                    }
                }
            },
            Some((p, r)) => {
                gauss_seidel(&level.a, &level.diag, b, x, true);
                let mut res = level.a.mul_vec(x);
                res.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
                let rc = r.mul_vec(&res);
                let mut ec = vec![0.0; rc.len()];
                self.cycle(l + 1, &rc, &mut ec);
                p.mul_vec_add(&ec, x);
                gauss_seidel(&level.a, &level.diag, b, x, false);
            }
        }
    }
}

/// One V(1,1) cycle for `S x = rhs` starting from `x0`.
pub fn amg_vcycle(hier: &AmgHierarchy, rhs: &[f64], x0: &[f64]) -> Vec<f64> {
    let mut x = x0.to_vec();
    hier.cycle(0, rhs, &mut x);
    x
}

/// A single V-cycle from a zero guess, viewed as a linear operator.
#[derive(Debug, Clone, Copy)]
pub struct VCycle<'a>(pub &'a AmgHierarchy);

impl LinearOperator for VCycle<'_> {
    fn dim(&self) -> usize {
        self.0.operator().nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.0.cycle(0, x, y);
    }
}

/// PCG on the finest operator preconditioned by one V-cycle, from a zero guess.
pub fn inexact_middle_solve(hier: &AmgHierarchy, rhs: &[f64], tol: f64, maxit: usize) -> Result<(Vec<f64>, SolveReport)> {
    pcg(hier.operator(), &VCycle(hier), rhs, tol, maxit)
}
