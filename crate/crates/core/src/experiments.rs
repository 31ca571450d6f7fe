//! Benchmark problems and the sweeps that produce convergence and iteration tables.
//!
//! - Smooth problem: `u = cos πx cos πy` with the matching `p` and `λ`.
//! - Disk problem: `f` is the indicator of the disk of radius 1/3 about the centre;
//!   for `α = 0.02` the exact minimizer is piecewise constant.
//! - Noisy ℓ_p ball: the indicator of an ℓ_p ball plus `δ ξ_h`, with `ξ_h` a P1
//!   function whose nodal values are standard normal draws.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::assembly::{
    error_norms, load_from_weak_form, load_vector, p1_l2_error, Discretization, ErrorNorms, ExactSolution, Layout, Method, State,
};
use crate::local_ops::beta_norm;
use crate::mesh::TriMesh;
use crate::nonlinear::{initial_state, nonlinear_solve, InitialGuess, NonlinearReport, SolveConfig};
use crate::par::{self, Execution};
use crate::precond::PrecondMode;
use crate::quadrature::TriangleRule;
use crate::{Beta, Error, Result, Vec2};

/// Centre of the unit square.
pub const CENTER: [f64; 2] = [0.5, 0.5];
/// Radius of the disk and ℓ_p-ball data.
pub const RADIUS: f64 = 1.0 / 3.0;
/// Sub-triangles per edge used to integrate discontinuous data.
pub const DISCONTINUOUS_SPLIT: usize = 8;

/// `(u, p, λ)` of the smooth problem at `(x, y)`.
pub fn example1_exact(x: f64, y: f64, alpha: f64, beta: Beta) -> (f64, Vec2, Vec2) {
    let (sx, cx) = (PI * x).sin_cos();
    let (sy, cy) = (PI * y).sin_cos();
    let p = Vec2::new(-PI * sx * cy, -PI * cx * sy);
    let lam = p * (alpha / beta_norm(p, beta));
    (cx * cy, p, lam)
}

/// Manufactured smooth solution for given `α`, `β`.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedSolution {
    pub alpha: f64,
    pub beta: Beta,
}

impl ManufacturedSolution {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self {
            alpha,
            beta: Beta::new(beta)?,
        })
    }
}

impl ExactSolution for ManufacturedSolution {
    fn u(&self, x: f64, y: f64) -> f64 {
        (PI * x).cos() * (PI * y).cos()
    }
    fn grad_u(&self, x: f64, y: f64) -> Vec2 {
        example1_exact(x, y, self.alpha, self.beta).1
    }
    fn p(&self, x: f64, y: f64) -> Vec2 {
        example1_exact(x, y, self.alpha, self.beta).1
    }
    fn lam(&self, x: f64, y: f64) -> Vec2 {
        example1_exact(x, y, self.alpha, self.beta).2
    }
}

/// Exact minimizer for the disk data of radius 1/3. Points on the circle count as
/// inside.
pub fn example2_exact(x: f64, y: f64, alpha: f64) -> f64 {
    let r = RADIUS;
    let d = (x - CENTER[0]).hypot(y - CENTER[1]);
    if d <= r {
        1.0 - 2.0 * alpha / r
    } else {
        2.0 * PI * r * alpha / (1.0 - PI * r * r)
    }
}

/// Norm index of the ℓ_p ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PIndex {
    One,
    #[default]
    Two,
    Inf,
}

impl PIndex {
    pub const ALL: [PIndex; 3] = [PIndex::One, PIndex::Two, PIndex::Inf];

    pub fn distance(self, dx: f64, dy: f64) -> f64 {
        match self {
            PIndex::One => dx.abs() + dy.abs(),
            PIndex::Two => dx.hypot(dy),
            PIndex::Inf => dx.abs().max(dy.abs()),
        }
    }
}

impl fmt::Display for PIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PIndex::One => "1",
            PIndex::Two => "2",
            PIndex::Inf => "inf",
        })
    }
}

impl FromStr for PIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(PIndex::One),
            "2" => Ok(PIndex::Two),
            "inf" | "infinity" => Ok(PIndex::Inf),
            other => Err(Error::InvalidParameter(format!("p-index must be 1, 2 or inf, got {other:?}"))),
        }
    }
}

/// 1 inside the open ℓ_p ball, 0 elsewhere.
pub fn characteristic_lp_ball(x: f64, y: f64, p: PIndex, r: f64, center: [f64; 2]) -> f64 {
    // Points within rounding of the boundary count as on it, hence outside.
    if p.distance(x - center[0], y - center[1]) < r * (1.0 - 4.0 * f64::EPSILON) {
        1.0
    } else {
        0.0
    }
}

/// Standard normal value per node, drawn in node order from ChaCha8 seeded with
/// `seed`.
pub fn sample_noise(mesh: &TriMesh, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..mesh.num_nodes()).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Indicator data of an ℓ_p ball with optional P1 noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkProblem {
    pub alpha: f64,
    pub beta: f64,
    pub p_index: PIndex,
    pub radius: f64,
    pub center: [f64; 2],
    pub noise: f64,
    pub seed: u64,
}

impl BenchmarkProblem {
    /// Noisy ball with `α = 5e-2`, `β = 1e-3`, `δ = 0.1`.
    pub fn noisy_ball(p_index: PIndex, seed: u64) -> Self {
        Self {
            alpha: 5e-2,
            beta: 1e-3,
            p_index,
            radius: RADIUS,
            center: CENTER,
            noise: 0.1,
            seed,
        }
    }

    /// Noise-free disk with `α = 0.02`, `β = 1e-5`.
    pub fn disk() -> Self {
        Self {
            alpha: 0.02,
            beta: 1e-5,
            p_index: PIndex::Two,
            radius: RADIUS,
            center: CENTER,
            noise: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise amplitude must be non-negative, got {}", self.noise)));
        }
        Ok(())
    }

    /// Noise-free part `f₀`.
    pub fn f0(&self, x: f64, y: f64) -> f64 {
        characteristic_lp_ball(x, y, self.p_index, self.radius, self.center)
    }

    /// Nodal values of `f₀ + δ ξ_h`.
    pub fn nodal_data(&self, mesh: &TriMesh) -> Vec<f64> {
        let mut f = mesh.interpolate(|x, y| self.f0(x, y));
        if self.noise > 0.0 {
            for (fi, xi) in f.iter_mut().zip(sample_noise(mesh, self.seed)) {
                *fi += self.noise * xi;
            }
        }
        f
    }

    /// `⟨f₀ + δ ξ_h, φ_i⟩`, the indicator integrated on subdivided triangles.
    pub fn discretize(&self, mesh: &TriMesh) -> Result<Discretization> {
        self.validate()?;
        let load = load_vector(mesh, &|x, y| self.f0(x, y), &TriangleRule::subdivided(DISCONTINUOUS_SPLIT));
        let mut disc = Discretization::new(mesh, load)?;
        if self.noise > 0.0 {
            let mxi = disc.mass.mul_vec(&sample_noise(mesh, self.seed));
            for (l, m) in disc.load.iter_mut().zip(mxi) {
                *l += self.noise * m;
            }
        }
        Ok(disc)
    }
}

/// `log(e_{k−1}/e_k) / log(h_{k−1}/h_k)`; the first entry is `None`.
pub fn observed_orders(h: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|k| (k > 0).then(|| (errors[k - 1] / errors[k]).ln() / (h[k - 1] / h[k]).ln()))
        .collect()
}

/// Summary of one nonlinear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub outer: usize,
    pub avg_minres: f64,
    pub converged: bool,
    pub min_theta: f64,
    pub relative_residual: f64,
}

impl SolveSummary {
    pub fn of(report: &NonlinearReport) -> Self {
        Self {
            outer: report.outer_iterations,
            avg_minres: report.average_minres(),
            converged: report.converged,
            min_theta: report.iterations.iter().map(|r| r.theta).fold(1.0, f64::min),
            relative_residual: report.relative_residual(),
        }
    }

    /// `N_outer(N_MINRES)` with the MINRES average rounded.
    pub fn cell(&self) -> String {
        let mark = if self.converged { "" } else { "*" };
        format!("{}({}){mark}", self.outer, self.avg_minres.round() as usize)
    }
}

fn check_levels(levels: &[u32]) -> Result<()> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("levels must be non-empty and ascending, got {levels:?}")));
    }
    Ok(())
}

/// Solves the smooth problem on `mesh` from a zero guess.
pub fn solve_example1(mesh: &TriMesh, config: &SolveConfig) -> Result<(State, NonlinearReport)> {
    let exact = ManufacturedSolution::new(config.alpha, config.beta)?;
    let load = load_from_weak_form(mesh, &exact, &TriangleRule::degree4());
    let disc = Discretization::new(mesh, load)?;
    nonlinear_solve(mesh, &disc, config, State::zeros(Layout::of(mesh)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Subdivisions per side.
    pub n: usize,
    pub h: f64,
    pub errors: ErrorNorms,
    /// Orders of `(p, λ, u in H¹, u in L²)`.
    pub orders: [Option<f64>; 4],
    pub solve: SolveSummary,
    pub report: NonlinearReport,
}

/// Errors and observed orders of the smooth problem on the given mesh levels.
pub fn run_convergence(levels: &[u32], config: &SolveConfig) -> Result<Vec<ConvergenceRow>> {
    check_levels(levels)?;
    run_convergence_on(&level_meshes(levels)?, config)
}

/// As [`run_convergence`] on explicit meshes, coarse to fine.
pub fn run_convergence_on(meshes: &[TriMesh], config: &SolveConfig) -> Result<Vec<ConvergenceRow>> {
    let exact = ManufacturedSolution::new(config.alpha, config.beta)?;
    let mut rows = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let (state, report) = solve_example1(mesh, config)?;
        let errors = error_norms(mesh, &state, &exact, &TriangleRule::degree4());
        rows.push(ConvergenceRow {
            n: mesh.subdivisions(),
            h: mesh.h(),
            errors,
            orders: [None; 4],
            solve: SolveSummary::of(&report),
            report,
        });
    }
    fill_orders(&mut rows);
    Ok(rows)
}

fn level_meshes(levels: &[u32]) -> Result<Vec<TriMesh>> {
    levels.iter().map(|&k| TriMesh::level(k)).collect()
}

/// Recomputes the order columns from the error columns.
pub fn fill_orders(rows: &mut [ConvergenceRow]) {
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let cols: [fn(&ErrorNorms) -> f64; 4] = [|e| e.p_l2, |e| e.lam_l2, |e| e.u_h1, |e| e.u_l2];
    for (c, get) in cols.iter().enumerate() {
        let e: Vec<f64> = rows.iter().map(|r| get(&r.errors)).collect();
        for (row, o) in rows.iter_mut().zip(observed_orders(&h, &e)) {
            row.orders[c] = o;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCell {
    pub alpha: f64,
    pub beta: f64,
    pub solve: Option<SolveSummary>,
    /// Set when the cell's solve failed outright.
    pub failure: Option<String>,
}

impl RobustnessCell {
    pub fn converged(&self) -> bool {
        self.solve.as_ref().is_some_and(|s| s.converged)
    }
}

/// Smooth problem over an `α × β` grid on one mesh level. Cells are ordered
/// `β`-major, matching the table layout (rows `β`, columns `α`).
pub fn run_robustness(alphas: &[f64], betas: &[f64], level: u32, template: &SolveConfig) -> Result<Vec<RobustnessCell>> {
    run_robustness_with(Execution::default(), alphas, betas, &TriMesh::level(level)?, template)
}

pub fn run_robustness_with(
    exec: Execution,
    alphas: &[f64],
    betas: &[f64],
    mesh: &TriMesh,
    template: &SolveConfig,
) -> Result<Vec<RobustnessCell>> {
    if alphas.is_empty() || betas.is_empty() {
        return Err(Error::InvalidParameter("parameter grids must be non-empty".into()));
    }
    let pairs: Vec<(f64, f64)> = betas.iter().flat_map(|&b| alphas.iter().map(move |&a| (a, b))).collect();
    Ok(par::map_slice(exec, &pairs, |&(alpha, beta)| {
        let config = SolveConfig { alpha, beta, ..*template };
        match solve_example1(mesh, &config) {
            Ok((_, report)) => RobustnessCell {
                alpha,
                beta,
                solve: Some(SolveSummary::of(&report)),
                failure: None,
            },
            Err(e) => RobustnessCell {
                alpha,
                beta,
                solve: None,
                failure: Some(e.to_string()),
            },
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskRow {
    /// Subdivisions per side.
    pub n: usize,
    pub h: f64,
    /// `‖u − u_h‖₀`.
    pub u_l2: f64,
    /// `‖u − I_h u‖₀`.
    pub interp_l2: f64,
    pub orders: [Option<f64>; 2],
    pub solve: SolveSummary,
    /// Damping parameter of every outer step.
    pub thetas: Vec<f64>,
    pub report: NonlinearReport,
}

/// Disk problem from the interpolant of the data on the given levels.
pub fn run_disk(levels: &[u32], config: &SolveConfig) -> Result<Vec<DiskRow>> {
    check_levels(levels)?;
    run_disk_on(&level_meshes(levels)?, config)
}

/// As [`run_disk`] on explicit meshes, coarse to fine.
pub fn run_disk_on(meshes: &[TriMesh], config: &SolveConfig) -> Result<Vec<DiskRow>> {
    let problem = BenchmarkProblem {
        alpha: config.alpha,
        beta: config.beta,
        ..BenchmarkProblem::disk()
    };
    let alpha = config.alpha;
    let exact = move |x: f64, y: f64| example2_exact(x, y, alpha);
    let rule = TriangleRule::subdivided(DISCONTINUOUS_SPLIT);
    let mut rows = Vec::new();
    for mesh in meshes {
        let disc = problem.discretize(mesh)?;
        let f = problem.nodal_data(mesh);
        let init = initial_state(mesh, InitialGuess::Interpolant(&f), &disc, config)?;
        let (state, report) = nonlinear_solve(mesh, &disc, config, init)?;
        let interp = mesh.interpolate(exact);
        rows.push(DiskRow {
            n: mesh.subdivisions(),
            h: mesh.h(),
            u_l2: p1_l2_error(mesh, state.u(), &exact, &rule),
            interp_l2: p1_l2_error(mesh, &interp, &exact, &rule),
            orders: [None; 2],
            solve: SolveSummary::of(&report),
            thetas: report.iterations.iter().map(|r| r.theta).collect(),
            report,
        });
    }
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.u_l2).collect();
    let ei: Vec<f64> = rows.iter().map(|r| r.interp_l2).collect();
    for ((row, a), b) in rows.iter_mut().zip(observed_orders(&h, &e)).zip(observed_orders(&h, &ei)) {
        row.orders = [a, b];
    }
    Ok(rows)
}

/// Nodal values on the `(n+1) × (n+1)` grid, row-major from the top row `y = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl ImageGrid {
    pub fn from_nodal(mesh: &TriMesh, u: &[f64]) -> Self {
        let m = mesh.subdivisions() + 1;
        let mut data = Vec::with_capacity(m * m);
        for row in 0..m {
            let j = m - 1 - row;
            data.extend_from_slice(&u[j * m..(j + 1) * m]);
        }
        Self {
            width: m,
            height: m,
            data,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub state: State,
    pub report: NonlinearReport,
    /// Picard steps used to start Newton.
    pub warm_start: Option<NonlinearReport>,
    pub noisy: ImageGrid,
    pub denoised: ImageGrid,
}

/// Picard steps that start the Newton iteration on the ℓ_p-ball problem.
pub const WARM_START_STEPS: usize = 5;

/// Solves the ℓ_p-ball problem. Picard starts from the interpolant of the data;
/// Newton from [`WARM_START_STEPS`] Picard steps, which are reported separately.
pub fn run_denoise(problem: &BenchmarkProblem, level: u32, config: &SolveConfig) -> Result<DenoiseOutcome> {
    let mesh = TriMesh::level(level)?;
    run_denoise_on(problem, &mesh, config)
}

pub fn run_denoise_on(problem: &BenchmarkProblem, mesh: &TriMesh, config: &SolveConfig) -> Result<DenoiseOutcome> {
    let config = SolveConfig {
        alpha: problem.alpha,
        beta: problem.beta,
        ..*config
    };
    let disc = problem.discretize(mesh)?;
    let f = problem.nodal_data(mesh);
    let start = initial_state(mesh, InitialGuess::Interpolant(&f), &disc, &config)?;
    let (init, warm_start) = match config.method {
        Method::Picard => (start, None),
        Method::Newton => {
            let picard = SolveConfig {
                method: Method::Picard,
                nl_maxit: WARM_START_STEPS,
                ..config
            };
            let (s, r) = nonlinear_solve(mesh, &disc, &picard, start)?;
            (s, Some(r))
        }
    };
    let (state, report) = nonlinear_solve(mesh, &disc, &config, init)?;
    Ok(DenoiseOutcome {
        noisy: ImageGrid::from_nodal(mesh, &f),
        denoised: ImageGrid::from_nodal(mesh, state.u()),
        state,
        report,
        warm_start,
    })
}

/// Default sweep values.
pub const ALPHA_GRID: [f64; 5] = [1e5, 1e3, 1.0, 1e-3, 1e-5];
pub const BETA_GRID: [f64; 3] = [1.0, 1e-3, 1e-5];

/// The configuration used throughout the noisy-ball runs.
pub fn denoise_config(method: Method) -> SolveConfig {
    SolveConfig {
        precond_mode: PrecondMode::Inexact,
        ..SolveConfig::new(5e-2, 1e-3, method)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn example1_points() {
        let b1 = Beta::new(1.0).unwrap();
        let (u, p, l) = example1_exact(0.5, 0.5, 1.0, b1);
        assert_abs_diff_eq!(u, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.norm(), 0.0, epsilon = 1e-15);
        let (u, p, _) = example1_exact(0.0, 0.0, 1.0, b1);
        assert_eq!(u, 1.0);
        assert_abs_diff_eq!(p.norm(), 0.0, epsilon = 1e-15);
        let (u, p, l) = example1_exact(0.25, 0.0, 1.0, b1);
        let px = -PI * (PI / 4.0).sin();
        assert_abs_diff_eq!(u, (PI / 4.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.x, px, epsilon = 1e-14);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.x, px / (px * px + 1.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(l.x, -0.9118, epsilon = 1e-4);
    }

    #[test]
    fn example2_values() {
        assert_abs_diff_eq!(example2_exact(0.5, 0.5, 0.02), 0.88, epsilon = 1e-12);
        let outside = 2.0 * PI * (1.0 / 3.0) * 0.02 / (1.0 - PI / 9.0);
        assert_abs_diff_eq!(example2_exact(0.05, 0.05, 0.02), outside, epsilon = 1e-14);
        assert_abs_diff_eq!(outside, 0.0645, epsilon = 1e-3);
        assert_abs_diff_eq!(example2_exact(0.5 + RADIUS, 0.5, 0.02), 0.88, epsilon = 1e-12);
    }

    #[test]
    fn lp_balls() {
        for p in PIndex::ALL {
            assert_eq!(characteristic_lp_ball(0.5, 0.5, p, RADIUS, CENTER), 1.0);
            assert_eq!(p.to_string().parse::<PIndex>().unwrap(), p);
        }
        assert_eq!(characteristic_lp_ball(0.5 + 1.0 / 3.0, 0.5, PIndex::Two, 1.0 / 3.0, CENTER), 0.0);
        assert_eq!(characteristic_lp_ball(0.7, 0.7, PIndex::One, 1.0 / 3.0, CENTER), 0.0);
        assert_eq!(characteristic_lp_ball(0.7, 0.7, PIndex::Inf, 1.0 / 3.0, CENTER), 1.0);
        assert!("3".parse::<PIndex>().is_err());
    }

    #[test]
    fn noise_statistics() {
        let mesh = TriMesh::level(4).unwrap();
        let a = sample_noise(&mesh, 7);
        assert_eq!(a, sample_noise(&mesh, 7));
        let n = a.len() as f64;
        let mean = a.iter().sum::<f64>() / n;
        let var = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.05 && (var - 1.0).abs() < 0.1);
        let b = sample_noise(&mesh, 8);
        let differ = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        assert!(differ as f64 >= 0.99 * n);
    }

    #[test]
    fn orders() {
        let h = [0.1, 0.05, 0.025];
        let e = [1.0, 0.25, 0.0625];
        let o = observed_orders(&h, &e);
        assert_eq!(o[0], None);
        assert_abs_diff_eq!(o[1].unwrap(), 2.0, epsilon = 1e-14);
        let scaled: Vec<f64> = e.iter().map(|v| v * 37.0).collect();
        assert_eq!(observed_orders(&h, &scaled)[2], o[2]);
        assert_eq!(observed_orders(&h[..1], &e[..1]), vec![None]);
    }

    #[test]
    fn image_grid_orientation() {
        let mesh = TriMesh::uniform(2).unwrap();
        let u = mesh.interpolate(|_, y| y);
        let g = ImageGrid::from_nodal(&mesh, &u);
        assert_eq!((g.width, g.height), (3, 3));
        assert_eq!(&g.data[..3], &[1.0, 1.0, 1.0]);
        assert_eq!(&g.data[6..], &[0.0, 0.0, 0.0]);
        assert_eq!(g.range(), (0.0, 1.0));
    }

    #[test]
    fn levels_must_ascend() {
        let cfg = SolveConfig::default();
        assert!(run_convergence(&[], &cfg).is_err());
        assert!(run_convergence(&[2, 1], &cfg).is_err());
        assert!(run_robustness(&[], &[1.0], 1, &cfg).is_err());
    }
}
