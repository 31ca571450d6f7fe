//! Outer Newton and Picard iterations.
//!
//! Each step linearizes at the current `p`, solves `A_h(p^n) δ = b^n` by
//! preconditioned MINRES from a zero guess and updates `x ← x + θ δ`. Newton picks
//! `θ` by backtracking on the residual norm; Picard always takes `θ = 1`.

use crate::assembly::{build_block_field, newton_rhs, Discretization, Layout, Method, SaddleOperator, State};
use crate::krylov::minres;
use crate::local_ops::beta_norm;
use crate::mesh::TriMesh;
use crate::precond::{BlockPreconditioner, PrecondMode};
use crate::{Beta, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub alpha: f64,
    pub beta: f64,
    pub method: Method,
    pub precond_mode: PrecondMode,
    pub nl_tol: f64,
    pub nl_maxit: usize,
    pub minres_tol: f64,
    pub minres_maxit: usize,
    pub sigma: f64,
    pub damping: bool,
    pub max_backtracks: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            method: Method::Newton,
            precond_mode: PrecondMode::Exact,
            nl_tol: 1e-6,
            nl_maxit: 200,
            minres_tol: 1e-10,
            minres_maxit: 200,
            sigma: 1e-4,
            damping: true,
            max_backtracks: 30,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn new(alpha: f64, beta: f64, method: Method) -> Self {
        Self {
            alpha,
            beta,
            method,
            ..Self::default()
        }
    }

    /// Checks the parameter ranges and returns the guarded `β`.
    pub fn validate(&self) -> Result<Beta> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        for (name, v) in [("nl_tol", self.nl_tol), ("minres_tol", self.minres_tol), ("sigma", self.sigma)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0,1), got {v}")));
            }
        }
        for (name, v) in [("nl_maxit", self.nl_maxit), ("minres_maxit", self.minres_maxit), ("max_backtracks", self.max_backtracks)] {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        Beta::new(self.beta)
    }
}

/// One outer step.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// `‖b^n‖₂` before the step.
    pub residual: f64,
    pub minres_iterations: usize,
    pub minres_converged: bool,
    /// MINRES relative residuals, starting at 1.
    pub minres_history: Vec<f64>,
    pub theta: f64,
    pub line_search_failed: bool,
    /// Inner PCG iterations spent in the middle block over this step.
    pub inner_iterations: usize,
    pub preconditioner_applications: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NonlinearReport {
    pub outer_iterations: usize,
    /// `‖b^n‖₂` for `n = 0, …, outer_iterations`.
    pub residuals: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl NonlinearReport {
    pub fn average_minres(&self) -> f64 {
        if self.iterations.is_empty() {
            return 0.0;
        }
        self.iterations.iter().map(|r| r.minres_iterations as f64).sum::<f64>() / self.iterations.len() as f64
    }

    /// Final residual relative to the initial one.
    pub fn relative_residual(&self) -> f64 {
        match (self.residuals.first(), self.residuals.last()) {
            (Some(&r0), Some(&r)) if r0 > 0.0 => r / r0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub theta: f64,
    pub state: State,
    pub residual: f64,
    pub evaluations: usize,
    pub failed: bool,
}

/// Backtracking on `θ ∈ {1, 1/2, 1/4, …}` until
/// `‖b(x + θ d)‖ ≤ (1 − σθ) ‖b(x)‖`, with at most `max_backtracks` halvings. On
/// exhaustion the smallest trial step is returned with `failed` set.
pub fn line_search<F>(
    mut residual_norm: F,
    current: &State,
    current_residual: f64,
    direction: &State,
    sigma: f64,
    max_backtracks: usize,
) -> Result<LineSearchResult>
where
    F: FnMut(&State) -> Result<f64>,
{
    let mut theta = 1.0;
    let mut evaluations = 0;
    loop {
        let trial = current.axpy(theta, direction);
        let r = residual_norm(&trial)?;
        evaluations += 1;
        let ok = r <= (1.0 - sigma * theta) * current_residual;
        if ok || evaluations > max_backtracks {
            return Ok(LineSearchResult {
                theta,
                state: trial,
                residual: r,
                evaluations,
                failed: !ok,
            });
        }
        theta *= 0.5;
    }
}

/// Runs the outer iteration from `init`.
pub fn nonlinear_solve(mesh: &TriMesh, disc: &Discretization, config: &SolveConfig, init: State) -> Result<(State, NonlinearReport)> {
    let beta = config.validate()?;
    let layout = Layout::of(mesh);
    if init.layout() != layout {
        return Err(Error::DimensionMismatch {
            expected: layout.len(),
            actual: init.as_slice().len(),
        });
    }
    let alpha = config.alpha;
    let rhs = |s: &State| newton_rhs(mesh, disc, s, alpha, beta);

    let mut state = init;
    let mut b = rhs(&state)?;
    let b0 = b.norm2();
    let mut report = NonlinearReport {
        residuals: vec![b0],
        ..NonlinearReport::default()
    };
    if b0 == 0.0 {
        report.converged = true;
        return Ok((state, report));
    }

    let mut bn = b0;
    for _ in 0..config.nl_maxit {
        if bn <= config.nl_tol * b0 {
            break;
        }
        let field = build_block_field(&state.p_field(), beta, config.method);
        let a = SaddleOperator::new(mesh, &disc.mass, &field, alpha);
        let pre = BlockPreconditioner::from_field(mesh, &field, alpha, config.precond_mode)?;
        let (dx, lin) = minres(&a, &pre, b.as_slice(), config.minres_tol, config.minres_maxit)?;
        let direction = State::from_vec(layout, dx)?;

        let mut record = IterationRecord {
            residual: bn,
            minres_iterations: lin.iterations,
            minres_converged: lin.converged,
            minres_history: lin.relative_residuals.clone(),
            theta: 1.0,
            line_search_failed: false,
            inner_iterations: pre.stats().inner_iterations(),
            preconditioner_applications: pre.stats().applications(),
        };
        if pre.stats().unconverged() > 0 {
            report.warnings.push(format!(
                "step {}: {} middle-block solves stopped at the iteration cap",
                report.outer_iterations + 1,
                pre.stats().unconverged()
            ));
        }
        if !lin.converged {
            report.warnings.push(format!(
                "step {}: MINRES stopped at relative residual {:.3e}",
                report.outer_iterations + 1,
                lin.final_residual
            ));
        }

        if config.method == Method::Newton && config.damping {
            let ls = line_search(|s| Ok(rhs(s)?.norm2()), &state, bn, &direction, config.sigma, config.max_backtracks)?;
            record.theta = ls.theta;
            record.line_search_failed = ls.failed;
            if ls.failed {
                report.warnings.push(format!(
                    "step {}: line search exhausted, accepted θ = {:e}",
                    report.outer_iterations + 1,
                    ls.theta
                ));
            }
            state = ls.state;
        } else {
            state = state.axpy(1.0, &direction);
        }
        b = rhs(&state)?;
        bn = b.norm2();
        if !bn.is_finite() {
            return Err(Error::Breakdown(format!(
                "residual became non-finite at outer step {}",
                report.outer_iterations + 1
            )));
        }
        report.iterations.push(record);
        report.residuals.push(bn);
        report.outer_iterations += 1;
    }
    report.converged = bn <= config.nl_tol * b0;
    Ok((state, report))
}

/// Starting point of the outer iteration.
#[derive(Clone, Copy)]
pub enum InitialGuess<'a> {
    Zero,
    /// Nodal values `u⁰ = I_h f` with `p = ∇u⁰` and `λ = α p / |p|_β` per triangle.
    Interpolant(&'a [f64]),
    /// The given number of Picard steps from the interpolant.
    PicardWarmstart(&'a [f64], usize),
}

pub fn initial_state(mesh: &TriMesh, strategy: InitialGuess<'_>, disc: &Discretization, config: &SolveConfig) -> Result<State> {
    let beta = config.validate()?;
    let layout = Layout::of(mesh);
    match strategy {
        InitialGuess::Zero => Ok(State::zeros(layout)),
        InitialGuess::Interpolant(f) => {
            if f.len() != layout.nodes {
                return Err(Error::DimensionMismatch {
                    expected: layout.nodes,
                    actual: f.len(),
                });
            }
            let mut s = State::zeros(layout);
            s.u_mut().copy_from_slice(f);
            for t in 0..mesh.num_triangles() {
                let p = mesh.gradient(t, s.u());
                s.set_p(t, p);
                s.set_lam(t, p * (config.alpha / beta_norm(p, beta)));
            }
            Ok(s)
        }
        InitialGuess::PicardWarmstart(f, steps) => {
            let start = initial_state(mesh, InitialGuess::Interpolant(f), disc, config)?;
            if steps == 0 {
                return Ok(start);
            }
            let picard = SolveConfig {
                method: Method::Picard,
                nl_maxit: steps,
                ..*config
            };
            Ok(nonlinear_solve(mesh, disc, &picard, start)?.0)
        }
    }
}
