//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Runs the full mesh sequence up to 128 subdivisions, so expect several minutes in
//! an optimized build.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rofnk::assembly::Method;
use rofnk::experiments::{
    denoise_config, run_convergence, run_denoise, run_disk, run_robustness, BenchmarkProblem, ConvergenceRow, PIndex,
    SolveSummary, ALPHA_GRID, BETA_GRID,
};
use rofnk::invariants;
use rofnk::nonlinear::SolveConfig;
use rofnk::output::pgm_bytes;
use rofnk::precond::PrecondMode;

const LEVELS: [u32; 4] = [1, 2, 3, 4];

// Criterion 1.
const FIRST_ORDER: (f64, f64) = (0.9, 1.1);
const SECOND_ORDER: (f64, f64) = (1.8, 2.1);
const MAGNITUDE_TOL: f64 = 0.20;
/// Reference errors `(p, λ, |u|₁, ‖u‖₀)` per level.
const REFERENCE_ERRORS: [[f64; 4]; 4] = [
    [2.17585e-01, 8.95410e-02, 2.17595e-01, 7.97886e-03],
    [1.08967e-01, 4.52978e-02, 1.08968e-01, 2.02665e-03],
    [5.45105e-02, 2.27351e-02, 5.45107e-02, 5.12786e-04],
    [2.72596e-02, 1.13809e-02, 2.72596e-02, 1.32618e-04],
];

// Criterion 2.
const NEWTON_OUTER: (usize, usize) = (4, 8);
const NEWTON_MINRES: (f64, f64) = (10.0, 40.0);
const MINRES_MESH_VARIATION: f64 = 0.30;

// Criterion 3.
const PICARD_FACTOR: usize = 3;

// Criterion 4.
const ROBUST_LEVEL: u32 = 3;
const ROBUST_MAX_MINRES: f64 = 60.0;
const INEXACT_FACTOR: f64 = 2.0;

// Criterion 5.
const DISK_ORDER: (f64, f64) = (0.3, 0.7);

// Criterion 6.
const DENOISE_LEVEL: u32 = 4;
const DENOISE_SEED: u64 = 0;

// Criterion 7.
const PROPERTY_BUDGET: Duration = Duration::from_secs(120);
const PROPERTY_SEED: u64 = 2024;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

fn smooth_newton_rows() -> &'static [ConvergenceRow] {
    static ROWS: OnceLock<Vec<ConvergenceRow>> = OnceLock::new();
    ROWS.get_or_init(|| run_convergence(&LEVELS, &SolveConfig::new(1.0, 1.0, Method::Newton)).expect("smooth Newton solves"))
}

fn convergence_orders() -> Outcome {
    let rows = smooth_newton_rows();
    let last = rows.last().expect("rows");
    let orders: Vec<f64> = last.orders.iter().map(|o| o.expect("order on a refined level")).collect();
    let orders_ok = orders[..3].iter().all(|&o| within(o, FIRST_ORDER)) && within(orders[3], SECOND_ORDER);
    let mut worst = 0.0f64;
    for (row, reference) in rows.iter().zip(REFERENCE_ERRORS) {
        let e = row.errors;
        for (got, want) in [e.p_l2, e.lam_l2, e.u_h1, e.u_l2].into_iter().zip(reference) {
            worst = worst.max((got - want).abs() / want);
        }
    }
    outcome(
        orders_ok && worst <= MAGNITUDE_TOL,
        format!(
            "last orders p {:.2}, lam {:.2}, u_H1 {:.2}, u_L2 {:.2}; max deviation from reference errors {:.1}% (limit {:.0}%)",
            orders[0],
            orders[1],
            orders[2],
            orders[3],
            100.0 * worst,
            100.0 * MAGNITUDE_TOL
        ),
    )
}

fn newton_counts() -> Outcome {
    let rows = smooth_newton_rows();
    let outer: Vec<usize> = rows.iter().map(|r| r.solve.outer).collect();
    let avg: Vec<f64> = rows.iter().map(|r| r.solve.avg_minres).collect();
    let lo = avg.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = avg.iter().copied().fold(0.0, f64::max);
    let variation = (hi - lo) / lo;
    let passed = rows.iter().all(|r| r.solve.converged)
        && outer.iter().all(|&n| (NEWTON_OUTER.0..=NEWTON_OUTER.1).contains(&n))
        && avg.iter().all(|&a| within(a, NEWTON_MINRES))
        && variation <= MINRES_MESH_VARIATION;
    let cells: Vec<String> = rows.iter().map(|r| r.solve.cell()).collect();
    outcome(passed, format!("T1..T4 outer(avg MINRES) {}; MINRES variation {:.1}%", cells.join(" "), 100.0 * variation))
}

fn newton_vs_picard() -> Outcome {
    let newton = &smooth_newton_rows()[3].solve;
    let picard = run_convergence(&[4], &SolveConfig::new(1.0, 1.0, Method::Picard)).expect("Picard solve");
    let picard = &picard[0].solve;
    outcome(
        newton.converged && picard.converged && picard.outer >= PICARD_FACTOR * newton.outer,
        format!("T4 Newton {}, Picard {}", newton.cell(), picard.cell()),
    )
}

fn parameter_robustness() -> Outcome {
    let exact_cfg = SolveConfig::new(1.0, 1.0, Method::Newton);
    let inexact_cfg = SolveConfig {
        precond_mode: PrecondMode::Inexact,
        ..exact_cfg
    };
    let exact = run_robustness(&ALPHA_GRID, &BETA_GRID, ROBUST_LEVEL, &exact_cfg).expect("grid");
    let inexact = run_robustness(&ALPHA_GRID, &BETA_GRID, ROBUST_LEVEL, &inexact_cfg).expect("grid");
    let mut failures = Vec::new();
    let mut worst_avg = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (e, i) in exact.iter().zip(&inexact) {
        match (&e.solve, &i.solve) {
            (Some(se), Some(si)) if e.converged() && i.converged() => {
                worst_avg = worst_avg.max(se.avg_minres).max(si.avg_minres);
                worst_ratio = worst_ratio.max(si.avg_minres / se.avg_minres);
            }
            _ => failures.push(format!("alpha={:e} beta={:e}", e.alpha, e.beta)),
        }
    }
    outcome(
        failures.is_empty() && worst_avg <= ROBUST_MAX_MINRES && worst_ratio <= INEXACT_FACTOR,
        format!(
            "15 cells x 2 preconditioners; max avg MINRES {worst_avg:.1} (limit {ROBUST_MAX_MINRES}); max inexact/exact {worst_ratio:.2} (limit {INEXACT_FACTOR}); unconverged: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join(", ") }
        ),
    )
}

fn disk_problem() -> Outcome {
    let rows = run_disk(&LEVELS, &SolveConfig::new(0.02, 1e-5, Method::Newton)).expect("disk solves");
    let errors: Vec<f64> = rows.iter().map(|r| r.u_l2).collect();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.orders[0]).collect();
    let min_theta = rows.iter().flat_map(|r| r.thetas.iter().copied()).fold(1.0, f64::min);
    let passed = rows.iter().all(|r| r.solve.converged)
        && decreasing
        && orders.iter().all(|&o| within(o, DISK_ORDER))
        && min_theta < 1.0;
    let errs: Vec<String> = errors.iter().map(|e| format!("{e:.4e}")).collect();
    let ords: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
    outcome(
        passed,
        format!("errors {}; orders {}; min theta {min_theta}", errs.join(" "), ords.join(" ")),
    )
}

fn denoised_pgm(p: PIndex, method: Method) -> (SolveSummary, Vec<u8>) {
    let problem = BenchmarkProblem::noisy_ball(p, DENOISE_SEED);
    let out = run_denoise(&problem, DENOISE_LEVEL, &denoise_config(method)).expect("denoise solve");
    (SolveSummary::of(&out.report), pgm_bytes(&out.denoised).expect("image"))
}

fn denoising() -> Outcome {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut passed = true;
    let mut cells = Vec::new();
    let mut newton_one = Vec::new();
    for p in PIndex::ALL {
        let (picard, _) = denoised_pgm(p, Method::Picard);
        let (newton, image) = denoised_pgm(p, Method::Newton);
        // An unconverged Picard run stopped at the cap, so its true count is at least that.
        passed &= newton.converged && newton.outer < picard.outer;
        let path = dir.path().join(format!("denoised_p{p}.pgm"));
        std::fs::write(&path, &image).expect("write image");
        passed &= std::fs::read(&path).expect("read image") == image;
        if p == PIndex::One {
            newton_one = image;
        }
        cells.push(format!("p={p}: Newton {} Picard {}", newton.cell(), picard.cell()));
    }
    let (_, again) = denoised_pgm(PIndex::One, Method::Newton);
    let reproducible = again == newton_one;
    outcome(
        passed && reproducible,
        format!("{}; rerun byte-identical: {reproducible}", cells.join("; ")),
    )
}

fn property_suite() -> Outcome {
    let start = Instant::now();
    let checks = invariants::run_all(PROPERTY_SEED).expect("property checks");
    let elapsed = start.elapsed();
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
    for c in &checks {
        println!("    {} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    outcome(
        failed.is_empty() && elapsed <= PROPERTY_BUDGET,
        format!(
            "{} checks in {:.1}s (budget {}s); failed: {}",
            checks.len(),
            elapsed.as_secs_f64(),
            PROPERTY_BUDGET.as_secs(),
            if failed.is_empty() { "none".to_string() } else { failed.join(", ") }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("convergence orders and error magnitudes", convergence_orders),
        ("Newton outer and MINRES counts", newton_counts),
        ("Newton versus Picard", newton_vs_picard),
        ("parameter robustness", parameter_robustness),
        ("disk problem", disk_problem),
        ("noisy l_p balls", denoising),
        ("property suite", property_suite),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        all &= o.passed;
        println!(
            "{} criterion {id} ({name}) [{:.0}s]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
