//! Command-line driver for the experiment suites.
//!
//! Every subcommand writes CSV tables (and PGM images for `denoise`) into `--out`
//! and prints a short summary. Exit codes: 0 on success, 1 when a solve did not
//! converge or an output could not be written, 2 on usage errors.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rofnk::assembly::Method;
use rofnk::experiments::{
    self, BenchmarkProblem, ConvergenceRow, DenoiseOutcome, DiskRow, PIndex, RobustnessCell, ALPHA_GRID, BETA_GRID,
};
use rofnk::nonlinear::{NonlinearReport, SolveConfig};
use rofnk::output::{write_csv, write_pgm, Cell, Table};
use rofnk::precond::PrecondMode;
use rofnk::{invariants, par, TriMesh};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "rofnk", version, about = "Primal-dual finite element experiments for the regularized ROF model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Errors and observed orders for the smooth manufactured solution.
    Convergence(RunArgs),
    /// Iteration counts over a grid of alpha and beta values on one mesh.
    Robustness(RunArgs),
    /// Errors for the disk indicator with its closed-form solution.
    Disk(RunArgs),
    /// Denoising of a noisy l_p ball; writes the noisy and denoised images.
    Denoise(RunArgs),
    /// Runs the stability and consistency checks and prints one line per check.
    Proptest(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Newton,
    Picard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PrecondArg {
    Exact,
    Inexact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Csv,
    Pgm,
    History,
}

/// Mesh selection: level indices `k` (`n = 16·2^(k−1)`) or explicit subdivisions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelSpec {
    Levels(Vec<u32>),
    Subdivisions(usize),
}

impl LevelSpec {
    fn meshes(&self) -> rofnk::Result<Vec<TriMesh>> {
        match self {
            LevelSpec::Levels(ks) => ks.iter().map(|&k| TriMesh::level(k)).collect(),
            LevelSpec::Subdivisions(n) => Ok(vec![TriMesh::uniform(*n)?]),
        }
    }
}

impl FromStr for LevelSpec {
    type Err = String;

    /// Accepts `k`, `a..b` (inclusive) or `n=N`.
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected a level `k`, a range `a..b` or `n=N`, got {s:?}");
        if let Some(n) = s.strip_prefix("n=") {
            let n: usize = n.parse().map_err(|_| bad())?;
            return if n == 0 { Err("n must be at least 1".into()) } else { Ok(LevelSpec::Subdivisions(n)) };
        }
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a.parse::<u32>().map_err(|_| bad())?, b.parse::<u32>().map_err(|_| bad())?),
            None => {
                let k = s.parse::<u32>().map_err(|_| bad())?;
                (k, k)
            }
        };
        if a == 0 || b < a || b > 8 {
            return Err(format!("levels must satisfy 1 <= a <= b <= 8, got {s:?}"));
        }
        Ok(LevelSpec::Levels((a..=b).collect()))
    }
}

impl fmt::Display for LevelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelSpec::Levels(ks) if ks.len() == 1 => write!(f, "{}", ks[0]),
            LevelSpec::Levels(ks) => write!(f, "{}..{}", ks[0], ks[ks.len() - 1]),
            LevelSpec::Subdivisions(n) => write!(f, "n={n}"),
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Penalization parameter; a comma-separated list for `robustness`.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Regularization parameter; a comma-separated list for `robustness`.
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    /// Mesh level `k`, range `a..b`, or explicit subdivisions `n=N`.
    #[arg(long)]
    level: Option<LevelSpec>,
    #[arg(long, value_enum, default_value = "newton")]
    method: MethodArg,
    #[arg(long, value_enum)]
    precond: Option<PrecondArg>,
    #[arg(long, default_value_t = 1e-6)]
    nl_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    minres_tol: f64,
    #[arg(long, default_value_t = 200)]
    minres_maxit: usize,
    /// Noise seed for `denoise`, check seed for `proptest`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Norm of the ball for `denoise`; all three when omitted.
    #[arg(long, value_parser = parse_p_index)]
    p_index: Option<PIndex>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Outputs to write.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["csv", "pgm"])]
    emit: Vec<Emit>,
}

fn parse_p_index(s: &str) -> Result<PIndex, String> {
    s.parse().map_err(|e: rofnk::Error| e.to_string())
}

/// Validated run settings.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub config: SolveConfig,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub level: LevelSpec,
    pub p_index: Option<PIndex>,
    pub out: PathBuf,
    pub csv: bool,
    pub pgm: bool,
    pub history: bool,
}

/// Either a usage problem (exit 2) or a run failure (exit 1).
#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

impl From<rofnk::Error> for Failure {
    fn from(e: rofnk::Error) -> Self {
        match e {
            rofnk::Error::InvalidBeta(_) | rofnk::Error::InvalidParameter(_) | rofnk::Error::EmptyMesh => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

fn single(name: &str, values: &[f64], default: f64) -> Result<f64, Failure> {
    match values {
        [] => Ok(default),
        [v] => Ok(*v),
        _ => Err(Failure::Usage(format!("--{name} takes a single value for this subcommand"))),
    }
}

fn manifest(subcommand: &'static str, args: RunArgs) -> Result<RunManifest, Failure> {
    let (alpha_default, beta_default, level_default, precond_default) = match subcommand {
        "disk" => (0.02, 1e-5, LevelSpec::Levels(vec![1, 2, 3, 4]), PrecondArg::Exact),
        "denoise" => (5e-2, 1e-3, LevelSpec::Levels(vec![4]), PrecondArg::Inexact),
        "robustness" => (1.0, 1.0, LevelSpec::Levels(vec![3]), PrecondArg::Exact),
        _ => (1.0, 1.0, LevelSpec::Levels(vec![1, 2, 3, 4]), PrecondArg::Exact),
    };
    let (alphas, betas) = if subcommand == "robustness" {
        let a = if args.alpha.is_empty() { ALPHA_GRID.to_vec() } else { args.alpha.clone() };
        let b = if args.beta.is_empty() { BETA_GRID.to_vec() } else { args.beta.clone() };
        (a, b)
    } else {
        (vec![single("alpha", &args.alpha, alpha_default)?], vec![single("beta", &args.beta, beta_default)?])
    };
    let level = args.level.unwrap_or(level_default);
    if matches!(subcommand, "robustness" | "denoise") && matches!(&level, LevelSpec::Levels(ks) if ks.len() != 1) {
        return Err(Failure::Usage(format!("{subcommand} runs on a single mesh; got --level {level}")));
    }
    let config = SolveConfig {
        precond_mode: match args.precond.unwrap_or(precond_default) {
            PrecondArg::Exact => PrecondMode::Exact,
            PrecondArg::Inexact => PrecondMode::Inexact,
        },
        nl_tol: args.nl_tol,
        minres_tol: args.minres_tol,
        minres_maxit: args.minres_maxit,
        seed: args.seed,
        ..SolveConfig::new(
            alphas[0],
            betas[0],
            match args.method {
                MethodArg::Newton => Method::Newton,
                MethodArg::Picard => Method::Picard,
            },
        )
    };
    for &alpha in &alphas {
        for &beta in &betas {
            SolveConfig { alpha, beta, ..config }.validate()?;
        }
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::Run(format!("cannot create {}: {e}", args.out.display())))?;
    Ok(RunManifest {
        subcommand,
        config,
        alphas,
        betas,
        level,
        p_index: args.p_index,
        out: args.out,
        csv: args.emit.contains(&Emit::Csv),
        pgm: args.emit.contains(&Emit::Pgm),
        history: args.emit.contains(&Emit::History),
    })
}

fn save(table: &Table, dir: &Path, name: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    write_csv(table, &path).map_err(|e| Failure::Run(format!("writing {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn history_table<'a>(runs: impl IntoIterator<Item = (String, &'a NonlinearReport)>) -> Table {
    let mut t = Table::new(["run", "outer", "residual", "minres_iterations", "minres_converged", "theta"]);
    for (label, report) in runs {
        for (i, it) in report.iterations.iter().enumerate() {
            t.push(vec![
                Cell::Text(label.clone()),
                Cell::Int(i + 1),
                Cell::Real(it.residual),
                Cell::Int(it.minres_iterations),
                Cell::Text(it.minres_converged.to_string()),
                Cell::Real(it.theta),
            ])
            .expect("row width");
        }
    }
    t
}

fn convergence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new([
        "n", "h", "p_error", "p_order", "lambda_error", "lambda_order", "u_h1_error", "u_h1_order", "u_l2_error",
        "u_l2_order", "outer", "avg_minres", "converged",
    ]);
    for r in rows {
        let e = r.errors;
        t.push(vec![
            Cell::Int(r.n),
            Cell::Real(r.h),
            Cell::Real(e.p_l2),
            Cell::Order(r.orders[0]),
            Cell::Real(e.lam_l2),
            Cell::Order(r.orders[1]),
            Cell::Real(e.u_h1),
            Cell::Order(r.orders[2]),
            Cell::Real(e.u_l2),
            Cell::Order(r.orders[3]),
            Cell::Int(r.solve.outer),
            Cell::Real(r.solve.avg_minres),
            Cell::Text(r.solve.converged.to_string()),
        ])
        .expect("row width");
    }
    t
}

fn run_convergence(m: &RunManifest) -> Result<bool, Failure> {
    let rows = experiments::run_convergence_on(&m.level.meshes()?, &m.config)?;
    let table = convergence_table(&rows);
    print!("{}", table.to_csv_string());
    if m.csv {
        save(&table, &m.out, "convergence.csv")?;
    }
    if m.history {
        save(&history_table(rows.iter().map(|r| (format!("n={}", r.n), &r.report))), &m.out, "history.csv")?;
    }
    Ok(rows.iter().all(|r| r.solve.converged))
}

fn robustness_table(cells: &[RobustnessCell], alphas: &[f64]) -> Table {
    let mut header = vec!["beta\\alpha".to_string()];
    header.extend(alphas.iter().map(|a| format!("{a:e}")));
    let mut t = Table::new(header);
    for row in cells.chunks(alphas.len()) {
        let mut cells = vec![Cell::Text(format!("{:e}", row[0].beta))];
        cells.extend(row.iter().map(|c| {
            Cell::Text(match (&c.solve, &c.failure) {
                (Some(s), _) => s.cell(),
                (None, Some(f)) => format!("failed: {f}"),
                (None, None) => "failed".into(),
            })
        }));
        t.push(cells).expect("row width");
    }
    t
}

fn run_robustness(m: &RunManifest) -> Result<bool, Failure> {
    let mesh = m.level.meshes()?.remove(0);
    let cells = experiments::run_robustness_with(par::Execution::default(), &m.alphas, &m.betas, &mesh, &m.config)?;
    let table = robustness_table(&cells, &m.alphas);
    print!("{}", table.to_csv_string());
    if m.csv {
        save(&table, &m.out, "robustness.csv")?;
    }
    Ok(cells.iter().all(RobustnessCell::converged))
}

fn disk_table(rows: &[DiskRow]) -> Table {
    let mut t = Table::new(["n", "h", "u_l2_error", "order", "interp_l2_error", "interp_order", "outer", "avg_minres", "min_theta", "converged"]);
    for r in rows {
        t.push(vec![
            Cell::Int(r.n),
            Cell::Real(r.h),
            Cell::Real(r.u_l2),
            Cell::Order(r.orders[0]),
            Cell::Real(r.interp_l2),
            Cell::Order(r.orders[1]),
            Cell::Int(r.solve.outer),
            Cell::Real(r.solve.avg_minres),
            Cell::Real(r.solve.min_theta),
            Cell::Text(r.solve.converged.to_string()),
        ])
        .expect("row width");
    }
    t
}

fn run_disk(m: &RunManifest) -> Result<bool, Failure> {
    let rows = experiments::run_disk_on(&m.level.meshes()?, &m.config)?;
    let table = disk_table(&rows);
    print!("{}", table.to_csv_string());
    if m.csv {
        save(&table, &m.out, "disk.csv")?;
    }
    if m.history {
        save(&history_table(rows.iter().map(|r| (format!("n={}", r.n), &r.report))), &m.out, "history.csv")?;
    }
    Ok(rows.iter().all(|r| r.solve.converged))
}

fn run_denoise(m: &RunManifest) -> Result<bool, Failure> {
    let mesh = m.level.meshes()?.remove(0);
    let ps = m.p_index.map_or(PIndex::ALL.to_vec(), |p| vec![p]);
    let mut table = Table::new(["p", "method", "outer", "avg_minres", "warm_start_steps", "converged"]);
    let mut outcomes: Vec<(PIndex, DenoiseOutcome)> = Vec::new();
    for p in ps {
        let problem = BenchmarkProblem {
            alpha: m.config.alpha,
            beta: m.config.beta,
            ..BenchmarkProblem::noisy_ball(p, m.config.seed)
        };
        let out = experiments::run_denoise_on(&problem, &mesh, &m.config)?;
        table
            .push(vec![
                Cell::Text(p.to_string()),
                Cell::Text(format!("{:?}", m.config.method).to_lowercase()),
                Cell::Int(out.report.outer_iterations),
                Cell::Real(out.report.average_minres()),
                Cell::Int(out.warm_start.as_ref().map_or(0, |w| w.outer_iterations)),
                Cell::Text(out.report.converged.to_string()),
            ])
            .expect("row width");
        outcomes.push((p, out));
    }
    print!("{}", table.to_csv_string());
    if m.csv {
        save(&table, &m.out, "denoise.csv")?;
    }
    let method = format!("{:?}", m.config.method).to_lowercase();
    if m.pgm {
        for (p, out) in &outcomes {
            for (grid, name) in [(&out.noisy, format!("noisy_p{p}.pgm")), (&out.denoised, format!("denoised_{method}_p{p}.pgm"))] {
                let path = m.out.join(name);
                write_pgm(grid, &path).map_err(|e| Failure::Run(format!("writing {}: {e}", path.display())))?;
                println!("wrote {}", path.display());
            }
        }
    }
    if m.history {
        let runs = outcomes.iter().flat_map(|(p, o)| {
            o.warm_start.iter().map(move |w| (format!("p={p} warm-start"), w)).chain(std::iter::once((format!("p={p} {method}"), &o.report)))
        });
        save(&history_table(runs), &m.out, "history.csv")?;
    }
    Ok(outcomes.iter().all(|(_, o)| o.report.converged))
}

fn run_proptest(m: &RunManifest) -> Result<bool, Failure> {
    let checks = invariants::run_all(m.config.seed)?;
    let mut table = Table::new(["check", "passed", "detail"]);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        table
            .push(vec![Cell::Text(c.name.into()), Cell::Text(c.passed.to_string()), Cell::Text(c.detail.clone())])
            .expect("row width");
    }
    if m.csv {
        save(&table, &m.out, "proptest.csv")?;
    }
    Ok(checks.iter().all(|c| c.passed))
}

/// Parses `argv` (including the program name), runs the subcommand and returns
/// the process exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (name, args, run): (&'static str, RunArgs, fn(&RunManifest) -> Result<bool, Failure>) = match cli.command {
        Command::Convergence(a) => ("convergence", a, run_convergence),
        Command::Robustness(a) => ("robustness", a, run_robustness),
        Command::Disk(a) => ("disk", a, run_disk),
        Command::Denoise(a) => ("denoise", a, run_denoise),
        Command::Proptest(a) => ("proptest", a, run_proptest),
    };
    let result = manifest(name, args).and_then(|m| run(&m));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("error: at least one solve or check did not converge");
            EXIT_FAILURE
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}
