//! Command-line driver: single runs, convergence sweeps, problem listing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{make_grid, GridHierarchy};
use crate::metrics::convergence_order;
use crate::operator::Scheme;
use crate::problems::{builtin, BenchmarkId};
use crate::timeloop::{run_stationary, run_transient, RunReport, TauLaw};
use crate::twolevel::CycleConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const BIMODAL_SNAPSHOTS: [f64; 6] = [0.5, 1.0, 3.0, 5.0, 15.0, 30.0];
const DEFAULT_CELLS: usize = 81;
const DEFAULT_SWEEP: [usize; 3] = [81, 243, 729];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_SOLVER,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownProblem { .. }
            | Error::InvalidConfig(_)
            | Error::NotFactorThreeSequence(_)
            | Error::NonintegralStepCount { .. }
            | Error::NonpositiveTau(_)
            | Error::TooFewCells { .. }
            | Error::NotDivisibleByThree { .. }
            | Error::CoarseTooSmall { .. }
            | Error::InvalidDomain { .. } => CliError::Usage(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Parser)]
#[command(name = "ccfp", version, about = "Chang-Cooper Fokker-Planck solver with a two-level cycle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one benchmark and write a JSON report.
    Run(RunArgs),
    /// Run a grid sweep and fit the convergence order.
    Convergence(ConvergenceArgs),
    /// List the built-in problems.
    ListProblems,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    On,
    Off,
    Auto,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Built-in problem id (see `list-problems`).
    #[arg(long)]
    pub problem: Option<String>,
    /// stationary, bdf1 or bdf2.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Fixed time step.
    #[arg(long, conflicts_with = "tau_law")]
    pub tau: Option<f64>,
    /// Time-step preset: table2, table4 or fig5.
    #[arg(long)]
    pub tau_law: Option<TauLaw>,
    /// Final time.
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Pre-smoothing sweeps per cycle.
    #[arg(long)]
    pub m1: Option<usize>,
    /// Post-smoothing sweeps per cycle.
    #[arg(long)]
    pub m2: Option<usize>,
    /// Cycle stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Rescale to unit mass after each coarse correction.
    #[arg(long, value_enum)]
    pub normalize: Option<NormalizeMode>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with any of the flag values; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Number of fine cells, a multiple of 3.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated grid sizes, each three times the previous.
    #[arg(long, value_delimiter = ',')]
    pub cells: Option<Vec<usize>>,
    /// Solve the grids on separate threads.
    #[arg(long)]
    pub parallel: bool,
}

/// Values accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub cells: Option<Vec<usize>>,
    pub scheme: Option<Scheme>,
    pub tau: Option<f64>,
    pub tau_law: Option<TauLaw>,
    pub t_final: Option<f64>,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub tol: Option<f64>,
    pub normalize: Option<NormalizeMode>,
    pub out: Option<PathBuf>,
    pub snapshots: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauChoice {
    Fixed(f64),
    Law(TauLaw),
}

/// Fully resolved settings for one or more runs of the same problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: BenchmarkId,
    pub cells: Vec<usize>,
    pub scheme: Scheme,
    pub tau: TauChoice,
    pub t_final: f64,
    pub cycle: CycleConfig,
    pub out: Option<PathBuf>,
    pub snapshots: Vec<f64>,
}

impl RunConfig {
    /// Merges flags over the config file over the problem presets.
    pub fn resolve(
        solver: &SolverArgs,
        cells: Option<Vec<usize>>,
        snapshots: Option<Vec<f64>>,
    ) -> Result<Self, CliError> {
        let file = match &solver.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let name = solver
            .problem
            .clone()
            .or(file.problem)
            .ok_or_else(|| CliError::Usage(format!("--problem is required; valid ids: {}", BenchmarkId::valid_ids())))?;
        let problem: BenchmarkId = name.parse()?;
        let preset = builtin(problem);

        let scheme = solver.scheme.or(file.scheme).unwrap_or(match problem {
            BenchmarkId::StationaryOu => Scheme::Stationary,
            _ => Scheme::Bdf1,
        });
        let tau = match (solver.tau, solver.tau_law) {
            (Some(t), _) => TauChoice::Fixed(t),
            (None, Some(law)) => TauChoice::Law(law),
            (None, None) => match (file.tau, file.tau_law) {
                (Some(t), _) => TauChoice::Fixed(t),
                (None, Some(law)) => TauChoice::Law(law),
                (None, None) => TauChoice::Law(problem.default_tau_law()),
            },
        };
        let normalize = match solver.normalize.or(file.normalize).unwrap_or(NormalizeMode::Auto) {
            NormalizeMode::On => true,
            NormalizeMode::Off => false,
            NormalizeMode::Auto => scheme == Scheme::Stationary || problem.normalize_by_default(),
        };
        let defaults = CycleConfig::default();
        let cycle = CycleConfig {
            m1: solver.m1.or(file.m1).unwrap_or(defaults.m1),
            m2: solver.m2.or(file.m2).unwrap_or(defaults.m2),
            tol: solver.tol.or(file.tol).unwrap_or(defaults.tol),
            normalize,
            ..defaults
        };
        cycle.validate()?;
        let t_final = solver.t_final.or(file.t_final).unwrap_or(preset.t_final);
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(CliError::Usage(format!("t_final must be positive, got {t_final}")));
        }
        let snapshots = snapshots.or(file.snapshots).unwrap_or_else(|| match problem {
            BenchmarkId::NonlinearBimodal => BIMODAL_SNAPSHOTS.iter().copied().filter(|&t| t <= t_final).collect(),
            _ => Vec::new(),
        });
        Ok(RunConfig {
            problem,
            cells: cells.or(file.cells).unwrap_or_else(|| vec![DEFAULT_CELLS]),
            scheme,
            tau,
            t_final,
            cycle,
            out: solver.out.clone().or(file.out),
            snapshots,
        })
    }

    pub fn tau_for(&self, n_cells: usize) -> f64 {
        match self.tau {
            TauChoice::Fixed(t) => t,
            TauChoice::Law(law) => law.tau(n_cells, self.t_final),
        }
    }

    /// Executes one solve on `n_cells`.
    pub fn execute(&self, n_cells: usize) -> Result<RunReport, CliError> {
        let p = builtin(self.problem).with_t_final(self.t_final);
        let hier = GridHierarchy::new(make_grid(p.domain.0, p.domain.1, n_cells)?)?;
        let mut report = match self.scheme {
            Scheme::Stationary => run_stationary(&p, &hier, &self.cycle)?,
            scheme => run_transient(&p, &hier, scheme, self.tau_for(n_cells), &self.cycle, &self.snapshots)?,
        };
        if let (TauChoice::Law(law), false) = (self.tau, self.scheme == Scheme::Stationary) {
            report.tau_law = Some(format!("{}: {}", law.as_str(), law.formula()));
        }
        Ok(report)
    }

    /// Checks grid sizes and step counts before any solve starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = builtin(self.problem);
        for &n in &self.cells {
            GridHierarchy::new(make_grid(p.domain.0, p.domain.1, n)?)?;
            if self.scheme != Scheme::Stationary {
                let tau = self.tau_for(n);
                if !(tau > 0.0) || !tau.is_finite() {
                    return Err(Error::NonpositiveTau(tau).into());
                }
                let ratio = self.t_final / tau;
                if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
                    return Err(Error::NonintegralStepCount { ratio }.into());
                }
            }
        }
        Ok(())
    }
}

/// One line per run, mirroring the benchmark table columns.
pub fn summary_line(r: &RunReport) -> String {
    let (l1, l2) = r
        .error_norms
        .map(|e| (format!("{:.3e}", e.l1_paper), format!("{:.3e}", e.l2_paper)))
        .unwrap_or_else(|| ("-".into(), "-".into()));
    format!(
        "{} {} N={} Nt={} l1_paper={} l2_paper={} tg_max={} seconds={:.3}",
        r.problem,
        r.scheme,
        r.n_cells,
        r.steps,
        l1,
        l2,
        r.max_cycles(),
        r.wall_time
    )
}

fn write_json(path: &Path, report: &RunReport) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t}.dat")
}

/// Two-column "x u" text for every stored snapshot.
pub fn write_snapshots(dir: &Path, report: &RunReport) -> Result<Vec<PathBuf>, CliError> {
    let centers = report.grid.centers();
    let mut written = Vec::new();
    for snap in &report.snapshots {
        let mut text = String::new();
        for (x, u) in centers.iter().zip(&snap.values) {
            writeln!(text, "{x:.17e} {u:.17e}").expect("writing to a String");
        }
        let path = dir.join(snapshot_name(snap.requested));
        fs::write(&path, text).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_run(args: &RunArgs) -> Result<RunReport, CliError> {
    let cells = args.cells.map(|n| vec![n]);
    let cfg = RunConfig::resolve(&args.solver, cells, args.snapshots.clone())?;
    if cfg.cells.len() != 1 {
        return Err(CliError::Usage("run takes a single grid size".into()));
    }
    cfg.validate()?;
    let report = cfg.execute(cfg.cells[0])?;
    println!("{}", summary_line(&report));
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_json(&dir.join("report.json"), &report)?;
        write_snapshots(dir, &report)?;
    }
    Ok(report)
}

/// One row of the convergence CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub n_steps: usize,
    pub l1_paper: f64,
    pub l2_paper: f64,
    pub order_est: Option<f64>,
    pub tg_cycles_max: usize,
    pub wall_seconds: f64,
}

pub fn check_factor_three(cells: &[usize]) -> Result<(), Error> {
    let ok = cells.len() >= 2 && cells.iter().all(|n| n % 3 == 0) && cells.windows(2).all(|w| w[1] == 3 * w[0]);
    if ok {
        Ok(())
    } else {
        Err(Error::NotFactorThreeSequence(cells.to_vec()))
    }
}

pub fn convergence_rows(reports: &[RunReport]) -> Result<Vec<ConvergenceRow>, CliError> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(reports.len());
    for r in reports {
        let norms = r
            .error_norms
            .ok_or_else(|| CliError::Usage(format!("{} has no exact solution to compare with", r.problem)))?;
        let order_est = rows
            .last()
            .map(|prev| (prev.l2_paper / norms.l2_paper).ln() / 3f64.ln());
        rows.push(ConvergenceRow {
            n_cells: r.n_cells,
            n_steps: r.steps,
            l1_paper: norms.l1_paper,
            l2_paper: norms.l2_paper,
            order_est,
            tg_cycles_max: r.max_cycles(),
            wall_seconds: r.wall_time,
        });
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[ConvergenceRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

pub fn read_csv(path: &Path) -> Result<Vec<ConvergenceRow>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Output(e.to_string()))?;
    r.deserialize()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Output(e.to_string()))
}

pub fn cmd_convergence(args: &ConvergenceArgs) -> Result<(Vec<ConvergenceRow>, f64), CliError> {
    let mut cfg = RunConfig::resolve(&args.solver, args.cells.clone(), Some(Vec::new()))?;
    if args.cells.is_none() && args.solver.config.is_none() {
        cfg.cells = DEFAULT_SWEEP.to_vec();
    }
    check_factor_three(&cfg.cells)?;
    cfg.validate()?;

    let reports: Vec<RunReport> = if args.parallel {
        thread::scope(|s| {
            let handles: Vec<_> = cfg.cells.iter().map(|&n| s.spawn({
                let cfg = &cfg;
                move || cfg.execute(n)
            })).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect::<Result<_, _>>()
        })?
    } else {
        cfg.cells.iter().map(|&n| cfg.execute(n)).collect::<Result<_, _>>()?
    };

    let rows = convergence_rows(&reports)?;
    let errors: Vec<f64> = rows.iter().map(|r| r.l2_paper).collect();
    let order = convergence_order(&errors, 3.0)?;

    if let Some(law) = reports.first().and_then(|r| r.tau_law.as_deref()) {
        println!("{} {}, tau law {law}", cfg.problem, cfg.scheme);
    }
    println!("{:>12} {:>12} {:>12} {:>8} {:>4} {:>9}", "NxNt", "l1_paper", "l2_paper", "order", "TG", "seconds");
    for row in &rows {
        let order = row.order_est.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>12} {:>12.3e} {:>12.3e} {:>8} {:>4} {:>9.3}",
            format!("{}x{}", row.n_cells, row.n_steps),
            row.l1_paper,
            row.l2_paper,
            order,
            row.tg_cycles_max,
            row.wall_seconds
        );
    }
    println!("fitted order (paper l2): {order:.3}");

    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join("convergence.csv");
            let file = fs::File::create(&path).map_err(io_err(&path))?;
            write_csv(file, &rows)?;
            for r in &reports {
                write_json(&dir.join(format!("report_n{}.json", r.n_cells)), r)?;
            }
        }
        None => write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok((rows, order))
}

pub fn cmd_list_problems() {
    for id in BenchmarkId::ALL {
        let p = builtin(id);
        println!(
            "{:<18} [{}, {}] T={} tau-law={}  {}",
            id.as_str(),
            p.domain.0,
            p.domain.1,
            p.t_final,
            id.default_tau_law().as_str(),
            id.description()
        );
    }
}

/// Parses `argv` and runs the selected command; returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|_| ()),
        Command::Convergence(args) => cmd_convergence(args).map(|_| ()),
        Command::ListProblems => {
            cmd_list_problems();
            Ok(())
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
