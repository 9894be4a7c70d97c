//! BDF1/BDF2 time marching and the stationary driver.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridHierarchy, StaggeredGrid};
use crate::metrics::{self, ErrorRecord, SpaceTimeAccumulator};
use crate::operator::{assemble_matrix, assemble_step, edge_coefficients, ProblemSpec, Reference, Scheme};
use crate::twolevel::{self, CycleConfig};

/// Time-step presets of the benchmark tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauLaw {
    /// `tau = (1/81) (T / 3^L)` with `N = 81 * 3^L`, i.e. `tau = T / N`.
    Table2,
    /// `tau = 0.01 (1 / 3^L)^2` with `N = 81 * 3^L`.
    Table4,
    /// `tau = (1/81) (T / 81)`, independent of `N`.
    Fig5,
}

impl TauLaw {
    pub fn tau(&self, n_cells: usize, t_final: f64) -> f64 {
        let refinement = n_cells as f64 / 81.0;
        match self {
            TauLaw::Table2 => t_final / n_cells as f64,
            TauLaw::Table4 => 0.01 / (refinement * refinement),
            TauLaw::Fig5 => t_final / (81.0 * 81.0),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TauLaw::Table2 => "table2",
            TauLaw::Table4 => "table4",
            TauLaw::Fig5 => "fig5",
        }
    }

    pub fn formula(&self) -> &'static str {
        match self {
            TauLaw::Table2 => "tau = T / N  [(1/81)(T/3^L), N = 81*3^L]",
            TauLaw::Table4 => "tau = 0.01 (81/N)^2  [0.01 (1/3^L)^2, N = 81*3^L]",
            TauLaw::Fig5 => "tau = (1/81)(T/81)",
        }
    }
}

impl FromStr for TauLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table2" => Ok(TauLaw::Table2),
            "table4" => Ok(TauLaw::Table4),
            "fig5" => Ok(TauLaw::Fig5),
            other => Err(Error::InvalidConfig(format!(
                "unknown tau law '{other}' (expected table2, table4 or fig5)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Time of the stored level.
    pub t: f64,
    /// Time that was asked for; `t` is the nearest level to it.
    pub requested: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l1_paper: f64,
    pub l2_paper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub scheme: Scheme,
    pub n_cells: usize,
    pub grid: StaggeredGrid,
    pub tau: f64,
    /// Formula that produced `tau`, when a preset law was used.
    pub tau_law: Option<String>,
    pub steps: usize,
    pub t_final: f64,
    pub snapshots: Vec<Snapshot>,
    /// Entry 0 is the initial level (0 cycles) for time-dependent runs.
    pub cycles_per_step: Vec<usize>,
    pub mass_history: Vec<f64>,
    pub min_value_history: Vec<f64>,
    /// Space-time norms for transient references, final-level norms otherwise.
    pub error_norms: Option<ErrorNorms>,
    pub final_error: Option<ErrorRecord>,
    pub spacetime_error: Option<ErrorRecord>,
    /// Factor applied to the numerical solution before comparing with an
    /// unnormalized equilibrium profile.
    pub equilibrium_scale: Option<f64>,
    pub wall_time: f64,
}

impl RunReport {
    pub fn max_cycles(&self) -> usize {
        self.cycles_per_step.iter().copied().max().unwrap_or(0)
    }

    pub fn final_solution(&self) -> &[f64] {
        &self.snapshots.last().expect("reports always hold a final snapshot").values
    }
}

fn mass(u: &[f64], h: f64) -> f64 {
    h * u.iter().sum::<f64>()
}

fn min_value(u: &[f64]) -> f64 {
    u.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Compares `u` with an unnormalized profile after matching discrete L1 norms.
pub fn equilibrium_error(grid: &StaggeredGrid, u: &[f64], profile: &dyn Fn(f64) -> f64) -> (ErrorRecord, f64) {
    let exact = grid.sample(profile);
    let scale = exact.iter().map(|v| v.abs()).sum::<f64>() / u.iter().map(|v| v.abs()).sum::<f64>();
    let e: Vec<f64> = u.iter().zip(&exact).map(|(v, x)| scale * v - x).collect();
    (metrics::norms_stationary(&e, grid.h), scale)
}

fn step_count(t_final: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::NonpositiveTau(tau));
    }
    let ratio = t_final / tau;
    let steps = ratio.round();
    if !(steps >= 1.0) || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::NonintegralStepCount { ratio });
    }
    Ok(steps as usize)
}

pub fn run_bdf1(p: &ProblemSpec, hier: &GridHierarchy, tau: f64, cfg: &CycleConfig) -> Result<RunReport> {
    run_transient(p, hier, Scheme::Bdf1, tau, cfg, &[])
}

pub fn run_bdf2(p: &ProblemSpec, hier: &GridHierarchy, tau: f64, cfg: &CycleConfig) -> Result<RunReport> {
    run_transient(p, hier, Scheme::Bdf2, tau, cfg, &[])
}

/// Marches `p` from `u0` to `p.t_final`. BDF2 takes its first step with BDF1.
/// A snapshot is stored at the step nearest each requested time and always
/// at the final time.
pub fn run_transient(
    p: &ProblemSpec,
    hier: &GridHierarchy,
    scheme: Scheme,
    tau: f64,
    cfg: &CycleConfig,
    snapshot_times: &[f64],
) -> Result<RunReport> {
    if scheme == Scheme::Stationary {
        return Err(Error::InvalidConfig("use solve_stationary for the stationary scheme".into()));
    }
    check_domain(p, hier)?;
    cfg.validate()?;
    let steps = step_count(p.t_final, tau)?;
    if scheme == Scheme::Bdf2 && steps < 2 {
        return Err(Error::InvalidConfig("BDF2 needs at least two steps".into()));
    }
    let start = Instant::now();
    let grid = hier.fine;
    let h = grid.h;
    let centers = grid.centers();

    let mut wanted: Vec<(usize, f64)> = snapshot_times
        .iter()
        .filter(|t| t.is_finite() && **t >= 0.0 && **t <= p.t_final)
        .map(|&t| (((t / tau).round() as usize).min(steps), t))
        .collect();
    wanted.push((steps, p.t_final));
    wanted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    wanted.dedup_by_key(|w| w.0);
    let level_time = |m: usize| if m == steps { p.t_final } else { m as f64 * tau };

    let transient = match &p.u_exact {
        Some(Reference::Transient(f)) => Some(f.clone()),
        _ => None,
    };
    let error_at = |u: &[f64], t: f64| -> Option<Vec<f64>> {
        transient
            .as_ref()
            .map(|f| u.iter().zip(&centers).map(|(v, &x)| v - f(x, t)).collect())
    };

    let mut u: Vec<f64> = centers.iter().map(|&x| (p.u0)(x)).collect();
    let mut u_old: Option<Vec<f64>> = None;
    let mut acc = SpaceTimeAccumulator::default();
    if let Some(e) = error_at(&u, 0.0) {
        acc.push(&e);
    }
    let mut report = RunReport {
        problem: p.name.clone(),
        scheme,
        n_cells: grid.n_cells,
        grid,
        tau,
        tau_law: None,
        steps,
        t_final: p.t_final,
        snapshots: Vec::new(),
        cycles_per_step: vec![0],
        mass_history: vec![mass(&u, h)],
        min_value_history: vec![min_value(&u)],
        error_norms: None,
        final_error: None,
        spacetime_error: None,
        equilibrium_scale: None,
        wall_time: 0.0,
    };
    if let Some(&(0, requested)) = wanted.first() {
        report.snapshots.push(Snapshot {
            t: 0.0,
            requested,
            values: u.clone(),
        });
    }

    for m in 0..steps {
        let t_now = m as f64 * tau;
        let t_next = level_time(m + 1);
        let step_scheme = if scheme == Scheme::Bdf2 && m > 0 { Scheme::Bdf2 } else { Scheme::Bdf1 };
        let coeffs = edge_coefficients(p, &grid, t_now)?;
        let g: Vec<f64> = centers.iter().map(|&x| (p.g)(x, t_next)).collect();
        let sys = assemble_step(&coeffs, step_scheme, tau, &u, u_old.as_deref(), &g)?;
        let (next, cycles) = twolevel::solve_to_tolerance(
            &sys,
            |coarse| assemble_matrix(&edge_coefficients(p, coarse, t_now)?, step_scheme, tau),
            hier,
            &u,
            cfg,
        )?;
        u_old = Some(std::mem::replace(&mut u, next));

        report.cycles_per_step.push(cycles);
        report.mass_history.push(mass(&u, h));
        report.min_value_history.push(min_value(&u));
        if let Some(e) = error_at(&u, t_next) {
            acc.push(&e);
            if m + 1 == steps {
                report.final_error = Some(ErrorRecord {
                    n_steps: steps,
                    ..metrics::norms_stationary(&e, h)
                });
            }
        }
        if let Ok(k) = wanted.binary_search_by_key(&(m + 1), |w| w.0) {
            report.snapshots.push(Snapshot {
                t: t_next,
                requested: wanted[k].1,
                values: u.clone(),
            });
        }
    }

    match &p.u_exact {
        Some(Reference::Transient(_)) => {
            let st = acc.finish(h, tau)?;
            report.error_norms = Some(ErrorNorms {
                l1_paper: st.l1_paper,
                l2_paper: st.l2_paper,
            });
            report.spacetime_error = Some(st);
        }
        Some(Reference::Equilibrium(profile)) => {
            let (rec, scale) = equilibrium_error(&grid, &u, &**profile);
            report.error_norms = Some(ErrorNorms {
                l1_paper: rec.l1_paper,
                l2_paper: rec.l2_paper,
            });
            report.final_error = Some(ErrorRecord { n_steps: steps, ..rec });
            report.equilibrium_scale = Some(scale);
        }
        None => {}
    }
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

fn check_domain(p: &ProblemSpec, hier: &GridHierarchy) -> Result<()> {
    if !hier.fine.same_domain(p.domain) {
        return Err(Error::InvalidConfig(format!(
            "grid domain [{}, {}] does not match problem domain [{}, {}]",
            hier.fine.x_left, hier.fine.x_right, p.domain.0, p.domain.1
        )));
    }
    Ok(())
}

/// Steady state by two-level iteration on the stationary flux balance,
/// starting from the normalized constant. Requires `cfg.normalize`.
pub fn solve_stationary(p: &ProblemSpec, hier: &GridHierarchy, cfg: &CycleConfig) -> Result<(Vec<f64>, usize)> {
    if !cfg.normalize {
        return Err(Error::InvalidConfig(
            "the stationary system is singular; normalization must be on".into(),
        ));
    }
    check_domain(p, hier)?;
    let grid = hier.fine;
    let n = grid.n_cells;
    let coeffs = edge_coefficients(p, &grid, 0.0)?;
    let zeros = vec![0.0; n];
    let sys = assemble_step(&coeffs, Scheme::Stationary, 0.0, &zeros, None, &zeros)?;
    let u0 = vec![1.0 / grid.width(); n];
    let (u, cycles) = twolevel::solve_to_tolerance(
        &sys,
        |coarse| assemble_matrix(&edge_coefficients(p, coarse, 0.0)?, Scheme::Stationary, 0.0),
        hier,
        &u0,
        cfg,
    )?;
    Ok((twolevel::normalize(&u, grid.h)?, cycles))
}

/// [`solve_stationary`] wrapped into a report.
pub fn run_stationary(p: &ProblemSpec, hier: &GridHierarchy, cfg: &CycleConfig) -> Result<RunReport> {
    let start = Instant::now();
    let (u, cycles) = solve_stationary(p, hier, cfg)?;
    let grid = hier.fine;
    let mut report = RunReport {
        problem: p.name.clone(),
        scheme: Scheme::Stationary,
        n_cells: grid.n_cells,
        grid,
        tau: 0.0,
        tau_law: None,
        steps: 0,
        t_final: 0.0,
        snapshots: Vec::new(),
        cycles_per_step: vec![cycles],
        mass_history: vec![mass(&u, grid.h)],
        min_value_history: vec![min_value(&u)],
        error_norms: None,
        final_error: None,
        spacetime_error: None,
        equilibrium_scale: None,
        wall_time: 0.0,
    };
    let rec = match &p.u_exact {
        Some(Reference::Equilibrium(profile)) => {
            let (rec, scale) = equilibrium_error(&grid, &u, &**profile);
            report.equilibrium_scale = Some(scale);
            Some(rec)
        }
        Some(Reference::Transient(f)) => {
            let (rec, scale) = equilibrium_error(&grid, &u, &|x| f(x, 0.0));
            report.equilibrium_scale = Some(scale);
            Some(rec)
        }
        None => None,
    };
    if let Some(rec) = rec {
        report.error_norms = Some(ErrorNorms {
            l1_paper: rec.l1_paper,
            l2_paper: rec.l2_paper,
        });
        report.final_error = Some(rec);
    }
    report.snapshots.push(Snapshot {
        t: 0.0,
        requested: 0.0,
        values: u,
    });
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}
