//! Two-level cycle `TG(m1, m2)` and its iteration driver.
//!
//! One cycle: `m1` smoothing sweeps, residual, injection to the coarse grid,
//! exact coarse error solve (zero initial guess), quadratic prolongation of
//! the error, correction, optional renormalization to unit mass, `m2`
//! smoothing sweeps. The coarse matrix is the same discretization assembled
//! on the coarse grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridHierarchy, StaggeredGrid};
use crate::linalg::{self, TridiagonalSystem};
use crate::metrics;
use crate::transfer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Smoother {
    /// Left-to-right sweeps before and after the coarse correction.
    GaussSeidel,
    /// Left-to-right pre-smoothing, right-to-left post-smoothing.
    SymmetricGaussSeidel,
    DampedJacobi { weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// `|h^2 sum(u_new^2) - h^2 sum(u_old^2)| < tol`.
    NormDifference,
    /// `sqrt(h sum(r^2)) < tol` for the residual after the cycle.
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    pub m1: usize,
    pub m2: usize,
    pub tol: f64,
    pub max_cycles: usize,
    pub normalize: bool,
    pub smoother: Smoother,
    pub stop: StopRule,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            m1: 3,
            m2: 3,
            tol: 1e-8,
            max_cycles: 100,
            normalize: false,
            smoother: Smoother::SymmetricGaussSeidel,
            stop: StopRule::NormDifference,
        }
    }
}

impl CycleConfig {
    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidConfig("max_cycles must be at least 1".into()));
        }
        if let Smoother::DampedJacobi { weight } = self.smoother {
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(Error::InvalidConfig(format!("Jacobi weight {weight} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Rescales `u` so that `h * sum(u) = 1`.
pub fn normalize(u: &[f64], h: f64) -> Result<Vec<f64>> {
    let mass = h * u.iter().sum::<f64>();
    if mass == 0.0 || !mass.is_finite() {
        return Err(Error::ZeroMass);
    }
    Ok(u.iter().map(|v| v / mass).collect())
}

fn smooth(sys: &TridiagonalSystem, u: &mut Vec<f64>, sweeps: usize, smoother: Smoother, post: bool) -> Result<()> {
    for _ in 0..sweeps {
        match smoother {
            Smoother::GaussSeidel => linalg::gauss_seidel_in_place(sys, u, false)?,
            Smoother::SymmetricGaussSeidel => linalg::gauss_seidel_in_place(sys, u, post)?,
            Smoother::DampedJacobi { weight } => *u = linalg::jacobi_sweep(sys, u, weight)?,
        }
    }
    Ok(())
}

/// One `TG(m1, m2)` cycle. `coarse` supplies the coarse-grid matrix; its
/// right-hand side is ignored.
pub fn tg_cycle(
    fine: &TridiagonalSystem,
    coarse: &TridiagonalSystem,
    hier: &GridHierarchy,
    u: &[f64],
    cfg: &CycleConfig,
) -> Result<Vec<f64>> {
    for (expected, actual) in [
        (hier.fine.n_cells, fine.n()),
        (hier.fine.n_cells, u.len()),
        (hier.coarse.n_cells, coarse.n()),
    ] {
        if expected != actual {
            return Err(Error::SizeMismatch { expected, actual });
        }
    }
    let mut u = u.to_vec();
    smooth(fine, &mut u, cfg.m1, cfg.smoother, false)?;

    let r = linalg::residual(fine, &u)?;
    let rc = transfer::restrict_injection(hier, &r)?;
    let ec = linalg::direct_solve(&coarse.with_rhs(rc)?)?;
    let e = transfer::prolong_quadratic(hier, &ec)?;
    u.iter_mut().zip(&e).for_each(|(v, d)| *v += d);

    if cfg.normalize {
        u = normalize(&u, hier.fine.h)?;
    }
    smooth(fine, &mut u, cfg.m2, cfg.smoother, true)?;
    Ok(u)
}

/// Repeats [`tg_cycle`] until the stopping rule holds; returns the iterate
/// and the number of cycles performed.
pub fn solve_to_tolerance<F>(
    fine: &TridiagonalSystem,
    coarse_assembler: F,
    hier: &GridHierarchy,
    u0: &[f64],
    cfg: &CycleConfig,
) -> Result<(Vec<f64>, usize)>
where
    F: FnOnce(&StaggeredGrid) -> Result<TridiagonalSystem>,
{
    cfg.validate()?;
    let coarse = coarse_assembler(&hier.coarse)?;
    let h = hier.fine.h;
    let mut u = u0.to_vec();
    let mut gap = f64::INFINITY;
    for cycle in 1..=cfg.max_cycles {
        let next = tg_cycle(fine, &coarse, hier, &u, cfg)?;
        gap = match cfg.stop {
            StopRule::NormDifference => {
                (metrics::paper_l2(&next, h) - metrics::paper_l2(&u, h)).abs()
            }
            StopRule::Residual => {
                let r = linalg::residual(fine, &next)?;
                (h * r.iter().map(|v| v * v).sum::<f64>()).sqrt()
            }
        };
        u = next;
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::NoConvergence { cycles: cycle, gap });
        }
        if gap < cfg.tol {
            return Ok((u, cycle));
        }
    }
    Err(Error::NoConvergence {
        cycles: cfg.max_cycles,
        gap,
    })
}
