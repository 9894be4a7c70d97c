//! Built-in benchmark problems and the manufactured-source oracle.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Field, ProblemSpec, Reference};
use crate::timeloop::TauLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkId {
    /// Stationary Ornstein-Uhlenbeck density on [-6, 6].
    StationaryOu,
    /// OU with `u = exp(-(x^2 + t))` and a manufactured source, on [-6, 6].
    OuManufactured,
    /// `B = x`, `C = 1` on [0, 10] with `u = exp(-((x - 5)^2 + t))`.
    MohammadiOu,
    /// Drift `x - x^3`, `sigma = 0.4`; bimodal steady state.
    NonlinearBimodal,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 4] = [
        BenchmarkId::StationaryOu,
        BenchmarkId::OuManufactured,
        BenchmarkId::MohammadiOu,
        BenchmarkId::NonlinearBimodal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BenchmarkId::StationaryOu => "stationary_ou",
            BenchmarkId::OuManufactured => "ou_manufactured",
            BenchmarkId::MohammadiOu => "mohammadi_ou",
            BenchmarkId::NonlinearBimodal => "nonlinear_bimodal",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            BenchmarkId::StationaryOu => "stationary OU on [-6,6], sigma=1, f=-x; u_e ~ exp(-x^2)",
            BenchmarkId::OuManufactured => "OU on [-6,6], T=1, u_e = exp(-(x^2+t)), manufactured g",
            BenchmarkId::MohammadiOu => "B=x, C=1 on [0,10], T=1, u_e = exp(-((x-5)^2+t))",
            BenchmarkId::NonlinearBimodal => "f = x - x^3, sigma=0.4 on [-6,6], T=30; bimodal equilibrium",
        }
    }

    /// Whether the two-level cycle renormalizes to unit mass by default.
    pub fn normalize_by_default(&self) -> bool {
        matches!(self, BenchmarkId::StationaryOu | BenchmarkId::NonlinearBimodal)
    }

    pub fn default_tau_law(&self) -> TauLaw {
        match self {
            BenchmarkId::StationaryOu | BenchmarkId::OuManufactured => TauLaw::Table2,
            BenchmarkId::MohammadiOu => TauLaw::Table4,
            BenchmarkId::NonlinearBimodal => TauLaw::Fig5,
        }
    }

    pub fn valid_ids() -> String {
        Self::ALL.iter().map(|b| b.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::UnknownProblem {
                name: s.to_string(),
                valid: Self::valid_ids(),
            })
    }
}

/// Nonlinear problem diffusion amplitude.
pub const BIMODAL_SIGMA: f64 = 0.4;

pub fn builtin(id: BenchmarkId) -> ProblemSpec {
    match id {
        BenchmarkId::StationaryOu => {
            ProblemSpec::from_drift_diffusion(id.as_str(), Arc::new(|x, _| -x), 1.0, (-6.0, 6.0), 1.0)
                .with_exact(Reference::Equilibrium(Arc::new(|x| (-x * x).exp())))
        }
        BenchmarkId::OuManufactured => {
            let p = ProblemSpec::from_drift_diffusion(id.as_str(), Arc::new(|x, _| -x), 1.0, (-6.0, 6.0), 1.0);
            let exact = ManufacturedSolution {
                u: Arc::new(|x, t| (-(x * x + t)).exp()),
                du_dt: Some(Arc::new(|x, t| -(-(x * x + t)).exp())),
                du_dx: Some(Arc::new(|x, t| -2.0 * x * (-(x * x + t)).exp())),
                d2u_dx2: Some(Arc::new(|x, t| (4.0 * x * x - 2.0) * (-(x * x + t)).exp())),
            };
            let g = manufactured_source(&exact, p.b.clone(), p.c.clone());
            p.with_source(g)
                .with_initial(Arc::new(|x| (-x * x).exp()))
                .with_exact(Reference::Transient(exact.u))
        }
        BenchmarkId::MohammadiOu => {
            let a = 10.0;
            let half = a / 2.0;
            ProblemSpec::from_flux_form(id.as_str(), Arc::new(|x, _| x), Arc::new(|_, _| 1.0), (0.0, a), 1.0)
                .with_source(Arc::new(move |x, t| {
                    (a - x) * (2.0 * x - a) / ((x - half) * (x - half) + t).exp()
                }))
                .with_initial(Arc::new(move |x| (-(x - half) * (x - half)).exp()))
                .with_exact(Reference::Transient(Arc::new(move |x, t| {
                    (-((x - half) * (x - half) + t)).exp()
                })))
        }
        BenchmarkId::NonlinearBimodal => {
            let s2 = BIMODAL_SIGMA * BIMODAL_SIGMA;
            ProblemSpec::from_drift_diffusion(
                id.as_str(),
                Arc::new(|x, _| x - x * x * x),
                BIMODAL_SIGMA,
                (-6.0, 6.0),
                30.0,
            )
            .with_initial(Arc::new(|x| (-x * x).exp() / PI.sqrt()))
            .with_exact(Reference::Equilibrium(Arc::new(move |x| {
                ((x * x - 0.5 * x * x * x * x) / s2).exp()
            })))
        }
    }
}

/// Exact solution with optional analytic derivatives; missing ones are
/// replaced by Richardson-extrapolated central differences.
#[derive(Clone)]
pub struct ManufacturedSolution {
    pub u: Field,
    pub du_dt: Option<Field>,
    pub du_dx: Option<Field>,
    pub d2u_dx2: Option<Field>,
}

const FIRST_STEP: f64 = 1e-5;
const SECOND_STEP: f64 = 5e-3;

fn richardson_d1(f: &dyn Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    let d = |s: f64| (f(x + s) - f(x - s)) / (2.0 * s);
    (4.0 * d(step / 2.0) - d(step)) / 3.0
}

fn richardson_d2(f: &dyn Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    let d = |s: f64| (f(x + s) - 2.0 * f(x) + f(x - s)) / (s * s);
    (4.0 * d(step / 2.0) - d(step)) / 3.0
}

/// `g = du/dt - d/dx (B u + C du/dx)` for the given exact solution.
pub fn manufactured_source(exact: &ManufacturedSolution, b: Field, c: Field) -> Field {
    let ex = exact.clone();
    Arc::new(move |x, t| {
        let u = &ex.u;
        let ut = match &ex.du_dt {
            Some(f) => f(x, t),
            None => richardson_d1(&|s| u(x, s), t, FIRST_STEP),
        };
        let ux = match &ex.du_dx {
            Some(f) => f(x, t),
            None => richardson_d1(&|s| u(s, t), x, FIRST_STEP),
        };
        let uxx = match &ex.d2u_dx2 {
            Some(f) => f(x, t),
            None => richardson_d2(&|s| u(s, t), x, SECOND_STEP),
        };
        let bx = richardson_d1(&|s| b(s, t), x, FIRST_STEP);
        let cx = richardson_d1(&|s| c(s, t), x, FIRST_STEP);
        let flux_dx = bx * u(x, t) + b(x, t) * ux + cx * ux + c(x, t) * uxx;
        ut - flux_dx
    })
}
