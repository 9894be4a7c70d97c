//! Problem definition and the Chang-Cooper discretization.
//!
//! The canonical form is `du/dt = dF/dx + g` with `F = B u + C du/dx`. On
//! edge `j` the discrete flux is
//!
//! ```text
//! F_j = B_j ((1 - delta_j) u_{j+1} + delta_j u_j) + C_j (u_{j+1} - u_j) / h
//! delta_j = 1/omega_j - 1/(exp(omega_j) - 1),   omega_j = h B_j / C_j
//! ```
//!
//! and `F_0 = F_N = 0` (zero-flux walls). Each implicit step solves the
//! tridiagonal system that balances the time difference against `(F_i - F_{i-1}) / h`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::StaggeredGrid;
use crate::linalg::TridiagonalSystem;

/// Space-time field `(x, t) -> value`.
pub type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Spatial profile `x -> value`.
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Known solution used for error measurement.
#[derive(Clone)]
pub enum Reference {
    /// Exact solution for all `t`.
    Transient(Field),
    /// Unnormalized steady-state profile; compared after rescaling.
    Equilibrium(Profile),
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    /// Advective coefficient `B(x, t)`.
    pub b: Field,
    /// Diffusive coefficient `C(x, t)`, positive on the domain.
    pub c: Field,
    /// Source `g(x, t)`.
    pub g: Field,
    pub u0: Profile,
    pub u_exact: Option<Reference>,
    pub domain: (f64, f64),
    pub t_final: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("t_final", &self.t_final)
            .field("has_exact", &self.u_exact.is_some())
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Flux-form problem with `g = 0` and a normalized uniform initial density.
    pub fn from_flux_form(
        name: impl Into<String>,
        b: Field,
        c: Field,
        domain: (f64, f64),
        t_final: f64,
    ) -> Self {
        let mass = 1.0 / (domain.1 - domain.0);
        Self {
            name: name.into(),
            b,
            c,
            g: Arc::new(|_, _| 0.0),
            u0: Arc::new(move |_| mass),
            u_exact: None,
            domain,
            t_final,
        }
    }

    /// `du/dt = sigma^2/2 u_xx - (f u)_x`, i.e. `B = -f`, `C = sigma^2 / 2`.
    pub fn from_drift_diffusion(
        name: impl Into<String>,
        f: Field,
        sigma: f64,
        domain: (f64, f64),
        t_final: f64,
    ) -> Self {
        let half_var = 0.5 * sigma * sigma;
        Self::from_flux_form(
            name,
            Arc::new(move |x, t| -f(x, t)),
            Arc::new(move |_, _| half_var),
            domain,
            t_final,
        )
    }

    pub fn with_source(mut self, g: Field) -> Self {
        self.g = g;
        self
    }

    pub fn with_initial(mut self, u0: Profile) -> Self {
        self.u0 = u0;
        self
    }

    pub fn with_exact(mut self, exact: Reference) -> Self {
        self.u_exact = Some(exact);
        self
    }

    pub fn with_t_final(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Stationary,
    Bdf1,
    Bdf2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Stationary => "stationary",
            Scheme::Bdf1 => "bdf1",
            Scheme::Bdf2 => "bdf2",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(Scheme::Stationary),
            "bdf1" => Ok(Scheme::Bdf1),
            "bdf2" => Ok(Scheme::Bdf2),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme '{other}' (expected stationary, bdf1 or bdf2)"
            ))),
        }
    }
}

/// Below this `|omega|` the weight comes from its Taylor series.
pub const DELTA_SERIES_THRESHOLD: f64 = 0.1;

/// Chang-Cooper weight `1/omega - 1/(exp(omega) - 1)`, always in `(0, 1)`.
pub fn cc_delta(omega: f64) -> Result<f64> {
    if !omega.is_finite() {
        return Err(Error::NonFinite(omega));
    }
    let d = if omega.abs() < DELTA_SERIES_THRESHOLD {
        let w2 = omega * omega;
        // 1/2 - w/12 + w^3/720 - w^5/30240 + w^7/1209600 - w^9/47900160
        0.5 - omega
            * (1.0 / 12.0
                - w2 * (1.0 / 720.0
                    - w2 * (1.0 / 30240.0 - w2 * (1.0 / 1_209_600.0 - w2 / 47_900_160.0))))
    } else {
        1.0 / omega - 1.0 / omega.exp_m1()
    };
    Ok(d.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

/// `omega / (exp(omega) - 1)`; equals `1 - delta * omega`.
#[inline]
pub fn bernoulli(omega: f64) -> f64 {
    if omega == 0.0 {
        1.0
    } else {
        omega / omega.exp_m1()
    }
}

/// Coefficients frozen on every edge `0..=N` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCoefficients {
    pub t: f64,
    pub h: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub omega: Vec<f64>,
    pub delta: Vec<f64>,
}

impl EdgeCoefficients {
    pub fn n_cells(&self) -> usize {
        self.b.len() - 1
    }

    /// Weight of the right neighbour in `F_j`: `(1 - delta) B + C/h`.
    ///
    /// Evaluated as `C/h * bernoulli(-omega)`, which is the same quantity
    /// without the cancellation at large `|omega|`.
    #[inline]
    pub fn forward_weight(&self, j: usize) -> f64 {
        self.c[j] / self.h * bernoulli(-self.omega[j])
    }

    /// Weight of the left neighbour in `-F_j`: `C/h - delta B`.
    #[inline]
    pub fn backward_weight(&self, j: usize) -> f64 {
        self.c[j] / self.h * bernoulli(self.omega[j])
    }
}

pub fn edge_coefficients(p: &ProblemSpec, grid: &StaggeredGrid, t: f64) -> Result<EdgeCoefficients> {
    edge_coefficients_with(&*p.b, &*p.c, grid, t)
}

pub fn edge_coefficients_with(
    b_fn: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    c_fn: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    grid: &StaggeredGrid,
    t: f64,
) -> Result<EdgeCoefficients> {
    let n = grid.n_cells;
    let mut b = Vec::with_capacity(n + 1);
    let mut c = Vec::with_capacity(n + 1);
    let mut omega = Vec::with_capacity(n + 1);
    let mut delta = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let x = grid.edge(j);
        let bj = b_fn(x, t);
        let cj = c_fn(x, t);
        if !(cj > 0.0) {
            return Err(Error::NonpositiveDiffusion { edge: j, value: cj });
        }
        let w = grid.h * bj / cj;
        delta.push(cc_delta(w)?);
        b.push(bj);
        c.push(cj);
        omega.push(w);
    }
    Ok(EdgeCoefficients {
        t,
        h: grid.h,
        b,
        c,
        omega,
        delta,
    })
}

/// Discrete flux on edges `0..=N`; the two wall fluxes are zero.
pub fn flux(coeffs: &EdgeCoefficients, u: &[f64]) -> Result<Vec<f64>> {
    let n = coeffs.n_cells();
    if u.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: u.len(),
        });
    }
    let mut f = vec![0.0; n + 1];
    for j in 1..n {
        // cells j and j + 1 (one-based) are u[j - 1], u[j]
        f[j] = coeffs.forward_weight(j) * u[j] - coeffs.backward_weight(j) * u[j - 1];
    }
    Ok(f)
}

/// Time-discrete matrix for `scheme`; the right-hand side is left at zero.
///
/// Rows are `s/tau * u_i - (F_i - F_{i-1}) / h` with `s = 1` (BDF1),
/// `s = 3/2` (BDF2) or no time term (stationary).
pub fn assemble_matrix(coeffs: &EdgeCoefficients, scheme: Scheme, tau: f64) -> Result<TridiagonalSystem> {
    let n = coeffs.n_cells();
    let shift = match scheme {
        Scheme::Stationary => 0.0,
        Scheme::Bdf1 | Scheme::Bdf2 if !(tau > 0.0) || !tau.is_finite() => {
            return Err(Error::NonpositiveTau(tau))
        }
        Scheme::Bdf1 => 1.0 / tau,
        Scheme::Bdf2 => 1.5 / tau,
    };
    let h = coeffs.h;
    let fwd: Vec<f64> = (0..=n)
        .map(|j| if j == 0 || j == n { 0.0 } else { coeffs.forward_weight(j) })
        .collect();
    let bwd: Vec<f64> = (0..=n)
        .map(|j| if j == 0 || j == n { 0.0 } else { coeffs.backward_weight(j) })
        .collect();

    // zero-based row k is cell k + 1, bounded by edges k and k + 1
    let diag = (0..n).map(|k| shift + (bwd[k + 1] + fwd[k]) / h).collect();
    let upper = (0..n - 1).map(|k| -fwd[k + 1] / h).collect();
    let lower = (0..n - 1).map(|k| -bwd[k + 1] / h).collect();
    let mut sys = TridiagonalSystem::new(lower, diag, upper, vec![0.0; n])?;
    sys.singular = scheme == Scheme::Stationary;
    Ok(sys)
}

/// Assembles one implicit step (or the stationary system).
pub fn assemble_step(
    coeffs: &EdgeCoefficients,
    scheme: Scheme,
    tau: f64,
    u_prev: &[f64],
    u_prev2: Option<&[f64]>,
    g_next: &[f64],
) -> Result<TridiagonalSystem> {
    let n = coeffs.n_cells();
    for v in [u_prev, g_next] {
        if v.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: v.len(),
            });
        }
    }
    let mut sys = assemble_matrix(coeffs, scheme, tau)?;
    sys.rhs = match scheme {
        Scheme::Stationary => g_next.to_vec(),
        Scheme::Bdf1 => u_prev
            .iter()
            .zip(g_next)
            .map(|(u, g)| u / tau + g)
            .collect(),
        Scheme::Bdf2 => {
            let u2 = u_prev2.ok_or(Error::MissingHistory)?;
            if u2.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    actual: u2.len(),
                });
            }
            u_prev
                .iter()
                .zip(u2)
                .zip(g_next)
                .map(|((u1, u2), g)| (4.0 * u1 - u2) / (2.0 * tau) + g)
                .collect()
        }
    };
    Ok(sys)
}

/// Discrete equilibrium with `F_j = 0` on every interior edge, scaled so that
/// `h * sum(u) = 1`.
pub fn discrete_equilibrium(coeffs: &EdgeCoefficients) -> Vec<f64> {
    let n = coeffs.n_cells();
    // log-space recursion avoids overflow for steep potentials
    let mut log_u = vec![0.0; n];
    for j in 1..n {
        log_u[j] = log_u[j - 1] + (coeffs.backward_weight(j) / coeffs.forward_weight(j)).ln();
    }
    let top = log_u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut u: Vec<f64> = log_u.iter().map(|l| (l - top).exp()).collect();
    let mass = coeffs.h * u.iter().sum::<f64>();
    u.iter_mut().for_each(|v| *v /= mass);
    u
}
