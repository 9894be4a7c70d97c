//! Tridiagonal systems: Thomas solve, relaxation sweeps and residuals.

use crate::error::{Error, Result};

/// `lower[k]` couples row `k + 1` to column `k`; `upper[k]` couples row `k`
/// to column `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
    /// The matrix has zero column sums and no time term (stationary flux
    /// balance): it is singular with the constant vector as left null vector.
    pub singular: bool,
}

impl TridiagonalSystem {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        for (len, expected) in [(lower.len(), n - 1), (upper.len(), n - 1), (rhs.len(), n)] {
            if len != expected {
                return Err(Error::SizeMismatch {
                    expected,
                    actual: len,
                });
            }
        }
        Ok(Self {
            lower,
            diag,
            upper,
            rhs,
            singular: false,
        })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                actual: u.len(),
            });
        }
        Ok(())
    }

    /// Matrix-vector product.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let n = self.n();
        let mut y: Vec<f64> = self.diag.iter().zip(u).map(|(d, v)| d * v).collect();
        for k in 0..n - 1 {
            y[k] += self.upper[k] * u[k + 1];
            y[k + 1] += self.lower[k] * u[k];
        }
        Ok(y)
    }

    /// Same matrix, different right-hand side.
    pub fn with_rhs(&self, rhs: Vec<f64>) -> Result<Self> {
        self.check_len(&rhs)?;
        Ok(Self {
            lower: self.lower.clone(),
            diag: self.diag.clone(),
            upper: self.upper.clone(),
            rhs,
            singular: self.singular,
        })
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.lower
            .iter()
            .chain(&self.diag)
            .chain(&self.upper)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Thomas algorithm (no pivoting).
pub fn thomas_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.n();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::ZeroPivot { index: 0 });
    }
    if n > 1 {
        c[0] = sys.upper[0] / pivot;
    }
    d[0] = sys.rhs[0] / pivot;
    for k in 1..n {
        pivot = sys.diag[k] - sys.lower[k - 1] * c[k - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { index: k });
        }
        if k < n - 1 {
            c[k] = sys.upper[k] / pivot;
        }
        d[k] = (sys.rhs[k] - sys.lower[k - 1] * d[k - 1]) / pivot;
    }
    for k in (0..n - 1).rev() {
        d[k] -= c[k] * d[k + 1];
    }
    Ok(d)
}

/// Right null vector of a zero-column-sum tridiagonal matrix, scaled to a
/// unit maximum. Such a matrix annihilates `z` exactly when every interior
/// flux vanishes, so `z[k + 1] / z[k] = lower[k] / upper[k]`.
pub fn null_vector(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.n();
    let mut log_z = vec![0.0; n];
    for k in 0..n - 1 {
        let ratio = sys.lower[k] / sys.upper[k];
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::ZeroPivot { index: k + 1 });
        }
        log_z[k + 1] = log_z[k] + ratio.ln();
    }
    let top = log_z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(log_z.iter().map(|l| (l - top).exp()).collect())
}

/// Solves a consistent singular system (see [`TridiagonalSystem::singular`]).
///
/// The right-hand side is projected onto the range (zero sum), the unknown
/// where the null vector peaks is pinned, and the null component is then
/// removed so the returned solution has zero sum.
pub fn solve_singular(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.n();
    let z = null_vector(sys)?;
    let pin = z
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v > z[best] { k } else { best });
    let mean = sys.rhs.iter().sum::<f64>() / n as f64;
    let mut pinned = sys.clone();
    pinned.rhs.iter_mut().for_each(|r| *r -= mean);
    pinned.diag[pin] = 1.0;
    pinned.rhs[pin] = 0.0;
    if pin > 0 {
        pinned.lower[pin - 1] = 0.0;
    }
    if pin + 1 < n {
        pinned.upper[pin] = 0.0;
    }
    let mut x = thomas_solve(&pinned)?;
    let shift = x.iter().sum::<f64>() / z.iter().sum::<f64>();
    x.iter_mut().zip(&z).for_each(|(v, zk)| *v -= shift * zk);
    Ok(x)
}

/// Direct solve that dispatches on [`TridiagonalSystem::singular`].
pub fn direct_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    if sys.singular {
        solve_singular(sys)
    } else {
        thomas_solve(sys)
    }
}

/// `rhs - A u`.
pub fn residual(sys: &TridiagonalSystem, u: &[f64]) -> Result<Vec<f64>> {
    let au = sys.apply(u)?;
    Ok(sys.rhs.iter().zip(au).map(|(b, a)| b - a).collect())
}

/// One lexicographic Gauss-Seidel sweep, left to right.
pub fn relax_sweep(sys: &TridiagonalSystem, u: &[f64]) -> Result<Vec<f64>> {
    sys.check_len(u)?;
    let mut v = u.to_vec();
    gauss_seidel_in_place(sys, &mut v, false)?;
    Ok(v)
}

/// One Gauss-Seidel sweep, right to left.
pub fn relax_sweep_backward(sys: &TridiagonalSystem, u: &[f64]) -> Result<Vec<f64>> {
    sys.check_len(u)?;
    let mut v = u.to_vec();
    gauss_seidel_in_place(sys, &mut v, true)?;
    Ok(v)
}

pub(crate) fn gauss_seidel_in_place(sys: &TridiagonalSystem, v: &mut [f64], backward: bool) -> Result<()> {
    let n = sys.n();
    let update = |k: usize, v: &mut [f64]| {
        let d = sys.diag[k];
        if d == 0.0 {
            return Err(Error::ZeroDiagonal { index: k });
        }
        let mut s = sys.rhs[k];
        if k > 0 {
            s -= sys.lower[k - 1] * v[k - 1];
        }
        if k + 1 < n {
            s -= sys.upper[k] * v[k + 1];
        }
        v[k] = s / d;
        Ok(())
    };
    if backward {
        (0..n).rev().try_for_each(|k| update(k, v))
    } else {
        (0..n).try_for_each(|k| update(k, v))
    }
}

/// One damped Jacobi sweep with the given weight.
pub fn jacobi_sweep(sys: &TridiagonalSystem, u: &[f64], weight: f64) -> Result<Vec<f64>> {
    let r = residual(sys, u)?;
    u.iter()
        .zip(&r)
        .zip(&sys.diag)
        .enumerate()
        .map(|(k, ((v, r), d))| {
            if *d == 0.0 {
                Err(Error::ZeroDiagonal { index: k })
            } else {
                Ok(v + weight * r / d)
            }
        })
        .collect()
}
