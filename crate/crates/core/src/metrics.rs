//! Error norms and convergence orders.
//!
//! Two families are reported side by side. The `*_paper` norms are the
//! benchmark table conventions: `h sum|e|` and `h^2 sum e^2` for a single
//! time level, `h^2 tau sum_m sum_i |e|` and `tau h^2 sum_m sum_i e^2` over
//! space-time. Note that the L2 variants carry no square root. The standard
//! norms are `h sum|e|`, `sqrt(h sum e^2)` and their `tau`-weighted
//! space-time analogues.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub n_cells: usize,
    pub n_steps: usize,
    pub l1_paper: f64,
    pub l2_paper: f64,
    pub l1_std: f64,
    pub l2_std: f64,
    pub linf: f64,
}

/// `h^2 sum u^2`, the quantity monitored by the stopping rule.
pub fn paper_l2(u: &[f64], h: f64) -> f64 {
    h * h * u.iter().map(|v| v * v).sum::<f64>()
}

pub fn norms_stationary(e: &[f64], h: f64) -> ErrorRecord {
    let abs_sum: f64 = e.iter().map(|v| v.abs()).sum();
    let sq_sum: f64 = e.iter().map(|v| v * v).sum();
    ErrorRecord {
        n_cells: e.len(),
        n_steps: 0,
        l1_paper: h * abs_sum,
        l2_paper: h * h * sq_sum,
        l1_std: h * abs_sum,
        l2_std: (h * sq_sum).sqrt(),
        linf: e.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Streaming accumulator for the space-time norms.
#[derive(Debug, Clone, Default)]
pub struct SpaceTimeAccumulator {
    n_cells: usize,
    levels: usize,
    abs_sum: f64,
    sq_sum: f64,
    linf: f64,
}

impl SpaceTimeAccumulator {
    pub fn push(&mut self, e: &[f64]) {
        self.n_cells = e.len();
        self.levels += 1;
        for v in e {
            self.abs_sum += v.abs();
            self.sq_sum += v * v;
            self.linf = self.linf.max(v.abs());
        }
    }

    pub fn finish(&self, h: f64, tau: f64) -> Result<ErrorRecord> {
        if self.levels == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(ErrorRecord {
            n_cells: self.n_cells,
            n_steps: self.levels - 1,
            l1_paper: h * h * tau * self.abs_sum,
            l2_paper: tau * h * h * self.sq_sum,
            l1_std: tau * h * self.abs_sum,
            l2_std: (tau * h * self.sq_sum).sqrt(),
            linf: self.linf,
        })
    }
}

/// Space-time norms over a list of per-level error vectors.
pub fn norms_spacetime(errors_per_step: &[Vec<f64>], h: f64, tau: f64) -> Result<ErrorRecord> {
    let mut acc = SpaceTimeAccumulator::default();
    errors_per_step.iter().for_each(|e| acc.push(e));
    acc.finish(h, tau)
}

/// Least-squares order `p` in `error ~ h^p`, where each successive entry has
/// `h` smaller by `refinement_factor`.
pub fn convergence_order(errors: &[f64], refinement_factor: f64) -> Result<f64> {
    if errors.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: errors.len(),
        });
    }
    if !(refinement_factor > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "refinement factor must exceed 1, got {refinement_factor}"
        )));
    }
    if let Some(&bad) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::NonpositiveError(bad));
    }
    // x_k = log h_k = -k log(factor), y_k = log e_k
    let n = errors.len() as f64;
    let xs: Vec<f64> = (0..errors.len()).map(|k| -(k as f64) * refinement_factor.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stationary_norms() {
        assert_eq!(norms_stationary(&[0.0; 5], 0.1), ErrorRecord { n_cells: 5, ..Default::default() });
        let r = norms_stationary(&[1.0; 10], 0.1);
        assert!((r.l1_paper - 1.0).abs() < 1e-15);
        assert!((r.l2_paper - 0.1).abs() < 1e-15);
        let r = norms_stationary(&[3.0, 4.0], 1.0);
        assert_eq!(r.l2_std, 5.0);
        assert_eq!(r.linf, 4.0);
    }

    #[test]
    fn spacetime_norms() {
        let r = norms_spacetime(&[vec![0.0; 3], vec![0.0; 3]], 0.5, 0.1).unwrap();
        assert_eq!(r.l1_paper, 0.0);
        assert_eq!(r.l2_paper, 0.0);
        let r = norms_spacetime(&[vec![1.0, 1.0]], 1.0, 1.0).unwrap();
        assert_eq!(r.l1_paper, 2.0);
        let e = vec![vec![0.3, -0.2, 0.1], vec![1.0, 2.0, -0.5]];
        let a = norms_spacetime(&e, 0.2, 0.01).unwrap();
        let b = norms_spacetime(&e, 0.2, 0.02).unwrap();
        assert!((b.l1_paper - 2.0 * a.l1_paper).abs() < 1e-16);
        assert!((b.l2_paper - 2.0 * a.l2_paper).abs() < 1e-16);
        assert_eq!(norms_spacetime(&[], 1.0, 1.0), Err(Error::EmptyInput));
    }

    #[test]
    fn orders() {
        assert!((convergence_order(&[9e-6, 1e-6], 3.0).unwrap() - 2.0).abs() < 1e-12);
        let table = [1.9392e-6, 2.4187e-7, 1.6076e-8, 1.4322e-9];
        let p = convergence_order(&table, 3.0).unwrap();
        assert!((p - 2.2).abs() < 0.05, "{p}");
        assert_eq!(convergence_order(&[1e-3, 1e-3, 1e-3], 3.0).unwrap(), 0.0);
        assert!(matches!(convergence_order(&[1.0], 3.0), Err(Error::TooFewPoints { .. })));
        assert!(matches!(convergence_order(&[1.0, 0.0], 3.0), Err(Error::NonpositiveError(_))));
    }

    proptest! {
        #[test]
        fn paper_l2_relates_to_standard(e in prop::collection::vec(-10.0..10.0f64, 1..50), h in 1e-3..1.0f64) {
            let r = norms_stationary(&e, h);
            prop_assert!((r.l2_paper - h * r.l2_std * r.l2_std).abs() <= 1e-13 * (1.0 + r.l2_paper));
        }

        #[test]
        fn order_is_scale_invariant(e in prop::collection::vec(1e-9..1.0f64, 2..6), s in 1e-3..1e3f64) {
            let scaled: Vec<f64> = e.iter().map(|v| v * s).collect();
            let a = convergence_order(&e, 3.0).unwrap();
            let b = convergence_order(&scaled, 3.0).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
