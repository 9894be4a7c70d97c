//! Time-loop checks against a dense reference implementation kept here.

use std::sync::Arc;

use ccfp::grid::{make_grid, GridHierarchy};
use ccfp::operator::{edge_coefficients, ProblemSpec, Reference, Scheme};
use ccfp::problems::{builtin, BenchmarkId};
use ccfp::timeloop::{run_bdf1, run_bdf2, run_transient, RunReport, TauLaw};
use ccfp::twolevel::{CycleConfig, StopRule};

fn hier(p: &ProblemSpec, n: usize) -> GridHierarchy {
    GridHierarchy::new(make_grid(p.domain.0, p.domain.1, n).unwrap()).unwrap()
}

fn tight() -> CycleConfig {
    CycleConfig {
        stop: StopRule::Residual,
        tol: 1e-12,
        ..CycleConfig::default()
    }
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Plain Chang-Cooper march: `F_j = C/h (u_{j+1} - u_j) + B ((1 - d) u_{j+1} + d u_j)`
/// with `d = 1/w - 1/(e^w - 1)`, dense matrices, first BDF2 step by BDF1.
fn dense_march(p: &ProblemSpec, n: usize, tau: f64, scheme: Scheme) -> Vec<Vec<f64>> {
    let (a, b) = p.domain;
    let h = (b - a) / n as f64;
    let xc: Vec<f64> = (0..n).map(|i| a + (i as f64 + 0.5) * h).collect();
    let steps = (p.t_final / tau).round() as usize;
    let mut levels = vec![xc.iter().map(|&x| (p.u0)(x)).collect::<Vec<f64>>()];
    for m in 0..steps {
        let t = m as f64 * tau;
        let mut k = vec![vec![0.0; n]; n];
        for j in 1..n {
            let x = a + j as f64 * h;
            let (bj, cj) = ((p.b)(x, t), (p.c)(x, t));
            let w = h * bj / cj;
            let d = if w.abs() < 1e-6 { 0.5 - w / 12.0 } else { 1.0 / w - 1.0 / w.exp_m1() };
            let right = cj / h + bj * (1.0 - d);
            let left = -cj / h + bj * d;
            k[j - 1][j] += right / h;
            k[j - 1][j - 1] += left / h;
            k[j][j] -= right / h;
            k[j][j - 1] -= left / h;
        }
        let bdf2 = scheme == Scheme::Bdf2 && m > 0;
        let shift = if bdf2 { 1.5 / tau } else { 1.0 / tau };
        let u = &levels[m];
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let g = (p.g)(xc[i], t + tau);
                if bdf2 {
                    (4.0 * u[i] - levels[m - 1][i]) / (2.0 * tau) + g
                } else {
                    u[i] / tau + g
                }
            })
            .collect();
        let mat: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { shift } else { 0.0 } - k[i][j]).collect())
            .collect();
        levels.push(dense_solve(mat, rhs));
    }
    levels
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn spacetime_l2(p: &ProblemSpec, levels: &[Vec<f64>], n: usize, tau: f64) -> f64 {
    let Some(Reference::Transient(exact)) = &p.u_exact else { panic!("needs a transient reference") };
    let (a, b) = p.domain;
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for (m, u) in levels.iter().enumerate() {
        for (i, v) in u.iter().enumerate() {
            let e = v - exact(a + (i as f64 + 0.5) * h, m as f64 * tau);
            sum += e * e;
        }
    }
    tau * h * h * sum
}

#[test]
fn matches_dense_reference_on_every_benchmark() {
    for id in BenchmarkId::ALL {
        let p = builtin(id).with_t_final(0.5);
        let cfg = tight().with_normalize(false);
        for scheme in [Scheme::Bdf1, Scheme::Bdf2] {
            let r = run_transient(&p, &hier(&p, 27), scheme, 0.05, &cfg, &[]).unwrap();
            let reference = dense_march(&p, 27, 0.05, scheme);
            let d = max_rel(r.final_solution(), reference.last().unwrap());
            assert!(d < 1e-10, "{id} {scheme}: {d}");
        }
    }
}

#[test]
fn manufactured_ou_table_row() {
    let p = builtin(BenchmarkId::OuManufactured);
    let tau = TauLaw::Table2.tau(81, 1.0);
    let r1 = run_bdf1(&p, &hier(&p, 81), tau, &CycleConfig::default()).unwrap();
    let r2 = run_bdf2(&p, &hier(&p, 81), tau, &CycleConfig::default()).unwrap();
    let l2_1 = r1.error_norms.unwrap().l2_paper;
    assert!(l2_1 > 1.9e-6 / 3.0 && l2_1 < 1.9e-6 * 3.0, "{l2_1}");
    assert!(r1.max_cycles() <= 5);

    let ref1 = spacetime_l2(&p, &dense_march(&p, 81, tau, Scheme::Bdf1), 81, tau);
    let ref2 = spacetime_l2(&p, &dense_march(&p, 81, tau, Scheme::Bdf2), 81, tau);
    let l2_2 = r2.error_norms.unwrap().l2_paper;
    assert!((l2_1 / ref1 - 1.0).abs() < 1e-3, "{l2_1} vs {ref1}");
    assert!((l2_2 / ref2 - 1.0).abs() < 1e-3, "{l2_2} vs {ref2}");
}

#[test]
fn bdf1_and_bdf2_agree_within_their_errors() {
    for id in [BenchmarkId::OuManufactured, BenchmarkId::MohammadiOu] {
        let p = builtin(id);
        let h = hier(&p, 81);
        let r1 = run_bdf1(&p, &h, 0.01, &CycleConfig::default()).unwrap();
        let r2 = run_bdf2(&p, &h, 0.01, &CycleConfig::default()).unwrap();
        let gap = r1.final_solution().iter().zip(r2.final_solution()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let err = r1.final_error.unwrap().linf.max(r2.final_error.unwrap().linf);
        assert!(gap <= 10.0 * err, "{id}: gap {gap} vs error {err}");
    }
}

fn source_free() -> ProblemSpec {
    ProblemSpec::from_flux_form("ou", Arc::new(|x, _| x), Arc::new(|_, _| 0.5), (-6.0, 6.0), 2.0)
        .with_initial(Arc::new(|x: f64| (-3.0 * (x + 2.0) * (x + 2.0)).exp()))
}

#[test]
fn conservation_to_1e12() {
    let p = source_free();
    for scheme in [Scheme::Bdf1, Scheme::Bdf2] {
        let r = run_transient(&p, &hier(&p, 81), scheme, 0.01, &tight(), &[]).unwrap();
        let m0 = r.mass_history[0];
        let drift = r.mass_history.iter().fold(0.0_f64, |w, m| w.max(((m - m0) / m0).abs()));
        assert!(drift <= 1e-12, "{scheme}: {drift}");
        assert_eq!(r.mass_history.len(), r.steps + 1);
        assert_eq!(r.min_value_history.len(), r.steps + 1);
    }
}

#[test]
fn bdf1_positivity_matches_dense_oracle() {
    let p = source_free();
    let r = run_bdf1(&p, &hier(&p, 27), 0.05, &tight()).unwrap();
    let reference = dense_march(&p, 27, 0.05, Scheme::Bdf1);
    for level in &reference {
        assert!(level.iter().all(|v| *v >= -1e-14));
    }
    assert!(r.min_value_history.iter().all(|v| *v >= -1e-14));
    assert!(max_rel(r.final_solution(), reference.last().unwrap()) < 1e-10);
}

#[test]
fn nonlinear_snapshots_and_symmetry() {
    let p = builtin(BenchmarkId::NonlinearBimodal).with_t_final(5.0);
    let cfg = CycleConfig::default().with_normalize(true);
    let r: RunReport = run_transient(&p, &hier(&p, 81), Scheme::Bdf1, 5.0 / 500.0, &cfg, &[0.5, 1.0, 3.0]).unwrap();
    let times: Vec<f64> = r.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(times.len(), 4);
    for (t, want) in times.iter().zip([0.5, 1.0, 3.0, 5.0]) {
        assert!((t - want).abs() < 1e-12);
    }
    let u = r.final_solution();
    for i in 0..81 {
        assert!((u[i] - u[80 - i]).abs() <= 1e-10);
    }
    let coeffs = edge_coefficients(&p, &r.grid, 0.0).unwrap();
    assert!(coeffs.delta.iter().all(|d| *d > 0.0 && *d < 1.0));
}
