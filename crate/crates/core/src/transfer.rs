//! Inter-grid transfer for the factor-three nested pair.
//!
//! Coarse cell `I` covers fine cells `3I-2, 3I-1, 3I` and its center is the
//! center of fine cell `3I-1`, so restriction is a plain copy. Prolongation
//! evaluates the quadratic Lagrange polynomial through three coarse centers.

use crate::error::{Error, Result};
use crate::grid::GridHierarchy;

fn check(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::SizeMismatch { expected, actual });
    }
    Ok(())
}

/// Straight injection of a cell-centered vector.
pub fn restrict_injection(hier: &GridHierarchy, fine: &[f64]) -> Result<Vec<f64>> {
    check(hier.fine.n_cells, fine.len())?;
    Ok((1..=hier.coarse.n_cells)
        .map(|i| fine[GridHierarchy::fine_center_of(i) - 1])
        .collect())
}

/// Straight injection of an edge vector (coarse edge `I` = fine edge `3I`).
pub fn restrict_flux_injection(hier: &GridHierarchy, fine_edges: &[f64]) -> Result<Vec<f64>> {
    check(hier.fine.n_cells + 1, fine_edges.len())?;
    Ok((0..=hier.coarse.n_cells)
        .map(|j| fine_edges[GridHierarchy::fine_edge_of(j)])
        .collect())
}

/// Quadratic Lagrange interpolation of coarse center values onto fine centers.
///
/// A fine cell in coarse cell `I` uses the triple `(I-1, I, I+1)`, shifted
/// inward to the first or last three coarse cells at the walls.
pub fn prolong_quadratic(hier: &GridHierarchy, coarse: &[f64]) -> Result<Vec<f64>> {
    let nc = hier.coarse.n_cells;
    check(nc, coarse.len())?;
    if nc < 3 {
        return Err(Error::CoarseTooSmall { n_cells: nc });
    }
    let mut fine = Vec::with_capacity(hier.fine.n_cells);
    for i in 1..=hier.fine.n_cells {
        let parent = i.div_ceil(3);
        let mid = parent.clamp(2, nc - 1);
        let (x1, x2, x3) = (
            hier.coarse.center(mid - 1),
            hier.coarse.center(mid),
            hier.coarse.center(mid + 1),
        );
        let (u1, u2, u3) = (coarse[mid - 2], coarse[mid - 1], coarse[mid]);
        let x = hier.fine.center(i);
        let l1 = (x - x2) * (x - x3) / ((x1 - x2) * (x1 - x3));
        let l2 = (x - x1) * (x - x3) / ((x2 - x1) * (x2 - x3));
        let l3 = (x - x1) * (x - x2) / ((x3 - x1) * (x3 - x2));
        fine.push(l1 * u1 + l2 * u2 + l3 * u3);
    }
    Ok(fine)
}
