//! Uniform staggered grids and the factor-three fine/coarse pair.
//!
//! Cells are numbered `1..=N` and edges `0..=N`, so edge `i - 1` and edge `i`
//! bound cell `i`. Coordinates come from an affine map of the integer index,
//! which makes coarse edges and centers bit-identical to the coinciding fine
//! ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaggeredGrid {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    pub h: f64,
}

impl StaggeredGrid {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize) -> Result<Self> {
        if !(x_left.is_finite() && x_right.is_finite()) || x_left >= x_right {
            return Err(Error::InvalidDomain { x_left, x_right });
        }
        if n_cells < 3 {
            return Err(Error::TooFewCells { n_cells });
        }
        Ok(Self {
            x_left,
            x_right,
            n_cells,
            h: (x_right - x_left) / n_cells as f64,
        })
    }

    #[inline]
    fn lerp(&self, num: usize, den: usize) -> f64 {
        let s = num as f64 / den as f64;
        (1.0 - s) * self.x_left + s * self.x_right
    }

    /// Edge `j` in `0..=N`.
    #[inline]
    pub fn edge(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n_cells);
        self.lerp(j, self.n_cells)
    }

    /// Center of cell `i` in `1..=N`.
    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        debug_assert!(i >= 1 && i <= self.n_cells);
        self.lerp(2 * i - 1, 2 * self.n_cells)
    }

    pub fn centers(&self) -> Vec<f64> {
        (1..=self.n_cells).map(|i| self.center(i)).collect()
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|j| self.edge(j)).collect()
    }

    /// Samples `f` at the cell centers.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (1..=self.n_cells).map(|i| f(self.center(i))).collect()
    }

    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn same_domain(&self, domain: (f64, f64)) -> bool {
        self.x_left == domain.0 && self.x_right == domain.1
    }
}

/// Fine grid plus the grid obtained by merging each run of three fine cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHierarchy {
    pub fine: StaggeredGrid,
    pub coarse: StaggeredGrid,
}

impl GridHierarchy {
    pub fn new(fine: StaggeredGrid) -> Result<Self> {
        if !fine.n_cells.is_multiple_of(3) {
            return Err(Error::NotDivisibleByThree {
                n_cells: fine.n_cells,
            });
        }
        let n_coarse = fine.n_cells / 3;
        if n_coarse < 3 {
            return Err(Error::CoarseTooSmall { n_cells: n_coarse });
        }
        let coarse = StaggeredGrid::new(fine.x_left, fine.x_right, n_coarse)?;
        Ok(Self { fine, coarse })
    }

    /// Fine cell (one-based) whose center coincides with coarse cell `coarse_cell`.
    #[inline]
    pub fn fine_center_of(coarse_cell: usize) -> usize {
        3 * coarse_cell - 1
    }

    /// Fine edge coinciding with coarse edge `coarse_edge`.
    #[inline]
    pub fn fine_edge_of(coarse_edge: usize) -> usize {
        3 * coarse_edge
    }
}

pub fn make_grid(x_left: f64, x_right: f64, n_cells: usize) -> Result<StaggeredGrid> {
    StaggeredGrid::new(x_left, x_right, n_cells)
}

pub fn make_hierarchy(fine: StaggeredGrid) -> Result<GridHierarchy> {
    GridHierarchy::new(fine)
}
