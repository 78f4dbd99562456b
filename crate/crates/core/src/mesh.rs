//! Uniform periodic meshes on an interval.
//!
//! Finite-volume states live on the cells; finite-difference states live on
//! the left edges of the cells (`x_j = x_lo + j dx`), so that a mesh with
//! `2n` cells contains every point of the mesh with `n` cells.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Smallest mesh that still supports the widest stencil (third-order upwind
/// and the four-cell edge interpolation).
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct UniformMesh {
    n_cells: usize,
    x_lo: f64,
    x_hi: f64,
    dx: f64,
    centers: Vec<f64>,
    edges: Vec<f64>,
}

impl UniformMesh {
    pub fn new(n_cells: usize, x_lo: f64, x_hi: f64) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::TooFewCells {
                got: n_cells,
                min: MIN_CELLS,
            });
        }
        Self::build(n_cells, x_lo, x_hi)
    }

    /// A mesh that only receives restricted data and never carries a
    /// stencil, so any positive cell count is allowed.
    pub fn restriction_target(n_cells: usize, x_lo: f64, x_hi: f64) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::TooFewCells { got: 0, min: 1 });
        }
        Self::build(n_cells, x_lo, x_hi)
    }

    fn build(n_cells: usize, x_lo: f64, x_hi: f64) -> Result<Self> {
        if !(x_lo.is_finite() && x_hi.is_finite() && x_hi > x_lo) {
            return Err(Error::InvalidDomain { lo: x_lo, hi: x_hi });
        }
        let dx = (x_hi - x_lo) / n_cells as f64;
        let mut edges: Vec<f64> = (0..=n_cells).map(|j| x_lo + j as f64 * dx).collect();
        edges[n_cells] = x_hi;
        let centers = (0..n_cells).map(|j| x_lo + (j as f64 + 0.5) * dx).collect();
        Ok(Self {
            n_cells,
            x_lo,
            x_hi,
            dx,
            centers,
            edges,
        })
    }

    /// Mesh on the unit interval, the domain of every shipped preset.
    pub fn unit(n_cells: usize) -> Result<Self> {
        Self::new(n_cells, 0.0, 1.0)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// All `n_cells + 1` cell edges, first and last coinciding under periodicity.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Grid points of the finite-difference discretization.
    pub fn nodes(&self) -> &[f64] {
        &self.edges[..self.n_cells]
    }

    /// Coordinate of node `j` without periodic wrapping, for ghost points.
    pub fn node_unwrapped(&self, j: isize) -> f64 {
        self.x_lo + j as f64 * self.dx
    }

    /// Coordinate of edge `e` without periodic wrapping.
    pub fn edge_unwrapped(&self, e: isize) -> f64 {
        self.x_lo + e as f64 * self.dx
    }

    pub fn wrap(&self, j: isize) -> usize {
        wrap_index(j, self.n_cells)
    }

    pub fn same_domain(&self, other: &UniformMesh) -> bool {
        let tol = 1e-12 * self.length().abs().max(1.0);
        (self.x_lo - other.x_lo).abs() <= tol && (self.x_hi - other.x_hi).abs() <= tol
    }

    pub(crate) fn check_same_domain(&self, other: &UniformMesh) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                a_lo: self.x_lo,
                a_hi: self.x_hi,
                b_lo: other.x_lo,
                b_hi: other.x_hi,
            })
        }
    }
}

/// Periodic index: the representative of `j` modulo `n_cells` in `[0, n_cells)`.
pub fn wrap_index(j: isize, n_cells: usize) -> usize {
    j.rem_euclid(n_cells as isize) as usize
}

/// What the numbers of a [`StateField`] represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    /// Samples at the mesh nodes.
    PointValues,
    /// Means over each cell.
    CellAverages,
    /// Integrals over each cell (`dx` times the mean).
    CellIntegrals,
}

impl StateKind {
    pub fn is_finite_volume(self) -> bool {
        !matches!(self, StateKind::PointValues)
    }
}

#[derive(Debug, Clone)]
pub struct StateField {
    pub kind: StateKind,
    pub data: Vec<f64>,
    pub mesh: Arc<UniformMesh>,
    pub time: f64,
}

impl StateField {
    pub fn new(kind: StateKind, data: Vec<f64>, mesh: Arc<UniformMesh>, time: f64) -> Result<Self> {
        if data.len() != mesh.n_cells() {
            return Err(Error::LengthMismatch(data.len(), mesh.n_cells()));
        }
        Ok(Self {
            kind,
            data,
            mesh,
            time,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Cell means regardless of whether the field stores means or integrals.
    pub fn cell_averages(&self) -> Result<Vec<f64>> {
        match self.kind {
            StateKind::CellAverages => Ok(self.data.clone()),
            StateKind::CellIntegrals => {
                let dx = self.mesh.dx();
                Ok(self.data.iter().map(|u| u / dx).collect())
            }
            StateKind::PointValues => Err(Error::WrongStateKind {
                got: self.kind,
                expected: "cell averages or integrals",
            }),
        }
    }
}
