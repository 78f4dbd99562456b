//! Piecewise-parabolic reconstruction of cell averages, the Rusanov flux and
//! the finite-volume tendency built from them.
//!
//! Edge values come from the fourth-order interpolant
//! `u_{j+½} = 7/12 (ū_j + ū_{j+1}) − 1/12 (ū_{j−1} + ū_{j+2})`.
//! In monotone mode each cell first clamps its edge values to
//! `ū_j ± ½|σ_j|`, with `σ_j` the monotonized-central slope, and the parabola
//! is then flattened at local extrema and steepened where it would overshoot.

use crate::error::{Error, Result};
use crate::mesh::{wrap_index, StateField, StateKind, UniformMesh, MIN_CELLS};
use crate::problems::ProblemSpec;

/// Per-cell parabola on `ξ ∈ [0, 1]` with mean `mean[j]`, `p(0) = left[j]`
/// and `p(1) = right[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicReconstruction {
    pub mean: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl ParabolicReconstruction {
    pub fn n_cells(&self) -> usize {
        self.mean.len()
    }

    /// `6 (ū − (u_L + u_R)/2)`, the coefficient of `ξ(1 − ξ)`.
    pub fn curvature(&self, j: usize) -> f64 {
        6.0 * (self.mean[j] - 0.5 * (self.left[j] + self.right[j]))
    }

    pub fn value(&self, j: usize, xi: f64) -> f64 {
        let (l, r) = (self.left[j], self.right[j]);
        l + xi * (r - l) + self.curvature(j) * xi * (1.0 - xi)
    }

    /// `∫₀^ξ p_j`.
    pub fn antiderivative(&self, j: usize, xi: f64) -> f64 {
        let (l, r) = (self.left[j], self.right[j]);
        let xi2 = xi * xi;
        l * xi + 0.5 * (r - l) * xi2 + self.curvature(j) * (0.5 * xi2 - xi2 * xi / 3.0)
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < MIN_CELLS {
        Err(Error::TooFewCells {
            got: n,
            min: MIN_CELLS,
        })
    } else {
        Ok(())
    }
}

/// Fourth-order edge values of periodic cell averages. Entry `e` is the edge
/// between cells `e − 1` and `e`; entries `0` and `n` coincide.
pub fn interpolate_edges(ubar: &[f64]) -> Result<Vec<f64>> {
    let n = ubar.len();
    check_len(n)?;
    let at = |j: isize| ubar[wrap_index(j, n)];
    Ok((0..=n as isize)
        .map(|e| 7.0 / 12.0 * (at(e - 1) + at(e)) - 1.0 / 12.0 * (at(e - 2) + at(e + 1)))
        .collect())
}

fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Monotonized-central slope of the middle cell.
pub fn mc_limit(prev: f64, centre: f64, next: f64) -> f64 {
    minmod3(
        0.5 * (next - prev),
        2.0 * (next - centre),
        2.0 * (centre - prev),
    )
}

pub fn reconstruct(ubar: &[f64], monotone: bool) -> Result<ParabolicReconstruction> {
    let n = ubar.len();
    let edges = interpolate_edges(ubar)?;
    let mut left = edges[..n].to_vec();
    let mut right = edges[1..].to_vec();
    if !monotone {
        return Ok(ParabolicReconstruction {
            mean: ubar.to_vec(),
            left,
            right,
        });
    }

    let at = |j: isize| ubar[wrap_index(j, n)];
    for j in 0..n {
        let half = 0.5 * mc_limit(at(j as isize - 1), ubar[j], at(j as isize + 1)).abs();
        let (lo, hi) = (ubar[j] - half, ubar[j] + half);
        left[j] = left[j].clamp(lo, hi);
        right[j] = right[j].clamp(lo, hi);
    }
    for j in 0..n {
        let (l, r, m) = (left[j], right[j], ubar[j]);
        if (r - m) * (m - l) <= 0.0 {
            left[j] = m;
            right[j] = m;
            continue;
        }
        let jump = r - l;
        let bulge = jump * 6.0 * (m - 0.5 * (l + r));
        let sq = jump * jump;
        if bulge > sq {
            left[j] = 3.0 * m - 2.0 * r;
        } else if -sq > bulge {
            right[j] = 3.0 * m - 2.0 * l;
        }
    }
    Ok(ParabolicReconstruction {
        mean: ubar.to_vec(),
        left,
        right,
    })
}

/// Local Lax–Friedrichs flux through an edge with unit normal `n_hat`
/// pointing from the interior state to the exterior one.
pub fn rusanov_flux(u_int: f64, u_ext: f64, prob: &ProblemSpec, x_edge: f64, n_hat: f64) -> f64 {
    let speed = prob
        .wave_speed(u_int, x_edge)
        .abs()
        .max(prob.wave_speed(u_ext, x_edge).abs());
    0.5 * ((prob.flux(u_int, x_edge) + prob.flux(u_ext, x_edge)) * n_hat.signum()
        - speed * (u_ext - u_int))
}

/// Finite-volume tendency of a cell-average or cell-integral state.
pub fn fv_tendency(
    state: &StateField,
    t: f64,
    prob: &ProblemSpec,
    monotone: bool,
) -> Result<Vec<f64>> {
    let dx = state.mesh.dx();
    let mut out = vec![0.0; state.data.len()];
    match state.kind {
        StateKind::CellAverages => {
            fv_tendency_into(&state.data, &state.mesh, t, prob, monotone, None, &mut out)?
        }
        StateKind::CellIntegrals => {
            let avg: Vec<f64> = state.data.iter().map(|u| u / dx).collect();
            fv_tendency_into(&avg, &state.mesh, t, prob, monotone, None, &mut out)?;
            out.iter_mut().for_each(|v| *v *= dx);
        }
        StateKind::PointValues => {
            return Err(Error::WrongStateKind {
                got: state.kind,
                expected: "cell averages or integrals",
            })
        }
    }
    Ok(out)
}

/// `dū/dt` into `out`. `source` optionally supplies precomputed cell-mean
/// sources; otherwise they are integrated by Gauss–Legendre quadrature.
pub(crate) fn fv_tendency_into(
    avg: &[f64],
    mesh: &UniformMesh,
    t: f64,
    prob: &ProblemSpec,
    monotone: bool,
    source: Option<&[f64]>,
    out: &mut [f64],
) -> Result<()> {
    let n = mesh.n_cells();
    let dx = mesh.dx();
    let recon = reconstruct(avg, monotone)?;
    let fluxes: Vec<f64> = (0..=n as isize)
        .map(|e| {
            let u_int = recon.right[wrap_index(e - 1, n)];
            let u_ext = recon.left[wrap_index(e, n)];
            rusanov_flux(u_int, u_ext, prob, mesh.edge_unwrapped(e), 1.0)
        })
        .collect();
    let edges = mesh.edges();
    let forced = prob.has_source();
    for j in 0..n {
        let (lo, hi) = (edges[j], edges[j + 1]);
        let s = match source {
            Some(s) => s[j],
            None if forced => prob.source_cell_average(lo, hi, t),
            None => 0.0,
        };
        let damp = prob.damping_cell_average(avg[j], recon.left[j], recon.right[j], lo, hi);
        out[j] = -(fluxes[j + 1] - fluxes[j]) / dx + s - damp;
    }
    Ok(())
}

/// Integrals of the fine-mesh parabolas over each coarse cell. The meshes
/// need not be nested.
pub fn integrate_to_coarse(
    recon: &ParabolicReconstruction,
    fine: &UniformMesh,
    coarse: &UniformMesh,
) -> Result<Vec<f64>> {
    fine.check_same_domain(coarse)?;
    if fine.n_cells() < coarse.n_cells() {
        return Err(Error::NotFiner {
            fine: fine.n_cells(),
            coarse: coarse.n_cells(),
        });
    }
    if recon.n_cells() != fine.n_cells() {
        return Err(Error::LengthMismatch(recon.n_cells(), fine.n_cells()));
    }
    let dxf = fine.dx();
    let fe = fine.edges();
    let ce = coarse.edges();
    let nc = coarse.n_cells();
    let mut out = vec![0.0; nc];
    let mut k = 0;
    for j in 0..fine.n_cells() {
        let (a, b) = (fe[j], fe[j + 1]);
        let mut lo = a;
        loop {
            while k + 1 < nc && ce[k + 1] <= lo {
                k += 1;
            }
            let hi = if k + 1 < nc { b.min(ce[k + 1]) } else { b };
            let xi_lo = (lo - a) / dxf;
            let xi_hi = if hi >= b { 1.0 } else { (hi - a) / dxf };
            out[k] += dxf * (recon.antiderivative(j, xi_hi) - recon.antiderivative(j, xi_lo));
            if hi >= b {
                break;
            }
            lo = hi;
        }
    }
    Ok(out)
}
