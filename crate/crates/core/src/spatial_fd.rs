//! Upwind finite differences of the flux on node-centred point values.

use std::fmt;

use crate::error::{Error, Result};
use crate::mesh::{StateField, StateKind, UniformMesh};
use crate::problems::ProblemSpec;

/// Order of the upwind-biased flux difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FdOrder {
    First,
    Second,
    Third,
}

impl FdOrder {
    pub const ALL: [FdOrder; 3] = [FdOrder::First, FdOrder::Second, FdOrder::Third];

    pub fn from_order(order: u32) -> Option<Self> {
        match order {
            1 => Some(FdOrder::First),
            2 => Some(FdOrder::Second),
            3 => Some(FdOrder::Third),
            _ => None,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            FdOrder::First => 1,
            FdOrder::Second => 2,
            FdOrder::Third => 3,
        }
    }

    /// `(offset, weight)` pairs for positive wind; the sum is divided by
    /// `denominator() * dx`.
    fn stencil(self) -> &'static [(isize, f64)] {
        match self {
            FdOrder::First => &[(0, 1.0), (-1, -1.0)],
            FdOrder::Second => &[(0, 3.0), (-1, -4.0), (-2, 1.0)],
            FdOrder::Third => &[(1, 2.0), (0, 3.0), (-1, -6.0), (-2, 1.0)],
        }
    }

    fn denominator(self) -> f64 {
        match self {
            FdOrder::First => 1.0,
            FdOrder::Second => 2.0,
            FdOrder::Third => 6.0,
        }
    }
}

impl fmt::Display for FdOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fd{}", self.order())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wind {
    Positive,
    Negative,
}

/// Ghost points needed on each side by every stencil.
pub const GHOSTS: usize = 2;

/// Flux divergence of a periodic flux sampled at the nodes.
pub fn upwind_flux_divergence(
    flux: &[f64],
    mesh: &UniformMesh,
    order: FdOrder,
    wind: Wind,
) -> Result<Vec<f64>> {
    let n = mesh.n_cells();
    if flux.len() != n {
        return Err(Error::LengthMismatch(flux.len(), n));
    }
    let ext: Vec<f64> = (0..n + 2 * GHOSTS)
        .map(|i| flux[mesh.wrap(i as isize - GHOSTS as isize)])
        .collect();
    let mut out = vec![0.0; n];
    divergence_with_ghosts(&ext, mesh.dx(), order, wind, &mut out);
    Ok(out)
}

/// `ext[i]` holds the flux at node `i - GHOSTS`; writes `out.len()` values.
pub(crate) fn divergence_with_ghosts(
    ext: &[f64],
    dx: f64,
    order: FdOrder,
    wind: Wind,
    out: &mut [f64],
) {
    let stencil = order.stencil();
    let scale = 1.0 / (order.denominator() * dx);
    let sign = match wind {
        Wind::Positive => 1.0,
        Wind::Negative => -1.0,
    };
    for (j, o) in out.iter_mut().enumerate() {
        let centre = (j + GHOSTS) as isize;
        let acc: f64 = stencil
            .iter()
            .map(|&(off, w)| {
                let off = if sign > 0.0 { off } else { -off };
                w * ext[(centre + off) as usize]
            })
            .sum();
        *o = sign * acc * scale;
    }
}

/// Upwind direction from the mean characteristic speed of the state.
pub fn wind_direction(prob: &ProblemSpec, values: &[f64], coords: &[f64]) -> Wind {
    let total: f64 = values
        .iter()
        .zip(coords)
        .map(|(&u, &x)| prob.wave_speed(u, x))
        .sum();
    if total >= 0.0 {
        Wind::Positive
    } else {
        Wind::Negative
    }
}

/// Method-of-lines right-hand side `s − d(u) − D(F(u))` at the nodes.
///
/// Ghost fluxes use the unwrapped ghost coordinate, so coefficient functions
/// that are not periodic (such as `q(x) = x`) are still differenced
/// consistently across the wrap.
pub fn fd_tendency(
    state: &StateField,
    t: f64,
    prob: &ProblemSpec,
    order: FdOrder,
) -> Result<Vec<f64>> {
    if state.kind != StateKind::PointValues {
        return Err(Error::WrongStateKind {
            got: state.kind,
            expected: "point values",
        });
    }
    let mut out = vec![0.0; state.data.len()];
    fd_tendency_into(&state.data, &state.mesh, t, prob, order, None, &mut out);
    Ok(out)
}

pub(crate) fn fd_tendency_into(
    u: &[f64],
    mesh: &UniformMesh,
    t: f64,
    prob: &ProblemSpec,
    order: FdOrder,
    source: Option<&[f64]>,
    out: &mut [f64],
) {
    let n = mesh.n_cells();
    let nodes = mesh.nodes();
    let ext: Vec<f64> = (0..n + 2 * GHOSTS)
        .map(|i| {
            let j = i as isize - GHOSTS as isize;
            prob.flux(u[mesh.wrap(j)], mesh.node_unwrapped(j))
        })
        .collect();
    let wind = wind_direction(prob, u, nodes);
    divergence_with_ghosts(&ext, mesh.dx(), order, wind, out);
    let forced = prob.has_source();
    for (j, ((o, &uj), &x)) in out.iter_mut().zip(u).zip(nodes).enumerate() {
        let s = match source {
            Some(s) => s[j],
            None if forced => prob.source_term(x, t),
            None => 0.0,
        };
        *o = s - prob.damping(uj, x) - *o;
    }
}
