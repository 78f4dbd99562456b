//! Spatial scheme selection and the assembled method-of-lines right-hand side.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{StateField, StateKind, UniformMesh};
use crate::problems::{Equation, ManufacturedSolution, ProblemSpec, GAUSS5};
use crate::spatial_fd::{fd_tendency_into, FdOrder};
use crate::spatial_ppr::fv_tendency_into;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpatialMethod {
    Fd(FdOrder),
    Ppr { monotone: bool },
}

impl SpatialMethod {
    pub const ALL: [SpatialMethod; 5] = [
        SpatialMethod::Fd(FdOrder::First),
        SpatialMethod::Fd(FdOrder::Second),
        SpatialMethod::Fd(FdOrder::Third),
        SpatialMethod::Ppr { monotone: false },
        SpatialMethod::Ppr { monotone: true },
    ];

    pub fn token(self) -> &'static str {
        match self {
            SpatialMethod::Fd(FdOrder::First) => "fd1",
            SpatialMethod::Fd(FdOrder::Second) => "fd2",
            SpatialMethod::Fd(FdOrder::Third) => "fd3",
            SpatialMethod::Ppr { monotone: false } => "ppr",
            SpatialMethod::Ppr { monotone: true } => "ppr-mono",
        }
    }

    pub fn is_finite_volume(self) -> bool {
        matches!(self, SpatialMethod::Ppr { .. })
    }
}

impl fmt::Display for SpatialMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SpatialMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('_', "-");
        SpatialMethod::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| Error::Config(format!("unknown spatial scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeConfig {
    pub spatial: SpatialMethod,
    pub kind: StateKind,
}

impl SchemeConfig {
    pub fn new(spatial: SpatialMethod, kind: StateKind) -> Result<Self> {
        if spatial.is_finite_volume() != kind.is_finite_volume() {
            return Err(Error::Config(format!(
                "scheme {spatial} cannot evolve {kind:?}"
            )));
        }
        Ok(Self { spatial, kind })
    }

    pub fn fd(order: FdOrder) -> Self {
        Self {
            spatial: SpatialMethod::Fd(order),
            kind: StateKind::PointValues,
        }
    }

    /// Cell-averaged prognostic.
    pub fn ppr(monotone: bool) -> Self {
        Self {
            spatial: SpatialMethod::Ppr { monotone },
            kind: StateKind::CellAverages,
        }
    }

    /// Cell-integrated prognostic.
    pub fn ppr_integrated(monotone: bool) -> Self {
        Self {
            spatial: SpatialMethod::Ppr { monotone },
            kind: StateKind::CellIntegrals,
        }
    }

    /// Nominal order of the spatial error in the prognostic variable. For the
    /// parabolic schemes a cell-averaged prognostic is taken one order below
    /// the interpolant, and the limited variant one order below that.
    pub fn spatial_order(&self) -> u32 {
        match self.spatial {
            SpatialMethod::Fd(o) => o.order(),
            SpatialMethod::Ppr { monotone } => {
                let m = if monotone { 3 } else { 4 };
                if self.kind == StateKind::CellIntegrals {
                    m
                } else {
                    m - 1
                }
            }
        }
    }
}

impl fmt::Display for SchemeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StateKind::CellIntegrals => write!(f, "{}-integrated", self.spatial),
            _ => write!(f, "{}", self.spatial),
        }
    }
}

/// Trigonometric basis of the manufactured source at fixed sample points, so
/// that each evaluation needs two transcendental calls instead of several per
/// point.
#[derive(Debug, Clone)]
struct SourceTable {
    sol: ManufacturedSolution,
    equation: Equation,
    // x, sin kx, cos kx, sin 2kx, cos 2kx
    samples: Vec<[f64; 5]>,
    weights: Vec<f64>,
    per_value: usize,
}

impl SourceTable {
    fn new(sol: ManufacturedSolution, equation: Equation, xs: Vec<f64>, weights: Vec<f64>, per_value: usize) -> Self {
        let k = sol.wavenumber;
        let samples = xs
            .into_iter()
            .map(|x| {
                let (s1, c1) = (k * x).sin_cos();
                let (s2, c2) = (2.0 * k * x).sin_cos();
                [x, s1, c1, s2, c2]
            })
            .collect();
        Self {
            sol,
            equation,
            samples,
            weights,
            per_value,
        }
    }

    fn fill(&self, t: f64, out: &mut [f64]) {
        let (sw, cw) = (self.sol.omega() * t).sin_cos();
        let a = self.sol.amplitude;
        let k = self.sol.wavenumber;
        let w = self.sol.omega();
        let source = |&[x, s1, c1, s2, c2]: &[f64; 5]| {
            // θ1 = kx − ωt, θ2 = 2kx − ωt
            let sin1 = s1 * cw - c1 * sw;
            let cos1 = c1 * cw + s1 * sw;
            let sin2 = s2 * cw - c2 * sw;
            let cos2 = c2 * cw + s2 * sw;
            let u = a * (sin1 + 2.0 * cos2);
            let ut = a * w * (-cos1 + 2.0 * sin2);
            let ux = a * k * (cos1 - 4.0 * sin2);
            match self.equation {
                Equation::LinearVariable { p, q } => ut + q.c1 * u + q.at(x) * ux + p.at(x) * u,
                Equation::Nonlinear { mean, damping } => ut + (mean + u) * ux + damping * (mean + u),
                Equation::ConstantAdvection { speed } => ut + speed * ux,
            }
        };
        let m = self.per_value;
        for (j, o) in out.iter_mut().enumerate() {
            let range = j * m..(j + 1) * m;
            *o = self.samples[range.clone()]
                .iter()
                .zip(&self.weights[range])
                .map(|(s, w)| w * source(s))
                .sum();
        }
    }
}

/// A problem discretized in space on one mesh: the ODE system handed to a
/// time stepper.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub prob: ProblemSpec,
    pub scheme: SchemeConfig,
    pub mesh: Arc<UniformMesh>,
    source: Option<SourceTable>,
}

impl Discretization {
    pub fn new(prob: &ProblemSpec, scheme: SchemeConfig, mesh: Arc<UniformMesh>) -> Result<Self> {
        SchemeConfig::new(scheme.spatial, scheme.kind)?;
        let source = prob.manufactured().map(|sol| {
            if scheme.spatial.is_finite_volume() {
                let mut xs = Vec::with_capacity(5 * mesh.n_cells());
                let mut ws = Vec::with_capacity(5 * mesh.n_cells());
                for e in mesh.edges().windows(2) {
                    let mid = 0.5 * (e[0] + e[1]);
                    let half = 0.5 * (e[1] - e[0]);
                    for &(node, weight) in &GAUSS5 {
                        xs.push(mid + half * node);
                        ws.push(0.5 * weight);
                    }
                }
                SourceTable::new(*sol, prob.equation, xs, ws, 5)
            } else {
                let n = mesh.n_cells();
                SourceTable::new(*sol, prob.equation, mesh.nodes().to_vec(), vec![1.0; n], 1)
            }
        });
        Ok(Self {
            prob: prob.clone(),
            scheme,
            mesh,
            source,
        })
    }

    pub fn n(&self) -> usize {
        self.mesh.n_cells()
    }

    /// `du/dt` of the prognostic variable.
    pub fn tendency(&self, u: &[f64], t: f64, out: &mut [f64]) {
        let src = self.source.as_ref().map(|s| {
            let mut v = vec![0.0; out.len()];
            s.fill(t, &mut v);
            v
        });
        match self.scheme.spatial {
            SpatialMethod::Fd(order) => {
                fd_tendency_into(u, &self.mesh, t, &self.prob, order, src.as_deref(), out)
            }
            SpatialMethod::Ppr { monotone } => {
                let dx = self.mesh.dx();
                if self.scheme.kind == StateKind::CellIntegrals {
                    let avg: Vec<f64> = u.iter().map(|v| v / dx).collect();
                    fv_tendency_into(&avg, &self.mesh, t, &self.prob, monotone, src.as_deref(), out)
                        .expect("mesh size checked at construction");
                    out.iter_mut().for_each(|o| *o *= dx);
                } else {
                    fv_tendency_into(u, &self.mesh, t, &self.prob, monotone, src.as_deref(), out)
                        .expect("mesh size checked at construction");
                }
            }
        }
    }

    /// Exact prognostic state at time `t`.
    pub fn exact_state(&self, t: f64) -> Result<StateField> {
        let data = exact_values(&self.prob, &self.mesh, self.scheme.kind, t)?;
        StateField::new(self.scheme.kind, data, self.mesh.clone(), t)
    }
}

/// Exact data of the given kind on `mesh`: node values, cell averages or
/// cell integrals.
pub fn exact_values(prob: &ProblemSpec, mesh: &UniformMesh, kind: StateKind, t: f64) -> Result<Vec<f64>> {
    match kind {
        StateKind::PointValues => mesh.nodes().iter().map(|&x| prob.exact_solution(x, t)).collect(),
        StateKind::CellAverages | StateKind::CellIntegrals => {
            let scale = if kind == StateKind::CellIntegrals { mesh.dx() } else { 1.0 };
            mesh.edges()
                .windows(2)
                .map(|e| prob.exact_cell_average(e[0], e[1], t).map(|v| v * scale))
                .collect()
        }
    }
}
