//! Refinement studies: solves across a ladder of resolutions, error norms,
//! successive differences and least-squares order fits.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{StateField, StateKind, UniformMesh};
use crate::problems::ProblemSpec;
use crate::scheme::{exact_values, Discretization, SchemeConfig, SpatialMethod};
use crate::spatial_ppr::{integrate_to_coarse, reconstruct};
use crate::time_steppers::{bootstrap_history, step_explicit, History, Method, StartupMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefinementMode {
    SpaceTime,
    SpaceOnly,
    TimeOnly,
}

impl RefinementMode {
    pub const ALL: [RefinementMode; 3] = [
        RefinementMode::SpaceTime,
        RefinementMode::SpaceOnly,
        RefinementMode::TimeOnly,
    ];

    pub fn token(self) -> &'static str {
        match self {
            RefinementMode::SpaceTime => "space-time",
            RefinementMode::SpaceOnly => "space-only",
            RefinementMode::TimeOnly => "time-only",
        }
    }
}

impl fmt::Display for RefinementMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for RefinementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "space-time" | "spacetime" => Ok(RefinementMode::SpaceTime),
            "space-only" | "space" => Ok(RefinementMode::SpaceOnly),
            "time-only" | "time" => Ok(RefinementMode::TimeOnly),
            other => Err(Error::Config(format!("unknown refinement mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    L2,
    Linf,
}

impl Norm {
    pub fn token(self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(Norm::L2),
            "linf" | "max" => Ok(Norm::Linf),
            other => Err(Error::Config(format!("unknown norm `{other}`"))),
        }
    }
}

/// `sqrt(Δx Σ e²)`.
pub fn l2_norm(e: &[f64], dx: f64) -> f64 {
    (dx * e.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

pub fn linf_norm(e: &[f64]) -> f64 {
    e.iter().fold(0.0, |m, v| if v.abs() > m || v.is_nan() { v.abs() } else { m })
}

/// History bootstrap used unless overridden. Time-only ladders keep the mesh
/// fixed, so the exact PDE solution is not a trajectory of the semi-discrete
/// system being refined; its tendencies would plant an O(Δt²) error in the
/// first step. Those ladders start from RK4 on the semi-discrete system.
pub fn default_startup(mode: RefinementMode) -> StartupMode {
    match mode {
        RefinementMode::TimeOnly => StartupMode::RkStartup,
        _ => StartupMode::ExactSolution,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementPlan {
    pub mode: RefinementMode,
    /// Cell counts; time-only studies use the first entry only.
    pub n_cells: Vec<usize>,
    pub eta_space: f64,
    pub eta_time: f64,
    pub n_time_levels: usize,
    pub horizon: f64,
    pub norm: Norm,
    pub startup: StartupMode,
}

impl RefinementPlan {
    /// `(n_cells, dt)` per level before snapping to the horizon.
    pub fn raw_levels(&self) -> Result<Vec<(usize, f64)>> {
        if self.n_cells.is_empty() {
            return Err(Error::Config("empty cell-count ladder".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::NonPositive(self.horizon));
        }
        let dx = |n: usize| 1.0 / n as f64;
        Ok(match self.mode {
            RefinementMode::SpaceTime => self
                .n_cells
                .iter()
                .map(|&n| (n, self.eta_space * dx(n)))
                .collect(),
            RefinementMode::SpaceOnly => {
                let finest = *self.n_cells.iter().max().expect("non-empty");
                let dt = self.eta_space * dx(finest);
                self.n_cells.iter().map(|&n| (n, dt)).collect()
            }
            RefinementMode::TimeOnly => {
                let n = self.n_cells[0];
                let largest = self.eta_time * dx(n);
                (0..self.n_time_levels)
                    .map(|i| (n, largest / f64::powi(2.0, i as i32)))
                    .collect()
            }
        })
    }
}

/// Largest step not exceeding `dt` that divides `horizon` into an integer
/// number of steps. Steps within 1e-9 of an exact divisor are kept.
pub fn snap_dt(horizon: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidStep(dt));
    }
    let ratio = horizon / dt;
    let near = ratio.round();
    let steps = if near >= 1.0 && (ratio - near).abs() <= 1e-9 * near {
        near
    } else {
        ratio.ceil()
    };
    Ok((steps as usize, horizon / steps))
}

fn steps_for(horizon: f64, dt: f64) -> Result<usize> {
    let ratio = horizon / dt;
    let near = ratio.round();
    if near < 1.0 || (ratio - near).abs() > 1e-9 * near {
        return Err(Error::NonIntegralHorizon { horizon, dt, ratio });
    }
    Ok(near as usize)
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub state: StateField,
    pub error: Vec<f64>,
    pub error_l2: f64,
    pub error_linf: f64,
    pub steps: usize,
    pub stable: bool,
}

/// Integrates from exact initial data at `t = 0` to `horizon` and measures
/// the error against exact data of the same kind.
pub fn run_solve(
    prob: &ProblemSpec,
    scheme: SchemeConfig,
    method: Method,
    n_cells: usize,
    dt: f64,
    horizon: f64,
    startup: StartupMode,
) -> Result<SolveOutcome> {
    if !method.is_explicit() {
        return Err(Error::NotExplicit(method.token()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidStep(dt));
    }
    let steps = steps_for(horizon, dt)?;
    let mesh = Arc::new(UniformMesh::unit(n_cells)?);
    let disc = Discretization::new(prob, scheme, mesh.clone())?;
    let init = disc.exact_state(0.0)?;
    let dx = mesh.dx();
    let (avg, coords) = match scheme.kind {
        StateKind::PointValues => (init.data.clone(), mesh.nodes().to_vec()),
        _ => (init.cell_averages()?, mesh.centers().to_vec()),
    };
    let courant = dt * prob.max_wave_speed(&avg, &coords) / dx;
    if courant >= 1.0 {
        return Err(Error::CflViolation(courant));
    }

    let f = |u: &[f64], t: f64, out: &mut [f64]| disc.tendency(u, t, out);
    let mut hist = if method.is_multistep() {
        let exact = |t: f64| {
            disc.exact_state(t)
                .map(|s| s.data)
                .expect("exact solution checked above")
        };
        bootstrap_history(&f, method, &init.data, 0.0, dt, startup, Some(&exact))?
    } else {
        History::new()
    };

    let mut u = init.data;
    let mut stable = true;
    for i in 0..steps {
        step_explicit(&mut u, i as f64 * dt, dt, &f, method, &mut hist)?;
        if i % 32 == 31 && !u.iter().all(|v| v.is_finite()) {
            stable = false;
            break;
        }
    }
    stable &= u.iter().all(|v| v.is_finite());
    let exact = exact_values(prob, &mesh, scheme.kind, horizon)?;
    let error: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| a - b).collect();
    Ok(SolveOutcome {
        error_l2: if stable { l2_norm(&error, dx) } else { f64::NAN },
        error_linf: if stable { linf_norm(&error) } else { f64::NAN },
        state: StateField::new(scheme.kind, u, mesh, horizon)?,
        error,
        steps,
        stable,
    })
}

/// Samples nested node values of a finer point field at the coarse nodes.
pub fn restrict_points(fine: &StateField, coarse: &UniformMesh) -> Result<Vec<f64>> {
    fine.mesh.check_same_domain(coarse)?;
    let (nf, nc) = (fine.mesh.n_cells(), coarse.n_cells());
    if nf < nc {
        return Err(Error::NotFiner { fine: nf, coarse: nc });
    }
    if nf % nc != 0 {
        return Err(Error::NotNested { fine: nf, coarse: nc });
    }
    let r = nf / nc;
    Ok((0..nc).map(|j| fine.data[j * r]).collect())
}

/// Cell averages of a finite-volume field restricted to `coarse` through its
/// parabolic reconstruction.
pub fn restrict_cells(fine: &StateField, coarse: &UniformMesh, monotone: bool) -> Result<Vec<f64>> {
    let avg = fine.cell_averages()?;
    let recon = reconstruct(&avg, monotone)?;
    let ints = integrate_to_coarse(&recon, &fine.mesh, coarse)?;
    let dxc = coarse.dx();
    Ok(ints.into_iter().map(|v| v / dxc).collect())
}

fn restrict(field: &StateField, coarse: &UniformMesh, spatial: SpatialMethod) -> Result<Vec<f64>> {
    match spatial {
        SpatialMethod::Fd(_) => restrict_points(field, coarse),
        SpatialMethod::Ppr { monotone } => restrict_cells(field, coarse, monotone),
    }
}

/// Norms of differences between consecutive fields. Time-only ladders share
/// one mesh; space-only ladders are restricted to the coarsest mesh first.
pub fn successive_differences(
    fields: &[StateField],
    mode: RefinementMode,
    spatial: SpatialMethod,
    norm: Norm,
) -> Result<Vec<f64>> {
    if fields.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: fields.len(),
        });
    }
    let measure = |e: &[f64], dx: f64| match norm {
        Norm::L2 => l2_norm(e, dx),
        Norm::Linf => linf_norm(e),
    };
    match mode {
        RefinementMode::TimeOnly => fields
            .windows(2)
            .map(|w| {
                if w[0].data.len() != w[1].data.len() {
                    return Err(Error::LengthMismatch(w[0].data.len(), w[1].data.len()));
                }
                let e: Vec<f64> = w[0].data.iter().zip(&w[1].data).map(|(a, b)| a - b).collect();
                Ok(measure(&e, w[0].mesh.dx()))
            })
            .collect(),
        RefinementMode::SpaceOnly | RefinementMode::SpaceTime => {
            let coarse = fields
                .iter()
                .min_by_key(|f| f.mesh.n_cells())
                .expect("non-empty")
                .mesh
                .clone();
            let restricted: Vec<Vec<f64>> = fields
                .iter()
                .map(|f| restrict(f, &coarse, spatial))
                .collect::<Result<_>>()?;
            Ok(restricted
                .windows(2)
                .map(|w| {
                    let e: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect();
                    measure(&e, coarse.dx())
                })
                .collect())
        }
    }
}

/// Least-squares line through `(log x, log y)`: returns `(slope, intercept)`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: xs.len(),
        });
    }
    if let Some(&bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0)) {
        return Err(Error::NonPositive(bad));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::RankDeficient);
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slopes between consecutive points on a log-log scale.
pub fn pairwise_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] / y[0]).ln() / (x[1] / x[0]).ln())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTermFit {
    pub zeta_gamma: f64,
    pub zeta_gamma_plus_1: f64,
    /// Euclidean norm of the fit residual.
    pub residual: f64,
}

/// Least squares for `y ≈ ζ_γ x^γ + ζ_{γ+1} x^{γ+1}`, solved by Gram–Schmidt
/// on the column-scaled design matrix.
pub fn fit_two_term(xs: &[f64], ys: &[f64], gamma: u32) -> Result<TwoTermFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: xs.len(),
        });
    }
    let a: Vec<f64> = xs.iter().map(|x| x.powi(gamma as i32)).collect();
    let b: Vec<f64> = xs.iter().map(|x| x.powi(gamma as i32 + 1)).collect();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
    let na = dot(&a, &a).sqrt();
    let nb = dot(&b, &b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::RankDeficient);
    }
    let q1: Vec<f64> = a.iter().map(|v| v / na).collect();
    let r12 = dot(&q1, &b);
    let w: Vec<f64> = b.iter().zip(&q1).map(|(v, q)| v - r12 * q).collect();
    let r22 = dot(&w, &w).sqrt();
    if r22 <= 1e-12 * nb {
        return Err(Error::RankDeficient);
    }
    let q2: Vec<f64> = w.iter().map(|v| v / r22).collect();
    let c1 = dot(&q1, ys);
    let c2 = dot(&q2, ys);
    let zeta_gamma_plus_1 = c2 / r22;
    let zeta_gamma = (c1 - r12 * zeta_gamma_plus_1) / na;
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - zeta_gamma * x.powi(gamma as i32) - zeta_gamma_plus_1 * x.powi(gamma as i32 + 1);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(TwoTermFit {
        zeta_gamma,
        zeta_gamma_plus_1,
        residual,
    })
}

/// Expected leading exponent of the measured quantity.
pub fn theoretical_order(mode: RefinementMode, scheme: &SchemeConfig, method: Method) -> u32 {
    let alpha = scheme.spatial_order();
    let beta = method.order();
    match mode {
        RefinementMode::SpaceTime => alpha.min(beta),
        RefinementMode::SpaceOnly => alpha,
        RefinementMode::TimeOnly => beta,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub n_cells: usize,
    pub dx: f64,
    pub dt: f64,
    pub error_l2: f64,
    pub error_linf: f64,
    /// Difference norm to the previous (coarser) level.
    pub succ_diff: Option<f64>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyMeta {
    pub problem: String,
    pub scheme: String,
    pub stepper: String,
    pub mode: String,
    pub norm: String,
    pub startup: String,
    pub eta_space: f64,
    pub eta_time: f64,
    pub horizon: f64,
    /// `key=value` settings that differ from the defaults.
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub meta: StudyMeta,
    pub levels: Vec<LevelRecord>,
    pub gamma: u32,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub zeta: Option<(f64, f64)>,
}

impl StudyResult {
    /// The `(Δξ, measured quantity)` pairs that the fits use: errors against
    /// Δx for space-time studies, successive differences against the finer
    /// Δx or Δt otherwise. Unstable levels are dropped.
    pub fn fit_data(&self) -> (Vec<f64>, Vec<f64>) {
        let time = self.meta.mode == RefinementMode::TimeOnly.token();
        let space_time = self.meta.mode == RefinementMode::SpaceTime.token();
        let l2 = self.meta.norm != Norm::Linf.token();
        self.levels
            .iter()
            .filter(|l| l.stable)
            .filter_map(|l| {
                let y = if space_time {
                    Some(if l2 { l.error_l2 } else { l.error_linf })
                } else {
                    l.succ_diff
                }?;
                let x = if time { l.dt } else { l.dx };
                (y > 0.0 && y.is_finite()).then_some((x, y))
            })
            .unzip()
    }

    pub fn any_unstable(&self) -> bool {
        self.levels.iter().any(|l| !l.stable)
    }

    /// Recomputes slope and two-term coefficients from the level data.
    pub fn refit(&mut self) {
        let (xs, ys) = self.fit_data();
        match fit_loglog_slope(&xs, &ys) {
            Ok((s, c)) => {
                self.slope = Some(s);
                self.intercept = Some(c);
            }
            Err(_) => {
                self.slope = None;
                self.intercept = None;
            }
        }
        self.zeta = fit_two_term(&xs, &ys, self.gamma)
            .ok()
            .map(|f| (f.zeta_gamma, f.zeta_gamma_plus_1));
    }
}

pub fn run_study(
    plan: &RefinementPlan,
    prob: &ProblemSpec,
    scheme: SchemeConfig,
    method: Method,
) -> Result<StudyResult> {
    run_study_with(plan, prob, scheme, method, Vec::new())
}

pub fn run_study_with(
    plan: &RefinementPlan,
    prob: &ProblemSpec,
    scheme: SchemeConfig,
    method: Method,
    overrides: Vec<String>,
) -> Result<StudyResult> {
    let raw = plan.raw_levels()?;
    let levels: Vec<(usize, f64)> = raw
        .into_iter()
        .map(|(n, dt)| snap_dt(plan.horizon, dt).map(|(_, dt)| (n, dt)))
        .collect::<Result<_>>()?;
    let outcomes: Vec<SolveOutcome> = levels
        .par_iter()
        .map(|&(n, dt)| run_solve(prob, scheme, method, n, dt, plan.horizon, plan.startup))
        .collect::<Result<_>>()?;

    let coarsest = outcomes
        .iter()
        .min_by_key(|o| o.state.mesh.n_cells())
        .expect("at least one level")
        .state
        .mesh
        .clone();
    let mut records: Vec<LevelRecord> = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let mesh = &o.state.mesh;
        let (mut l2, mut linf) = (o.error_l2, o.error_linf);
        // Point errors are compared on the coarsest nodes so that every level
        // is measured at the same locations.
        if plan.mode == RefinementMode::SpaceTime && !scheme.spatial.is_finite_volume() && o.stable {
            let err = StateField::new(StateKind::PointValues, o.error.clone(), mesh.clone(), o.state.time)?;
            let e = restrict_points(&err, &coarsest)?;
            l2 = l2_norm(&e, coarsest.dx());
            linf = linf_norm(&e);
        }
        records.push(LevelRecord {
            n_cells: mesh.n_cells(),
            dx: mesh.dx(),
            dt: o.state.time / o.steps as f64,
            error_l2: l2,
            error_linf: linf,
            succ_diff: None,
            stable: o.stable,
        });
    }
    if plan.mode != RefinementMode::SpaceTime && outcomes.len() >= 2 {
        for i in 1..outcomes.len() {
            if outcomes[i - 1].stable && outcomes[i].stable {
                let pair = [outcomes[i - 1].state.clone(), outcomes[i].state.clone()];
                let d = if plan.mode == RefinementMode::SpaceOnly {
                    // keep the whole ladder on the same coarse mesh
                    let a = restrict(&pair[0], &coarsest, scheme.spatial)?;
                    let b = restrict(&pair[1], &coarsest, scheme.spatial)?;
                    let e: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
                    match plan.norm {
                        Norm::L2 => l2_norm(&e, coarsest.dx()),
                        Norm::Linf => linf_norm(&e),
                    }
                } else {
                    successive_differences(&pair, plan.mode, scheme.spatial, plan.norm)?[0]
                };
                records[i].succ_diff = Some(d);
            }
        }
    }

    let mut result = StudyResult {
        meta: StudyMeta {
            problem: prob.name().to_owned(),
            scheme: scheme.to_string(),
            stepper: method.token().to_owned(),
            mode: plan.mode.token().to_owned(),
            norm: plan.norm.token().to_owned(),
            startup: match plan.startup {
                StartupMode::ExactSolution => "exact".to_owned(),
                StartupMode::RkStartup => "rk".to_owned(),
            },
            eta_space: plan.eta_space,
            eta_time: plan.eta_time,
            horizon: plan.horizon,
            overrides,
        },
        levels: records,
        gamma: theoretical_order(plan.mode, &scheme, method),
        slope: None,
        intercept: None,
        zeta: None,
    };
    result.refit();
    Ok(result)
}
