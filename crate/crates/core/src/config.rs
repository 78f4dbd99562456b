//! Run configuration: command-line flags layered over an optional flat
//! `key = value` file, layered over the tabulated experiment defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::convergence::{default_startup, Norm, RefinementMode, RefinementPlan};
use crate::error::{Error, Result};
use crate::mesh::StateKind;
use crate::problems::ProblemId;
use crate::scheme::{SchemeConfig, SpatialMethod};
use crate::time_steppers::{Method, StartupMode};

#[derive(Debug, Parser)]
#[command(name = "hypconv", version, about = "Method-of-lines convergence studies for 1D hyperbolic PDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Single solve at one resolution; prints the error norms.
    Solve(CommonArgs),
    /// Refinement study; writes one CSV (and an SVG plot).
    Converge(CommonArgs),
    /// One-step truncation-error order and coefficient of a time stepper.
    OdeVerify(OdeArgs),
    /// Re-runs the study matrix behind one of the convergence figures.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub problem: Option<String>,
    /// fd1, fd2, fd3, ppr or ppr-mono
    #[arg(long)]
    pub spatial: Option<String>,
    #[arg(long)]
    pub stepper: Option<String>,
    /// space-time, space-only or time-only
    #[arg(long)]
    pub mode: Option<String>,
    /// Comma-separated cell counts
    #[arg(long)]
    pub ncells: Option<String>,
    #[arg(long = "eta-space")]
    pub eta_space: Option<f64>,
    #[arg(long = "eta-time")]
    pub eta_time: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long = "time-levels")]
    pub time_levels: Option<usize>,
    /// l2 or linf
    #[arg(long)]
    pub norm: Option<String>,
    /// exact or rk
    #[arg(long)]
    pub startup: Option<String>,
    /// averaged or integrated (finite volumes only)
    #[arg(long)]
    pub prognostic: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 2 if any level blows up.
    #[arg(long)]
    pub strict: bool,
    /// Flat key = value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OdeArgs {
    #[arg(long)]
    pub method: String,
    /// decay, decay-sine, growth, constant or zero
    #[arg(long, default_value = "decay-sine")]
    pub ode: String,
    #[arg(long, default_value_t = 1.0)]
    pub u0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long = "dt-max", default_value_t = 1e-2)]
    pub dt_max: f64,
    #[arg(long = "dt-min", default_value_t = 1e-3)]
    pub dt_min: f64,
    #[arg(long, default_value_t = 6)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// fig2, fig4, fig5 or fig6
    pub id: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

const KEYS: [&str; 13] = [
    "problem",
    "spatial",
    "stepper",
    "mode",
    "ncells",
    "eta_space",
    "eta_time",
    "horizon",
    "time_levels",
    "norm",
    "startup",
    "prognostic",
    "out",
];

fn normalise_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses a flat `key = value` file. `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = normalise_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{}`", i + 1, k.trim())));
        }
        map.insert(key, v.trim().to_owned());
    }
    Ok(map)
}

impl CommonArgs {
    fn as_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_owned(), v);
            }
        };
        put("problem", self.problem.clone());
        put("spatial", self.spatial.clone());
        put("stepper", self.stepper.clone());
        put("mode", self.mode.clone());
        put("ncells", self.ncells.clone());
        put("eta_space", self.eta_space.map(|v| v.to_string()));
        put("eta_time", self.eta_time.map(|v| v.to_string()));
        put("horizon", self.horizon.map(|v| v.to_string()));
        put("time_levels", self.time_levels.map(|v| v.to_string()));
        put("norm", self.norm.clone());
        put("startup", self.startup.clone());
        put("prognostic", self.prognostic.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        m
    }
}

/// Experiment parameters before any override.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDefaults {
    pub n_cells: Vec<usize>,
    pub eta_space: f64,
    pub eta_time: f64,
    pub horizon: f64,
    pub time_levels: usize,
}

fn powers(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

/// The tabulated experiment parameters. Problems outside the two manufactured
/// presets reuse the linear values; second- and third-order upwind reuse the
/// first-order ones.
pub fn table_defaults(problem: ProblemId, spatial: SpatialMethod, stepper: Method, mode: RefinementMode) -> TableDefaults {
    let nonlinear = problem == ProblemId::Nonlinear;
    let (fd, mono) = match spatial {
        SpatialMethod::Fd(_) => (true, false),
        SpatialMethod::Ppr { monotone } => (false, monotone),
    };
    let n_cells = match mode {
        RefinementMode::TimeOnly if fd || mono => vec![if nonlinear { 64 } else { 128 }],
        RefinementMode::TimeOnly => vec![128],
        _ if fd || mono => powers(6, 12),
        _ => powers(5, 10),
    };
    let eta_space = if fd {
        if stepper == Method::Ab4 {
            0.125
        } else {
            0.25
        }
    } else {
        match stepper {
            Method::Fe1 if mono => 0.2,
            Method::Fe1 => match (mode, nonlinear) {
                (RefinementMode::SpaceOnly, false) => 0.0125,
                (RefinementMode::SpaceOnly, true) => 0.1,
                (_, false) => 0.15,
                (_, true) => 0.2,
            },
            Method::Ab2 | Method::Ab3 | Method::Ab4 => 0.15,
            Method::Rk2 => 0.2,
            _ => 0.25,
        }
    };
    let eta_time = if fd && stepper == Method::Rk4 { 0.32 } else { 0.16 };
    let horizon = if fd || mono {
        0.25
    } else if !nonlinear && mode == RefinementMode::SpaceOnly && stepper == Method::Fe1 {
        0.03125
    } else {
        0.125
    };
    TableDefaults {
        n_cells,
        eta_space,
        eta_time,
        horizon,
        time_levels: 6,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub scheme: SchemeConfig,
    pub stepper: Method,
    pub mode: RefinementMode,
    pub plan: RefinementPlan,
    pub out: Option<PathBuf>,
    pub strict: bool,
    /// `key=value` entries that replaced a tabulated default.
    pub overrides: Vec<String>,
}

fn parse_list(v: &str) -> Result<Vec<usize>> {
    let cells: Vec<usize> = v
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad cell count `{}`", s.trim())))
        })
        .collect::<Result<_>>()?;
    if cells.is_empty() {
        return Err(Error::Config("empty cell-count list".into()));
    }
    Ok(cells)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Config(format!("{key} must be positive, got {v}")));
    }
    Ok(x)
}

/// Resolves flags over the file over the defaults.
pub fn parse_config(args: &CommonArgs, file: Option<&Path>) -> Result<RunConfig> {
    let mut map = match file.or(args.config.as_deref()) {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    map.extend(args.as_map());
    resolve(&map, args.strict)
}

pub fn resolve(map: &BTreeMap<String, String>, strict: bool) -> Result<RunConfig> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let problem: ProblemId = get("problem").unwrap_or("linear").parse()?;
    let spatial: SpatialMethod = get("spatial").unwrap_or("fd1").parse()?;
    let stepper: Method = get("stepper").unwrap_or("fe1").parse()?;
    if !stepper.is_explicit() {
        return Err(Error::Config(format!(
            "{stepper} is implicit; PDE runs need an explicit stepper"
        )));
    }
    let mode: RefinementMode = get("mode").unwrap_or("space-time").parse()?;
    let kind = match get("prognostic") {
        None => {
            if spatial.is_finite_volume() {
                StateKind::CellAverages
            } else {
                StateKind::PointValues
            }
        }
        Some(p) => match (p.trim(), spatial.is_finite_volume()) {
            ("averaged" | "average", true) => StateKind::CellAverages,
            ("integrated" | "integral", true) => StateKind::CellIntegrals,
            ("point" | "points", false) => StateKind::PointValues,
            (other, fv) => {
                return Err(Error::Config(format!(
                    "--prognostic {other} conflicts with --spatial {spatial}{}",
                    if fv { "" } else { " (point values only)" }
                )))
            }
        },
    };
    let scheme = SchemeConfig::new(spatial, kind)?;
    let d = table_defaults(problem, spatial, stepper, mode);

    let mut overrides = Vec::new();
    let mut note = |k: &str, v: &str| overrides.push(format!("{k}={v}"));
    let n_cells = match get("ncells") {
        Some(v) => {
            note("ncells", &v.replace(',', ":"));
            parse_list(v)?
        }
        None => d.n_cells,
    };
    let mut num = |k: &str, default: f64| -> Result<f64> {
        match get(k) {
            Some(v) => {
                let x = parse_f64(k, v)?;
                note(k, v.trim());
                Ok(x)
            }
            None => Ok(default),
        }
    };
    let eta_space = num("eta_space", d.eta_space)?;
    let eta_time = num("eta_time", d.eta_time)?;
    let horizon = num("horizon", d.horizon)?;
    let time_levels = match get("time_levels") {
        Some(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("time_levels: `{v}` is not a count")))?;
            note("time_levels", v.trim());
            n
        }
        None => d.time_levels,
    };
    let norm: Norm = match get("norm") {
        Some(v) => {
            note("norm", v.trim());
            v.parse()?
        }
        None => Norm::default(),
    };
    let startup: StartupMode = match get("startup") {
        Some(v) => {
            note("startup", v.trim());
            v.parse()?
        }
        None => default_startup(mode),
    };
    if let Some(&n) = n_cells.iter().find(|&&n| n < crate::mesh::MIN_CELLS) {
        return Err(Error::Config(format!("cell count {n} is below the minimum of {}", crate::mesh::MIN_CELLS)));
    }
    Ok(RunConfig {
        problem,
        scheme,
        stepper,
        mode,
        plan: RefinementPlan {
            mode,
            n_cells,
            eta_space,
            eta_time,
            n_time_levels: time_levels,
            horizon,
            norm,
            startup,
        },
        out: get("out").map(PathBuf::from),
        strict,
        overrides,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> CommonArgs {
        let mut argv = vec!["hypconv", "converge"];
        argv.extend_from_slice(args);
        match Cli::try_parse_from(argv).unwrap().command {
            CliCommand::Converge(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn upwind_defaults() {
        let c = parse_config(&cli(&["--problem", "linear", "--spatial", "fd1", "--stepper", "fe1", "--mode", "space-time"]), None).unwrap();
        assert_eq!(c.plan.eta_space, 0.25);
        assert_eq!(c.plan.horizon, 0.25);
        assert_eq!(c.plan.n_cells, powers(6, 12));
        assert!(c.overrides.is_empty());
        let c = parse_config(&cli(&["--problem", "linear", "--spatial", "fd1", "--stepper", "ab4", "--mode", "space-time"]), None).unwrap();
        assert_eq!(c.plan.eta_space, 0.125);
    }

    #[test]
    fn unknown_scheme_is_rejected() {
        assert!(parse_config(&cli(&["--spatial", "fd9"]), None).is_err());
        assert!(parse_config(&cli(&["--problem", "heat"]), None).is_err());
        assert!(parse_config(&cli(&["--stepper", "be1"]), None).is_err());
    }

    #[test]
    fn conflicting_prognostic() {
        assert!(parse_config(&cli(&["--spatial", "fd2", "--prognostic", "integrated"]), None).is_err());
        let c = parse_config(&cli(&["--spatial", "ppr", "--prognostic", "integrated"]), None).unwrap();
        assert_eq!(c.scheme.kind, StateKind::CellIntegrals);
    }

    #[test]
    fn table_rows() {
        use ProblemId::*;
        use RefinementMode::*;
        let mono = SpatialMethod::Ppr { monotone: true };
        let ppr = SpatialMethod::Ppr { monotone: false };
        let fd1 = SpatialMethod::Fd(crate::spatial_fd::FdOrder::First);
        assert_eq!(table_defaults(Linear, ppr, Method::Fe1, SpaceOnly).eta_space, 0.0125);
        assert_eq!(table_defaults(Linear, ppr, Method::Fe1, SpaceOnly).horizon, 0.03125);
        assert_eq!(table_defaults(Nonlinear, ppr, Method::Fe1, SpaceOnly).eta_space, 0.1);
        assert_eq!(table_defaults(Nonlinear, ppr, Method::Fe1, SpaceTime).eta_space, 0.2);
        assert_eq!(table_defaults(Linear, ppr, Method::Fe1, SpaceTime).eta_space, 0.15);
        assert_eq!(table_defaults(Linear, ppr, Method::Rk2, SpaceTime).eta_space, 0.2);
        assert_eq!(table_defaults(Linear, mono, Method::Fe1, SpaceTime).eta_space, 0.2);
        assert_eq!(table_defaults(Linear, mono, Method::Ab3, SpaceTime).eta_space, 0.15);
        assert_eq!(table_defaults(Linear, mono, Method::Rk4, SpaceOnly).eta_space, 0.25);
        assert_eq!(table_defaults(Linear, ppr, Method::Rk3, SpaceTime).n_cells, powers(5, 10));
        assert_eq!(table_defaults(Linear, mono, Method::Rk3, SpaceTime).n_cells, powers(6, 12));
        assert_eq!(table_defaults(Nonlinear, fd1, Method::Rk3, TimeOnly).n_cells, vec![64]);
        assert_eq!(table_defaults(Nonlinear, ppr, Method::Rk3, TimeOnly).n_cells, vec![128]);
        assert_eq!(table_defaults(Linear, fd1, Method::Rk4, TimeOnly).eta_time, 0.32);
        assert_eq!(table_defaults(Linear, ppr, Method::Rk4, TimeOnly).eta_time, 0.16);
        assert_eq!(table_defaults(Nonlinear, ppr, Method::Fe1, SpaceOnly).horizon, 0.125);
        assert_eq!(table_defaults(Linear, mono, Method::Fe1, SpaceOnly).horizon, 0.25);
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# study\nstepper = rk3\neta-space = 0.1\nncells = 16,32,64\n").unwrap();
        let c = parse_config(&cli(&["--eta-space", "0.2"]), Some(&path)).unwrap();
        assert_eq!(c.stepper, Method::Rk3);
        assert_eq!(c.plan.eta_space, 0.2);
        assert_eq!(c.plan.n_cells, vec![16, 32, 64]);
        assert!(c.overrides.contains(&"eta_space=0.2".to_owned()));
        assert!(c.overrides.contains(&"ncells=16:32:64".to_owned()));

        std::fs::write(&path, "colour = blue\n").unwrap();
        assert!(parse_config(&cli(&[]), Some(&path)).is_err());
        std::fs::write(&path, "just words\n").unwrap();
        assert!(parse_config(&cli(&[]), Some(&path)).is_err());
    }

    #[test]
    fn time_only_starts_from_rk() {
        let c = parse_config(&cli(&["--mode", "time-only"]), None).unwrap();
        assert_eq!(c.plan.startup, StartupMode::RkStartup);
        let c = parse_config(&cli(&["--mode", "time-only", "--startup", "exact"]), None).unwrap();
        assert_eq!(c.plan.startup, StartupMode::ExactSolution);
    }
}
