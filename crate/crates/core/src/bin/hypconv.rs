use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use hypconv::config::{parse_config, Cli, CliCommand, CommonArgs, FigureArgs, OdeArgs, RunConfig};
use hypconv::convergence::{run_solve, run_study_with, snap_dt};
use hypconv::figures::{reproduce_figure, FigureId};
use hypconv::ode_verify::{estimate_local_order, estimate_lte_coefficient, geometric_steps, OdePreset};
use hypconv::report::{emit_csv, emit_loglog_svg, emit_table};
use hypconv::scheme::exact_values;
use hypconv::{Error, Method};

const USAGE: u8 = 1;
const UNSTABLE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    let outcome = match cli.command {
        CliCommand::Solve(a) => solve(&a),
        CliCommand::Converge(a) => converge(&a),
        CliCommand::OdeVerify(a) => ode_verify(&a),
        CliCommand::Figure(a) => figure(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE)
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "none".into())
}

fn solve(args: &CommonArgs) -> Result<u8, Error> {
    let cfg = parse_config(args, None)?;
    let prob = cfg.problem.preset();
    let mut unstable = false;
    for &n in &cfg.plan.n_cells {
        let dx = 1.0 / n as f64;
        let (_, dt) = snap_dt(cfg.plan.horizon, cfg.plan.eta_space * dx)?;
        let o = run_solve(&prob, cfg.scheme, cfg.stepper, n, dt, cfg.plan.horizon, cfg.plan.startup)?;
        println!(
            "n_cells={n} dx={dx:.6e} dt={dt:.6e} steps={} error_l2={:.6e} error_linf={:.6e} stable={}",
            o.steps, o.error_l2, o.error_linf, o.stable
        );
        unstable |= !o.stable;
        if let Some(dir) = &cfg.out {
            let mesh = &o.state.mesh;
            let x = if cfg.scheme.kind.is_finite_volume() { mesh.centers() } else { mesh.nodes() };
            let exact = exact_values(&prob, mesh, cfg.scheme.kind, cfg.plan.horizon)?;
            let rows: Vec<Vec<f64>> = (0..n).map(|j| vec![x[j], o.state.data[j], exact[j]]).collect();
            let path = dir.join(format!("solve_{}_{}_{}_n{n}.csv", cfg.problem.name(), cfg.scheme, cfg.stepper));
            emit_table(&path, &["x", "u", "exact"], &rows)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(if unstable && cfg.strict { UNSTABLE } else { 0 })
}

fn csv_target(cfg: &RunConfig) -> PathBuf {
    let default = format!("{}_{}_{}_{}.csv", cfg.problem.name(), cfg.scheme, cfg.stepper, cfg.mode.token());
    match &cfg.out {
        Some(p) if p.extension().is_some_and(|e| e == "csv") => p.clone(),
        Some(dir) => dir.join(default),
        None => PathBuf::from(default),
    }
}

fn converge(args: &CommonArgs) -> Result<u8, Error> {
    let cfg = parse_config(args, None)?;
    let result = run_study_with(&cfg.plan, &cfg.problem.preset(), cfg.scheme, cfg.stepper, cfg.overrides.clone())?;
    let csv = csv_target(&cfg);
    emit_csv(&result, &csv)?;
    println!("wrote {}", csv.display());
    if !result.fit_data().0.is_empty() {
        let svg = csv.with_extension("svg");
        let title = format!("{} {} {}", cfg.problem.name(), cfg.scheme, cfg.mode.token());
        emit_loglog_svg(std::slice::from_ref(&result), &[result.gamma as f64], &title, &svg)?;
        println!("wrote {}", svg.display());
    }
    let (zg, zg1) = match result.zeta {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    println!(
        "slope={} gamma={} zeta_g={} zeta_g1={} unstable_levels={}",
        fmt_opt(result.slope),
        result.gamma,
        fmt_opt(zg),
        fmt_opt(zg1),
        result.levels.iter().filter(|l| !l.stable).count()
    );
    Ok(if result.any_unstable() && cfg.strict { UNSTABLE } else { 0 })
}

fn ode_verify(args: &OdeArgs) -> Result<u8, Error> {
    let method: Method = args.method.parse()?;
    let preset: OdePreset = args.ode.parse()?;
    let ode = preset.ode();
    let dts = geometric_steps(args.dt_max, args.dt_min, args.steps);
    let expected = method.order() as f64 + 1.0;
    let slope = estimate_local_order(&ode, method, args.u0, args.t0, &dts)?;
    let coeff = estimate_lte_coefficient(&ode, method, args.u0, args.t0, &dts)?;
    let pass = (slope - expected).abs() <= 0.1;
    println!(
        "{} method={method} ode={} slope={slope:.4} expected={expected} coefficient={coeff:.6e}",
        if pass { "PASS" } else { "FAIL" },
        preset.token()
    );
    Ok(if pass { 0 } else { UNSTABLE })
}

fn figure(args: &FigureArgs) -> Result<u8, Error> {
    let id: FigureId = args.id.parse()?;
    let report = reproduce_figure(id, Path::new(&args.out))?;
    for line in &report.summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", report.files.len(), args.out.display());
    Ok(0)
}
