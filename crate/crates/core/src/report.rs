//! CSV output for refinement studies and self-contained SVG plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::convergence::{LevelRecord, StudyMeta, StudyResult};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "n_cells,dx,dt,error_l2,error_linf,succ_diff,stable";

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_else(|| "none".to_owned())
}

/// One row per level followed by three `#` lines: run metadata, the
/// log-log fit and the two-term fit.
pub fn csv_string(result: &StudyResult) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for l in &result.levels {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            l.n_cells,
            sci(l.dx),
            sci(l.dt),
            sci(l.error_l2),
            sci(l.error_linf),
            l.succ_diff.map(sci).unwrap_or_default(),
            l.stable
        );
    }
    let m = &result.meta;
    let overrides = if m.overrides.is_empty() {
        "none".to_owned()
    } else {
        m.overrides.join(";")
    };
    let _ = writeln!(
        s,
        "# problem={} scheme={} stepper={} mode={} norm={} startup={} eta_space={:?} eta_time={:?} horizon={:?} overrides={}",
        m.problem, m.scheme, m.stepper, m.mode, m.norm, m.startup, m.eta_space, m.eta_time, m.horizon, overrides
    );
    let _ = writeln!(s, "# slope={} intercept={}", opt(result.slope), opt(result.intercept));
    let (zg, zg1) = match result.zeta {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    let _ = writeln!(s, "# gamma={} zeta_g={} zeta_g1={}", result.gamma, opt(zg), opt(zg1));
    s
}

pub fn emit_csv(result: &StudyResult, path: &Path) -> Result<()> {
    write_file(path, &csv_string(result))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Csv(msg.into())
}

fn num(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| bad(format!("`{s}` is not a number")))
}

fn opt_num(s: &str) -> Result<Option<f64>> {
    if s == "none" {
        Ok(None)
    } else {
        num(s).map(Some)
    }
}

fn fields(line: &str) -> Result<std::collections::BTreeMap<&str, &str>> {
    line.trim_start_matches('#')
        .split_whitespace()
        .map(|kv| kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{kv}`"))))
        .collect()
}

fn field<'a>(m: &std::collections::BTreeMap<&str, &'a str>, k: &str) -> Result<&'a str> {
    m.get(k).copied().ok_or_else(|| bad(format!("missing `{k}`")))
}

/// Inverse of [`csv_string`].
pub fn parse_csv(text: &str) -> Result<StudyResult> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(bad("missing header"));
    }
    let mut levels = Vec::new();
    let mut comments = Vec::new();
    for line in lines {
        if line.starts_with('#') {
            comments.push(line);
            continue;
        }
        if !comments.is_empty() {
            return Err(bad("data row after footer"));
        }
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != 7 {
            return Err(bad(format!("expected 7 columns, got {}", c.len())));
        }
        levels.push(LevelRecord {
            n_cells: c[0].parse().map_err(|_| bad(format!("bad cell count `{}`", c[0])))?,
            dx: num(c[1])?,
            dt: num(c[2])?,
            error_l2: num(c[3])?,
            error_linf: num(c[4])?,
            succ_diff: if c[5].is_empty() { None } else { Some(num(c[5])?) },
            stable: c[6].parse().map_err(|_| bad(format!("bad flag `{}`", c[6])))?,
        });
    }
    if comments.len() != 3 {
        return Err(bad(format!("expected 3 footer lines, got {}", comments.len())));
    }
    let m = fields(comments[0])?;
    let overrides = match field(&m, "overrides")? {
        "none" => Vec::new(),
        o => o.split(';').map(str::to_owned).collect(),
    };
    let meta = StudyMeta {
        problem: field(&m, "problem")?.to_owned(),
        scheme: field(&m, "scheme")?.to_owned(),
        stepper: field(&m, "stepper")?.to_owned(),
        mode: field(&m, "mode")?.to_owned(),
        norm: field(&m, "norm")?.to_owned(),
        startup: field(&m, "startup")?.to_owned(),
        eta_space: num(field(&m, "eta_space")?)?,
        eta_time: num(field(&m, "eta_time")?)?,
        horizon: num(field(&m, "horizon")?)?,
        overrides,
    };
    let f = fields(comments[1])?;
    let slope = opt_num(field(&f, "slope")?)?;
    let intercept = opt_num(field(&f, "intercept")?)?;
    let z = fields(comments[2])?;
    let gamma = field(&z, "gamma")?
        .parse()
        .map_err(|_| bad("bad gamma"))?;
    let zeta = match (opt_num(field(&z, "zeta_g")?)?, opt_num(field(&z, "zeta_g1")?)?) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    Ok(StudyResult {
        meta,
        levels,
        gamma,
        slope,
        intercept,
        zeta,
    })
}

/// Plain numeric table with a header row.
pub fn emit_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|&v| sci(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    write_file(path, &s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers only, no connecting line.
    pub markers_only: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            markers_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_axes: bool,
    pub series: Vec<Series>,
    /// Dashed reference slopes through the first point of the first series.
    pub guides: Vec<f64>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 490.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 380.0;
const COLOURS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    log: bool,
}

impl Frame {
    fn tx(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        LEFT + (v - self.x.0) / (self.x.1 - self.x.0) * (RIGHT - LEFT)
    }
    fn ty(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (BOTTOM - TOP)
    }
}

fn span(lo: f64, hi: f64, log: bool) -> (f64, f64) {
    if log {
        let (a, b) = (lo.floor(), hi.ceil());
        if a == b {
            (a - 1.0, b + 1.0)
        } else {
            (a, b)
        }
    } else if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn ticks(range: (f64, f64), log: bool) -> Vec<(f64, String)> {
    if log {
        let (a, b) = (range.0 as i32, range.1 as i32);
        let stride = ((b - a) / 8).max(1);
        (a..=b)
            .filter(|k| (k - a) % stride == 0)
            .map(|k| (10f64.powi(k), format!("1e{k}")))
            .collect()
    } else {
        (0..=5)
            .map(|i| {
                let v = range.0 + (range.1 - range.0) * i as f64 / 5.0;
                (v, format!("{v:.3}"))
            })
            .collect()
    }
}

impl Plot {
    pub fn render(&self) -> Result<String> {
        let pts: Vec<(f64, f64)> = self.series.iter().flat_map(|s| s.points.iter().copied()).collect();
        if pts.is_empty() {
            return Err(Error::Config("nothing to plot".into()));
        }
        if pts.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Config("non-finite plot data".into()));
        }
        if self.log_axes {
            if let Some(&(x, y)) = pts.iter().find(|&&(x, y)| x <= 0.0 || y <= 0.0) {
                return Err(Error::NonPositive(if x <= 0.0 { x } else { y }));
            }
        }
        if !self.log_axes && !self.guides.is_empty() {
            return Err(Error::Config("slope guides need log axes".into()));
        }
        let t = |v: f64| if self.log_axes { v.log10() } else { v };
        let minmax = |f: &dyn Fn(&(f64, f64)) -> f64| {
            pts.iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        };
        let (x0, x1) = minmax(&|p| t(p.0));
        let (y0, y1) = minmax(&|p| t(p.1));
        let fr = Frame {
            x: span(x0, x1, self.log_axes),
            y: span(y0, y1, self.log_axes),
            log: self.log_axes,
        };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{}" height="{}"/></clipPath>"#,
            RIGHT - LEFT,
            BOTTOM - TOP
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            (LEFT + RIGHT) / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            RIGHT - LEFT,
            BOTTOM - TOP
        );
        for (v, label) in ticks(fr.x, self.log_axes) {
            let x = fr.tx(v);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{BOTTOM}" stroke="#dddddd"/><text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"##,
                BOTTOM + 16.0
            );
        }
        for (v, label) in ticks(fr.y, self.log_axes) {
            let y = fr.ty(v);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{RIGHT}" y2="{y:.2}" stroke="#dddddd"/><text x="{}" y="{:.2}" text-anchor="end">{label}</text>"##,
                LEFT - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (LEFT + RIGHT) / 2.0,
            BOTTOM + 40.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            (TOP + BOTTOM) / 2.0,
            escape(&self.y_label)
        );

        if let Some(&(ax, ay)) = self.series.iter().find_map(|s| s.points.first()) {
            for &g in &self.guides {
                let (lx, ly) = (ax.log10(), ay.log10());
                let at = |lv: f64| 10f64.powf(ly + g * (lv - lx));
                let (a, b) = (10f64.powf(x0), 10f64.powf(x1));
                let _ = writeln!(
                    s,
                    r#"<line class="guide" data-slope="{g}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4" clip-path="url(#plot-area)"/>"#,
                    fr.tx(a),
                    fr.ty(at(x0)),
                    fr.tx(b),
                    fr.ty(at(x1))
                );
            }
        }

        for (i, ser) in self.series.iter().enumerate() {
            let colour = COLOURS[i % COLOURS.len()];
            let coords: Vec<String> = ser
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", fr.tx(x), fr.ty(y)))
                .collect();
            if !ser.markers_only {
                let _ = writeln!(
                    s,
                    r#"<polyline data-label="{}" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                    escape(&ser.label),
                    coords.join(" ")
                );
            }
            if ser.markers_only || ser.points.len() <= 64 {
                for c in &coords {
                    let (cx, cy) = c.split_once(',').expect("formatted pair");
                    let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{colour}"/>"#);
                }
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text class="legend" x="{}" y="{}">{}</text>"#,
                RIGHT + 12.0,
                RIGHT + 32.0,
                RIGHT + 38.0,
                ly + 4.0,
                escape(&ser.label)
            );
        }
        for (j, g) in self.guides.iter().enumerate() {
            let ly = TOP + 10.0 + 18.0 * (self.series.len() + j) as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="gray" stroke-dasharray="6 4"/><text x="{}" y="{}">slope {g}</text>"#,
                RIGHT + 12.0,
                RIGHT + 32.0,
                RIGHT + 38.0,
                ly + 4.0
            );
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

pub fn emit_svg(plot: &Plot, path: &Path) -> Result<()> {
    let text = plot.render()?;
    write_file(path, &text)
}

/// Log-log plot of one or more refinement studies, one line per study
/// labelled by its stepper.
pub fn emit_loglog_svg(results: &[StudyResult], guides: &[f64], title: &str, path: &Path) -> Result<()> {
    let plot = study_plot(results, guides, title)?;
    emit_svg(&plot, path)
}

pub fn study_plot(results: &[StudyResult], guides: &[f64], title: &str) -> Result<Plot> {
    let first = results.first().ok_or_else(|| Error::Config("no studies to plot".into()))?;
    let time = first.meta.mode == "time-only";
    let series: Vec<Series> = results
        .iter()
        .map(|r| {
            let (xs, ys) = r.fit_data();
            Series::line(r.meta.stepper.to_ascii_uppercase(), xs.into_iter().zip(ys).collect())
        })
        .filter(|s| !s.points.is_empty())
        .collect();
    Ok(Plot {
        title: title.to_owned(),
        x_label: if time { "dt" } else { "dx" }.to_owned(),
        y_label: if first.meta.mode == "space-time" {
            "error"
        } else {
            "successive difference"
        }
        .to_owned(),
        log_axes: true,
        series,
        guides: guides.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StudyResult {
        let levels = (0..3)
            .map(|i| {
                let n = 16usize << i;
                let dx = 1.0 / n as f64;
                LevelRecord {
                    n_cells: n,
                    dx,
                    dt: 0.25 * dx,
                    error_l2: 0.3 * dx + 1e-3 * dx * dx,
                    error_linf: 0.7 * dx,
                    succ_diff: (i > 0).then_some(0.1 * dx),
                    stable: true,
                }
            })
            .collect();
        let mut r = StudyResult {
            meta: StudyMeta {
                problem: "linear".into(),
                scheme: "fd1".into(),
                stepper: "fe1".into(),
                mode: "space-time".into(),
                norm: "l2".into(),
                startup: "exact".into(),
                eta_space: 0.25,
                eta_time: 0.16,
                horizon: 0.1,
                overrides: vec!["horizon=0.1".into(), "ncells=16:32:64".into()],
            },
            levels,
            gamma: 1,
            slope: None,
            intercept: None,
            zeta: None,
        };
        r.refit();
        r
    }

    #[test]
    fn csv_layout() {
        let text = csv_string(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 3 + 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].ends_with(",,true"));
        assert!(lines[4].contains("overrides=horizon=0.1;ncells=16:32:64"));
        assert!(lines[5].starts_with("# slope="));
        assert!(lines[6].starts_with("# gamma=1 zeta_g="));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let r = sample();
        let back = parse_csv(&csv_string(&r)).unwrap();
        assert_eq!(back, r);
        let mut u = r.clone();
        u.levels[2].stable = false;
        u.levels[2].error_l2 = f64::NAN;
        u.refit();
        let back = parse_csv(&csv_string(&u)).unwrap();
        assert!(back.levels[2].error_l2.is_nan());
        assert_eq!(csv_string(&back), csv_string(&u));
    }

    #[test]
    fn malformed_csv() {
        assert!(parse_csv("a,b\n").is_err());
        let text = csv_string(&sample());
        assert!(parse_csv(&text.replace("0.25", "x")).is_err());
        let cut: Vec<&str> = text.lines().take(5).collect();
        assert!(parse_csv(&cut.join("\n")).is_err());
    }

    fn polyline_points(svg: &str) -> Vec<(f64, f64)> {
        let start = svg.find("<polyline").unwrap();
        let attr = &svg[start..];
        let p = attr.find("points=\"").unwrap() + 8;
        let end = attr[p..].find('"').unwrap();
        attr[p..p + end]
            .split(' ')
            .map(|c| {
                let (x, y) = c.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect()
    }

    #[test]
    fn loglog_geometry() {
        let pts: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4].iter().map(|&d| (d, 5.0 * d * d)).collect();
        let plot = Plot {
            title: "t".into(),
            x_label: "dx".into(),
            y_label: "error".into(),
            log_axes: true,
            series: vec![Series::line("RK2", pts)],
            guides: vec![2.0],
        };
        let svg = plot.render().unwrap();
        let p = polyline_points(&svg);
        let s01 = (p[1].1 - p[0].1) / (p[1].0 - p[0].0);
        let s12 = (p[2].1 - p[1].1) / (p[2].0 - p[1].0);
        assert!((s01 - s12).abs() < 1e-2 * s01.abs());
        let g = svg.find("class=\"guide\"").unwrap();
        let num = |key: &str| -> f64 {
            let i = svg[g..].find(key).unwrap() + g + key.len();
            let j = svg[i..].find('"').unwrap();
            svg[i..i + j].parse().unwrap()
        };
        let gs = (num("y2=\"") - num("y1=\"")) / (num("x2=\"") - num("x1=\""));
        assert!((gs - s01).abs() < 1e-2 * s01.abs());
        assert!(svg.contains(">RK2</text>"));
        assert!(svg.contains("slope 2"));
    }

    #[test]
    fn plot_rejects_bad_data() {
        let mut plot = Plot {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            log_axes: true,
            series: vec![],
            guides: vec![],
        };
        assert!(plot.render().is_err());
        plot.series.push(Series::line("a", vec![(1.0, 0.0)]));
        assert!(plot.render().is_err());
        plot.log_axes = false;
        assert!(plot.render().is_ok());
    }

    #[test]
    fn study_svg_names_steppers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b.svg");
        emit_loglog_svg(&[sample()], &[1.0], "linear", &path).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(">FE1</text>"));
    }
}
