//! Plain-text SVG line and scatter plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// A named sequence of `(x, y)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// `(iter, metric)` pairs of one trace CSV. Non-finite values are kept so
/// the caller decides what is drawable.
pub fn read_trace_column(path: &Path, metric: &str) -> Result<Vec<(f64, f64)>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let iter_col = find("iter").ok_or_else(|| Error::Plot(format!("{}: no iter column", path.display())))?;
    let col = find(metric).ok_or_else(|| Error::Plot(format!("{}: unknown column {metric:?}", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |k: usize| rec.get(k).and_then(|v| v.parse::<f64>().ok());
        match (num(iter_col), num(col)) {
            (Some(x), Some(y)) => out.push((x, y)),
            _ => {
                let line = rec.position().map_or(0, |p| p.line());
                return Err(Error::Plot(format!("{}:{line}: malformed row", path.display())));
            }
        }
    }
    Ok(out)
}

/// Log-scale line plot of `metric` across trace files, one polyline each.
pub fn emit_svg_plot(traces: &[PathBuf], metric: &str, out: &Path) -> Result<()> {
    if traces.is_empty() {
        return Err(Error::Plot("no traces".into()));
    }
    let series = traces
        .iter()
        .map(|p| {
            Ok(Series {
                label: label_for(p),
                points: read_trace_column(p, metric)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let svg = render_line_plot(&series, "iteration", metric)?;
    std::fs::write(out, svg).map_err(|e| Error::io(out, e))
}

fn label_for(p: &Path) -> String {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match p.parent().and_then(Path::file_name) {
        Some(dir) => format!("{}/{stem}", dir.to_string_lossy()),
        None => stem,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    log_y: bool,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)> + Clone, log_y: bool) -> Option<Self> {
        let xs = points.clone().map(|p| p.0);
        let ys = points.map(|p| if log_y { p.1.log10() } else { p.1 });
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !(x0.is_finite() && y0.is_finite()) {
            return None;
        }
        let pad = |lo: f64, hi: f64, by: f64| if hi > lo { (lo, hi) } else { (lo - by, hi + by) };
        let y = if log_y {
            let (a, b) = pad(y0, y1, 0.5);
            (a.floor(), b.ceil())
        } else {
            let (a, b) = pad(y0, y1, 0.5 * y0.abs().max(1.0));
            let m = 0.05 * (b - a);
            (a - m, b + m)
        };
        Some(Self {
            x: pad(x0, x1, 0.5),
            y,
            log_y,
        })
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let v = if self.log_y { y.log10() } else { y };
        HEIGHT - BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn drawable(p: &(f64, f64), log_y: bool) -> bool {
    p.0.is_finite() && p.1.is_finite() && (!log_y || p.1 > 0.0)
}

fn axes(svg: &mut String, frame: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let x = frame.x.0 + (frame.x.1 - frame.x.0) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            frame.px(x),
            y0 + 16.0,
            tick(x)
        );
    }
    if frame.log_y {
        let (lo, hi) = (frame.y.0 as i32, frame.y.1 as i32);
        for e in lo..=hi {
            let py = frame.py(10f64.powi(e));
            let _ = writeln!(
                svg,
                r##"<line x1="{x0}" y1="{py:.1}" x2="{x1}" y2="{py:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">1e{e}</text>"##,
                x0 - 6.0,
                py + 4.0
            );
        }
    } else {
        for k in 0..=4 {
            let y = frame.y.0 + (frame.y.1 - frame.y.0) * k as f64 / 4.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                frame.py(y) + 4.0,
                tick(y)
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        0.5 * (x0 + x1),
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1),
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 100.0).round() / 100.0)
    }
}

fn legend(svg: &mut String, labels: &[&str]) {
    for (k, label) in labels.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * k as f64;
        let x = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}" font-size="11">{}</text>"#,
            x + 20.0,
            PALETTE[k % PALETTE.len()],
            x + 26.0,
            y + 4.0,
            escape(label)
        );
    }
}

fn open() -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="100%" height="100%" fill="white"/>
"#
    )
}

/// Log-y line plot. Non-positive or non-finite values are skipped.
pub fn render_line_plot(series: &[Series], xlabel: &str, ylabel: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Plot("no traces".into()));
    }
    let all = series.iter().flat_map(|s| s.points.iter().copied()).filter(|p| drawable(p, true));
    let frame = Frame::fit(all, true).ok_or_else(|| Error::Plot("no positive finite values to plot".into()))?;
    let mut svg = open();
    axes(&mut svg, &frame, xlabel, ylabel);
    for (k, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| drawable(p, true))
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[k % PALETTE.len()],
            pts.join(" ")
        );
    }
    legend(&mut svg, &series.iter().map(|s| s.label.as_str()).collect::<Vec<_>>());
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Linear-axis scatter plot.
pub fn render_scatter(series: &[Series], xlabel: &str, ylabel: &str) -> Result<String> {
    let all = series.iter().flat_map(|s| s.points.iter().copied()).filter(|p| drawable(p, false));
    let frame = Frame::fit(all, false).ok_or_else(|| Error::Plot("nothing to plot".into()))?;
    let mut svg = open();
    axes(&mut svg, &frame, xlabel, ylabel);
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        for p in s.points.iter().filter(|p| drawable(p, false)) {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#,
                frame.px(p.0),
                frame.py(p.1)
            );
        }
    }
    legend(&mut svg, &series.iter().map(|s| s.label.as_str()).collect::<Vec<_>>());
    svg.push_str("</svg>\n");
    Ok(svg)
}
