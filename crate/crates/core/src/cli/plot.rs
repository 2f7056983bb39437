//! Minimal single-panel SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fit::linear_fit;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 56.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    /// Annotate with the least-squares slope of `y` (of `ln y` when `log_y`).
    pub fit_slope: bool,
}

impl PlotSpec {
    pub fn new(x: &str, y: &str) -> Self {
        Self {
            title: format!("{y} vs {x}"),
            x_label: axis_label(x),
            y_label: axis_label(y),
            log_y: false,
            fit_slope: false,
        }
    }

    pub fn log_y(mut self, on: bool) -> Self {
        self.log_y = on;
        self
    }

    pub fn fit_slope(mut self, on: bool) -> Self {
        self.fit_slope = on;
        self
    }
}

/// Quantity name with its unit. Operational time and frequency are
/// dimensionless; norms carry the units of the datum.
pub fn axis_label(column: &str) -> String {
    let unit = match column {
        "tau" | "t" | "s" | "x" => "operational time, dimensionless",
        "xi" => "angular frequency, 1/operational time",
        "l2" | "h1" | "sup_weighted" | "envelope_margin" => "units of u0",
        _ => "dimensionless",
    };
    format!("{column} [{unit}]")
}

/// Reads two named columns from a CSV with a header row.
pub fn read_columns(text: &str, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Config(format!("malformed CSV header: {e}")))?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!(
                "column '{name}' not in CSV header [{}]",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Config(format!("malformed CSV at data row {}: {e}", row + 1)))?;
        let parse = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("");
            field.trim().parse().map_err(|_| Error::Config(format!("data row {}: '{field}' is not a number", row + 1)))
        };
        out.push((parse(ix)?, parse(iy)?));
    }
    if out.is_empty() {
        return Err(Error::Config("CSV has no data rows; nothing to plot".into()));
    }
    Ok(out)
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    } else {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the points as an SVG document. On a log axis, nonpositive `y`
/// values are dropped.
pub fn render_svg(points: &[(f64, f64)], spec: &PlotSpec) -> Result<String> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!spec.log_y || *y > 0.0))
        .map(|&(x, y)| (x, if spec.log_y { y.log10() } else { y }))
        .collect();
    if pts.is_empty() {
        return Err(Error::Config("no plottable points (log axis drops values <= 0)".into()));
    }
    let (x0, x1) = nice_range(
        pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = nice_range(
        pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let _ =
        writeln!(svg, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let ylab = if spec.log_y { format!("1e{fy:.1}") } else { format!("{fy:.3e}") };
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.3}</text>"#,
            sx(fx),
            HEIGHT - MARGIN_B + 16.0
        );
        let _ =
            writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{ylab}</text>"#, MARGIN_L - 6.0, sy(fy) + 4.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 14.0,
        escape(&spec.x_label)
    );
    let y_label = if spec.log_y { format!("{} (log scale)", spec.y_label) } else { spec.y_label.clone() };
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        MARGIN_T + ph / 2.0,
        escape(&y_label)
    );
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ =
        writeln!(svg, r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{}"/>"##, path.join(" "));
    for &(x, y) in &pts {
        let _ = writeln!(svg, r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#1f5fa8"/>"##, sx(x), sy(y));
    }
    if spec.fit_slope {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        // slope of ln y, not log10 y, so the annotation reads as a rate
        let ys: Vec<f64> = if spec.log_y { ys.iter().map(|y| y * std::f64::consts::LN_10).collect() } else { ys };
        if let Some((slope, _)) = linear_fit(&xs, &ys) {
            let what = if spec.log_y { "fitted d(ln y)/dx" } else { "fitted dy/dx" };
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end">{what} = {slope:.4}</text>"#,
                WIDTH - MARGIN_R - 8.0,
                MARGIN_T + 16.0
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_svg(path: &Path, points: &[(f64, f64)], spec: &PlotSpec) -> Result<()> {
    let svg = render_svg(points, spec)?;
    std::fs::write(path, svg).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// `plot` subcommand: reads `csv_path`, writes the SVG next to it unless
/// `out` is given. Nothing is written on error.
pub fn plot_csv(csv_path: &Path, x: &str, y: &str, log_y: bool, out: Option<&Path>) -> Result<std::path::PathBuf> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", csv_path.display())))?;
    let points = read_columns(&text, x, y)?;
    let spec = PlotSpec::new(x, y).log_y(log_y).fit_slope(log_y);
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| csv_path.with_extension("svg"));
    write_svg(&target, &points, &spec)?;
    Ok(target)
}
