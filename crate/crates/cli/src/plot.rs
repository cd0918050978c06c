//! Standalone SVG line charts.

use std::fmt::Write as _;

use chkp_core::breaking::riccati_lower_envelope;

use crate::report::RunReport;
use crate::store::DiagRow;

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 44.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str, log_y: bool) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_y,
            series: Vec::new(),
        }
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn usable(&self, (x, y): (f64, f64)) -> bool {
        x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0)
    }

    fn y_map(&self, y: f64) -> f64 {
        if self.log_y {
            y.log10()
        } else {
            y
        }
    }

    fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let pts = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|p| self.usable(*p));
        let mut b: Option<(f64, f64, f64, f64)> = None;
        for (x, y) in pts {
            let y = self.y_map(y);
            b = Some(match b {
                None => (x, x, y, y),
                Some((x0, x1, y0, y1)) => (x0.min(x), x1.max(x), y0.min(y), y1.max(y)),
            });
        }
        b.map(|(x0, x1, y0, y1)| {
            let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
            let (x0, x1) = pad(x0, x1);
            let (y0, y1) = pad(y0, y1);
            (x0, x1, y0, y1)
        })
    }

    /// Draws the panel with its top-left corner at `(ox, oy)`.
    fn render(&self, out: &mut String, ox: f64, oy: f64) {
        let (pw, ph) = (PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B);
        let (px, py) = (ox + MARGIN_L, oy + MARGIN_T);
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
            px + pw / 2.0,
            oy + 20.0,
            escape(&self.title)
        )
        .unwrap();
        writeln!(
            out,
            r#"<rect x="{px:.1}" y="{py:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="dimgray"/>"#
        )
        .unwrap();
        let Some((x0, x1, y0, y1)) = self.bounds() else {
            writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" fill="gray">no data</text>"#,
                px + pw / 2.0,
                py + ph / 2.0
            )
            .unwrap();
            return;
        };
        let sx = |x: f64| px + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| py + ph - (y - y0) / (y1 - y0) * ph;

        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let ylabel = if self.log_y {
                format!("1e{yv:.1}")
            } else {
                tick(yv)
            };
            writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
                sx(xv),
                py + ph + 14.0,
                tick(xv)
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
                px - 4.0,
                sy(yv) + 3.0,
                ylabel
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            px + pw / 2.0,
            py + ph + 32.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            ox + 14.0,
            py + ph / 2.0,
            ox + 14.0,
            py + ph / 2.0,
            escape(&self.y_label)
        )
        .unwrap();

        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            // Unusable points split the curve into separate polylines.
            for run in s.points.split(|p| !self.usable(*p)).filter(|r| !r.is_empty()) {
                let pts: Vec<String> = run
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(self.y_map(y))))
                    .collect();
                writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                    pts.join(" ")
                )
                .unwrap();
            }
            let ly = py + 14.0 + 14.0 * k as f64;
            writeln!(
                out,
                r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#,
                px + 8.0,
                px + 28.0,
                px + 32.0,
                ly + 3.0,
                escape(&s.name)
            )
            .unwrap();
        }
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Panels stacked in a two-column grid.
pub fn render_svg(charts: &[Chart]) -> String {
    let cols = 2usize.min(charts.len().max(1));
    let rows = charts.len().div_ceil(cols).max(1);
    let (w, h) = (PANEL_W * cols as f64, PANEL_H * rows as f64);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (k, c) in charts.iter().enumerate() {
        c.render(&mut out, PANEL_W * (k % cols) as f64, PANEL_H * (k / cols) as f64);
    }
    out.push_str("</svg>\n");
    out
}

/// Comparison solution `-psi(t)` sampled on `ts`, up to its blow-up time.
fn envelope(ts: &[f64], w0: f64, k: f64, gamma: f64) -> Vec<(f64, f64)> {
    ts.iter()
        .map_while(|&t| riccati_lower_envelope(-w0, k, gamma, t).ok().map(|psi| (t, psi)))
        .collect()
}

/// The standard set of panels for a run.
pub fn run_charts(rows: &[DiagRow], report: &RunReport) -> Vec<Chart> {
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let col = |f: fn(&DiagRow) -> f64| -> Vec<(f64, f64)> { rows.iter().map(|r| (r.t, f(r))).collect() };
    let c0 = rows.first().map_or(1.0, |r| r.conserved);

    let growth = Chart::new("gradient and blow-up integral", "t", "value", true)
        .with(Series::new("|grad u|_inf", col(|r| r.grad_inf)))
        .with(Series::new("I(t)", col(|r| r.i)));
    let drift = Chart::new("conserved quantity", "t", "C(t)/C(0) - 1", false).with(Series::new(
        "relative drift",
        rows.iter().map(|r| (r.t, r.conserved / c0 - 1.0)).collect(),
    ));

    let b = &report.breaking;
    let mut slope = Chart::new("steepest slope vs comparison bound", "t", "-min u_x", true)
        .with(Series::new("-min u_x", col(|r| -r.min_ux)));
    if b.t_star.is_some() {
        slope = slope.with(Series::new("comparison solution", envelope(&ts, b.m0, b.k_emp, b.gamma)).dashed());
    }

    let mut charts = vec![growth, drift, slope];
    if let Some(w) = report.weighted.ok() {
        let mut m1 = Chart::new("weighted slope M1 vs comparison bound", "t", "-M1", true)
            .with(Series::new("-M1", w.t.iter().zip(&w.m1).map(|(t, m)| (*t, -m)).collect()));
        if let (Some(c3), Some(_)) = (w.c3_emp, w.t0) {
            m1 = m1.with(Series::new("comparison solution", envelope(&w.t, w.m1_0, c3 * c3, 0.5 * b.gamma)).dashed());
        }
        charts.push(m1);
    }
    charts
}
