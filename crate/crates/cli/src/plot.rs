//! Standalone two-panel SVG convergence plots: the chosen metric on a log
//! scale against cumulative communications (left) and iterations (right).
//! Rendering is pure string assembly with fixed formatting, so identical
//! inputs produce byte-identical files.

use chb_core::trace::{parse_csv, Trace};
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct PlotError {
    pub file: Option<PathBuf>,
    pub msg: String,
}

impl fmt::Display for PlotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(p) => write!(f, "{}: {}", p.display(), self.msg),
            None => write!(f, "{}", self.msg),
        }
    }
}

impl std::error::Error for PlotError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Gap,
    GradNormSq,
    Objective,
}

impl Metric {
    pub fn parse(s: &str) -> Option<Metric> {
        match s {
            "gap" => Some(Metric::Gap),
            "grad" => Some(Metric::GradNormSq),
            "objective" => Some(Metric::Objective),
            _ => None,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Metric::Gap => "objective error",
            Metric::GradNormSq => "squared gradient norm",
            Metric::Objective => "objective",
        }
    }

    fn value(&self, r: &chb_core::trace::IterationTrace) -> f64 {
        match self {
            Metric::Gap => r.f_gap,
            Metric::GradNormSq => r.grad_norm_sq,
            Metric::Objective => r.objective,
        }
    }
}

struct Curve {
    label: String,
    color: &'static str,
    /// (comms, iteration, metric) per kept point.
    points: Vec<(f64, f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn color_for(alg: &str, index: usize) -> &'static str {
    match alg {
        "chb" => "#1f77b4",
        "hb" => "#d62728",
        "lag" => "#2ca02c",
        "gd" => "#9467bd",
        _ => PALETTE[index % PALETTE.len()],
    }
}

/// Keep at most `cap` points per curve with a fixed stride (plus the final
/// point) so huge traces stay plottable and deterministic.
fn downsample(n: usize, cap: usize) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    let stride = n.div_ceil(cap);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    idx
}

pub fn plot_files(csvs: &[PathBuf], out: &Path, metric: Metric) -> Result<(), PlotError> {
    if csvs.is_empty() {
        return Err(PlotError { file: None, msg: "no input traces".into() });
    }
    let mut curves = Vec::new();
    for (i, path) in csvs.iter().enumerate() {
        let file = fs::File::open(path)
            .map_err(|e| PlotError { file: Some(path.clone()), msg: e.to_string() })?;
        let trace: Trace = parse_csv(std::io::BufReader::new(file))
            .map_err(|e| PlotError { file: Some(path.clone()), msg: e.to_string() })?;
        let keep = downsample(trace.records.len(), 1500);
        let points = keep
            .into_iter()
            .map(|j| {
                let r = &trace.records[j];
                (r.comms_cumulative as f64, r.k as f64, metric.value(r))
            })
            .collect();
        curves.push(Curve {
            label: trace.meta.algorithm.clone(),
            color: color_for(&trace.meta.algorithm, i),
            points,
        });
    }
    let svg = render(&curves, metric);
    fs::write(out, svg).map_err(|e| PlotError { file: Some(out.to_path_buf()), msg: e.to_string() })
}

struct Axes {
    x_min: f64,
    x_max: f64,
    /// log10 bounds of the metric axis.
    y_lo: i32,
    y_hi: i32,
}

fn axes(curves: &[Curve], x_of: impl Fn(&(f64, f64, f64)) -> f64) -> Axes {
    let mut x_max = 1.0f64;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for c in curves {
        for p in &c.points {
            x_max = x_max.max(x_of(p));
            let v = p.2;
            if v.is_finite() && v > 0.0 {
                y_min = y_min.min(v);
                y_max = y_max.max(v);
            }
        }
    }
    if !y_min.is_finite() {
        y_min = 1e-1;
        y_max = 1.0;
    }
    let y_lo = y_min.log10().floor() as i32;
    let y_hi = (y_max.log10().ceil() as i32).max(y_lo + 1);
    Axes { x_min: 0.0, x_max, y_lo, y_hi }
}

const PANEL_W: f64 = 380.0;
const PANEL_H: f64 = 300.0;
const MARGIN_TOP: f64 = 46.0;

fn render(curves: &[Curve], metric: Metric) -> String {
    let mut s = String::new();
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"980\" height=\"430\" \
         viewBox=\"0 0 980 430\" font-family=\"Helvetica,Arial,sans-serif\" font-size=\"12\">\n",
    );
    s.push_str("<rect width=\"980\" height=\"430\" fill=\"white\"/>\n");
    let panels = [
        (70.0, "communications", 0usize),
        (570.0, "iterations", 1usize),
    ];
    for (x0, x_label, which) in panels {
        let ax = axes(curves, |p| if which == 0 { p.0 } else { p.1 });
        render_panel(&mut s, curves, &ax, x0, x_label, metric, which);
    }
    // Legend across the top, in input order.
    let mut lx = 70.0;
    for c in curves {
        let _ = write!(
            s,
            "<rect x=\"{lx:.2}\" y=\"12\" width=\"18\" height=\"4\" fill=\"{}\"/>\
             <text x=\"{:.2}\" y=\"19\">{}</text>\n",
            c.color,
            lx + 24.0,
            c.label
        );
        lx += 26.0 + 10.0 * c.label.len() as f64;
    }
    s.push_str("</svg>\n");
    s
}

fn render_panel(
    s: &mut String,
    curves: &[Curve],
    ax: &Axes,
    x0: f64,
    x_label: &str,
    metric: Metric,
    which: usize,
) {
    let y0 = MARGIN_TOP;
    let x_span = (ax.x_max - ax.x_min).max(1e-9);
    let y_span = f64::from(ax.y_hi - ax.y_lo);
    let px = |x: f64| x0 + (x - ax.x_min) / x_span * PANEL_W;
    let py = |v: f64| y0 + PANEL_H - (v.log10() - f64::from(ax.y_lo)) / y_span * PANEL_H;

    let _ = write!(
        s,
        "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{PANEL_W:.2}\" height=\"{PANEL_H:.2}\" \
         fill=\"none\" stroke=\"black\"/>\n"
    );
    // Decade ticks on the y axis (thinned when the range is deep).
    let decades = (ax.y_hi - ax.y_lo).max(1);
    let step = (decades as usize).div_ceil(8).max(1) as i32;
    let mut e = ax.y_lo;
    while e <= ax.y_hi {
        let y = y0 + PANEL_H - f64::from(e - ax.y_lo) / y_span * PANEL_H;
        let _ = write!(
            s,
            "<line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{e}</text>\n",
            x0 + PANEL_W,
            x0 - 6.0,
            y + 4.0
        );
        e += step;
    }
    // Five linear ticks on the x axis.
    for i in 0..=4 {
        let x = ax.x_min + x_span * f64::from(i) / 4.0;
        let xp = px(x);
        let _ = write!(
            s,
            "<line x1=\"{xp:.2}\" y1=\"{:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\
             <text x=\"{xp:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{:.0}</text>\n",
            y0 + PANEL_H,
            y0 + PANEL_H + 5.0,
            y0 + PANEL_H + 18.0,
            x
        );
    }
    let _ = write!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>\n",
        x0 + PANEL_W / 2.0,
        y0 + PANEL_H + 36.0
    );
    let _ = write!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{} vs {}</text>\n",
        x0 + PANEL_W / 2.0,
        y0 - 8.0,
        metric.label(),
        x_label
    );
    for c in curves {
        let mut path = String::new();
        let mut pen_down = false;
        for p in &c.points {
            let v = p.2;
            if !(v.is_finite() && v > 0.0) {
                pen_down = false;
                continue;
            }
            let x = px(if which == 0 { p.0 } else { p.1 });
            let y = py(v);
            let _ = write!(path, "{}{x:.2},{y:.2} ", if pen_down { "L" } else { "M" });
            pen_down = true;
        }
        if !path.is_empty() {
            let _ = write!(
                s,
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                path.trim_end(),
                c.color
            );
        }
    }
}
