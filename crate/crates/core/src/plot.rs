//! Minimal self-contained SVG emission for heatmaps, line plots, and
//! scatter plots. Each figure embeds its source data as an XML comment so
//! a plot file alone is enough to re-check the numbers.

use crate::error::{CoreError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 110.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

/// Axis-aligned affine map from data coordinates to pixel coordinates.
#[derive(Debug, Clone, Copy)]
pub struct DataMap {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl DataMap {
    fn from_ranges(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        // Degenerate ranges get a symmetric pad so single points render.
        let (x_lo, x_hi) = pad(x_lo, x_hi);
        let (y_lo, y_hi) = pad(y_lo, y_hi);
        Self { x_lo, x_hi, y_lo, y_hi }
    }

    pub fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    pub fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    /// Inverse of `px`; used by the round-trip tests.
    pub fn inv_px(&self, px: f64) -> f64 {
        self.x_lo + (px - MARGIN_L) / (WIDTH - MARGIN_L - MARGIN_R) * (self.x_hi - self.x_lo)
    }

    /// Inverse of `py`.
    pub fn inv_py(&self, py: f64) -> f64 {
        self.y_lo + (HEIGHT - MARGIN_B - py) / (HEIGHT - MARGIN_T - MARGIN_B) * (self.y_hi - self.y_lo)
    }
}

fn pad(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let c = lo;
        let w = c.abs().max(1.0) * 0.5;
        (c - w, c + w)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str, source_comment: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<!-- source-data\n{}\n-->\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"16\">{}</text>\n",
        esc(source_comment),
        WIDTH / 2.0,
        esc(title)
    )
}

fn axes(map: &DataMap, xlabel: &str, ylabel: &str) -> String {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let mut out = String::new();
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = map.x_lo + f * (map.x_hi - map.x_lo);
        let yv = map.y_lo + f * (map.y_hi - map.y_lo);
        let px = map.px(xv);
        let py = map.py(yv);
        out.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{:.3}</text>\n",
            y0 + 5.0,
            y0 + 18.0,
            xv
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{:.3}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            yv
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 10.0,
        esc(xlabel)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(ylabel)
    ));
    out
}

fn viridis(t: f64) -> (u8, u8, u8) {
    // Coarse viridis-like ramp; piecewise-linear through five anchors.
    let anchors: [(f64, [f64; 3]); 5] = [
        (0.00, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.50, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.00, [253.0, 231.0, 37.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    for w in anchors.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t <= t1 {
            let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            return (
                (c0[0] + f * (c1[0] - c0[0])) as u8,
                (c0[1] + f * (c1[1] - c0[1])) as u8,
                (c0[2] + f * (c1[2] - c0[2])) as u8,
            );
        }
    }
    (253, 231, 37)
}

const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// One named polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn finite_points(series: &[Series]) -> Vec<(f64, f64)> {
    series
        .iter()
        .flat_map(|s| s.points.iter())
        .copied()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect()
}

fn ranges(points: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    if points.is_empty() {
        return Err(CoreError::Degenerate("no finite data points to plot".into()));
    }
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for &(x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    Ok((x_lo, x_hi, y_lo, y_hi))
}

fn legend(labels: &[String]) -> String {
    let mut out = String::new();
    for (k, label) in labels.iter().enumerate() {
        let y = MARGIN_T + 16.0 * k as f64;
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            WIDTH - MARGIN_R + 8.0,
            WIDTH - MARGIN_R + 28.0,
            WIDTH - MARGIN_R + 33.0,
            y + 4.0,
            esc(label)
        ));
    }
    out
}

fn source_comment(series: &[Series]) -> String {
    let mut out = String::new();
    for s in series {
        out.push_str(&format!("series {}\n", s.label));
        for (x, y) in &s.points {
            out.push_str(&format!("{x:e},{y:e}\n"));
        }
    }
    out
}

/// Line plot of one or more series.
pub fn svg_lines(series: &[Series], title: &str, xlabel: &str, ylabel: &str) -> Result<String> {
    let pts = finite_points(series);
    let (x_lo, x_hi, y_lo, y_hi) = ranges(&pts)?;
    let map = DataMap::from_ranges(x_lo, x_hi, y_lo, y_hi);
    let mut out = header(title, &source_comment(series));
    out.push_str(&axes(&map, xlabel, ylabel));
    for (k, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.3},{:.3}", map.px(x), map.py(y)))
            .collect();
        if path.len() == 1 {
            let xy: Vec<&str> = path[0].split(',').collect();
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                xy[0], xy[1]
            ));
        } else if !path.is_empty() {
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" \
                 points=\"{}\"/>\n",
                path.join(" ")
            ));
        }
    }
    out.push_str(&legend(&series.iter().map(|s| s.label.clone()).collect::<Vec<_>>()));
    out.push_str("</svg>\n");
    Ok(out)
}

/// Scatter plot of one or more series.
pub fn svg_scatter(series: &[Series], title: &str, xlabel: &str, ylabel: &str) -> Result<String> {
    let pts = finite_points(series);
    let (x_lo, x_hi, y_lo, y_hi) = ranges(&pts)?;
    let map = DataMap::from_ranges(x_lo, x_hi, y_lo, y_hi);
    let mut out = header(title, &source_comment(series));
    out.push_str(&axes(&map, xlabel, ylabel));
    for (k, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        for &(x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            out.push_str(&format!(
                "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"2.5\" fill=\"{color}\"/>\n",
                map.px(x),
                map.py(y)
            ));
        }
    }
    out.push_str(&legend(&series.iter().map(|s| s.label.clone()).collect::<Vec<_>>()));
    out.push_str("</svg>\n");
    Ok(out)
}

/// Heatmap of `values[iy][ix]` over cell-centered grids `xs`, `ys`, with an
/// optional overlay polyline drawn in data coordinates.
pub fn svg_heatmap(
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<f64>],
    title: &str,
    xlabel: &str,
    ylabel: &str,
    overlay: Option<&Series>,
) -> Result<String> {
    if xs.is_empty() || ys.is_empty() || values.len() != ys.len() {
        return Err(CoreError::Degenerate("heatmap grid shapes disagree".into()));
    }
    for row in values {
        if row.len() != xs.len() {
            return Err(CoreError::Degenerate("heatmap row length disagrees".into()));
        }
    }
    let finite: Vec<f64> = values
        .iter()
        .flat_map(|r| r.iter())
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    if finite.is_empty() {
        return Err(CoreError::Degenerate("heatmap has no finite values".into()));
    }
    let v_lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let v_hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Cell edges at midpoints between grid centers.
    let edges = |g: &[f64]| -> Vec<f64> {
        let n = g.len();
        let mut e = Vec::with_capacity(n + 1);
        if n == 1 {
            let w = g[0].abs().max(1.0) * 0.1;
            e.push(g[0] - w);
            e.push(g[0] + w);
            return e;
        }
        e.push(g[0] - (g[1] - g[0]) / 2.0);
        for k in 1..n {
            e.push((g[k - 1] + g[k]) / 2.0);
        }
        e.push(g[n - 1] + (g[n - 1] - g[n - 2]) / 2.0);
        e
    };
    let xe = edges(xs);
    let ye = edges(ys);
    let map = DataMap::from_ranges(xe[0], xe[xe.len() - 1], ye[0], ye[ye.len() - 1]);

    let mut src = String::new();
    for (iy, row) in values.iter().enumerate() {
        for (ix, v) in row.iter().enumerate() {
            src.push_str(&format!("{:e},{:e},{:e}\n", xs[ix], ys[iy], v));
        }
    }
    let mut out = header(title, &src);
    for (iy, row) in values.iter().enumerate() {
        for (ix, v) in row.iter().enumerate() {
            let t = if v_hi > v_lo { (v - v_lo) / (v_hi - v_lo) } else { 0.5 };
            let (r, g, b) = if v.is_finite() {
                viridis(t)
            } else {
                (200, 200, 200)
            };
            let x0 = map.px(xe[ix]);
            let x1 = map.px(xe[ix + 1]);
            let y0 = map.py(ye[iy + 1]);
            let y1 = map.py(ye[iy]);
            out.push_str(&format!(
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" \
                 fill=\"rgb({r},{g},{b})\"/>\n",
                x0,
                y0,
                x1 - x0,
                y1 - y0
            ));
        }
    }
    out.push_str(&axes(&map, xlabel, ylabel));
    if let Some(ov) = overlay {
        let path: Vec<String> = ov
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.3},{:.3}", map.px(x), map.py(y)))
            .collect();
        if !path.is_empty() {
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" \
                 points=\"{}\"/>\n",
                path.join(" ")
            ));
        }
        out.push_str(&legend(&[ov.label.clone()]));
    }
    // Color legend: min and max swatches.
    let legend_vals = if v_hi > v_lo { vec![v_lo, v_hi] } else { vec![v_lo] };
    for (k, v) in legend_vals.iter().enumerate() {
        let t = if v_hi > v_lo { (v - v_lo) / (v_hi - v_lo) } else { 0.5 };
        let (r, g, b) = viridis(t);
        let y = HEIGHT - MARGIN_B - 40.0 - 20.0 * k as f64;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{y}\" width=\"14\" height=\"14\" fill=\"rgb({r},{g},{b})\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{:.3e}</text>\n",
            WIDTH - MARGIN_R + 8.0,
            WIDTH - MARGIN_R + 26.0,
            y + 11.0,
            v
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// The data-coordinate map a heatmap over grids `xs`, `ys` uses; exposed so
/// tests can invert overlay pixel coordinates.
pub fn heatmap_map(xs: &[f64], ys: &[f64]) -> DataMap {
    let edges = |g: &[f64]| -> (f64, f64) {
        let n = g.len();
        if n == 1 {
            let w = g[0].abs().max(1.0) * 0.1;
            return (g[0] - w, g[0] + w);
        }
        (
            g[0] - (g[1] - g[0]) / 2.0,
            g[n - 1] + (g[n - 1] - g[n - 2]) / 2.0,
        )
    };
    let (x_lo, x_hi) = edges(xs);
    let (y_lo, y_hi) = edges(ys);
    DataMap::from_ranges(x_lo, x_hi, y_lo, y_hi)
}
