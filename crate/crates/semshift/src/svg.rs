//! Hand-rolled SVG rendering for the chart styles the pipeline emits:
//! scatter plots with a confidence band, coefficient bars with standard
//! error whiskers, kernel density overlays with rug marks, and labelled
//! principal-component scatters.
//!
//! Output is deterministic: pixel coordinates are formatted at fixed
//! precision, element order follows input order, and nothing time- or
//! locale-dependent is embedded. Identical inputs yield identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::stats::DensityCurve;
use crate::stats::{CoefficientEstimate, RegressionBand};
use crate::stats::significance_stars;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;

/// Fill colours cycled over series; chosen to stay distinct on white.
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// One scatter observation; the label, when present, is drawn next to the
/// marker.
#[derive(Debug, Clone)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub label: Option<String>,
}

/// One point of a principal-component projection. `valence` renders as a
/// "+" or "\u{2212}" annotation after the token label.
#[derive(Debug, Clone)]
pub struct PcaPoint {
    pub token: String,
    pub decade: i32,
    pub x: f64,
    pub y: f64,
    pub valence_positive: Option<bool>,
}

/// One density series: a curve plus rug values weighted for mark size.
#[derive(Debug, Clone)]
pub struct DensitySeries {
    pub name: String,
    pub curve: DensityCurve,
    /// (value, weight) pairs; weights are normalized within the chart so
    /// the largest weight gets the largest rug mark.
    pub rug: Vec<(f64, f64)>,
}

/// Pixel-space formatter. Two decimals keeps files diffable and is finer
/// than device resolution.
fn px(value: f64) -> String {
    format!("{value:.2}")
}

/// Tick-label formatter: fixed precision with trailing zeros trimmed.
fn tick_label(value: f64) -> String {
    let s = format!("{value:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Debug, Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(mut d0: f64, mut d1: f64, p0: f64, p1: f64) -> Self {
        // A degenerate data range is padded so every point maps to the
        // middle instead of dividing by zero.
        if d0 == d1 {
            let pad = if d0 == 0.0 { 1.0 } else { d0.abs() * 0.1 };
            d0 -= pad;
            d1 += pad;
        }
        Self { d0, d1, p0, p1 }
    }

    fn apply(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

/// Step of size 1, 2, or 5 times a power of ten that splits `span` into
/// roughly `target` intervals.
fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let factor = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    factor * mag
}

fn ticks(d0: f64, d1: f64) -> Vec<f64> {
    let step = nice_step(d1 - d0, 5);
    let mut t = (d0 / step).ceil() * step;
    let mut out = Vec::new();
    // Half a step of slack absorbs accumulated rounding at the far end.
    while t <= d1 + step * 0.5 {
        if t >= d0 - step * 1e-9 {
            // Snap values like 0.30000000000000004 back onto the grid.
            let snapped = (t / step).round() * step;
            out.push(if snapped == 0.0 { 0.0 } else { snapped });
        }
        t += step;
    }
    out
}

fn check_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    for v in values {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("non-finite {what} in chart data")));
        }
    }
    Ok(())
}

fn data_bounds(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    let mut bounds: Option<(f64, f64)> = None;
    for v in values {
        bounds = Some(match bounds {
            None => (v, v),
            Some((lo, hi)) => (lo.min(v), hi.max(v)),
        });
    }
    bounds
}

struct Canvas {
    body: String,
    x: Scale,
    y: Scale,
}

impl Canvas {
    /// Opens the document and draws the frame, axis ticks, labels, and
    /// title shared by every chart type.
    fn new(title: &str, x_label: &str, y_label: &str, xb: (f64, f64), yb: (f64, f64)) -> Self {
        let x = Scale::new(xb.0, xb.1, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let y = Scale::new(yb.0, yb.1, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let mut body = String::new();
        let _ = writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
             viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">",
            w = px(WIDTH),
            h = px(HEIGHT)
        );
        let _ = writeln!(
            body,
            "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>",
            w = px(WIDTH),
            h = px(HEIGHT)
        );
        let _ = writeln!(
            body,
            "<text x=\"{x}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{t}</text>",
            x = px(WIDTH / 2.0),
            t = escape(title)
        );

        let mut canvas = Self { body, x, y };
        let plot_bottom = HEIGHT - MARGIN_BOTTOM;
        for t in ticks(canvas.x.d0, canvas.x.d1) {
            let xp = canvas.x.apply(t);
            let _ = writeln!(
                canvas.body,
                "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>",
                x = px(xp),
                y0 = px(MARGIN_TOP),
                y1 = px(plot_bottom)
            );
            let _ = writeln!(
                canvas.body,
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"11\">{l}</text>",
                x = px(xp),
                y = px(plot_bottom + 18.0),
                l = tick_label(t)
            );
        }
        for t in ticks(canvas.y.d0, canvas.y.d1) {
            let yp = canvas.y.apply(t);
            let _ = writeln!(
                canvas.body,
                "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>",
                x0 = px(MARGIN_LEFT),
                x1 = px(WIDTH - MARGIN_RIGHT),
                y = px(yp)
            );
            let _ = writeln!(
                canvas.body,
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\" font-size=\"11\">{l}</text>",
                x = px(MARGIN_LEFT - 6.0),
                y = px(yp + 4.0),
                l = tick_label(t)
            );
        }
        let _ = writeln!(
            canvas.body,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"#333333\"/>",
            x = px(MARGIN_LEFT),
            y = px(MARGIN_TOP),
            w = px(WIDTH - MARGIN_LEFT - MARGIN_RIGHT),
            h = px(HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
        );
        let _ = writeln!(
            canvas.body,
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"13\">{l}</text>",
            x = px(WIDTH / 2.0),
            y = px(HEIGHT - 12.0),
            l = escape(x_label)
        );
        let _ = writeln!(
            canvas.body,
            "<text x=\"18\" y=\"{y}\" text-anchor=\"middle\" font-size=\"13\" \
             transform=\"rotate(-90 18 {y})\">{l}</text>",
            y = px(HEIGHT / 2.0),
            l = escape(y_label)
        );
        canvas
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Scatter plot with an optional confidence band and fitted line.
pub fn scatter_with_band(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[ScatterPoint],
    band: Option<&RegressionBand>,
) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Numeric("scatter plot needs at least one point".into()));
    }
    check_finite(points.iter().flat_map(|p| [p.x, p.y]), "scatter point")?;

    let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let mut ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    if let Some(band) = band {
        xs.extend(band.grid.iter().copied());
        ys.extend(band.lower.iter().copied());
        ys.extend(band.upper.iter().copied());
    }
    let xb = data_bounds(xs.iter().copied()).expect("nonempty");
    let yb = data_bounds(ys.iter().copied()).expect("nonempty");

    let mut canvas = Canvas::new(title, x_label, y_label, xb, yb);

    if let Some(band) = band {
        // Band polygon: upper edge left to right, lower edge back.
        let mut path = String::from("M");
        for (i, (&gx, &gy)) in band.grid.iter().zip(band.upper.iter()).enumerate() {
            if i > 0 {
                path.push_str(" L");
            }
            let _ = write!(path, "{},{}", px(canvas.x.apply(gx)), px(canvas.y.apply(gy)));
        }
        for (&gx, &gy) in band.grid.iter().zip(band.lower.iter()).rev() {
            let _ = write!(
                path,
                " L{},{}",
                px(canvas.x.apply(gx)),
                px(canvas.y.apply(gy))
            );
        }
        path.push_str(" Z");
        let _ = writeln!(
            canvas.body,
            "<path d=\"{path}\" fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\"/>"
        );
        let mut line = String::from("M");
        for (i, (&gx, &gy)) in band.grid.iter().zip(band.fitted.iter()).enumerate() {
            if i > 0 {
                line.push_str(" L");
            }
            let _ = write!(line, "{},{}", px(canvas.x.apply(gx)), px(canvas.y.apply(gy)));
        }
        let _ = writeln!(
            canvas.body,
            "<path d=\"{line}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>"
        );
    }

    for p in points {
        let cx = canvas.x.apply(p.x);
        let cy = canvas.y.apply(p.y);
        let _ = writeln!(
            canvas.body,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"#d62728\" fill-opacity=\"0.8\"/>",
            x = px(cx),
            y = px(cy)
        );
        if let Some(label) = &p.label {
            let _ = writeln!(
                canvas.body,
                "<text x=\"{x}\" y=\"{y}\" font-size=\"10\" fill=\"#333333\">{l}</text>",
                x = px(cx + 4.0),
                y = px(cy - 4.0),
                l = escape(label)
            );
        }
    }
    Ok(canvas.finish())
}

/// Vertical bar per coefficient with a one-standard-error whisker and the
/// significance stars for its p-value. The intercept is the caller's choice
/// to include or slice away.
pub fn coefficient_bars(title: &str, coefficients: &[CoefficientEstimate]) -> Result<String> {
    if coefficients.is_empty() {
        return Err(Error::Numeric("bar chart needs at least one coefficient".into()));
    }
    check_finite(
        coefficients.iter().flat_map(|c| [c.beta, c.se]),
        "coefficient",
    )?;

    let lo = coefficients
        .iter()
        .map(|c| (c.beta - c.se).min(0.0))
        .fold(f64::INFINITY, f64::min);
    let hi = coefficients
        .iter()
        .map(|c| (c.beta + c.se).max(0.0))
        .fold(f64::NEG_INFINITY, f64::max);
    // Headroom keeps the star annotations inside the frame.
    let pad = (hi - lo).abs().max(1e-12) * 0.15;

    let mut canvas = Canvas::new(title, "predictor", "coefficient", (0.0, 1.0), (lo - pad, hi + pad));

    let n = coefficients.len() as f64;
    let zero_y = canvas.y.apply(0.0);
    let _ = writeln!(
        canvas.body,
        "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#333333\" stroke-width=\"1\"/>",
        x0 = px(MARGIN_LEFT),
        x1 = px(WIDTH - MARGIN_RIGHT),
        y = px(zero_y)
    );

    for (i, c) in coefficients.iter().enumerate() {
        let slot = (i as f64 + 0.5) / n;
        let center = canvas.x.apply(slot);
        let half_width = (canvas.x.apply(1.0 / n) - canvas.x.apply(0.0)) * 0.3;
        let top = canvas.y.apply(c.beta.max(0.0));
        let bottom = canvas.y.apply(c.beta.min(0.0));
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            canvas.body,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{color}\" fill-opacity=\"0.85\"/>",
            x = px(center - half_width),
            y = px(top),
            w = px(half_width * 2.0),
            h = px((bottom - top).abs())
        );
        let whisker_top = canvas.y.apply(c.beta + c.se);
        let whisker_bottom = canvas.y.apply(c.beta - c.se);
        let _ = writeln!(
            canvas.body,
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            x = px(center),
            y0 = px(whisker_top),
            y1 = px(whisker_bottom)
        );
        for yv in [whisker_top, whisker_bottom] {
            let _ = writeln!(
                canvas.body,
                "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#333333\" stroke-width=\"1\"/>",
                x0 = px(center - 4.0),
                x1 = px(center + 4.0),
                y = px(yv)
            );
        }
        let stars = significance_stars(c.p);
        let star_y = whisker_top.min(whisker_bottom) - 6.0;
        let _ = writeln!(
            canvas.body,
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"11\">{s}</text>",
            x = px(center),
            y = px(star_y),
            s = escape(stars)
        );
        let _ = writeln!(
            canvas.body,
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"11\">{l}</text>",
            x = px(center),
            y = px(HEIGHT - MARGIN_BOTTOM + 32.0),
            l = escape(&c.name)
        );
    }
    Ok(canvas.finish())
}

/// Overlaid density curves with per-series rug marks along the bottom edge.
/// Rug mark radius grows with the normalized weight.
pub fn density_overlay(title: &str, x_label: &str, series: &[DensitySeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Numeric("density overlay needs at least one series".into()));
    }
    for s in series {
        check_finite(s.curve.grid.iter().copied(), "density grid")?;
        check_finite(s.curve.density.iter().copied(), "density value")?;
        check_finite(s.rug.iter().flat_map(|&(v, w)| [v, w]), "rug mark")?;
    }

    let xb = data_bounds(
        series
            .iter()
            .flat_map(|s| s.curve.grid.iter().copied().chain(s.rug.iter().map(|r| r.0))),
    )
    .expect("nonempty");
    let yb = data_bounds(
        series
            .iter()
            .flat_map(|s| s.curve.density.iter().copied())
            .chain([0.0]),
    )
    .expect("nonempty");

    let mut canvas = Canvas::new(title, x_label, "density", xb, yb);

    let weight_bounds = data_bounds(series.iter().flat_map(|s| s.rug.iter().map(|r| r.1)));
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::from("M");
        for (j, (&gx, &gy)) in s.curve.grid.iter().zip(s.curve.density.iter()).enumerate() {
            if j > 0 {
                path.push_str(" L");
            }
            let _ = write!(path, "{},{}", px(canvas.x.apply(gx)), px(canvas.y.apply(gy)));
        }
        let _ = writeln!(
            canvas.body,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
        );

        let base = HEIGHT - MARGIN_BOTTOM;
        for &(value, weight) in &s.rug {
            let radius = match weight_bounds {
                Some((lo, hi)) if hi > lo => 1.5 + 4.0 * (weight - lo) / (hi - lo),
                _ => 3.5,
            };
            let _ = writeln!(
                canvas.body,
                "<circle cx=\"{x}\" cy=\"{y}\" r=\"{r}\" fill=\"{color}\" fill-opacity=\"0.5\"/>",
                x = px(canvas.x.apply(value)),
                y = px(base - 6.0),
                r = px(radius)
            );
        }

        // Legend swatch in the top-right corner, one row per series.
        let ly = MARGIN_TOP + 14.0 + i as f64 * 16.0;
        let _ = writeln!(
            canvas.body,
            "<rect x=\"{x}\" y=\"{y}\" width=\"12\" height=\"12\" fill=\"{color}\"/>",
            x = px(WIDTH - MARGIN_RIGHT - 130.0),
            y = px(ly - 10.0)
        );
        let _ = writeln!(
            canvas.body,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"11\">{l}</text>",
            x = px(WIDTH - MARGIN_RIGHT - 114.0),
            y = px(ly),
            l = escape(&s.name)
        );
    }
    Ok(canvas.finish())
}

/// Scatter of tokens in the first two principal components. Each point is
/// labelled with its token, its valence sign when known, and its decade
/// when more than one decade is plotted. Colour encodes the decade.
pub fn pca_scatter(title: &str, points: &[PcaPoint]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Numeric("projection plot needs at least one point".into()));
    }
    check_finite(points.iter().flat_map(|p| [p.x, p.y]), "projection point")?;

    let xb = data_bounds(points.iter().map(|p| p.x)).expect("nonempty");
    let yb = data_bounds(points.iter().map(|p| p.y)).expect("nonempty");
    let mut canvas = Canvas::new(title, "PC1", "PC2", xb, yb);

    let mut decade_color: BTreeMap<i32, &str> = BTreeMap::new();
    for p in points {
        let next = PALETTE[decade_color.len() % PALETTE.len()];
        decade_color.entry(p.decade).or_insert(next);
    }
    let multi_decade = decade_color.len() > 1;

    for p in points {
        let cx = canvas.x.apply(p.x);
        let cy = canvas.y.apply(p.y);
        let color = decade_color[&p.decade];
        let _ = writeln!(
            canvas.body,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"3.5\" fill=\"{color}\" fill-opacity=\"0.85\"/>",
            x = px(cx),
            y = px(cy)
        );
        let sign = match p.valence_positive {
            Some(true) => "+",
            Some(false) => "\u{2212}",
            None => "",
        };
        let label = if multi_decade {
            format!("{}{} ({})", p.token, sign, p.decade)
        } else {
            format!("{}{}", p.token, sign)
        };
        let _ = writeln!(
            canvas.body,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"10\" fill=\"#333333\">{l}</text>",
            x = px(cx + 5.0),
            y = px(cy - 5.0),
            l = escape(&label)
        );
    }

    for (i, (decade, color)) in decade_color.iter().enumerate() {
        let ly = MARGIN_TOP + 14.0 + i as f64 * 16.0;
        let _ = writeln!(
            canvas.body,
            "<rect x=\"{x}\" y=\"{y}\" width=\"12\" height=\"12\" fill=\"{color}\"/>",
            x = px(WIDTH - MARGIN_RIGHT - 90.0),
            y = px(ly - 10.0)
        );
        let _ = writeln!(
            canvas.body,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"11\">{decade}</text>",
            x = px(WIDTH - MARGIN_RIGHT - 74.0),
            y = px(ly)
        );
    }
    Ok(canvas.finish())
}
