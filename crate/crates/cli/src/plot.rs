//! Small self-contained SVG line plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const MAX_POINTS: usize = 4000;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf", "#bcbd22", "#7f7f7f",
];

#[derive(Debug, Clone)]
struct Line {
    label: String,
    points: Vec<(f64, f64)>,
}

/// A single-panel figure built up from lines, reference lines and markers.
#[derive(Debug, Clone, Default)]
pub struct Figure {
    title: String,
    x_label: String,
    y_label: String,
    lines: Vec<Line>,
    hlines: Vec<f64>,
    vlines: Vec<f64>,
    crosses: Vec<(f64, f64)>,
    dots: Vec<(f64, f64)>,
}

impl Figure {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    /// Add a polyline; long series are thinned to at most `MAX_POINTS`
    /// vertices (the last sample is always kept).
    pub fn line(mut self, label: impl Into<String>, x: &[f64], y: &[f64]) -> Self {
        let n = x.len().min(y.len());
        let stride = n.div_ceil(MAX_POINTS).max(1);
        let points = (0..n)
            .filter(|&k| k % stride == 0 || k + 1 == n)
            .map(|k| (x[k], y[k]))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .collect();
        self.lines.push(Line {
            label: label.into(),
            points,
        });
        self
    }

    /// Gray dashed horizontal reference line.
    pub fn hline(mut self, y: f64) -> Self {
        self.hlines.push(y);
        self
    }

    pub fn vline(mut self, x: f64) -> Self {
        self.vlines.push(x);
        self
    }

    /// Magenta x, used for equilibria.
    pub fn cross(mut self, x: f64, y: f64) -> Self {
        self.crosses.push((x, y));
        self
    }

    /// Red dot, used for initial conditions.
    pub fn dot(mut self, x: f64, y: f64) -> Self {
        self.dots.push((x, y));
        self
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let pts = self
            .lines
            .iter()
            .flat_map(|l| l.points.iter().copied())
            .chain(self.crosses.iter().copied())
            .chain(self.dots.iter().copied());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        for &x in self.vlines.iter().filter(|v| v.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
        for &y in self.hlines.iter().filter(|v| v.is_finite()) {
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        (pad(x0, x1), pad(y0, y1))
    }

    pub fn to_svg(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        // axes and ticks
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let bottom = TOP + ph;
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bottom + 5.0,
                bottom + 19.0,
                tick_label(t, x0, x1)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0,
                tick_label(t, y0, y1)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for &y in self.hlines.iter().filter(|v| v.is_finite()) {
            let _ = writeln!(
                s,
                r##"<line class="reference" x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#888888" stroke-dasharray="6 4"/>"##,
                sy(y),
                LEFT + pw
            );
        }
        for &x in self.vlines.iter().filter(|v| v.is_finite()) {
            let _ = writeln!(
                s,
                r##"<line class="reference" x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1:.2}" stroke="#888888" stroke-dasharray="6 4"/>"##,
                sx(x),
                bottom
            );
        }

        for (i, line) in self.lines.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut pts = String::new();
            for &(x, y) in &line.points {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
            }
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.trim_end()
            );
        }

        for &(x, y) in &self.dots {
            let _ = writeln!(
                s,
                r#"<circle class="initial" cx="{:.2}" cy="{:.2}" r="4" fill="red"/>"#,
                sx(x),
                sy(y)
            );
        }
        for &(x, y) in &self.crosses {
            let (cx, cy, d) = (sx(x), sy(y), 6.0);
            let _ = writeln!(
                s,
                r#"<g class="equilibrium" stroke="magenta" stroke-width="2.5"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g>"#,
                cx - d,
                cy - d,
                cx + d,
                cy + d,
                cx - d,
                cy + d,
                cx + d,
                cy - d
            );
        }

        if self.lines.len() > 1 {
            for (i, line) in self.lines.iter().enumerate() {
                let y = TOP + 16.0 + 16.0 * i as f64;
                let x = LEFT + pw - 110.0;
                let _ = writeln!(
                    s,
                    r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                    x + 20.0,
                    PALETTE[i % PALETTE.len()],
                    x + 26.0,
                    y + 4.0,
                    escape(&line.label)
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn pad(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
        let d = 0.1 * lo.abs().max(1.0);
        return (lo - d, hi + d);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Round tick positions (steps of 1, 2 or 5 times a power of ten).
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(lo, hi);
    let mut out = Vec::new();
    // Round to the step's decimal places so 3 * 0.1 lands on 0.3.
    let scale = 10f64.powi((-step.log10().floor()).max(0.0) as i32);
    let mut k = (lo / step - 1e-9).ceil();
    while k * step <= hi + step * 1e-9 {
        let v = (k * step * scale).round() / scale;
        out.push(if v == 0.0 { 0.0 } else { v });
        k += 1.0;
    }
    out
}

fn tick_step(lo: f64, hi: f64) -> f64 {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw * (1.0 - 1e-12))
        .unwrap_or(10.0 * mag)
}

fn tick_label(v: f64, lo: f64, hi: f64) -> String {
    let decimals = (-tick_step(lo, hi).log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 70.0), vec![0.0, 20.0, 40.0, 60.0]);
        assert_eq!(ticks(-0.3, 0.3), vec![-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3]);
        let t = ticks(1.234, 1.236);
        assert!(t.len() >= 3 && t.iter().all(|v| (1.234..=1.236).contains(v)));
    }

    #[test]
    fn labels_follow_step() {
        assert_eq!(tick_label(0.2, 0.0, 1.0), "0.2");
        assert_eq!(tick_label(40.0, 0.0, 70.0), "40");
    }

    #[test]
    fn markers_and_references_are_drawn() {
        let svg = Figure::new("a < b", "x", "y")
            .line("one", &[0.0, 1.0, 2.0], &[1.0, 0.5, 0.2])
            .hline(0.0)
            .vline(1.5)
            .cross(1.5, 0.0)
            .dot(0.0, 1.0)
            .to_svg();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains(r#"stroke="magenta""#));
        assert!(svg.contains(r#"fill="red""#));
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn long_lines_are_thinned() {
        let x: Vec<f64> = (0..100_001).map(|k| k as f64).collect();
        let fig = Figure::new("", "", "").line("", &x, &x);
        let pts = &fig.lines[0].points;
        assert!(pts.len() <= MAX_POINTS + 1);
        assert_eq!(pts.last().unwrap().0, 100_000.0);
    }

    #[test]
    fn flat_series_gets_a_range() {
        let svg = Figure::new("", "", "").line("", &[0.0, 1.0], &[2.0, 2.0]).to_svg();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
