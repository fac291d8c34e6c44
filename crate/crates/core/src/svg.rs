//! Minimal deterministic SVG plots. All coordinates are printed with fixed
//! precision so identical inputs give identical bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, equal_aspect: bool) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-9 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-9 {
            y1 = y0 + 1.0;
        }
        if equal_aspect {
            let sx = (x1 - x0) / (WIDTH - 2.0 * MARGIN);
            let sy = (y1 - y0) / (HEIGHT - 2.0 * MARGIN);
            let s = sx.max(sy);
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            x0 = cx - s * (WIDTH - 2.0 * MARGIN) / 2.0;
            x1 = cx + s * (WIDTH - 2.0 * MARGIN) / 2.0;
            y0 = cy - s * (HEIGHT - 2.0 * MARGIN) / 2.0;
            y1 = cy + s * (HEIGHT - 2.0 * MARGIN) / 2.0;
        }
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(out, r#"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, r - l, b - t).unwrap();
    for i in 0..=4 {
        let fx = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let fy = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            f.px(fx),
            b + 16.0,
            tick(fx)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            l - 6.0,
            f.py(fy) + 4.0,
            tick(fy)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(xlabel)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="16" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    )
    .unwrap();
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn polyline(out: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str, width: f64) {
    let mut d = String::new();
    for (x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        write!(d, "{:.2},{:.2} ", f.px(*x), f.py(*y)).unwrap();
    }
    writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width:.1}"/>"#,
        d.trim_end()
    )
    .unwrap();
}

fn legend(out: &mut String, names: &[(&str, &str)]) {
    for (i, (name, color)) in names.iter().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * i as f64;
        writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="12" height="4" fill="{color}"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"#,
            MARGIN + 8.0,
            y - 4.0,
            MARGIN + 24.0,
            y,
            escape(name)
        )
        .unwrap();
    }
}

/// Line chart of named series.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let frame = Frame::fit(series.iter().flat_map(|(_, s)| s.iter().copied()), false);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, xlabel, ylabel);
    for (i, (_, pts)) in series.iter().enumerate() {
        polyline(&mut out, &frame, pts, PALETTE[i % PALETTE.len()], 1.5);
    }
    let names: Vec<(&str, &str)> = series
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.as_str(), PALETTE[i % PALETTE.len()]))
        .collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// A marker on a map plot.
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub class: usize,
    /// Hollow markers are drawn for ground truth.
    pub hollow: bool,
}

/// Top-down map: trajectories as lines, objects as class-colored markers.
pub fn map_plot(title: &str, trajectories: &[(String, Vec<(f64, f64)>)], markers: &[Marker]) -> String {
    let frame = Frame::fit(
        trajectories
            .iter()
            .flat_map(|(_, t)| t.iter().copied())
            .chain(markers.iter().map(|m| (m.x, m.y))),
        true,
    );
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, "x (m)", "y (m)");
    let line_colors = ["#000000", "#888888", "#1f77b4"];
    for (i, (_, pts)) in trajectories.iter().enumerate() {
        polyline(&mut out, &frame, pts, line_colors[i % line_colors.len()], 1.0);
    }
    for m in markers.iter().filter(|m| m.x.is_finite() && m.y.is_finite()) {
        let color = PALETTE[m.class % PALETTE.len()];
        let fill = if m.hollow { "none" } else { color };
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{}" fill="{fill}" stroke="{color}" stroke-width="1.5"/>"#,
            frame.px(m.x),
            frame.py(m.y),
            if m.hollow { 7 } else { 4 }
        )
        .unwrap();
    }
    let names: Vec<(&str, &str)> = trajectories
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.as_str(), line_colors[i % line_colors.len()]))
        .collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}
