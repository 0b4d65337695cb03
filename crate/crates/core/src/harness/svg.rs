//! Minimal self-contained SVG rendering: heatmap panels and line plots.
//!
//! Coordinates are written with two decimals and nothing depends on the environment, so equal
//! inputs give byte-identical documents.

use std::fmt::Write;

const PALETTE: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

const SERIES_COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Viridis-like ramp for `t ∈ [0, 1]`; `NaN` maps to grey.
pub fn color(t: f64) -> String {
    if t.is_nan() {
        return "#bbbbbb".into();
    }
    let t = t.clamp(0.0, 1.0) * (PALETTE.len() - 1) as f64;
    let k = (t.floor() as usize).min(PALETTE.len() - 2);
    let f = t - k as f64;
    let (a, b) = (PALETTE[k], PALETTE[k + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, s: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
        escape(s)
    );
}

/// One heatmap panel; `values[i * ys.len() + j]` belongs to `(xs[i], ys[j])`.
#[derive(Debug, Clone)]
pub struct Heatmap {
    pub title: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

/// Panels side by side, colored by `log10(value)` clipped to `[lo, hi]`, with a shared colorbar.
pub fn heatmaps(panels: &[Heatmap], x_label: &str, y_label: &str, lo: f64, hi: f64) -> String {
    let (size, margin, gap) = (240.0, 50.0, 40.0);
    let width = margin + panels.len().max(1) as f64 * (size + gap) + 70.0;
    let height = size + 2.0 * margin + 20.0;
    let mut out = String::new();
    header(&mut out, width, height);
    for (p, panel) in panels.iter().enumerate() {
        let x0 = margin + p as f64 * (size + gap);
        let y0 = margin;
        let (nx, ny) = (panel.xs.len().max(1), panel.ys.len().max(1));
        let (cw, ch) = (size / nx as f64, size / ny as f64);
        for i in 0..panel.xs.len() {
            for j in 0..panel.ys.len() {
                let v = panel
                    .values
                    .get(i * panel.ys.len() + j)
                    .copied()
                    .unwrap_or(f64::NAN);
                let t = (v.log10() - lo) / (hi - lo);
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    x0 + i as f64 * cw,
                    y0 + size - (j + 1) as f64 * ch,
                    cw,
                    ch,
                    color(t)
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{size:.2}" height="{size:.2}" fill="none" stroke="black"/>"#
        );
        text(&mut out, x0 + size / 2.0, y0 - 10.0, "middle", &panel.title);
        text(
            &mut out,
            x0 + size / 2.0,
            y0 + size + 32.0,
            "middle",
            x_label,
        );
        for (k, anchor) in [(0, "start"), (nx - 1, "end")] {
            if let Some(x) = panel.xs.get(k) {
                text(
                    &mut out,
                    x0 + if k == 0 { 0.0 } else { size },
                    y0 + size + 14.0,
                    anchor,
                    &format!("{x:.2}"),
                );
            }
        }
        if let (Some(first), Some(last)) = (panel.ys.first(), panel.ys.last()) {
            text(&mut out, x0 - 4.0, y0 + size, "end", &format!("{first:.2}"));
            text(&mut out, x0 - 4.0, y0 + 10.0, "end", &format!("{last:.2}"));
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            x0 - 30.0,
            y0 + size / 2.0,
            x0 - 30.0,
            y0 + size / 2.0,
            escape(y_label)
        );
    }
    // colorbar
    let bx = width - 55.0;
    let steps = 20;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bx:.2}" y="{:.2}" width="14.00" height="{:.2}" fill="{}"/>"#,
            margin + size - (k + 1) as f64 * size / steps as f64,
            size / steps as f64,
            color(t)
        );
    }
    text(
        &mut out,
        bx + 18.0,
        margin + size,
        "start",
        &format!("{lo:.0}"),
    );
    text(
        &mut out,
        bx + 18.0,
        margin + 10.0,
        "start",
        &format!("{hi:.0}"),
    );
    text(&mut out, bx + 7.0, margin - 10.0, "middle", "log10");
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        (lo.floor() as i32..=hi.ceil() as i32)
            .map(f64::from)
            .collect()
    } else {
        (0..=4).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect()
    }
}

/// Polyline plot; points that are non-finite, or non-positive on a log axis, are dropped.
pub fn line_plot(plot: &LinePlot) -> String {
    let (w, h, left, top) = (520.0, 320.0, 70.0, 40.0);
    let width = left + w + 170.0;
    let height = top + h + 50.0;
    let map = |v: f64, log: bool| if log { v.log10() } else { v };
    let usable = |x: f64, y: f64| {
        x.is_finite() && y.is_finite() && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0)
    };
    let pts: Vec<Vec<(f64, f64)>> = plot
        .series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| usable(*x, *y))
                .map(|&(x, y)| (map(x, plot.log_x), map(y, plot.log_y)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = all.fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    if plot.log_x {
        (x_lo, x_hi) = (x_lo.floor(), x_hi.ceil());
    }
    if plot.log_y {
        (y_lo, y_hi) = (y_lo.floor(), y_hi.ceil());
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * w;
    let sy = |y: f64| top + h - (y - y_lo) / (y_hi - y_lo) * h;

    let mut out = String::new();
    header(&mut out, width, height);
    text(&mut out, left + w / 2.0, top - 15.0, "middle", &plot.title);
    let _ = writeln!(
        out,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black"/>"#
    );
    let label = |v: f64, log: bool| {
        if log {
            format!("1e{v:.0}")
        } else {
            format!("{v:.3}")
        }
    };
    for x in ticks(x_lo, x_hi, plot.log_x) {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#dddddd"/>"##,
            sx(x),
            top,
            top + h
        );
        text(
            &mut out,
            sx(x),
            top + h + 15.0,
            "middle",
            &label(x, plot.log_x),
        );
    }
    for y in ticks(y_lo, y_hi, plot.log_y) {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="#dddddd"/>"##,
            left,
            sy(y),
            left + w
        );
        text(
            &mut out,
            left - 5.0,
            sy(y) + 4.0,
            "end",
            &label(y, plot.log_y),
        );
    }
    text(
        &mut out,
        left + w / 2.0,
        top + h + 35.0,
        "middle",
        &plot.x_label,
    );
    let _ = writeln!(
        out,
        r#"<text x="15.00" y="{0:.2}" text-anchor="middle" transform="rotate(-90 15.00 {0:.2})">{1}</text>"#,
        top + h / 2.0,
        escape(&plot.y_label)
    );
    for (k, (series, p)) in plot.series.iter().zip(&pts).enumerate() {
        let c = SERIES_COLORS[k % SERIES_COLORS.len()];
        if !p.is_empty() {
            let coords: Vec<String> = p
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = top + 10.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/>"#,
            left + w + 10.0,
            left + w + 30.0
        );
        text(&mut out, left + w + 35.0, ly + 4.0, "start", &series.name);
    }
    out.push_str("</svg>\n");
    out
}
