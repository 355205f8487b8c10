//! Dependency-free SVG plots.

use std::fmt::Write;

use pgan_core::training::LossCurve;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Linear map from a data box onto the plot area, y pointing up.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (PAD, W - PAD, H - PAD, PAD);
    let _ = writeln!(
        out,
        "<g stroke=\"black\" fill=\"none\"><line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\"/><line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\"/></g>"
    );
    let _ = writeln!(
        out,
        "<g font-size=\"10\"><text x=\"{x0}\" y=\"{}\">{:.3}</text><text x=\"{x1}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>\
         <text x=\"{}\" y=\"{y0}\" text-anchor=\"end\">{:.3}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text></g>",
        y0 + 14.0,
        f.x.0,
        y0 + 14.0,
        f.x.1,
        x0 - 4.0,
        f.y.0,
        x0 - 4.0,
        y1 + 8.0,
        f.y.1
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\
         <text x=\"14\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 {})\">{}</text>",
        W / 2.0,
        H - 12.0,
        escape(xlabel),
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

/// Iteration against each loss series, one polyline per series.
pub fn loss_plot(curve: &LossCurve, title: &str) -> String {
    let recs = curve.records();
    let series: [(&str, fn(&pgan_core::training::LossRecord) -> f64); 3] =
        [("loss_G", |r| r.loss_g), ("loss_D", |r| r.loss_d), ("loss_C", |r| r.loss_c)];
    let mut x = bounds(recs.iter().map(|r| r.iteration as f64));
    let mut y = bounds(recs.iter().flat_map(|r| [r.loss_g, r.loss_d, r.loss_c]));
    if recs.is_empty() {
        x = (0.0, 1.0);
        y = (0.0, 1.0);
    }
    let f = Frame::new(x, y);
    let mut out = header(title);
    axes(&mut out, &f, "iteration", "loss");
    for (i, (name, get)) in series.iter().enumerate() {
        let pts: Vec<String> = recs
            .iter()
            .filter(|r| get(r).is_finite())
            .map(|r| format!("{:.2},{:.2}", f.px(r.iteration as f64), f.py(get(r))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline class=\"series\" data-series=\"{name}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            color(i),
            pts.join(" ")
        );
        let ly = PAD + 14.0 * i as f64;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{ly}\" font-size=\"11\" fill=\"{}\">{name}</text>",
            W - PAD - 50.0,
            color(i)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Class-coloured grid of predictions with the data points on top.
///
/// `predict` maps a batch of 2-D points to class indices.
pub fn boundary_plot(
    points: &[[f64; 2]],
    labels: &[usize],
    resolution: usize,
    predict: &dyn Fn(&[[f64; 2]]) -> Vec<usize>,
    title: &str,
) -> String {
    let f = padded_frame(points);
    let n = resolution.max(2);
    let (dx, dy) = ((f.x.1 - f.x.0) / n as f64, (f.y.1 - f.y.0) / n as f64);
    let cells: Vec<[f64; 2]> = (0..n * n)
        .map(|i| [f.x.0 + (i % n) as f64 * dx + dx / 2.0, f.y.0 + (i / n) as f64 * dy + dy / 2.0])
        .collect();
    let preds = predict(&cells);
    let mut out = header(title);
    let (cw, ch) = ((W - 2.0 * PAD) / n as f64, (H - 2.0 * PAD) / n as f64);
    out.push_str("<g class=\"grid\" fill-opacity=\"0.25\">\n");
    for (c, p) in cells.iter().zip(&preds) {
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
            f.px(c[0]) - cw / 2.0,
            f.py(c[1]) - ch / 2.0,
            cw + 0.1,
            ch + 0.1,
            color(*p)
        );
    }
    out.push_str("</g>\n");
    scatter(&mut out, &f, points, labels, "circle");
    axes(&mut out, &f, "x0", "x1");
    out.push_str("</svg>\n");
    out
}

/// Data points, one polygon per class hull and generated points as crosses.
pub fn samples_plot(
    points: &[[f64; 2]],
    labels: &[usize],
    hulls: &[(usize, Vec<[f64; 2]>)],
    generated: &[[f64; 2]],
    generated_labels: &[usize],
    title: &str,
) -> String {
    let all: Vec<[f64; 2]> = points.iter().chain(generated).copied().collect();
    let f = padded_frame(&all);
    let mut out = header(title);
    scatter(&mut out, &f, points, labels, "circle");
    for (class, verts) in hulls {
        let pts: Vec<String> = verts.iter().map(|v| format!("{:.2},{:.2}", f.px(v[0]), f.py(v[1]))).collect();
        let _ = writeln!(
            out,
            "<polygon class=\"hull\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            color(*class),
            pts.join(" ")
        );
    }
    scatter(&mut out, &f, generated, generated_labels, "cross");
    axes(&mut out, &f, "x0", "x1");
    out.push_str("</svg>\n");
    out
}

fn padded_frame(points: &[[f64; 2]]) -> Frame {
    let pad = |(a, b): (f64, f64)| {
        if a > b {
            return (0.0, 1.0);
        }
        let m = 0.05 * (b - a).max(1e-9);
        (a - m, b + m)
    };
    Frame::new(
        pad(bounds(points.iter().map(|p| p[0]))),
        pad(bounds(points.iter().map(|p| p[1]))),
    )
}

fn scatter(out: &mut String, f: &Frame, points: &[[f64; 2]], labels: &[usize], mark: &str) {
    let _ = writeln!(out, "<g class=\"{mark}s\">");
    for (p, &c) in points.iter().zip(labels) {
        if !(p[0].is_finite() && p[1].is_finite()) {
            continue;
        }
        let (x, y) = (f.px(p[0]), f.py(p[1]));
        if mark == "cross" {
            let _ = writeln!(
                out,
                "<path d=\"M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}\" stroke=\"{}\" stroke-width=\"1\"/>",
                x - 2.5,
                y - 2.5,
                x + 2.5,
                y + 2.5,
                x - 2.5,
                y + 2.5,
                x + 2.5,
                y - 2.5,
                color(c)
            );
        } else {
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2\" fill=\"{}\"/>", color(c));
        }
    }
    out.push_str("</g>\n");
}
