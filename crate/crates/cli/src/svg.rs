//! Minimal standalone SVG log-log plotting: axes, decade ticks, polylines.
//! CSV stays the source of truth; this is a quick look, not a figure engine.

use std::fmt::Write;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    /// (t, value) pairs; non-positive values are skipped (log scale).
    pub points: &'a [(f64, f64)],
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

/// Render a log-log plot of the given series. Returns None when no series
/// has two positive points to draw.
pub fn loglog_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Option<String> {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in s.points {
            if x > 0.0 && y > 0.0 {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
    }
    if !(x_min < x_max) || !(y_min.is_finite() && y_max.is_finite()) {
        return None;
    }
    if y_min == y_max {
        y_min /= 2.0;
        y_max *= 2.0;
    }
    let (lx0, lx1) = (x_min.log10(), x_max.log10());
    let (ly0, ly1) = (y_min.log10(), y_max.log10());
    let sx = (W - ML - MR) / (lx1 - lx0);
    let sy = (H - MT - MB) / (ly1 - ly0);
    let px = |x: f64| ML + (x.log10() - lx0) * sx;
    let py = |y: f64| H - MB - (y.log10() - ly0) * sy;

    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">\n"
    );
    let _ = write!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n");
    let _ = write!(
        out,
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    );

    // Frame.
    let _ = write!(
        out,
        "<rect x=\"{ML:.1}\" y=\"{MT:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        W - ML - MR,
        H - MT - MB
    );

    // Decade ticks.
    for d in (lx0.floor() as i64)..=(lx1.ceil() as i64) {
        let x = 10f64.powi(d as i32);
        if x < x_min * 0.999 || x > x_max * 1.001 {
            continue;
        }
        let gx = px(x);
        let _ = write!(
            out,
            "<line x1=\"{gx:.2}\" y1=\"{MT:.1}\" x2=\"{gx:.2}\" y2=\"{:.1}\" stroke=\"#ddd\"/>\n",
            H - MB
        );
        let _ = write!(
            out,
            "<text x=\"{gx:.2}\" y=\"{:.1}\" text-anchor=\"middle\">1e{d}</text>\n",
            H - MB + 18.0
        );
    }
    for d in (ly0.floor() as i64)..=(ly1.ceil() as i64) {
        let y = 10f64.powi(d as i32);
        if y < y_min * 0.999 || y > y_max * 1.001 {
            continue;
        }
        let gy = py(y);
        let _ = write!(
            out,
            "<line x1=\"{ML:.1}\" y1=\"{gy:.2}\" x2=\"{:.1}\" y2=\"{gy:.2}\" stroke=\"#ddd\"/>\n",
            W - MR
        );
        let _ = write!(
            out,
            "<text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\">1e{d}</text>\n",
            ML - 6.0,
            gy + 4.0
        );
    }

    // Axis labels.
    let _ = write!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = write!(
        out,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0,
        escape(y_label)
    );

    // Series and legend.
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|&&(x, y)| x > 0.0 && y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        if pts.len() >= 2 {
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                pts.join(" "),
                s.color
            );
        }
        let ly = MT + 14.0 + 16.0 * i as f64;
        let _ = write!(
            out,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            ML + 8.0,
            ML + 32.0,
            s.color
        );
        let _ = write!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            ML + 38.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
