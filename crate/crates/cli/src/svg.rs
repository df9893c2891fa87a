//! Hand-written SVG of an uplift curve: raw step curve, smoothed line with
//! its 95% band, and labelled markers at chosen certainty levels.

use std::fmt::Write;

use rcf_core::reference_class::UpliftCurve;
use rcf_core::validation::format_percent;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 40.0;

struct Frame {
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, p: f64) -> f64 {
        LEFT + p.clamp(0.0, 1.0) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, u: f64) -> f64 {
        let t = (u - self.y_min) / (self.y_max - self.y_min);
        HEIGHT - BOTTOM - t * (HEIGHT - TOP - BOTTOM)
    }
}

fn frame(curve: &UpliftCurve) -> Frame {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut take = |v: f64| {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    };
    curve.points.iter().for_each(|q| take(q.uplift));
    for s in curve.smoothed.iter().flatten() {
        take(s.ci_low);
        take(s.ci_high);
        take(s.uplift);
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 0.0);
    }
    if hi - lo < 1e-9 {
        lo -= 0.05;
        hi += 0.05;
    }
    let pad = (hi - lo) * 0.05;
    Frame { y_min: lo - pad, y_max: hi + pad }
}

/// Renders `curve`; each marker is `(p, raw uplift)` and is labelled like `P50 +16%`.
pub fn render_curve(curve: &UpliftCurve, markers: &[(f64, f64)], title: &str) -> String {
    let f = frame(curve);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{LEFT}" y="14" font-size="12" font-family="sans-serif">{}</text>"#, escape(title));

    // axes
    let (x0, x1) = (f.x(0.0), f.x(1.0));
    let (yb, yt) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(s, r#"<path d="M{x0:.2} {yt:.2} V{yb:.2} H{x1:.2}" stroke="black" fill="none"/>"#);
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let x = f.x(p);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{yb:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, yb + 4.0);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle" font-family="sans-serif">{p:.1}</text>"#,
            yb + 16.0
        );
    }
    for k in 0..=4 {
        let u = f.y_min + (f.y_max - f.y_min) * k as f64 / 4.0;
        let y = f.y(u);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end" font-family="sans-serif">{}</text>"#,
            x0 - 6.0,
            y + 3.0,
            format_percent(u)
        );
    }
    if f.y_min < 0.0 && f.y_max > 0.0 {
        let y = f.y(0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#999" stroke-dasharray="2,3"/>"##
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle" font-family="sans-serif">acceptable chance of no overrun</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 6.0
    );

    if let Some(sm) = &curve.smoothed {
        let mut band = String::new();
        for q in sm {
            let _ = write!(band, "{:.2},{:.2} ", f.x(q.p), f.y(q.ci_high));
        }
        for q in sm.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", f.x(q.p), f.y(q.ci_low));
        }
        let _ = writeln!(
            s,
            r##"<polygon class="ci-band" points="{}" fill="#9ecae1" fill-opacity="0.4" stroke="none"/>"##,
            band.trim_end()
        );
        let line: Vec<String> = sm.iter().map(|q| format!("{:.2},{:.2}", f.x(q.p), f.y(q.uplift))).collect();
        let _ = writeln!(
            s,
            r##"<polyline class="smoothed" points="{}" fill="none" stroke="#08519c" stroke-width="2"/>"##,
            line.join(" ")
        );
    }

    if let Some(first) = curve.points.first() {
        let mut d = format!("M{:.2} {:.2}", f.x(first.p), f.y(first.uplift));
        for w in curve.points.windows(2) {
            let _ = write!(d, " H{:.2} V{:.2}", f.x(w[1].p), f.y(w[1].uplift));
        }
        let _ = writeln!(s, r#"<path class="raw" d="{d}" fill="none" stroke="black" stroke-width="1"/>"#);
    }

    for &(p, u) in markers {
        let (x, y) = (f.x(p), f.y(u));
        let _ = writeln!(
            s,
            r##"<line class="marker" x1="{x:.2}" y1="{yb:.2}" x2="{x:.2}" y2="{y:.2}" stroke="#cb181d" stroke-dasharray="4,3"/>"##
        );
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#cb181d"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif">P{} {}</text>"#,
            x + 5.0,
            y - 6.0,
            (p * 100.0).round() as i64,
            format_percent(u)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
