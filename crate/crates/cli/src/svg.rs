//! Overlay plot of a series and its piecewise-constant fit.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

pub fn series_overlay(data: &[f64], fitted: &[f64]) -> String {
    let n = data.len().max(1);
    let (mut lo, mut hi) = data
        .iter()
        .chain(fitted)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if hi <= lo {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |i: f64| MARGIN + (i + 0.5) / n as f64 * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    if lo < 0.0 && hi > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ccc"/>"##,
            WIDTH - MARGIN,
            y = sy(0.0)
        );
    }
    for (i, &v) in data.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#4477aa"/>"##,
            sx(i as f64),
            sy(v)
        );
    }
    let mut path = String::new();
    for (i, &v) in fitted.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(
            path,
            "{cmd}{:.2},{:.2} L{:.2},{:.2} ",
            sx(i as f64 - 0.5),
            sy(v),
            sx(i as f64 + 0.5),
            sy(v)
        );
    }
    let _ = writeln!(
        s,
        r##"<path d="{}" fill="none" stroke="#cc3311" stroke-width="2"/>"##,
        path.trim_end()
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">{:.3}</text>"#,
        MARGIN - 6.0,
        hi
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">{:.3}</text>"#,
        HEIGHT - MARGIN + 16.0,
        lo
    );
    s.push_str("</svg>\n");
    s
}
