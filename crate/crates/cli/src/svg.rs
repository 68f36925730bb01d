//! Minimal SVG line chart: fixed 1000x500 viewBox, axes scaled to the data.

use std::fmt::Write;

const WIDTH: f64 = 1000.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

pub fn price_chart(prices: &[f64]) -> String {
    let n = prices.len();
    let (lo, hi) = prices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            (lo.min(p), hi.max(p))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x_step = if n > 1 {
        (WIDTH - 2.0 * MARGIN) / (n - 1) as f64
    } else {
        0.0
    };
    let y = |p: f64| HEIGHT - MARGIN - (p - lo) / span * (HEIGHT - 2.0 * MARGIN);

    let mut points = String::new();
    for (i, &p) in prices.iter().enumerate() {
        if i > 0 {
            points.push(' ');
        }
        write!(points, "{:.2},{:.2}", MARGIN + i as f64 * x_step, y(p)).unwrap();
    }

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(
        svg,
        r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black" stroke-width="1"/>"#
    )
    .unwrap();
    let label = |v: f64| format!("{v:.2}");
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
        x0 - 5.0,
        y0 + 4.0,
        label(hi.max(lo))
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
        x0 - 5.0,
        y1 + 4.0,
        label(lo.min(hi))
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{x0}" y="{}" font-size="12">0</text><text x="{x1}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
        y1 + 18.0,
        y1 + 18.0,
        n.saturating_sub(1)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{points}"/>"#
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}
