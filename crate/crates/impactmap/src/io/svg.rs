//! Standalone SVG scatter plot of the measure map: filled markers for
//! citation measures, hollow markers for usage measures, a colored ring
//! around highlighted measures, and the measure id as a text label.
//! Purely a function of the input, so bytes are reproducible.

use impactmap_core::factor::MeasureMap;
use impactmap_core::measures::DataSource;

use crate::fmt;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 56.0;
const MARKER_RADIUS: f64 = 6.0;
const RING_RADIUS: f64 = 10.5;

pub fn measure_map_svg(map: &MeasureMap, highlight: &[u8]) -> String {
    let xs: Vec<f64> = map.points.iter().map(|p| p.pc1).collect();
    let ys: Vec<f64> = map.points.iter().map(|p| p.pc2).collect();
    let (x_lo, x_hi) = padded_range(&xs);
    let (y_lo, y_hi) = padded_range(&ys);
    let to_px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let to_py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(
        "  <style>text{font-family:sans-serif;font-size:11px}.axis{stroke:#444;stroke-width:1}\
         .zero{stroke:#bbb;stroke-width:1;stroke-dasharray:4 3}</style>\n",
    );
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    ));

    // Frame and axis labels.
    svg.push_str(&format!(
        "  <rect class=\"axis\" x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{h}\" fill=\"none\"/>\n",
        m = MARGIN,
        w = WIDTH - 2.0 * MARGIN,
        h = HEIGHT - 2.0 * MARGIN
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">PC1</text>\n",
        WIDTH / 2.0,
        HEIGHT - MARGIN / 3.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" transform=\"rotate(-90 {x} {y})\">PC2</text>\n",
        x = MARGIN / 3.0,
        y = HEIGHT / 2.0
    ));
    for (value, label_x) in [(x_lo, MARGIN), (x_hi, WIDTH - MARGIN)] {
        svg.push_str(&format!(
            "  <text x=\"{label_x}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN + 16.0,
            fmt::sig(round3(value))
        ));
    }
    for (value, label_y) in [(y_lo, HEIGHT - MARGIN), (y_hi, MARGIN)] {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{label_y}\" text-anchor=\"end\">{}</text>\n",
            MARGIN - 6.0,
            fmt::sig(round3(value))
        ));
    }

    // Zero gridlines when zero is inside the range.
    if x_lo < 0.0 && x_hi > 0.0 {
        let px = to_px(0.0);
        svg.push_str(&format!(
            "  <line class=\"zero\" x1=\"{px}\" y1=\"{MARGIN}\" x2=\"{px}\" y2=\"{}\"/>\n",
            HEIGHT - MARGIN
        ));
    }
    if y_lo < 0.0 && y_hi > 0.0 {
        let py = to_py(0.0);
        svg.push_str(&format!(
            "  <line class=\"zero\" x1=\"{MARGIN}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\"/>\n",
            WIDTH - MARGIN
        ));
    }

    for point in &map.points {
        let px = fmt::sig(round3(to_px(point.pc1)));
        let py = fmt::sig(round3(to_py(point.pc2)));
        if highlight.contains(&point.descriptor.id) {
            svg.push_str(&format!(
                "  <circle class=\"ring\" cx=\"{px}\" cy=\"{py}\" r=\"{RING_RADIUS}\" \
                 fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"2\"/>\n"
            ));
        }
        let (fill, stroke) = match point.descriptor.source {
            DataSource::Citation => ("#000000", "#000000"),
            DataSource::Usage => ("#ffffff", "#000000"),
        };
        svg.push_str(&format!(
            "  <circle class=\"marker\" cx=\"{px}\" cy=\"{py}\" r=\"{MARKER_RADIUS}\" \
             fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text class=\"label\" x=\"{}\" y=\"{}\">{}</text>\n",
            fmt::sig(round3(to_px(point.pc1) + 8.0)),
            fmt::sig(round3(to_py(point.pc2) - 7.0)),
            point.descriptor.id
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    };
    let span = (hi - lo).max(1e-9);
    (lo - 0.08 * span, hi + 0.08 * span)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
