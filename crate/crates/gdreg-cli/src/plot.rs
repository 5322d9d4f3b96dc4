//! Static SVG emission: a line plot and a heatmap, no dependencies, no
//! timestamps, byte-stable output for identical inputs.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn fmt(v: f64) -> String {
    // Fixed short decimal keeps coordinates stable and files small.
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 10_000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn axis_ticks(min: f64, max: f64, count: usize) -> Vec<f64> {
    (0..=count)
        .map(|i| min + (max - min) * i as f64 / count as f64)
        .collect()
}

/// A line plot of one series with an optional dashed horizontal threshold.
pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// (x, y) pairs, ascending in x.
    pub points: &'a [(f64, f64)],
    /// Optional (label, y-value) horizontal rule.
    pub threshold: Option<(&'a str, f64)>,
}

impl LinePlot<'_> {
    pub fn render(&self) -> String {
        let xs: Vec<f64> = self.points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p.1).collect();
        let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
        let x_max = xs.iter().copied().fold(1.0f64, f64::max);
        let mut y_min = ys.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
        let mut y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if let Some((_, th)) = self.threshold {
            y_min = y_min.min(th);
            y_max = y_max.max(th);
        }
        if y_max <= y_min {
            y_max = y_min + 1.0;
        }
        y_max *= 1.05;

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
        let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"14\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
            fmt(MARGIN_LEFT + plot_w / 2.0),
            self.title
        );

        for x in axis_ticks(x_min, x_max, 8) {
            let px = sx(x);
            let _ = writeln!(
                svg,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#dddddd\"/>",
                fmt(px),
                fmt(MARGIN_TOP),
                fmt(MARGIN_TOP + plot_h)
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                fmt(px),
                fmt(MARGIN_TOP + plot_h + 18.0),
                tick_label(x)
            );
        }
        for y in axis_ticks(y_min, y_max, 6) {
            let py = sy(y);
            let _ = writeln!(
                svg,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#dddddd\"/>",
                fmt(MARGIN_LEFT),
                fmt(py),
                fmt(MARGIN_LEFT + plot_w)
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                fmt(MARGIN_LEFT - 6.0),
                fmt(py + 4.0),
                tick_label(y)
            );
        }
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            fmt(MARGIN_LEFT),
            fmt(MARGIN_TOP),
            fmt(plot_w),
            fmt(plot_h)
        );

        if let Some((label, th)) = self.threshold {
            let py = sy(th);
            let _ = writeln!(
                svg,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#cc3333\" \
                 stroke-dasharray=\"6,4\"/>",
                fmt(MARGIN_LEFT),
                fmt(py),
                fmt(MARGIN_LEFT + plot_w)
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" fill=\"#cc3333\">{}</text>",
                fmt(MARGIN_LEFT + 8.0),
                fmt(py - 6.0),
                label
            );
        }

        let path: Vec<String> = self
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt(sx(x)), fmt(sy(y))))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#2255aa\" stroke-width=\"1.5\"/>",
            path.join(" ")
        );

        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt(MARGIN_LEFT + plot_w / 2.0),
            fmt(HEIGHT - 10.0),
            self.x_label
        );
        let _ = writeln!(
            svg,
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
            fmt(MARGIN_TOP + plot_h / 2.0),
            fmt(MARGIN_TOP + plot_h / 2.0),
            self.y_label
        );
        svg.push_str("</svg>\n");
        svg
    }
}

/// A heatmap over a (column, row) grid with a linear color scale.
pub struct HeatMap<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub col_labels: &'a [String],
    pub row_labels: &'a [String],
    /// values[row][col]; non-finite cells render grey.
    pub values: &'a [Vec<f64>],
}

fn lerp(a: u8, b: u8, t: f64) -> u8 {
    (a as f64 + (b as f64 - a as f64) * t).round() as u8
}

/// Dark blue → yellow, linear in the normalized value.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(0x20, 0xfd, t),
        lerp(0x30, 0xbb, t),
        lerp(0x6e, 0x2d, t)
    )
}

impl HeatMap<'_> {
    pub fn render(&self) -> String {
        let rows = self.values.len();
        let cols = self.col_labels.len();
        let finite: Vec<f64> = self
            .values
            .iter()
            .flatten()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        let v_min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let v_max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if v_max > v_min { v_max - v_min } else { 1.0 };

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM - 20.0;
        let cell_w = plot_w / cols as f64;
        let cell_h = plot_h / rows as f64;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
        );
        let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"14\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
            fmt(MARGIN_LEFT + plot_w / 2.0),
            self.title
        );

        for (r, row) in self.values.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let fill = if v.is_finite() {
                    color((v - v_min) / span)
                } else {
                    "#bbbbbb".to_string()
                };
                let _ = writeln!(
                    svg,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                    fmt(MARGIN_LEFT + c as f64 * cell_w),
                    fmt(MARGIN_TOP + r as f64 * cell_h),
                    fmt(cell_w + 0.5),
                    fmt(cell_h + 0.5),
                    fill
                );
            }
        }

        // Column labels, thinned to at most ~16.
        let step = (cols / 16).max(1);
        for (c, label) in self.col_labels.iter().enumerate() {
            if c % step != 0 && c != cols - 1 {
                continue;
            }
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                fmt(MARGIN_LEFT + (c as f64 + 0.5) * cell_w),
                fmt(MARGIN_TOP + plot_h + 16.0),
                label
            );
        }
        for (r, label) in self.row_labels.iter().enumerate() {
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                fmt(MARGIN_LEFT - 6.0),
                fmt(MARGIN_TOP + (r as f64 + 0.5) * cell_h + 4.0),
                label
            );
        }

        let legend_y = MARGIN_TOP + plot_h + 34.0;
        for i in 0..=40 {
            let t = i as f64 / 40.0;
            let _ = writeln!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"6\" height=\"12\" fill=\"{}\"/>",
                fmt(MARGIN_LEFT + i as f64 * 6.0),
                fmt(legend_y),
                color(t)
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{} (min)</text>",
            fmt(MARGIN_LEFT + 252.0),
            fmt(legend_y + 10.0),
            tick_label(v_min)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{} (max)</text>",
            fmt(MARGIN_LEFT + 342.0),
            fmt(legend_y + 10.0),
            tick_label(v_max)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt(MARGIN_LEFT + plot_w / 2.0),
            fmt(HEIGHT - 4.0),
            self.x_label
        );
        let _ = writeln!(
            svg,
            "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>",
            fmt(MARGIN_TOP + plot_h / 2.0),
            fmt(MARGIN_TOP + plot_h / 2.0),
            self.y_label
        );
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_deterministic_and_well_formed() {
        let points: Vec<(f64, f64)> = (1..=50).map(|t| (t as f64, (t as f64).sqrt())).collect();
        let plot = LinePlot {
            title: "test",
            x_label: "t",
            y_label: "value",
            points: &points,
            threshold: Some(("limit", 5.0)),
        };
        let a = plot.render();
        let b = plot.render();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("polyline"));
        assert!(a.contains("limit"));
    }

    #[test]
    fn heatmap_handles_nonfinite_cells() {
        let values = vec![vec![1.0, 2.0], vec![f64::INFINITY, 0.5]];
        let map = HeatMap {
            title: "grid",
            x_label: "T",
            y_label: "gamma",
            col_labels: &["1".into(), "10".into()],
            row_labels: &["2".into(), "3".into()],
            values: &values,
        };
        let svg = map.render();
        assert!(svg.contains("#bbbbbb"));
        assert_eq!(svg, map.render());
    }
}
