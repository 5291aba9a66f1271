//! Minimal static SVG 1.1 line plots with deterministic output.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_Y: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Symmetric vertical error bars, one per point.
    pub errors: Option<Vec<f64>>,
    pub color: usize,
    pub dashed: bool,
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_y: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot<'_> {
    pub fn render(&self, series: &[Series]) -> String {
        let ty = |y: f64| if self.log_y { y.max(1e-300).log10() } else { y };
        let finite: Vec<(f64, f64)> = series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
            .map(|&(x, y)| (x, ty(y)))
            .collect();
        let (mut x0, mut x1, mut y0, mut y1) = finite.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if finite.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - 2.0 * MARGIN_Y;
        let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| MARGIN_Y + ph - (ty(y) - y0) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="25" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            escape(self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (sx, sy) = (MARGIN_LEFT + f * pw, MARGIN_Y + ph - f * ph);
            let ylab = if self.log_y {
                format!("1e{yv:.1}")
            } else {
                format!("{yv:.3}")
            };
            let _ = writeln!(
                out,
                r#"<line x1="{sx:.1}" y1="{:.1}" x2="{sx:.1}" y2="{:.1}" stroke="black"/><text x="{sx:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#,
                MARGIN_Y + ph,
                MARGIN_Y + ph + 5.0,
                MARGIN_Y + ph + 18.0
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{sy:.1}" x2="{MARGIN_LEFT}" y2="{sy:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{ylab}</text>"#,
                MARGIN_LEFT - 5.0,
                MARGIN_LEFT - 8.0,
                sy + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            MARGIN_Y + ph / 2.0,
            MARGIN_Y + ph / 2.0,
            escape(self.y_label)
        );

        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[s.color % PALETTE.len()];
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                pts.join(" ")
            );
            if let Some(errors) = &s.errors {
                for (&(x, y), &e) in s.points.iter().zip(errors) {
                    let lo = if self.log_y { (y - e).max(y * 1e-3) } else { y - e };
                    if !(x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0)) {
                        continue;
                    }
                    let _ = writeln!(
                        out,
                        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"/>"#,
                        px(x),
                        py(lo),
                        px(x),
                        py(y + e)
                    );
                }
            }
            let ly = MARGIN_Y + 10.0 + 18.0 * i as f64;
            let lx = WIDTH - MARGIN_RIGHT + 15.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 25.0,
                lx + 30.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_valid_looking_svg_deterministically() {
        let s = vec![Series {
            label: "n=1 <dir>".into(),
            points: vec![(0.0, 0.5), (1.0, 1.0)],
            errors: Some(vec![0.1, 0.1]),
            color: 0,
            dashed: true,
        }];
        let p = Plot {
            title: "t",
            x_label: "E",
            y_label: "ρ",
            log_y: true,
        };
        let a = p.render(&s);
        assert_eq!(a, p.render(&s));
        assert!(a.starts_with("<?xml") && a.ends_with("</svg>\n"));
        assert!(a.contains("&lt;dir&gt;"));
        assert!(a.contains("polyline"));
    }
}
