//! Minimal self-contained SVG charts: axes, polylines, bars and labels.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 52.0;
const TICKS: usize = 5;

pub struct Series {
    pub name: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub struct Bars {
    pub name: String,
    pub color: &'static str,
    /// `(x, height)`; bars are centred on integer-spaced `x`.
    pub values: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub bars: Vec<Bars>,
    pub lines: Vec<Series>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

impl Chart {
    fn frame(&self) -> Frame {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = vec![0.0];
        for b in &self.bars {
            for &(x, y) in &b.values {
                xs.extend([x - 0.5, x + 0.5]);
                ys.push(y);
            }
        }
        for s in &self.lines {
            for &(x, y) in &s.points {
                xs.push(x);
                ys.push(y);
            }
        }
        let finite = |v: &Vec<f64>| v.iter().copied().filter(|x| x.is_finite()).collect::<Vec<_>>();
        let (xs, ys) = (finite(&xs), finite(&ys));
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (x0, x1) = if xs.is_empty() {
            (0.0, 1.0)
        } else {
            (min(&xs), max(&xs))
        };
        let (x0, x1) = if (x1 - x0).abs() < 1e-300 {
            padded(x0, x1)
        } else {
            (x0, x1)
        };
        let (y0, y1) = padded(min(&ys), max(&ys));
        Frame { x0, x1, y0, y1 }
    }

    pub fn render(&self) -> String {
        let f = self.frame();
        let mut s = String::new();
        let w = &mut s;
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(
            w,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        )
        .unwrap();

        // axes
        let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
        writeln!(
            w,
            r#"<path d="M{left:.1},{top:.1} V{bottom:.1} H{right:.1}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        for i in 0..=TICKS {
            let frac = i as f64 / TICKS as f64;
            let xv = f.x0 + frac * (f.x1 - f.x0);
            let yv = f.y0 + frac * (f.y1 - f.y0);
            let (px, py) = (f.px(xv), f.py(yv));
            writeln!(
                w,
                r#"<line x1="{px:.1}" y1="{bottom:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                bottom + 4.0,
                bottom + 18.0,
                tick(xv)
            )
            .unwrap();
            writeln!(
                w,
                r#"<line x1="{:.1}" y1="{py:.1}" x2="{left:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                left - 4.0,
                left - 6.0,
                py + 4.0,
                tick(yv)
            )
            .unwrap();
        }
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (left + right) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            (top + bottom) / 2.0,
            (top + bottom) / 2.0,
            escape(&self.y_label)
        )
        .unwrap();

        let groups = self.bars.len().max(1) as f64;
        for (gi, b) in self.bars.iter().enumerate() {
            let slot = 0.8 / groups;
            for &(x, y) in &b.values {
                if !y.is_finite() {
                    continue;
                }
                let xa = f.px(x - 0.4 + gi as f64 * slot);
                let xb = f.px(x - 0.4 + (gi + 1) as f64 * slot);
                let (ya, yb) = (f.py(y.max(0.0)), f.py(0.0));
                writeln!(
                    w,
                    r#"<rect x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.75"/>"#,
                    xb - xa,
                    (yb - ya).max(0.0),
                    b.color
                )
                .unwrap();
            }
        }
        for line in &self.lines {
            let pts: Vec<String> = line
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
                .collect();
            writeln!(
                w,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                pts.join(" "),
                line.color
            )
            .unwrap();
        }

        // legend
        let entries = self
            .bars
            .iter()
            .map(|b| (&b.name, b.color))
            .chain(self.lines.iter().map(|l| (&l.name, l.color)));
        for (i, (name, color)) in entries.enumerate() {
            let y = top + 8.0 + 16.0 * i as f64;
            writeln!(
                w,
                r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                right - 150.0,
                y - 9.0,
                right - 135.0,
                y,
                escape(name)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_document() {
        let chart = Chart {
            title: "counts <N=3>".into(),
            x_label: "p".into(),
            y_label: "N(p)".into(),
            bars: vec![Bars {
                name: "naive".into(),
                color: "#4477aa",
                values: vec![(0.0, 1.0), (1.0, 3.0), (2.0, 3.0), (3.0, 1.0)],
            }],
            lines: vec![Series {
                name: "fit".into(),
                color: "#cc6677",
                points: vec![(0.0, 1.0), (3.0, 1.0)],
            }],
        };
        let svg = chart.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<rect").count(), 1 + 4 + 2);
        assert!(svg.contains("counts &lt;N=3&gt;"));
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn tick_labels() {
        assert_eq!(tick(0.0), "0");
        assert_eq!(tick(2.5), "2.5");
        assert_eq!(tick(1024.0), "1024");
        assert_eq!(tick(1e-7), "1.0e-7");
    }
}
