use std::fs;
use std::path::Path;
use std::str::FromStr;

use image::{Rgb, RgbImage};

use super::sweep::SweepTable;
use crate::error::{Error, Result};

/// Which part of `⟨H⟩` goes on the y axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlotKind {
    #[default]
    Abs,
    Re,
    Im,
}

impl PlotKind {
    fn label(self) -> &'static str {
        match self {
            PlotKind::Abs => "|<H>|",
            PlotKind::Re => "Re <H>",
            PlotKind::Im => "Im <H>",
        }
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" => Ok(PlotKind::Abs),
            "re" => Ok(PlotKind::Re),
            "im" => Ok(PlotKind::Im),
            other => Err(Error::InvalidConfig(format!(
                "unknown plot kind '{other}' (abs, re, im)"
            ))),
        }
    }
}

const WIDTH: u32 = 760;
const HEIGHT: u32 = 460;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [[u8; 3]; 8] = [
    [31, 119, 180],
    [214, 39, 40],
    [44, 160, 44],
    [255, 127, 14],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [23, 190, 207],
];
const DASHES: [&str; 4] = ["", "8 4", "2 3", "12 3 2 3"];

/// One polyline per gauge; `None` entries (failed rows) break the line.
struct Series {
    label: String,
    points: Vec<Option<(f64, f64)>>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH as f64 - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT as f64
            - BOTTOM
            - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT as f64 - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = (lo.abs() * 0.1).max(1e-3);
        (lo - pad, hi + pad)
    }
}

fn collect(table: &SweepTable, kind: PlotKind) -> Result<(Vec<Series>, Frame)> {
    if table.rows.is_empty() {
        return Err(Error::SchemaMismatch("table has no rows".into()));
    }
    let series: Vec<Series> = table
        .gauges()
        .into_iter()
        .map(|label| {
            let points = table
                .rows
                .iter()
                .filter(|r| r.gauge == label)
                .map(|r| {
                    r.value.map(|v| {
                        let y = match kind {
                            PlotKind::Abs => v.norm(),
                            PlotKind::Re => v.re,
                            PlotKind::Im => v.im,
                        };
                        (r.gamma, y)
                    })
                })
                .collect();
            Series { label, points }
        })
        .collect();
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().flatten().copied())
        .collect();
    if finite.is_empty() {
        return Err(Error::SchemaMismatch("table has no successful rows".into()));
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        let values = finite.iter().map(f);
        (
            values.clone().fold(f64::INFINITY, f64::min),
            values.fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let x = fold(|p| p.0);
    let y = fold(|p| p.1);
    let x = if x.1 > x.0 { x } else { (x.0 - 0.5, x.1 + 0.5) };
    Ok((
        series,
        Frame {
            x,
            y: padded(y.0, y.1),
        },
    ))
}

fn tick_label(value: f64, span: f64) -> String {
    if span < 1e-2 || value.abs() >= 1e4 {
        format!("{value:.3e}")
    } else {
        format!("{value:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_svg(table: &SweepTable, kind: PlotKind) -> Result<String> {
    let (series, frame) = collect(table, kind)?;
    let mut svg = String::new();
    let w = WIDTH as f64;
    let h = HEIGHT as f64;
    let mut out = |s: String| svg.push_str(&s);
    out(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out(format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    let title = format!(
        "{} ({}, N={})",
        kind.label(),
        table
            .metadata_value("inner_product")
            .unwrap_or("unknown inner product"),
        table.metadata_value("sites").unwrap_or("?")
    );
    out(format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        (LEFT + w - RIGHT) / 2.0,
        escape(&title)
    ));
    out(format!(
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        w - LEFT - RIGHT,
        h - TOP - BOTTOM
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let (px, py) = (frame.px(xv), frame.py(yv));
        out(format!(
            "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>\n",
            h - BOTTOM,
            h - BOTTOM + 5.0
        ));
        out(format!(
            "<text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            h - BOTTOM + 18.0,
            tick_label(xv, frame.x.1 - frame.x.0)
        ));
        out(format!(
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{LEFT}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            LEFT - 5.0
        ));
        out(format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            LEFT - 8.0,
            py + 4.0,
            tick_label(yv, frame.y.1 - frame.y.0)
        ));
    }
    out(format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">gamma</text>\n",
        (LEFT + w - RIGHT) / 2.0,
        h - 12.0
    ));
    out(format!(
        "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
        (TOP + h - BOTTOM) / 2.0,
        escape(kind.label())
    ));
    for (i, s) in series.iter().enumerate() {
        let [r, g, b] = PALETTE[i % PALETTE.len()];
        let dash = DASHES[i % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        for run in s
            .points
            .split(|p| p.is_none())
            .filter(|run| !run.is_empty())
        {
            let coords: Vec<String> = run
                .iter()
                .flatten()
                .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
                .collect();
            out(format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"rgb({r},{g},{b})\" stroke-width=\"2\"{dash_attr}/>\n",
                coords.join(" ")
            ));
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = w - RIGHT + 15.0;
        out(format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"rgb({r},{g},{b})\" stroke-width=\"2\"{dash_attr}/>\n",
            lx + 25.0
        ));
        out(format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            lx + 32.0,
            ly + 4.0,
            escape(&s.label)
        ));
    }
    out("</svg>\n".to_string());
    Ok(svg)
}

fn draw_line(img: &mut RgbImage, from: (f64, f64), to: (f64, f64), color: Rgb<u8>) {
    let (mut x0, mut y0) = (from.0.round() as i64, from.1.round() as i64);
    let (x1, y1) = (to.0.round() as i64, to.1.round() as i64);
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let mut err = dx + dy;
    loop {
        for (ox, oy) in [(0, 0), (1, 0), (0, 1)] {
            let (x, y) = (x0 + ox, y0 + oy);
            if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
                img.put_pixel(x as u32, y as u32, color);
            }
        }
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

/// Raster rendering: axes, tick marks, curves and colour swatches (no text).
fn render_png(table: &SweepTable, kind: PlotKind) -> Result<RgbImage> {
    let (series, frame) = collect(table, kind)?;
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, Rgb([255, 255, 255]));
    let black = Rgb([0, 0, 0]);
    let (w, h) = (WIDTH as f64, HEIGHT as f64);
    let corners = [
        (LEFT, TOP),
        (w - RIGHT, TOP),
        (w - RIGHT, h - BOTTOM),
        (LEFT, h - BOTTOM),
    ];
    for i in 0..4 {
        draw_line(&mut img, corners[i], corners[(i + 1) % 4], black);
    }
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let px = frame.px(frame.x.0 + t * (frame.x.1 - frame.x.0));
        let py = frame.py(frame.y.0 + t * (frame.y.1 - frame.y.0));
        draw_line(&mut img, (px, h - BOTTOM), (px, h - BOTTOM + 5.0), black);
        draw_line(&mut img, (LEFT - 5.0, py), (LEFT, py), black);
    }
    for (i, s) in series.iter().enumerate() {
        let color = Rgb(PALETTE[i % PALETTE.len()]);
        for pair in s.points.windows(2) {
            if let [Some(a), Some(b)] = pair {
                draw_line(
                    &mut img,
                    (frame.px(a.0), frame.py(a.1)),
                    (frame.px(b.0), frame.py(b.1)),
                    color,
                );
            }
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        draw_line(
            &mut img,
            (w - RIGHT + 15.0, ly),
            (w - RIGHT + 40.0, ly),
            color,
        );
    }
    Ok(img)
}

/// Writes the table as SVG or PNG, chosen by the output file extension.
pub fn emit_plot(table: &SweepTable, kind: PlotKind, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let extension = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match extension.as_str() {
        "svg" => fs::write(path, render_svg(table, kind)?).map_err(|e| Error::io(path, e)),
        "png" => render_png(table, kind)?
            .save(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e))),
        other => Err(Error::InvalidConfig(format!(
            "unsupported plot format '{other}', use .svg or .png"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::sweep::SweepRow;
    use num_complex::Complex64;

    fn table() -> SweepTable {
        let mut rows = Vec::new();
        for (i, gamma) in [0.0, 0.1, 0.2].into_iter().enumerate() {
            for gauge in ["a", "b<c"] {
                rows.push(SweepRow {
                    gamma,
                    gauge: gauge.into(),
                    value: (i != 1 || gauge == "a").then(|| Complex64::new(gamma, -1.0)),
                    status: "ok".into(),
                });
            }
        }
        SweepTable {
            metadata: vec![("sites".into(), "3".into())],
            rows,
        }
    }

    #[test]
    fn svg_has_one_series_per_gauge() {
        let svg = render_svg(&table(), PlotKind::Abs).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("b&lt;c"));
        // Gauge "b<c" has a gap at γ = 0.1, giving two runs; "a" has one.
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg, render_svg(&table(), PlotKind::Abs).unwrap());
    }

    #[test]
    fn empty_table_is_rejected() {
        let empty = SweepTable::default();
        assert!(matches!(
            render_svg(&empty, PlotKind::Abs),
            Err(Error::SchemaMismatch(_))
        ));
        assert!(matches!(
            render_png(&empty, PlotKind::Re),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn png_and_svg_files() {
        let dir = tempfile::tempdir().unwrap();
        emit_plot(&table(), PlotKind::Im, dir.path().join("p.png")).unwrap();
        emit_plot(&table(), PlotKind::Abs, dir.path().join("p.svg")).unwrap();
        let png = fs::read(dir.path().join("p.png")).unwrap();
        assert_eq!(&png[1..4], b"PNG");
        assert!(emit_plot(&table(), PlotKind::Abs, dir.path().join("p.gif")).is_err());
    }

    #[test]
    fn plot_kind_parsing() {
        assert_eq!("re".parse::<PlotKind>().unwrap(), PlotKind::Re);
        assert!("magnitude".parse::<PlotKind>().is_err());
    }
}
