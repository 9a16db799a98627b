//! Hand-written SVG drawings: the circle, directed edges with arrowheads,
//! vertex labels and an `(E, k, r, m)` caption.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use linkmorse::{fit_circle, stable_morse_index, CircleFit, Configuration, Point};

use crate::artifact::Enumeration;
use crate::commands::{read_json, winding, write_file, CliError};
use crate::Tolerances;

const CELL: f64 = 240.0;
const MARGIN: f64 = 28.0;
const COLUMNS: usize = 5;
const HEADER: f64 = 30.0;

pub struct Drawing<'a> {
    pub points: &'a [Point],
    pub circle: Option<CircleFit>,
    pub caption: String,
}

/// Maps world coordinates into a square cell, y pointing up.
struct Frame {
    x0: f64,
    y0: f64,
    min: Point,
    max_y: f64,
    scale: f64,
    pad: Point,
}

impl Frame {
    fn new(d: &Drawing, x0: f64, y0: f64) -> Frame {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut include = |p: Point| {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        };
        for &p in d.points {
            include(p);
        }
        if let Some(c) = d.circle {
            include(c.center - Point::new(c.radius, c.radius));
            include(c.center + Point::new(c.radius, c.radius));
        }
        let (w, h) = ((hi.x - lo.x).max(1e-12), (hi.y - lo.y).max(1e-12));
        let usable = CELL - 2.0 * MARGIN;
        let scale = usable / w.max(h);
        let pad = Point::new((usable - w * scale) / 2.0, (usable - h * scale) / 2.0);
        Frame { x0, y0, min: lo, max_y: hi.y, scale, pad }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            self.x0 + MARGIN + self.pad.x + (p.x - self.min.x) * self.scale,
            self.y0 + MARGIN + self.pad.y + (self.max_y - p.y) * self.scale,
        )
    }
}

fn draw_cell(out: &mut String, d: &Drawing, x0: f64, y0: f64) {
    let f = Frame::new(d, x0, y0);
    let _ = writeln!(out, r#"<g>"#);
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{CELL}" height="{CELL}" fill="none" stroke="#ddd"/>"##
    );
    if let Some(c) = d.circle {
        let (cx, cy) = f.map(c.center);
        let _ = writeln!(
            out,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#999" stroke-dasharray="4 3"/>"##,
            c.radius * f.scale
        );
        let _ = writeln!(out, r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="1.5" fill="#999"/>"##);
    }
    let n = d.points.len();
    for i in 0..n {
        let (a, b) = (f.map(d.points[i]), f.map(d.points[(i + 1) % n]));
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len = (dx * dx + dy * dy).sqrt();
        if len < 1e-9 {
            continue;
        }
        // Stop short of the vertex dot so the arrowhead stays visible.
        let k = (len - 3.0).max(0.0) / len;
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#1f4e8c" stroke-width="1.5" marker-end="url(#arrow)"/>"##,
            a.0,
            a.1,
            a.0 + k * dx,
            a.1 + k * dy
        );
    }
    let anchor = d.circle.map(|c| c.center).unwrap_or_else(|| {
        let s = d.points.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
        s * (1.0 / n.max(1) as f64)
    });
    for (i, &p) in d.points.iter().enumerate() {
        let (x, y) = f.map(p);
        let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="#000"/>"##);
        let dir = p - anchor;
        let norm = dir.norm();
        let (ux, uy) = if norm > 0.0 { (dir.x / norm, -dir.y / norm) } else { (0.0, -1.0) };
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle" dominant-baseline="middle">p{}</text>"#,
            x + 12.0 * ux,
            y + 12.0 * uy,
            i + 1
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
        x0 + CELL / 2.0,
        y0 + CELL - 8.0,
        escape(&d.caption)
    );
    let _ = writeln!(out, "</g>");
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A grid of drawings under a title line, `COLUMNS` per row.
pub fn grid_svg(title: &str, drawings: &[Drawing]) -> String {
    let cols = drawings.len().clamp(1, COLUMNS);
    let rows = drawings.len().div_ceil(COLUMNS);
    let (w, h) = (cols as f64 * CELL, HEADER + rows as f64 * CELL);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    );
    out.push_str(concat!(
        r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse">"##,
        r##"<path d="M 0 0 L 10 5 L 0 10 z" fill="#1f4e8c"/></marker></defs>"##,
        "\n"
    ));
    let _ = writeln!(out, r#"<text x="8" y="20" font-size="13">{}</text>"#, escape(title));
    for (i, d) in drawings.iter().enumerate() {
        let (r, c) = (i / COLUMNS, i % COLUMNS);
        draw_cell(&mut out, d, c as f64 * CELL, HEADER + r as f64 * CELL);
    }
    out.push_str("</svg>\n");
    out
}

fn caption(eps: &impl std::fmt::Display, k: Option<i32>, r: f64, m: Option<usize>) -> String {
    let k = k.map(|k| k.to_string()).unwrap_or_else(|| "?".into());
    let m = m.map(|m| m.to_string()).unwrap_or_else(|| "?".into());
    format!("E={eps} k={k} r={r:.5} m={m}")
}

pub fn render(input: &Path, output: &Path, tol: &Tolerances) -> Result<ExitCode, CliError> {
    let value: serde_json::Value = read_json(input)?;
    let (name, svg) = if value.get("configurations").is_some() {
        let e: Enumeration = serde_json::from_value(value)
            .map_err(|source| CliError::Parse { path: input.into(), source })?;
        let drawings: Vec<Drawing> = e
            .configurations
            .iter()
            .map(|rec| Drawing {
                points: &rec.points,
                circle: Some(CircleFit { center: rec.center, radius: rec.r }),
                caption: caption(&rec.eps, Some(rec.k), rec.r, rec.index),
            })
            .collect();
        let title = format!("L = {}: {}", e.linkage, crate::artifact::summary(&e.configurations));
        ("configurations.svg", grid_svg(&title, &drawings))
    } else {
        let c: Configuration = serde_json::from_value(value)
            .map_err(|source| CliError::Parse { path: input.into(), source })?;
        if c.points.len() < 3 {
            return Err(CliError::Input(format!("need at least 3 points, got {}", c.points.len())));
        }
        let fit = fit_circle(&c.points, tol.degen).ok();
        let text = match fit {
            Some(fit) => {
                let eps = linkmorse::edge_orientations(&c.points, fit.center)
                    .map(|e| e.to_string())
                    .unwrap_or_else(|_| "?".into());
                let k = winding(&c.points, &fit).ok();
                let m = stable_morse_index(&c.points, &fit).ok().map(|(m, _)| m.index);
                caption(&eps, k, fit.radius, m)
            }
            None => "not cyclic".to_string(),
        };
        let d = Drawing { points: &c.points, circle: fit, caption: text };
        ("configuration.svg", grid_svg(&format!("{} vertices", c.points.len()), &[d]))
    };
    fs::create_dir_all(output).map_err(|source| CliError::Write { path: output.into(), source })?;
    let path = output.join(name);
    write_file(&path, &svg)?;
    println!("{}", path.display());
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_has_four_arrows_and_a_circle() {
        let pts: Vec<Point> = [[0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]].map(Point::from).to_vec();
        let fit = fit_circle(&pts, 1e-12).unwrap();
        let d = Drawing { points: &pts, circle: Some(fit), caption: "E=++++".into() };
        let svg = grid_svg("square", &[d]);
        assert_eq!(svg.matches("marker-end").count(), 4);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
        for label in ["p1", "p2", "p3", "p4"] {
            assert!(svg.contains(&format!(">{label}<")));
        }
    }

    #[test]
    fn empty_grid_is_valid() {
        let svg = grid_svg("nothing", &[]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<line"));
    }
}
