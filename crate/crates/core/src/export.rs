//! Serialisation of networks, cells and numbers.
//!
//! All writers are deterministic: identical inputs give byte-identical text.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cell::ConvexCell;
use crate::error::{Error, Result};
use crate::geom::{clip_line_to_rect, Line, Point, Rect};
use crate::netbuild::{Edge, Layer, PlanarNetwork};

/// Real number with 17 significant digits, positional when the exponent is
/// moderate and scientific otherwise. Round-trips every finite `f64`.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=16).contains(&exp) {
        let prec = (16 - exp).max(0) as usize;
        let s = format!("{x:.prec$}");
        // positional rounding can carry into a new leading digit; still exact
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub nodes: Vec<[f64; 2]>,
    pub edges: Vec<(usize, usize, f64, Layer)>,
}

impl From<&PlanarNetwork> for NetworkJson {
    fn from(net: &PlanarNetwork) -> Self {
        NetworkJson {
            nodes: net.nodes().iter().map(|p| [p.x, p.y]).collect(),
            edges: net.edges().iter().map(|e| (e.a, e.b, e.length, e.layer)).collect(),
        }
    }
}

impl NetworkJson {
    pub fn into_network(self) -> Result<PlanarNetwork> {
        let nodes = self.nodes.into_iter().map(|[x, y]| Point::new(x, y)).collect();
        let edges = self
            .edges
            .into_iter()
            .map(|(a, b, length, layer)| Edge { a, b, length, layer })
            .collect();
        PlanarNetwork::from_parts(nodes, edges)
    }
}

pub fn network_to_json(net: &PlanarNetwork) -> String {
    serde_json::to_string(&NetworkJson::from(net)).expect("network JSON serialisation is infallible")
}

pub fn network_from_json(text: &str) -> Result<PlanarNetwork> {
    let parsed: NetworkJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("network JSON: {e}")))?;
    parsed.into_network()
}

fn layer_style(layer: Layer) -> (&'static str, &'static str, &'static str) {
    // (group id, stroke colour, stroke width)
    match layer {
        Layer::Tree => ("layer-tree", "#1f77b4", "0.6"),
        Layer::MediumGrid => ("layer-medium-grid", "#7f7f7f", "0.4"),
        Layer::HotspotCell => ("layer-hotspot-cell", "#d62728", "0.5"),
        Layer::HotspotConnector => ("layer-hotspot-connector", "#ff7f0e", "0.5"),
        Layer::PoissonLine => ("layer-poisson-line", "#2ca02c", "0.4"),
    }
}

/// Maps window coordinates to a `size`-pixel canvas with y pointing up.
struct Canvas {
    window: Rect,
    scale: f64,
    size: f64,
    out: String,
}

impl Canvas {
    fn new(window: Rect, size: f64) -> Self {
        let scale = size / window.width().max(window.height());
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
            s = size
        );
        let _ = writeln!(out, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
        Canvas {
            window,
            scale,
            size,
            out,
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            (p.x - self.window.min.x) * self.scale,
            self.size - (p.y - self.window.min.y) * self.scale,
        )
    }

    fn line(&mut self, a: Point, b: Point) {
        let ((x1, y1), (x2, y2)) = (self.map(a), self.map(b));
        let _ = writeln!(
            self.out,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#
        );
    }

    fn dot(&mut self, p: Point, r: f64, fill: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(self.out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{fill}"/>"#);
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// One `<g>` per layer (fixed ids, fixed order, empty groups kept) plus a
/// points group.
pub fn network_svg(net: &PlanarNetwork, window: &Rect, points: &[Point]) -> String {
    let mut c = Canvas::new(*window, 800.0);
    for layer in Layer::ALL {
        let (id, colour, width) = layer_style(layer);
        let _ = writeln!(
            c.out,
            r#"<g id="{id}" stroke="{colour}" stroke-width="{width}" fill="none">"#
        );
        for e in net.edges().iter().filter(|e| e.layer == layer) {
            c.line(net.nodes()[e.a], net.nodes()[e.b]);
        }
        c.out.push_str("</g>\n");
    }
    c.out.push_str("<g id=\"points\">\n");
    for p in points {
        c.dot(*p, 1.5, "black");
    }
    c.out.push_str("</g>\n");
    c.finish()
}

/// Two-point cell drawing: deleted (separating) lines, retained lines, the
/// cell and the generators, one group each.
pub fn cell_svg(
    cell: &ConvexCell,
    retained: &[Line],
    deleted: &[Line],
    v1: Point,
    v2: Point,
    window: &Rect,
) -> String {
    let mut c = Canvas::new(*window, 800.0);
    for (id, colour, lines) in [
        ("deleted-lines", "#f4b6b6", deleted),
        ("retained-lines", "#999999", retained),
    ] {
        let _ = writeln!(
            c.out,
            r#"<g id="{id}" stroke="{colour}" stroke-width="0.5" fill="none">"#
        );
        for l in lines {
            if let Some(s) = clip_line_to_rect(l, window) {
                c.line(s.a, s.b);
            }
        }
        c.out.push_str("</g>\n");
    }
    let pts: Vec<String> = cell
        .vertices
        .iter()
        .map(|p| {
            let (x, y) = c.map(*p);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(
        c.out,
        "<g id=\"cell\"><polygon points=\"{}\" fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"#1f77b4\" stroke-width=\"1\"/></g>",
        pts.join(" ")
    );
    c.out.push_str("<g id=\"generators\">\n");
    c.dot(v1, 3.0, "#d62728");
    c.dot(v2, 3.0, "#d62728");
    c.out.push_str("</g>\n");
    c.finish()
}
