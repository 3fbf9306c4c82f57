//! GeoJSON and SVG writers for contour sets.
//!
//! Both take coordinates already in their output space: plain map units or
//! `[lon, lat]` for GeoJSON, view units for SVG.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::api::ContourSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    Focus,
    Minimizer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub kind: MarkerKind,
    pub label: String,
    pub at: [f64; 2],
    /// Focus weight, or the minimum value for the minimizer.
    pub value: f64,
}

/// Closed curves become polygons (ring repeated back to its start, counter-
/// clockwise), open ones line strings. Every feature carries its `level`.
pub fn geojson(contours: &[ContourSet], markers: &[Marker]) -> Value {
    let mut features = Vec::new();
    for set in contours {
        for curve in &set.curves {
            let mut coords = curve.vertices.clone();
            let geometry = if curve.closed {
                coords.push(coords[0]);
                json!({ "type": "Polygon", "coordinates": [coords] })
            } else {
                json!({ "type": "LineString", "coordinates": coords })
            };
            features.push(json!({
                "type": "Feature",
                "geometry": geometry,
                "properties": { "level": set.level, "closed": curve.closed, "refine_tol": curve.refine_tol },
            }));
        }
    }
    for m in markers {
        let properties = match m.kind {
            MarkerKind::Focus => json!({ "kind": "focus", "name": m.label, "weight": m.value }),
            MarkerKind::Minimizer => json!({ "kind": "minimizer", "name": m.label, "s0": m.value }),
        };
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": m.at },
            "properties": properties,
        }));
    }
    json!({ "type": "FeatureCollection", "features": features })
}

/// View rectangle `[0, width] × [0, height]`, y down.
pub struct SvgView {
    pub width: f64,
    pub height: f64,
    pub background: Option<String>,
}

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const PIXELS: f64 = 800.0;

pub fn svg(view: &SvgView, contours: &[ContourSet], markers: &[Marker]) -> String {
    let scale = PIXELS / view.width.max(view.height);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {} {}" width="{:.0}" height="{:.0}">"#,
        view.width,
        view.height,
        view.width * scale,
        view.height * scale
    );
    if let Some(href) = &view.background {
        let _ = writeln!(
            out,
            r#"  <image href="{}" x="0" y="0" width="{}" height="{}" preserveAspectRatio="none"/>"#,
            escape(href),
            view.width,
            view.height
        );
    }
    for (k, set) in contours.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        for curve in &set.curves {
            let mut d = String::new();
            for (i, [x, y]) in curve.vertices.iter().enumerate() {
                let _ = write!(d, "{}{x} {y}", if i == 0 { "M" } else { " L" });
            }
            if curve.closed {
                d.push_str(" Z");
            }
            let _ = writeln!(
                out,
                r#"  <path d="{d}" data-level="{}" fill="none" stroke="{colour}" stroke-width="1.5" vector-effect="non-scaling-stroke"/>"#,
                set.level
            );
        }
    }
    let r = 5.0 / scale;
    for m in markers {
        let [x, y] = m.at;
        let fill = match m.kind {
            MarkerKind::Focus => "#000",
            MarkerKind::Minimizer => "#d62728",
        };
        let _ = writeln!(out, r#"  <circle cx="{x}" cy="{y}" r="{r}" fill="{fill}"/>"#);
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="{}" font-family="sans-serif">{}</text>"#,
            x + 1.5 * r,
            y - 1.5 * r,
            3.0 * r,
            escape(&m.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}
