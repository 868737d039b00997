//! SVG layer maps: one circle per neuron, colored by class or by a
//! continuous value, with one panel per label source for side-by-side
//! comparison. Output is a standalone SVG document with no external
//! references and no timestamps.

use std::fmt::Write as _;

use cortolam_core::types::{LabelSet, LayerClass, NeuronRecord};

/// Fixed 7-class palette, indexed by layer ordinal.
pub const CLASS_COLORS: [&str; 7] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc949", "#b07aa1",
];

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 640.0;
const MARGIN: f64 = 36.0;
const LEGEND_W: f64 = 120.0;

/// One panel of the figure.
pub struct Panel<'a> {
    pub title: String,
    pub coloring: Coloring<'a>,
}

pub enum Coloring<'a> {
    /// Color by layer class; unlabeled neurons are skipped.
    Classes(&'a LabelSet),
    /// Color by a continuous value per neuron (aligned with the neuron
    /// slice), on a blue-to-red ramp.
    Values(&'a [f64]),
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn lerp_color(t: f64) -> String {
    // Blue (low) to red (high) through light gray.
    let t = t.clamp(0.0, 1.0);
    let (r0, g0, b0) = (59.0, 76.0, 192.0);
    let (r1, g1, b1) = (218.0, 66.0, 41.0);
    let (rm, gm, bm) = (221.0, 221.0, 221.0);
    let (r, g, b) = if t < 0.5 {
        let u = t * 2.0;
        (r0 + (rm - r0) * u, g0 + (gm - g0) * u, b0 + (bm - b0) * u)
    } else {
        let u = (t - 0.5) * 2.0;
        (rm + (r1 - rm) * u, gm + (g1 - gm) * u, bm + (b1 - bm) * u)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

/// Render a multi-panel layer map over a shared coordinate frame.
pub fn render_layer_map(neurons: &[NeuronRecord], panels: &[Panel<'_>]) -> String {
    assert!(!panels.is_empty(), "at least one panel required");
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in neurons {
        min_x = min_x.min(n.x_um);
        max_x = max_x.max(n.x_um);
        min_y = min_y.min(n.y_um);
        max_y = max_y.max(n.y_um);
    }
    if !(min_x.is_finite() && min_y.is_finite()) {
        min_x = 0.0;
        max_x = 1.0;
        min_y = 0.0;
        max_y = 1.0;
    }
    let span_x = (max_x - min_x).max(1e-9);
    let span_y = (max_y - min_y).max(1e-9);
    let scale = ((PANEL_W - 2.0 * MARGIN) / span_x).min((PANEL_H - 2.0 * MARGIN) / span_y);

    let total_w = panels.len() as f64 * PANEL_W + LEGEND_W;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{total_w:.0}" height="{PANEL_H:.0}" viewBox="0 0 {total_w:.0} {PANEL_H:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{total_w:.0}" height="{PANEL_H:.0}" fill="white"/>"#);

    let mut used_classes = [false; 7];
    let mut value_range: Option<(f64, f64)> = None;

    for (p, panel) in panels.iter().enumerate() {
        let x0 = p as f64 * PANEL_W + MARGIN;
        let y0 = MARGIN;
        let _ = writeln!(
            svg,
            r#"<text x="{tx:.1}" y="{ty:.1}" font-family="sans-serif" font-size="14">{title}</text>"#,
            tx = x0,
            ty = y0 - 12.0,
            title = esc(&panel.title)
        );
        let _ = writeln!(svg, r#"<g stroke="none">"#);
        match &panel.coloring {
            Coloring::Classes(labels) => {
                for n in neurons {
                    let Some(class) = labels.get(n.id) else { continue };
                    used_classes[class.ordinal()] = true;
                    let cx = x0 + (n.x_um - min_x) * scale;
                    let cy = y0 + (n.y_um - min_y) * scale;
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="1.4" fill="{color}"/>"#,
                        color = CLASS_COLORS[class.ordinal()]
                    );
                }
            }
            Coloring::Values(values) => {
                assert_eq!(values.len(), neurons.len(), "values must align with neurons");
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let span = (hi - lo).max(1e-12);
                value_range = Some((lo, hi));
                for (n, &v) in neurons.iter().zip(values.iter()) {
                    let cx = x0 + (n.x_um - min_x) * scale;
                    let cy = y0 + (n.y_um - min_y) * scale;
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="1.4" fill="{color}"/>"#,
                        color = lerp_color((v - lo) / span)
                    );
                }
            }
        }
        let _ = writeln!(svg, "</g>");
    }

    // Legend.
    let lx = panels.len() as f64 * PANEL_W + 12.0;
    let mut ly = MARGIN + 6.0;
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="12">"#);
    if used_classes.iter().any(|&u| u) {
        for class in LayerClass::ALL {
            if !used_classes[class.ordinal()] {
                continue;
            }
            let _ = writeln!(
                svg,
                r#"<rect x="{lx:.1}" y="{y:.1}" width="12" height="12" fill="{color}"/><text x="{tx:.1}" y="{ty:.1}">{label}</text>"#,
                y = ly,
                color = CLASS_COLORS[class.ordinal()],
                tx = lx + 18.0,
                ty = ly + 10.0,
                label = class.token()
            );
            ly += 18.0;
        }
    }
    if let Some((lo, hi)) = value_range {
        for (i, label) in [(0usize, format!("{lo:.3}")), (1, format!("{hi:.3}"))] {
            let _ = writeln!(
                svg,
                r#"<rect x="{lx:.1}" y="{y:.1}" width="12" height="12" fill="{color}"/><text x="{tx:.1}" y="{ty:.1}">{label}</text>"#,
                y = ly,
                color = lerp_color(i as f64),
                tx = lx + 18.0,
                ty = ly + 10.0,
                label = esc(&label)
            );
            ly += 18.0;
        }
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}
