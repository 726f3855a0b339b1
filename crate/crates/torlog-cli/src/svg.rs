//! Static SVG rendering of a polygon: outline, origin marker, and per-facet
//! outward arrows whose lengths are proportional to the facet's cone-torsion
//! mass. The output carries no timestamps or other run metadata, so identical
//! inputs render identical bytes.

use torlog::geometry::Polygon;

/// Fraction of the diameter used by the longest arrow.
const ARROW_FRACTION: f64 = 0.25;
/// Arrowhead barb length as a fraction of the diameter.
const BARB_FRACTION: f64 = 0.03;
/// Barb half-angle off the shaft, radians.
const BARB_ANGLE: f64 = 0.45;

pub fn polygon_plot(poly: &Polygon, g_tor: &[f64]) -> String {
    // the plot frame flips y so the mathematical orientation appears upright
    let pt = |p: [f64; 2]| (p[0], -p[1]);
    let diam = poly.diameter();
    let gmax = g_tor.iter().copied().fold(0.0_f64, f64::max);

    let mut outline = String::new();
    for (i, &v) in poly.vertices().iter().enumerate() {
        let (x, y) = pt(v);
        let cmd = if i == 0 { 'M' } else { 'L' };
        outline.push_str(&format!("{cmd} {x:.6} {y:.6} "));
    }
    outline.push('Z');

    let mut extremes: Vec<(f64, f64)> = poly.vertices().iter().map(|&v| pt(v)).collect();
    extremes.push((0.0, 0.0));
    let mut arrows = Vec::new();
    if gmax > 0.0 {
        for (k, facet) in poly.facets().iter().enumerate() {
            let weight = g_tor.get(k).copied().unwrap_or(0.0);
            let Some((a, b)) = facet.endpoints else {
                continue;
            };
            if weight <= 0.0 {
                continue;
            }
            let d = poly.directions()[k];
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let len = ARROW_FRACTION * diam * weight / gmax;
            let tip = [mid[0] + len * d.x(), mid[1] + len * d.y()];
            let (mx, my) = pt(mid);
            let (tx, ty) = pt(tip);
            let mut path = format!("M {mx:.6} {my:.6} L {tx:.6} {ty:.6}");
            for sign in [1.0, -1.0] {
                let angle = d.angle() + std::f64::consts::PI + sign * BARB_ANGLE;
                let barb = [
                    tip[0] + BARB_FRACTION * diam * angle.cos(),
                    tip[1] + BARB_FRACTION * diam * angle.sin(),
                ];
                let (bx, by) = pt(barb);
                path.push_str(&format!(" M {tx:.6} {ty:.6} L {bx:.6} {by:.6}"));
                extremes.push((bx, by));
            }
            extremes.push((tx, ty));
            arrows.push(path);
        }
    }

    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &extremes {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    let pad = 0.08 * (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
    let view = (
        lo.0 - pad,
        lo.1 - pad,
        hi.0 - lo.0 + 2.0 * pad,
        hi.1 - lo.1 + 2.0 * pad,
    );

    let sw = 0.005 * diam;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        view.0, view.1, view.2, view.3
    );
    out.push_str(&format!(
        "  <path d=\"{outline}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"{sw:.6}\"/>\n"
    ));
    out.push_str(&format!(
        "  <circle cx=\"0\" cy=\"0\" r=\"{:.6}\" fill=\"#000000\"/>\n",
        0.015 * diam
    ));
    for path in &arrows {
        out.push_str(&format!(
            "  <path d=\"{path}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"{sw:.6}\"/>\n"
        ));
    }
    out.push_str("</svg>\n");
    out
}
