//! SVG rendering of the stability diagram: the closed-form boundary
//! curves drawn over the numerically exact stability region, with axes in
//! the dimensionless units `α/κ²` and `β/κ²`.
//!
//! The output is a self-contained fixed-size document (no scripts, no
//! external references), deterministic for identical inputs so diagram
//! artifacts can be diffed byte for byte.

use std::fmt::Write as _;

use crate::mathieu::{BoundaryKind, StabilityBoundary};
use crate::scalar::Scalar;
use crate::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 25.0;
const MARGIN_TOP: f64 = 25.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn curve_color(kind: BoundaryKind) -> &'static str {
    match kind {
        BoundaryKind::Fluctuation => "#d62728",
        BoundaryKind::Kato => "#2ca02c",
        BoundaryKind::Series => "#ff7f0e",
        BoundaryKind::Numeric => "#1f77b4",
    }
}

struct Frame {
    a_max: f64,
    b_max: f64,
}

impl Frame {
    fn x(&self, a: f64) -> f64 {
        MARGIN_LEFT + a / self.a_max * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, b: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - b / self.b_max * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

/// Scales a boundary to `(α/κ², β/κ²)` and keeps the in-window prefix.
fn scaled_points<T: Scalar>(
    boundary: &StabilityBoundary<T>,
    kappa_sq: f64,
    frame: &Frame,
) -> Vec<(f64, f64)> {
    boundary
        .points
        .iter()
        .map(|&(a, b)| {
            (
                a.to_f64().unwrap_or(f64::NAN) / kappa_sq,
                b.to_f64().unwrap_or(f64::NAN) / kappa_sq,
            )
        })
        .filter(|&(a, b)| {
            a.is_finite() && b.is_finite() && a <= frame.a_max * 1.0001 && b <= frame.b_max * 1.0001
        })
        .collect()
}

/// Renders the stability diagram.
///
/// `curves` are drawn as labeled lines; `region` (normally the numeric
/// boundary) bounds the shaded stable set, everything to its right down to
/// the `α` axis. `alpha_max` and `beta_max` set the window in raw units;
/// the axes are displayed divided by `κ²`.
pub fn stability_svg<T: Scalar>(
    curves: &[&StabilityBoundary<T>],
    region: &StabilityBoundary<T>,
    kappa: T,
    alpha_max: T,
    beta_max: T,
) -> Result<String> {
    let kappa_sq = (kappa * kappa).to_f64().unwrap_or(f64::NAN);
    if !(kappa_sq.is_finite() && kappa_sq > 0.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: "must be finite and positive".into(),
        });
    }
    let frame = Frame {
        a_max: alpha_max.to_f64().unwrap_or(f64::NAN) / kappa_sq,
        b_max: beta_max.to_f64().unwrap_or(f64::NAN) / kappa_sq,
    };
    if !(frame.a_max > 0.0 && frame.b_max > 0.0) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: "alpha_max and beta_max must be positive".into(),
        });
    }
    let region_pts = scaled_points(region, kappa_sq, &frame);
    if region_pts.is_empty() {
        return Err(Error::EmptyGrid);
    }

    let mut svg = String::with_capacity(16 * 1024);
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );

    // Shaded stable region: along the boundary, then out to the right edge
    // and down to the axis. The polygon closes back along the bottom.
    let (_, b_end) = *region_pts.last().expect("nonempty region");
    let mut poly = String::new();
    for &(a, b) in &region_pts {
        let _ = write!(poly, "{:.2},{:.2} ", frame.x(a), frame.y(b));
    }
    let _ = write!(
        poly,
        "{:.2},{:.2} {:.2},{:.2}",
        frame.x(frame.a_max),
        frame.y(b_end),
        frame.x(frame.a_max),
        frame.y(0.0)
    );
    let _ = writeln!(
        svg,
        "  <polygon id=\"stable-region\" points=\"{poly}\" fill=\"{}\" \
         fill-opacity=\"0.25\" stroke=\"{}\" stroke-width=\"1.5\"/>",
        curve_color(BoundaryKind::Numeric),
        curve_color(BoundaryKind::Numeric)
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" fill=\"{}\">stable ({})</text>",
        frame.x(frame.a_max * 0.62),
        frame.y(frame.b_max * 0.08),
        curve_color(BoundaryKind::Numeric),
        region.kind
    );

    // Overlay curves with a label at their last in-window point.
    for curve in curves {
        let pts = scaled_points(curve, kappa_sq, &frame);
        let color = curve_color(curve.kind);
        let mut path = String::new();
        for &(a, b) in &pts {
            let _ = write!(path, "{:.2},{:.2} ", frame.x(a), frame.y(b));
        }
        let _ = writeln!(
            svg,
            "  <polyline id=\"boundary-{}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" \
             stroke-width=\"2\" stroke-dasharray=\"6 3\"/>",
            curve.kind,
            path.trim_end()
        );
        if let Some(&(a, b)) = pts.last() {
            let (lx, ly) = (frame.x(a) + 6.0, frame.y(b) - 6.0);
            let _ = writeln!(
                svg,
                "  <text x=\"{lx:.2}\" y=\"{ly:.2}\" font-size=\"14\" fill=\"{color}\">{}</text>",
                curve.kind
            );
        }
    }

    // Frame and ticks.
    let _ = writeln!(
        svg,
        "  <rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#444444\"/>",
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    );
    let n_ticks = 5;
    for i in 0..=n_ticks {
        let f = i as f64 / n_ticks as f64;
        let (a, b) = (frame.a_max * f, frame.b_max * f);
        let (x, y) = (frame.x(a), frame.y(b));
        let y0 = HEIGHT - MARGIN_BOTTOM;
        let _ = writeln!(
            svg,
            "  <line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#444444\"/>",
            y0 + 6.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{a:.1}</text>",
            y0 + 20.0
        );
        let _ = writeln!(
            svg,
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{y:.2}\" \
             stroke=\"#444444\"/>",
            MARGIN_LEFT - 6.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{b:.1}</text>",
            MARGIN_LEFT - 10.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"15\" text-anchor=\"middle\">&#945;/&#954;&#178;</text>",
        MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"20\" y=\"{:.2}\" font-size=\"15\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {:.2})\">&#946;/&#954;&#178;</text>",
        MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / 2.0,
        MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / 2.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
