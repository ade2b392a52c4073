//! Orbit artifacts: CSV and an SVG phase portrait.

use std::fmt::Write;

/// Column names `x{j}_{k}` for window level `k`, component `j`.
pub fn csv_header(order: usize, components: usize) -> String {
    let mut h = String::from("step");
    for k in 0..order {
        for j in 1..=components {
            let _ = write!(h, ",x{j}_{k}");
        }
    }
    h
}

/// One row per orbit point. Floats use the shortest representation that
/// parses back to the same value.
pub fn orbit_csv(order: usize, components: usize, points: &[Vec<f64>]) -> String {
    let mut out = csv_header(order, components);
    out.push('\n');
    for (i, p) in points.iter().enumerate() {
        let _ = write!(out, "{i}");
        for v in p {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 24.0;

/// Polyline through coordinates `(i, j)` of the finite points. The view
/// box is the data extent plus a margin; an orbit with fewer than two
/// usable points gives an empty plot.
pub fn phase_svg(points: &[Vec<f64>], (i, j): (usize, usize), labels: (&str, &str)) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| Some((*p.get(i)?, *p.get(j)?)))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if pts.len() >= 2 {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0).max(1e-12);
        let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0).max(1e-12);
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", MARGIN + (x - x0) * sx, HEIGHT - MARGIN - (y - y0) * sy))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="black" stroke-width="0.8" points="{}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(out, r#"<text x="{MARGIN}" y="16" font-size="12">{} in [{x0:.6}, {x1:.6}], {} in [{y0:.6}, {y1:.6}]</text>"#, labels.0, labels.1);
    } else {
        let _ = writeln!(out, r#"<text x="{MARGIN}" y="16" font-size="12">empty orbit</text>"#);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_level_major() {
        assert_eq!(csv_header(2, 2), "step,x1_0,x2_0,x1_1,x2_1");
    }

    #[test]
    fn floats_round_trip() {
        let v = 0.1 + 0.2;
        let csv = orbit_csv(1, 1, &[vec![v]]);
        let field = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn short_orbits_draw_nothing() {
        assert!(!phase_svg(&[vec![1.0, 2.0]], (0, 1), ("x", "y")).contains("polyline"));
        assert!(phase_svg(&[vec![1.0, 2.0], vec![2.0, 1.0]], (0, 1), ("x", "y")).contains("polyline"));
    }
}
