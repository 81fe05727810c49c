//! Plain SVG 1.1 drawings of planar frameworks.
//!
//! Joints are circles, bars solid lines, cables dashed lines and struts a pair
//! of parallel lines. Mirror lines of the point group are dotted. Output is
//! byte-deterministic for a given input.

use std::fmt::Write as _;

use nalgebra::{DMatrix, Vector2};

use crate::error::{Error, Result};
use crate::framework::Framework;
use crate::linalg::{kernel_abs, NumericPolicy};
use crate::symmetry::PointGroup;
use crate::tensegrity::MemberKind;

const SIZE: f64 = 400.0;
const PAD: f64 = 30.0;
const STRUT_GAP: f64 = 2.0;

/// Unit direction of the fixed line of each reflection in a planar group.
pub fn mirror_axes(group: &PointGroup) -> Vec<Vector2<f64>> {
    if group.dim() != 2 {
        return Vec::new();
    }
    let policy = NumericPolicy::default();
    let id = DMatrix::<f64>::identity(2, 2);
    let mut axes = Vec::new();
    for m in group.elements() {
        if m.determinant() > -0.5 {
            continue;
        }
        if let Ok(fixed) = kernel_abs(&(m - &id), policy.group_tol) {
            if fixed.dim() == 1 {
                let v = fixed.vector(0);
                axes.push(Vector2::new(v[0], v[1]).normalize());
            }
        }
    }
    axes
}

pub fn render(fw: &Framework, kinds: Option<&[MemberKind]>, mirrors: &[Vector2<f64>]) -> Result<String> {
    if fw.dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "SVG output needs a planar framework, got dimension {}",
            fw.dim()
        )));
    }
    if let Some(k) = kinds {
        if k.len() != fw.graph().n_edges() {
            return Err(Error::DimensionMismatch {
                expected: fw.graph().n_edges(),
                found: k.len(),
            });
        }
    }
    let pts: Vec<Vector2<f64>> = fw.config().points().iter().map(|p| Vector2::new(p[0], p[1])).collect();
    let (mut lo, mut hi) = (Vector2::repeat(-1.0f64), Vector2::repeat(1.0f64));
    if !pts.is_empty() {
        lo = pts.iter().fold(Vector2::repeat(f64::INFINITY), |a, p| a.inf(p));
        hi = pts.iter().fold(Vector2::repeat(f64::NEG_INFINITY), |a, p| a.sup(p));
    }
    let span = (hi - lo).max().max(1e-9);
    let scale = (SIZE - 2.0 * PAD) / span;
    let mid = (lo + hi) / 2.0;
    let map = |p: &Vector2<f64>| Vector2::new(SIZE / 2.0 + (p.x - mid.x) * scale, SIZE / 2.0 - (p.y - mid.y) * scale);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // mirror lines through the origin, clipped to the canvas by length
    let origin = map(&Vector2::zeros());
    for a in mirrors {
        let d = Vector2::new(a.x, -a.y) * SIZE * 1.5;
        let (p, q) = (origin - d, origin + d);
        let _ = writeln!(
            s,
            r#"<line class="mirror" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray" stroke-width="1" stroke-dasharray="1 4"/>"#,
            p.x, p.y, q.x, q.y
        );
    }

    for (k, &(i, j)) in fw.graph().edges().iter().enumerate() {
        let (a, b) = (map(&pts[i]), map(&pts[j]));
        match kinds.map_or(MemberKind::Bar, |ks| ks[k]) {
            MemberKind::Bar => {
                let _ = writeln!(
                    s,
                    r#"<line class="bar" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="2"/>"#,
                    a.x, a.y, b.x, b.y
                );
            }
            MemberKind::Cable => {
                let _ = writeln!(
                    s,
                    r#"<line class="cable" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
                    a.x, a.y, b.x, b.y
                );
            }
            MemberKind::Strut => {
                let dir = b - a;
                let len = dir.norm().max(1e-12);
                let off = Vector2::new(-dir.y, dir.x) / len * STRUT_GAP;
                let _ = writeln!(s, r#"<g class="strut" stroke="black" stroke-width="1">"#);
                for sgn in [1.0, -1.0] {
                    let (p, q) = (a + off * sgn, b + off * sgn);
                    let _ = writeln!(s, r#"  <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#, p.x, p.y, q.x, q.y);
                }
                let _ = writeln!(s, "</g>");
            }
        }
    }

    for (i, p) in pts.iter().enumerate() {
        let c = map(p);
        let _ = writeln!(
            s,
            r#"<circle class="joint" cx="{:.3}" cy="{:.3}" r="4" fill="white" stroke="black" stroke-width="1.5"/>"#,
            c.x, c.y
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11">{}</text>"#,
            c.x + 6.0,
            c.y - 6.0,
            i + 1
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::Configuration;
    use crate::graph::Graph;
    use MemberKind::*;

    fn count(s: &str, pat: &str) -> usize {
        s.matches(pat).count()
    }

    #[test]
    fn k22_draws_four_bars() {
        let g = Graph::from_one_based(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]).unwrap();
        let c = Configuration::from_rows(&[&[2.0, 1.0], &[1.0, 1.0], &[-2.0, -1.0], &[-1.0, -1.0]]).unwrap();
        let fw = Framework::euclidean(g, c).unwrap();
        let s = render(&fw, None, &[]).unwrap();
        assert_eq!(count(&s, "<circle"), 4);
        assert_eq!(count(&s, r#"class="bar""#), 4);
        assert_eq!(count(&s, "stroke-dasharray"), 0);
        assert_eq!(s, render(&fw, None, &[]).unwrap());
    }

    #[test]
    fn tensegrity_square_styles() {
        let g = Graph::from_one_based(4, &[(1, 2), (2, 3), (3, 4), (4, 1), (1, 3), (2, 4)]).unwrap();
        let c = Configuration::from_rows(&[&[1.0, 1.0], &[-1.0, 1.0], &[-1.0, -1.0], &[1.0, -1.0]]).unwrap();
        let fw = Framework::euclidean(g, c).unwrap();
        let kinds = [Strut, Strut, Strut, Strut, Cable, Cable];
        let mirrors = mirror_axes(&PointGroup::dihedral(2, 4).unwrap());
        assert_eq!(mirrors.len(), 4);
        let s = render(&fw, Some(&kinds), &mirrors).unwrap();
        assert_eq!(count(&s, r#"class="cable""#), 2);
        assert_eq!(count(&s, r#"<g class="strut""#), 4);
        assert_eq!(count(&s, r#"class="mirror""#), 4);
        assert_eq!(count(&s, r#"class="bar""#), 0);
    }

    #[test]
    fn empty_and_wrong_dimension() {
        let fw = Framework::euclidean(Graph::new(0, vec![]).unwrap(), Configuration::new(2, vec![]).unwrap()).unwrap();
        let s = render(&fw, None, &[]).unwrap();
        assert!(s.starts_with("<?xml") && s.ends_with("</svg>\n"));
        assert_eq!(count(&s, "<line"), 0);
        let fw3 = Framework::euclidean(Graph::complete(2), Configuration::from_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]).unwrap()).unwrap();
        assert!(render(&fw3, None, &[]).is_err());
    }
}
