//! Overlap area between polygons with holes.
//!
//! Every ring is fanned into signed triangles from its first vertex. With
//! the shell counter-clockwise and holes clockwise, the signed triangles sum
//! to the indicator function of the polygon, so the overlap area is the
//! double sum of signed pairwise triangle intersections. Each pairwise
//! intersection is a convex clip, which makes the method robust to shared
//! edges and coincident vertices.

use super::{intersects, Point, Polygon, METERS_PER_DEGREE};

type Xy = (f64, f64);

struct Tri {
    pts: [Xy; 3],
    sign: f64,
    min: Xy,
    max: Xy,
}

fn fan(poly: &Polygon, to_local: impl Fn(Point) -> Xy) -> Vec<Tri> {
    let mut out = Vec::new();
    for ring in poly.rings() {
        let v: Vec<Xy> = ring.vertices().iter().map(|&p| to_local(p)).collect();
        for i in 1..v.len() - 1 {
            let (a, b, c) = (v[0], v[i], v[i + 1]);
            let area2 = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            if area2 == 0.0 {
                continue;
            }
            // stored counter-clockwise, orientation kept in `sign`
            let (pts, sign) = if area2 > 0.0 {
                ([a, b, c], 1.0)
            } else {
                ([a, c, b], -1.0)
            };
            let min = (a.0.min(b.0).min(c.0), a.1.min(b.1).min(c.1));
            let max = (a.0.max(b.0).max(c.0), a.1.max(b.1).max(c.1));
            out.push(Tri { pts, sign, min, max });
        }
    }
    out
}

fn shoelace(poly: &[Xy]) -> f64 {
    let n = poly.len();
    let mut twice = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        twice += a.0 * b.1 - b.0 * a.1;
    }
    twice / 2.0
}

/// Sutherland-Hodgman clip of a convex CCW subject by a convex CCW triangle.
fn clip_area(subject: &[Xy; 3], clipper: &[Xy; 3]) -> f64 {
    let mut poly: Vec<Xy> = subject.to_vec();
    let mut next = Vec::with_capacity(8);
    for i in 0..3 {
        let (e0, e1) = (clipper[i], clipper[(i + 1) % 3]);
        let side = |p: Xy| (e1.0 - e0.0) * (p.1 - e0.1) - (e1.1 - e0.1) * (p.0 - e0.0);
        next.clear();
        for j in 0..poly.len() {
            let (cur, prev) = (poly[j], poly[(j + poly.len() - 1) % poly.len()]);
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    next.push(cut(prev, cur, sp, sc));
                }
                next.push(cur);
            } else if sp >= 0.0 {
                next.push(cut(prev, cur, sp, sc));
            }
        }
        std::mem::swap(&mut poly, &mut next);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    shoelace(&poly).max(0.0)
}

fn cut(p: Xy, q: Xy, sp: f64, sq: f64) -> Xy {
    let t = sp / (sp - sq);
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}

/// Overlap area in a plane where coordinates are first shifted to `origin`
/// and longitude is multiplied by `lon_scale`. Units are those of the input.
pub fn planar_overlap(a: &Polygon, b: &Polygon, origin: Point, lon_scale: f64) -> f64 {
    let local = |p: Point| ((p.lon - origin.lon) * lon_scale, p.lat - origin.lat);
    let ta = fan(a, local);
    let tb = fan(b, local);
    let mut sum = 0.0;
    for s in &ta {
        for t in &tb {
            if s.max.0 < t.min.0 || t.max.0 < s.min.0 || s.max.1 < t.min.1 || t.max.1 < s.min.1 {
                continue;
            }
            sum += s.sign * t.sign * clip_area(&s.pts, &t.pts);
        }
    }
    sum
}

/// Approximate overlap area of two polygons in square meters.
///
/// The local frame is centred on the intersection of the two bounding boxes,
/// which keeps the result symmetric in its arguments.
pub fn overlap_area(a: &Polygon, b: &Polygon) -> f64 {
    let Some(common) = a.bbox().intersection(&b.bbox()) else {
        return 0.0;
    };
    if !intersects(a, b) {
        return 0.0;
    }
    let origin = common.center();
    let k = origin.lat.to_radians().cos();
    let deg2 = planar_overlap(a, b, origin, k);
    // cancellation residue from touching boundaries
    let scale = (a.planar_area().min(b.planar_area())) * k;
    if deg2 <= scale * 1e-12 {
        return 0.0;
    }
    deg2 * METERS_PER_DEGREE * METERS_PER_DEGREE
}
