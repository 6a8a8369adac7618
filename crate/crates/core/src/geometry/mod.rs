//! Polygon primitives in WGS84 lon/lat.
//!
//! Coordinates are treated as planar degrees for predicates. Areas are
//! converted to square meters through a local equirectangular frame, which
//! is accurate to well under a percent over building-sized extents.

mod clip;
mod hull;
mod index;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clip::{overlap_area, planar_overlap};
pub use hull::convex_hull;
pub use index::SpatialIndex;

/// Meters per degree of latitude (and of longitude at the equator).
pub const METERS_PER_DEGREE: f64 = 111_320.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("coordinate ({lon}, {lat}) is not finite or out of range")]
    BadCoordinate { lon: f64, lat: f64 },
    #[error("ring has {0} distinct vertices, at least 3 are required")]
    TooFewVertices(usize),
    #[error("ring encloses zero area")]
    ZeroArea,
    #[error("hole is not inside the outer ring")]
    HoleOutsideShell,
    #[error("convex hull needs at least 3 non-collinear points")]
    DegenerateHull,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub lon: f64,
    pub lat: f64,
}

impl Point {
    pub const fn new(lon: f64, lat: f64) -> Self {
        Self { lon, lat }
    }

    pub fn is_valid(&self) -> bool {
        self.lon.is_finite()
            && self.lat.is_finite()
            && (-180.0..=180.0).contains(&self.lon)
            && (-90.0..=90.0).contains(&self.lat)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lon, self.lat)
    }
}

/// Axis-aligned box in degrees. Boundaries are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Self {
        debug_assert!(min_lon <= max_lon && min_lat <= max_lat);
        Self {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        }
    }

    fn of_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        let mut b = BBox {
            min_lon: f64::INFINITY,
            min_lat: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
            max_lat: f64::NEG_INFINITY,
        };
        for p in points {
            b.min_lon = b.min_lon.min(p.lon);
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lon = b.max_lon.max(p.lon);
            b.max_lat = b.max_lat.max(p.lat);
        }
        b
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min_lon <= other.max_lon
            && other.min_lon <= self.max_lon
            && self.min_lat <= other.max_lat
            && other.min_lat <= self.max_lat
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        self.intersects(other).then(|| BBox {
            min_lon: self.min_lon.max(other.min_lon),
            min_lat: self.min_lat.max(other.min_lat),
            max_lon: self.max_lon.min(other.max_lon),
            max_lat: self.max_lat.min(other.max_lat),
        })
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        (self.min_lon..=self.max_lon).contains(&p.lon) && (self.min_lat..=self.max_lat).contains(&p.lat)
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.min_lon <= other.min_lon
            && self.min_lat <= other.min_lat
            && self.max_lon >= other.max_lon
            && self.max_lat >= other.max_lat
    }

    pub fn center(&self) -> Point {
        Point::new((self.min_lon + self.max_lon) / 2.0, (self.min_lat + self.max_lat) / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.max_lon - self.min_lon
    }

    pub fn height(&self) -> f64 {
        self.max_lat - self.min_lat
    }

    /// The box as a polygon. Fails for boxes with zero width or height.
    pub fn to_polygon(&self) -> Result<Polygon, GeometryError> {
        Polygon::from_coords(
            &[
                (self.min_lon, self.min_lat),
                (self.max_lon, self.min_lat),
                (self.max_lon, self.max_lat),
                (self.min_lon, self.max_lat),
            ],
            &[],
        )
    }
}

/// A closed ring. The first point is repeated as the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    points: Vec<Point>,
}

impl Ring {
    /// Builds a ring, repairing what OSM data commonly gets wrong: the ring
    /// is closed if needed, repeated vertices are merged and zero-area spikes
    /// are removed. Orientation is left as given.
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        if let Some(bad) = points.iter().find(|p| !p.is_valid()) {
            return Err(GeometryError::BadCoordinate {
                lon: bad.lon,
                lat: bad.lat,
            });
        }
        // open form: no closing duplicate
        let mut open: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if open.last() != Some(&p) {
                open.push(p);
            }
        }
        while open.len() > 1 && open.first() == open.last() {
            open.pop();
        }
        remove_spikes(&mut open);
        if open.len() < 3 {
            return Err(GeometryError::TooFewVertices(open.len()));
        }
        let first = open[0];
        open.push(first);
        let ring = Ring { points: open };
        if ring.signed_area() == 0.0 {
            return Err(GeometryError::ZeroArea);
        }
        Ok(ring)
    }

    /// Closed vertex list (first == last).
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Vertices without the closing duplicate.
    pub fn vertices(&self) -> &[Point] {
        &self.points[..self.points.len() - 1]
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// Shoelace area in square degrees, positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        let o = self.points[0];
        let mut twice = 0.0;
        for (a, b) in self.edges() {
            twice += (a.lon - o.lon) * (b.lat - o.lat) - (b.lon - o.lon) * (a.lat - o.lat);
        }
        twice / 2.0
    }

    pub fn is_ccw(&self) -> bool {
        self.signed_area() > 0.0
    }

    fn reversed(&self) -> Ring {
        let mut points = self.points.clone();
        points.reverse();
        Ring { points }
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.points)
    }

    /// Winding number of the ring around `p`; `None` when `p` is on the ring.
    fn winding_number(&self, p: &Point) -> Option<i32> {
        let mut wn = 0;
        for (a, b) in self.edges() {
            if on_segment(a, b, *p) {
                return None;
            }
            if a.lat <= p.lat {
                if b.lat > p.lat && cross(a, b, *p) > 0.0 {
                    wn += 1;
                }
            } else if b.lat <= p.lat && cross(a, b, *p) < 0.0 {
                wn -= 1;
            }
        }
        Some(wn)
    }
}

fn remove_spikes(open: &mut Vec<Point>) {
    // A vertex whose neighbours are collinear with it and on the same side
    // contributes a zero-width spike. Removing one can expose another.
    let mut changed = true;
    while changed && open.len() >= 3 {
        changed = false;
        let n = open.len();
        for i in 0..n {
            let prev = open[(i + n - 1) % n];
            let cur = open[i];
            let next = open[(i + 1) % n];
            let backtracks = prev == next
                || (cross(prev, cur, next) == 0.0
                    && (cur.lon - prev.lon) * (next.lon - cur.lon) + (cur.lat - prev.lat) * (next.lat - cur.lat) < 0.0);
            if backtracks {
                open.remove(i);
                open.dedup();
                while open.len() > 1 && open.first() == open.last() {
                    open.pop();
                }
                changed = true;
                break;
            }
        }
    }
}

/// A polygon with an outer shell and optional holes. The shell is stored
/// counter-clockwise and holes clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    outer: Ring,
    holes: Vec<Ring>,
    bbox: BBox,
}

impl Polygon {
    pub fn new(outer: Ring, holes: Vec<Ring>) -> Result<Self, GeometryError> {
        let outer = if outer.is_ccw() { outer } else { outer.reversed() };
        let mut oriented = Vec::with_capacity(holes.len());
        for hole in holes {
            let inside = hole.vertices().iter().all(|p| outer.winding_number(p) != Some(0));
            if !inside {
                return Err(GeometryError::HoleOutsideShell);
            }
            oriented.push(if hole.is_ccw() { hole.reversed() } else { hole });
        }
        let bbox = outer.bbox();
        Ok(Self {
            outer,
            holes: oriented,
            bbox,
        })
    }

    /// Convenience constructor from `(lon, lat)` tuples.
    pub fn from_coords(outer: &[(f64, f64)], holes: &[&[(f64, f64)]]) -> Result<Self, GeometryError> {
        let ring = |c: &[(f64, f64)]| Ring::new(c.iter().map(|&(x, y)| Point::new(x, y)).collect());
        let outer = ring(outer)?;
        let holes = holes.iter().map(|h| ring(h)).collect::<Result<Vec<_>, _>>()?;
        Polygon::new(outer, holes)
    }

    /// Axis-aligned square of the given side centred on `center`.
    pub fn square_around(center: Point, side: f64) -> Result<Self, GeometryError> {
        let h = side / 2.0;
        Polygon::from_coords(
            &[
                (center.lon - h, center.lat - h),
                (center.lon + h, center.lat - h),
                (center.lon + h, center.lat + h),
                (center.lon - h, center.lat + h),
            ],
            &[],
        )
    }

    pub fn outer(&self) -> &Ring {
        &self.outer
    }

    pub fn holes(&self) -> &[Ring] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Area in square degrees with holes removed.
    pub fn planar_area(&self) -> f64 {
        self.rings().map(Ring::signed_area).sum()
    }

    /// Approximate area in square meters, scaled about the box centre.
    pub fn area_m2(&self) -> f64 {
        let k = self.bbox.center().lat.to_radians().cos();
        self.planar_area() * k * METERS_PER_DEGREE * METERS_PER_DEGREE
    }

    /// Closed-set point containment: boundary points count as inside.
    pub fn contains_point(&self, p: &Point) -> bool {
        if !self.bbox.contains_point(p) {
            return false;
        }
        match self.outer.winding_number(p) {
            None => return true,
            Some(0) => return false,
            Some(_) => {}
        }
        self.holes.iter().all(|h| h.winding_number(p).is_none_or(|w| w == 0))
    }

    /// Area-weighted centroid, holes subtracted.
    pub fn centroid(&self) -> Result<Point, GeometryError> {
        let o = self.outer.points[0];
        let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for ring in self.rings() {
            for (p, q) in ring.edges() {
                let (x0, y0) = (p.lon - o.lon, p.lat - o.lat);
                let (x1, y1) = (q.lon - o.lon, q.lat - o.lat);
                let c = x0 * y1 - x1 * y0;
                a2 += c;
                cx += (x0 + x1) * c;
                cy += (y0 + y1) * c;
            }
        }
        if a2 == 0.0 || !a2.is_finite() {
            return Err(GeometryError::ZeroArea);
        }
        Ok(Point::new(o.lon + cx / (3.0 * a2), o.lat + cy / (3.0 * a2)))
    }
}

/// Area-weighted centroid of a set of polygons, treated as one geometry.
pub fn combined_centroid<'a>(polygons: impl IntoIterator<Item = &'a Polygon>) -> Result<Point, GeometryError> {
    let (mut w, mut x, mut y) = (0.0, 0.0, 0.0);
    for p in polygons {
        let a = p.planar_area();
        let c = p.centroid()?;
        w += a;
        x += a * c.lon;
        y += a * c.lat;
    }
    if w <= 0.0 {
        return Err(GeometryError::ZeroArea);
    }
    Ok(Point::new(x / w, y / w))
}

/// Closed-set intersection test: a shared boundary point counts.
pub fn intersects(a: &Polygon, b: &Polygon) -> bool {
    let Some(common) = a.bbox.intersection(&b.bbox) else {
        return false;
    };
    let near = |(p, q): &(Point, Point)| BBox::of_points([p, q]).intersects(&common);
    let a_edges: Vec<(Point, Point)> = a.rings().flat_map(Ring::edges).filter(near).collect();
    if !a_edges.is_empty() {
        for f in b.rings().flat_map(Ring::edges).filter(near) {
            if a_edges.iter().any(|e| segments_intersect(e.0, e.1, f.0, f.1)) {
                return true;
            }
        }
    }
    // No boundary contact: either one lies inside the other or they are apart.
    b.contains_point(&a.outer.points[0]) || a.contains_point(&b.outer.points[0])
}

/// Twice the signed area of triangle (a, b, c).
#[inline]
pub(crate) fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    cross(a, b, p) == 0.0
        && p.lon >= a.lon.min(b.lon)
        && p.lon <= a.lon.max(b.lon)
        && p.lat >= a.lat.min(b.lat)
        && p.lat <= a.lat.max(b.lat)
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(q1, q2, p1) || on_segment(q1, q2, p2) || on_segment(p1, p2, q1) || on_segment(p1, p2, q2)
}
