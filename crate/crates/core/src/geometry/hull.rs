use super::{cross, GeometryError, Point, Polygon, Ring};

/// Convex hull by Andrew's monotone chain. Collinear boundary points are
/// dropped from the output ring.
pub fn convex_hull(points: &[Point]) -> Result<Polygon, GeometryError> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.lon.total_cmp(&b.lon).then(a.lat.total_cmp(&b.lat)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateHull);
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(GeometryError::DegenerateHull);
    }
    let ring = Ring::new(lower).map_err(|_| GeometryError::DegenerateHull)?;
    Polygon::new(ring, Vec::new())
}
