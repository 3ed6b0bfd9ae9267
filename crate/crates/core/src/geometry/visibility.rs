use std::f64::consts::PI;

use super::point::Point;
use super::polygon::{PointLocation, Polygon};
use super::predicates::{on_segment, orient_sign};
use super::region::Region;
use super::GeometryError;

/// Angular offset of the side rays cast next to every vertex direction.
const SIDE_RAY: f64 = 1e-7;

/// `true` iff the segment `pq` stays inside the closed polygon.
/// Grazing a vertex or running along an edge counts as visible.
pub fn segment_visible(polygon: &Polygon, p: Point, q: Point) -> Result<bool, GeometryError> {
    for x in [p, q] {
        if polygon.locate(x) == PointLocation::Outside {
            return Err(GeometryError::PointOutside(x));
        }
    }
    Ok(visible(polygon, p, q))
}

/// [`segment_visible`] without endpoint validation.
pub fn visible(polygon: &Polygon, p: Point, q: Point) -> bool {
    if p == q {
        return true;
    }
    let v = polygon.vertices();
    let n = v.len();
    let d = q - p;
    let len2 = d.dot(d);
    let mut touches: Vec<f64> = Vec::new();
    let mut on_boundary = false;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let o1 = orient_sign(p, q, a);
        let o2 = orient_sign(p, q, b);
        if o1 * o2 > 0 {
            continue;
        }
        let o3 = orient_sign(a, b, p);
        let o4 = orient_sign(a, b, q);
        if o3 * o4 > 0 {
            continue;
        }
        if o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
            // An endpoint within eps of the edge is on it, up to rounding.
            let e = super::point::Segment::new(a, b);
            if e.distance_to(p) > polygon.eps() && e.distance_to(q) > polygon.eps() {
                return false;
            }
            on_boundary = true;
            continue;
        }
        if (o3 == 0 && on_segment(p, a, b)) || (o4 == 0 && on_segment(q, a, b)) {
            on_boundary = true;
        }
        for (o, w) in [(o1, a), (o2, b)] {
            if o == 0 && on_segment(w, p, q) {
                let t = (w - p).dot(d) / len2;
                if t > 0.0 && t < 1.0 {
                    touches.push(t);
                }
            }
        }
    }
    if touches.is_empty() && !on_boundary {
        return true;
    }
    touches.push(0.0);
    touches.push(1.0);
    touches.sort_by(f64::total_cmp);
    touches
        .windows(2)
        .filter(|w| w[1] - w[0] > 1e-12)
        .all(|w| polygon.contains(p + d * ((w[0] + w[1]) * 0.5)))
}

/// Star-shaped region of points visible from `p`, built from rays cast at every
/// vertex direction and at small angular offsets on both sides.
pub fn visibility_polygon(polygon: &Polygon, p: Point) -> Result<Region, GeometryError> {
    let loc = polygon.locate(p);
    if loc == PointLocation::Outside {
        return Err(GeometryError::PointOutside(p));
    }
    Ok(Region::from_ring(&visibility_ring(polygon, p)))
}

/// Ring of the visibility polygon of `p` (which must lie in the polygon).
pub fn visibility_ring(polygon: &Polygon, p: Point) -> Vec<Point> {
    let reach = polygon.diameter() * 2.0 + 1.0;
    let (start, span) = visible_cone(polygon, p);
    let mut angles: Vec<f64> = Vec::with_capacity(polygon.len() * 3 + 2);
    for &w in polygon.vertices() {
        if w.dist(p) <= polygon.eps() {
            continue;
        }
        let rel = rel_angle((w - p).y.atan2((w - p).x), start);
        // Side rays must clear the vertex by well over the boundary band.
        let off = SIDE_RAY.max(100.0 * polygon.eps() / w.dist(p));
        for a in [rel - off, rel, rel + off] {
            if a >= 0.0 && a <= span {
                angles.push(a);
            }
        }
    }
    if span < 2.0 * PI {
        angles.push(0.0);
        angles.push(span);
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let mut ring = Vec::with_capacity(angles.len() + 1);
    if span < 2.0 * PI {
        ring.push(p);
    }
    for a in angles {
        let th = start + a;
        let dir = Point::new(th.cos(), th.sin());
        let dist = polygon.ray_exit(p, dir, reach);
        if dist > 0.0 {
            ring.push(p + dir * dist);
        }
    }
    super::polygon::simplify_ring(&ring, polygon.eps())
}

fn rel_angle(theta: f64, start: f64) -> f64 {
    let mut a = theta - start;
    while a < 0.0 {
        a += 2.0 * PI;
    }
    while a >= 2.0 * PI {
        a -= 2.0 * PI;
    }
    a
}

/// Angular interval `[start, start + span]` of directions pointing into the polygon.
fn visible_cone(polygon: &Polygon, p: Point) -> (f64, f64) {
    let n = polygon.len();
    let eps = polygon.eps();
    for i in 0..n {
        if polygon.vertex(i).dist(p) <= eps {
            let next = polygon.vertex(polygon.next(i)) - p;
            let prev = polygon.vertex(polygon.prev(i)) - p;
            let start = next.y.atan2(next.x);
            let end = prev.y.atan2(prev.x);
            let span = rel_angle(end, start);
            return (start, if span == 0.0 { 2.0 * PI } else { span });
        }
    }
    for i in 0..n {
        let e = polygon.edge(i);
        if e.distance_to(p) <= eps || (orient_sign(e.a, e.b, p) == 0 && on_segment(p, e.a, e.b)) {
            let dir = e.b - e.a;
            return (dir.y.atan2(dir.x), PI);
        }
    }
    (0.0, 2.0 * PI)
}
