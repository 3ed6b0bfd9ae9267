use std::f64::consts::PI;

use super::geodesic::{GeodesicIndex, SourceField};
use super::point::{Point, Segment};
use super::polygon::PointLocation;
use super::region::Region;
use super::visibility::visibility_ring;

/// Largest angular step used when flattening circular arcs.
pub const ARC_STEP_DEG: f64 = 5.0;

/// Relative offset tolerance (fraction of the polygon diameter).
pub const OFFSET_TOLERANCE: f64 = 1e-3;

/// Points of the polygon within geodesic distance `d` of the source segments.
///
/// Arcs are flattened by circumscribed polygons, so the result contains the exact
/// offset and exceeds it by at most [`OFFSET_TOLERANCE`] times the diameter.
pub fn geodesic_offset(index: &GeodesicIndex, source: &[Segment], d: f64) -> Region {
    let field = SourceField::new(index, source.to_vec());
    offset_from_field(index, &field, d)
}

/// [`geodesic_offset`] for a precomputed source field.
pub fn offset_from_field(index: &GeodesicIndex, field: &SourceField, d: f64) -> Region {
    if d <= 0.0 || field.segments().is_empty() {
        return Region::empty();
    }
    let polygon = index.polygon();
    let mut pieces: Vec<Region> = Vec::new();
    let mut ends: Vec<Point> = Vec::new();
    for s in field.segments() {
        if s.length() > 0.0 {
            for side in [1.0, -1.0] {
                let ring = slab(index, s, d, side);
                if ring.len() >= 3 {
                    pieces.push(Region::from_ring(&ring));
                }
            }
        }
        for p in [s.a, s.b] {
            if !ends.iter().any(|q| q.dist(p) <= polygon.eps()) {
                ends.push(p);
            }
        }
    }
    for p in ends {
        let vis = match polygon.vertices().iter().position(|v| v.dist(p) <= polygon.eps()) {
            Some(v) => index.vertex_visibility(v).clone(),
            None => {
                if polygon.locate(p) == PointLocation::Outside {
                    continue;
                }
                Region::from_ring(&visibility_ring(polygon, p))
            }
        };
        pieces.push(vis.intersect(&disk(p, d)));
    }
    for (i, &g) in field.reflex_dist().iter().enumerate() {
        if g < d {
            let v = index.reflex()[i];
            pieces.push(index.vertex_visibility(v).intersect(&disk(polygon.vertex(v), d - g)));
        }
    }
    Region::union_all(&pieces).simplified(polygon.eps())
}

/// Circumscribed regular polygon with edges subtending at most [`ARC_STEP_DEG`].
pub fn disk(c: Point, radius: f64) -> Region {
    let k = (360.0 / ARC_STEP_DEG).ceil() as usize;
    let step = 2.0 * PI / k as f64;
    let rr = radius / (step * 0.5).cos();
    let ring: Vec<Point> = (0..k)
        .map(|i| {
            let a = step * i as f64;
            c + Point::new(a.cos(), a.sin()) * rr
        })
        .collect();
    Region::from_ring(&ring)
}

/// Points reached by perpendicular segments of length at most `d` from `s`
/// on one side, clipped where they first leave the polygon.
fn slab(index: &GeodesicIndex, s: &Segment, d: f64, side: f64) -> Vec<Point> {
    let polygon = index.polygon();
    let len = s.length();
    let u = (s.b - s.a) * (1.0 / len);
    let nrm = u.perp() * side;
    let local = |p: Point| -> (f64, f64) { ((p - s.a).dot(u), (p - s.a).dot(nrm)) };
    let mut breaks = vec![0.0, len];
    let n = polygon.len();
    for i in 0..n {
        let (ta, ya) = local(polygon.vertex(i));
        if ta > 0.0 && ta < len {
            breaks.push(ta);
        }
        let (tb, yb) = local(polygon.vertex(polygon.next(i)));
        if (ya - d) * (yb - d) < 0.0 {
            let t = ta + (d - ya) * (tb - ta) / (yb - ya);
            if t > 0.0 && t < len {
                breaks.push(t);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * len.max(1.0));
    // Height profile (left value, right value) on each interval.
    let mut tops: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let tm = 0.5 * (t0 + t1);
        let base = s.a + u * tm;
        let h = polygon.ray_exit(base, nrm, d);
        if h >= d {
            tops.push((t0, d, t1, d));
            continue;
        }
        if h <= 0.0 {
            tops.push((t0, 0.0, t1, 0.0));
            continue;
        }
        let hit = base + nrm * h;
        // Edge carrying the exit point determines the profile on this interval.
        let mut profile = None;
        let mut best = f64::INFINITY;
        for i in 0..n {
            let e = polygon.edge(i);
            let dist = e.distance_to(hit);
            if dist < best {
                let (ta, ya) = local(e.a);
                let (tb, yb) = local(e.b);
                if (tb - ta).abs() > 1e-15 {
                    best = dist;
                    profile = Some((ta, ya, tb, yb));
                }
            }
        }
        let at = |t: f64| -> f64 {
            match profile {
                Some((ta, ya, tb, yb)) => (ya + (t - ta) * (yb - ya) / (tb - ta)).clamp(0.0, d),
                None => h,
            }
        };
        tops.push((t0, at(t0), t1, at(t1)));
    }
    let mut ring = vec![s.a];
    for &(t0, h0, t1, h1) in &tops {
        ring.push(s.a + u * t0 + nrm * h0);
        ring.push(s.a + u * t1 + nrm * h1);
    }
    ring.push(s.b);
    ring
}
