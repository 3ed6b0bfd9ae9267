use std::path::Path;

use serde::{Deserialize, Serialize};

use super::point::{Point, Segment};
use super::predicates::{on_segment, orient, segment_contact, SegmentContact};
use super::GeometryError;

/// Simple polygon without holes, stored counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    diameter: f64,
    eps: f64,
}

/// On-disk polygon document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolygonFile {
    pub vertices: Vec<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointLocation {
    Inside,
    Boundary,
    Outside,
}

/// Outcome of loading a polygon from a ring of points.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub polygon: Polygon,
    /// The input ring was clockwise and has been reversed.
    pub reversed: bool,
}

impl Polygon {
    /// Validates and normalizes a vertex ring. Clockwise rings are reversed.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        Ok(Self::load(vertices)?.polygon)
    }

    pub fn load(mut vertices: Vec<Point>) -> Result<Loaded, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(GeometryError::DuplicateVertex(i));
            }
        }
        check_simple(&vertices)?;
        let area = signed_area(&vertices);
        if area == 0.0 {
            return Err(GeometryError::ZeroArea);
        }
        let reversed = area < 0.0;
        if reversed {
            vertices.reverse();
        }
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max(vertices[i].dist(vertices[j]));
            }
        }
        Ok(Loaded {
            polygon: Self {
                vertices,
                diameter,
                eps: diameter * 1e-9,
            },
            reversed,
        })
    }

    pub fn from_json(text: &str) -> Result<Loaded, GeometryError> {
        let file: PolygonFile =
            serde_json::from_str(text).map_err(|e| GeometryError::Parse(e.to_string()))?;
        Self::load(file.vertices)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Loaded, GeometryError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| GeometryError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn to_file(&self) -> PolygonFile {
        PolygonFile {
            vertices: self.vertices.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.len()
    }

    pub fn prev(&self, i: usize) -> usize {
        (i + self.len() - 1) % self.len()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> Segment {
        Segment::new(self.vertices[i], self.vertices[self.next(i)])
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.len()).map(move |i| self.edge(i))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Distance below which a point counts as lying on the boundary.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = self.vertices[0];
        let mut hi = lo;
        for p in &self.vertices {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Interior angle at vertex `i` exceeds pi.
    pub fn is_reflex(&self, i: usize) -> bool {
        orient(self.vertices[self.prev(i)], self.vertices[i], self.vertices[self.next(i)]) < 0.0
    }

    pub fn reflex_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_reflex(i)).collect()
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges().map(|e| e.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    /// Exact location (boundary only when exactly on an edge).
    pub fn locate_exact(&self, p: Point) -> PointLocation {
        let n = self.len();
        let mut winding = 0i32;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if on_segment(p, a, b) {
                return PointLocation::Boundary;
            }
            if a.y <= p.y {
                if b.y > p.y && orient(a, b, p) > 0.0 {
                    winding += 1;
                }
            } else if b.y <= p.y && orient(a, b, p) < 0.0 {
                winding -= 1;
            }
        }
        if winding != 0 {
            PointLocation::Inside
        } else {
            PointLocation::Outside
        }
    }

    /// Location with a boundary band of width [`Polygon::eps`].
    pub fn locate(&self, p: Point) -> PointLocation {
        match self.locate_exact(p) {
            PointLocation::Boundary => PointLocation::Boundary,
            loc => {
                if self.boundary_distance(p) <= self.eps {
                    PointLocation::Boundary
                } else {
                    loc
                }
            }
        }
    }

    /// Inside or on the boundary, with tolerance.
    pub fn contains(&self, p: Point) -> bool {
        self.locate(p) != PointLocation::Outside
    }

    /// First point where the ray from `origin` along unit `dir` leaves the polygon,
    /// searched up to `max_len`. Returns the travelled distance.
    pub fn ray_exit(&self, origin: Point, dir: Point, max_len: f64) -> f64 {
        let n = self.len();
        let span = dir * max_len;
        let end = origin + span;
        let mut ts: Vec<f64> = Vec::new();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if segment_contact(origin, end, a, b) == SegmentContact::Disjoint {
                continue;
            }
            let e = b - a;
            let denom = span.cross(e);
            if denom.abs() <= 1e-14 * span.norm() * e.norm() {
                for v in [a, b] {
                    let t = (v - origin).dot(span) / span.dot(span);
                    if (0.0..=1.0).contains(&t) {
                        ts.push(t);
                    }
                }
            } else {
                let t = (a - origin).cross(e) / denom;
                ts.push(t.clamp(0.0, 1.0));
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        let mut prev = 0.0;
        for &t in ts.iter().chain(std::iter::once(&1.0)) {
            if t - prev <= 1e-12 {
                continue;
            }
            let mid = origin + span * ((prev + t) * 0.5);
            if self.locate(mid) == PointLocation::Outside {
                return prev * max_len;
            }
            prev = t;
        }
        max_len
    }
}

pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut s = 0.0;
    for i in 0..n {
        s += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * s
}

/// Drops near-duplicate and collinear vertices (within `tol`) from a closed ring.
pub fn simplify_ring(ring: &[Point], tol: f64) -> Vec<Point> {
    if ring.len() <= 3 {
        return ring.to_vec();
    }
    // Start from the lexicographically smallest vertex, which is a true corner.
    let start = (0..ring.len())
        .min_by(|&i, &j| (ring[i].x, ring[i].y).partial_cmp(&(ring[j].x, ring[j].y)).unwrap())
        .unwrap_or(0);
    let mut pts: Vec<Point> = ring[start..].iter().chain(&ring[..start]).copied().collect();
    loop {
        let m = pts.len();
        let mut out: Vec<Point> = vec![pts[0]];
        for i in 1..m {
            let prev = *out.last().unwrap_or(&pts[0]);
            let cur = pts[i];
            let next = if i + 1 < m { pts[i + 1] } else { out[0] };
            let s = super::point::Segment::new(prev, next);
            let t = s.closest_param(cur);
            let redundant = cur.dist(prev) <= tol
                || (s.length() > tol && s.distance_to(cur) <= tol && t > 0.0 && t < 1.0);
            if !redundant || out.len() + (m - i) <= 3 {
                out.push(cur);
            }
        }
        if out.len() == m || out.len() <= 3 {
            return out;
        }
        pts = out;
    }
}

fn check_simple(v: &[Point]) -> Result<(), GeometryError> {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in i + 1..n {
            let (c, d) = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let bad = if adjacent {
                // Shared vertex; any further contact means folding back.
                let (shared, x, y) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                orient(x, shared, y) == 0.0 && (x - shared).dot(y - shared) > 0.0
            } else {
                segment_contact(a, b, c, d) != SegmentContact::Disjoint
            };
            if bad {
                return Err(GeometryError::SelfIntersection { first: i, second: j });
            }
        }
    }
    Ok(())
}
