use geo::{Area, BooleanOps, Contains, Coord, Intersects, LineString, MultiPolygon};
use serde::{Deserialize, Serialize};

use super::point::Point;

/// Polygonal point set made of counter-clockwise outer loops and clockwise holes.
#[derive(Clone, Debug)]
pub struct Region {
    shape: MultiPolygon<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BooleanOp {
    Intersect,
    Union,
    Difference,
}

/// Loops of a region as plain point lists (closing point omitted).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionLoops {
    pub loops: Vec<Vec<Point>>,
}

fn to_line(ring: &[Point]) -> LineString<f64> {
    LineString::new(ring.iter().map(|p| Coord { x: p.x, y: p.y }).collect())
}

impl Default for Region {
    fn default() -> Self {
        Self::empty()
    }
}

impl Region {
    pub fn empty() -> Self {
        Self {
            shape: MultiPolygon(Vec::new()),
        }
    }

    pub fn from_ring(ring: &[Point]) -> Self {
        if ring.len() < 3 {
            return Self::empty();
        }
        let poly = geo::Polygon::new(to_line(ring), vec![]);
        // A self-union normalizes orientation and resolves degeneracies.
        Self {
            shape: MultiPolygon(vec![poly.clone()]).union(&MultiPolygon::<f64>(vec![])),
        }
    }

    pub fn from_rings<'a>(rings: impl IntoIterator<Item = &'a [Point]>) -> Self {
        let parts: Vec<Region> = rings.into_iter().map(Region::from_ring).collect();
        Region::union_all(&parts)
    }

    pub fn union_all<'a>(regions: impl IntoIterator<Item = &'a Region>) -> Region {
        let mut level: Vec<Region> = regions.into_iter().filter(|r| !r.is_empty()).cloned().collect();
        while level.len() > 1 {
            level = level
                .chunks(2)
                .map(|c| match c {
                    [a, b] => a.union(b),
                    [a] => a.clone(),
                    _ => unreachable!(),
                })
                .collect();
        }
        level.pop().unwrap_or_default()
    }

    /// Same region with near-duplicate and collinear boundary vertices removed, and
    /// rings thinner than `tol` dropped.
    pub fn simplified(&self, tol: f64) -> Region {
        let polys: Vec<geo::Polygon<f64>> = self
            .shape
            .0
            .iter()
            .filter_map(|poly| {
                let ext = super::polygon::simplify_ring(&ring_points(poly.exterior(), true), tol);
                if ext.len() < 3 || sliver(&ext, tol) {
                    return None;
                }
                let holes = poly
                    .interiors()
                    .iter()
                    .map(|h| super::polygon::simplify_ring(&ring_points(h, false), tol))
                    .filter(|h| h.len() >= 3 && !sliver(h, tol))
                    .map(|h| to_line(&h))
                    .collect();
                Some(geo::Polygon::new(to_line(&ext), holes))
            })
            .collect();
        Self {
            shape: MultiPolygon(polys),
        }
    }

    pub fn area(&self) -> f64 {
        self.shape.unsigned_area()
    }

    pub fn is_empty(&self) -> bool {
        self.shape.0.is_empty()
    }

    /// Strict interior membership.
    pub fn contains(&self, p: Point) -> bool {
        self.shape.contains(&geo::Point::new(p.x, p.y))
    }

    /// Closed membership.
    pub fn touches(&self, p: Point) -> bool {
        self.shape.intersects(&geo::Point::new(p.x, p.y))
    }

    pub fn intersect(&self, o: &Region) -> Region {
        if self.is_empty() || o.is_empty() {
            return Region::empty();
        }
        Self {
            shape: self.shape.intersection(&o.shape),
        }
    }

    pub fn union(&self, o: &Region) -> Region {
        if o.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return o.clone();
        }
        Self {
            shape: self.shape.union(&o.shape),
        }
    }

    pub fn difference(&self, o: &Region) -> Region {
        if self.is_empty() || o.is_empty() {
            return self.clone();
        }
        Self {
            shape: self.shape.difference(&o.shape),
        }
    }

    pub fn boolean(&self, o: &Region, op: BooleanOp) -> Region {
        match op {
            BooleanOp::Intersect => self.intersect(o),
            BooleanOp::Union => self.union(o),
            BooleanOp::Difference => self.difference(o),
        }
    }

    /// Outer loops counter-clockwise, holes clockwise.
    pub fn loops(&self) -> Vec<Vec<Point>> {
        let mut out = Vec::new();
        for poly in &self.shape.0 {
            out.push(ring_points(poly.exterior(), true));
            for hole in poly.interiors() {
                out.push(ring_points(hole, false));
            }
        }
        out
    }

    pub fn to_loops(&self) -> RegionLoops {
        RegionLoops { loops: self.loops() }
    }

    /// All boundary segments.
    pub fn boundary_segments(&self) -> Vec<super::point::Segment> {
        let mut segs = Vec::new();
        for ring in self.loops() {
            let m = ring.len();
            for i in 0..m {
                segs.push(super::point::Segment::new(ring[i], ring[(i + 1) % m]));
            }
        }
        segs
    }

    pub fn vertex_count(&self) -> usize {
        self.loops().iter().map(Vec::len).sum()
    }

    pub fn bbox(&self) -> Option<(Point, Point)> {
        let mut it = self.shape.0.iter().flat_map(|p| p.exterior().coords());
        let first = it.next()?;
        let mut lo = Point::new(first.x, first.y);
        let mut hi = lo;
        for c in it {
            lo = Point::new(lo.x.min(c.x), lo.y.min(c.y));
            hi = Point::new(hi.x.max(c.x), hi.y.max(c.y));
        }
        Some((lo, hi))
    }
}

fn ring_points(ls: &LineString<f64>, ccw: bool) -> Vec<Point> {
    let mut pts: Vec<Point> = ls.coords().map(|c| Point::new(c.x, c.y)).collect();
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    if (super::polygon::signed_area(&pts) > 0.0) != ccw {
        pts.reverse();
    }
    pts
}

/// Regularized boolean of two regions.
/// Mean width (area over half the perimeter) at most `tol`.
fn sliver(ring: &[Point], tol: f64) -> bool {
    let n = ring.len();
    let perimeter: f64 = (0..n).map(|i| ring[i].dist(ring[(i + 1) % n])).sum();
    super::polygon::signed_area(ring).abs() <= 0.5 * tol * perimeter
}

pub fn region_boolean(a: &Region, b: &Region, op: BooleanOp) -> Region {
    a.boolean(b, op)
}
