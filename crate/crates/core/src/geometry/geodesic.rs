use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use super::point::{Point, Segment};
use super::polygon::{PointLocation, Polygon};
use super::region::Region;
use super::visibility::{visibility_ring, visible};
use super::GeometryError;

/// Shortest paths inside a polygon via the visibility graph of its reflex vertices.
#[derive(Debug)]
pub struct GeodesicIndex {
    polygon: Polygon,
    reflex: Vec<usize>,
    /// `k x k` reflex-to-reflex visibility.
    see: Vec<bool>,
    /// `k x k` shortest path lengths between reflex vertices.
    apsp: Vec<f64>,
    vertex_vis: Vec<OnceLock<Region>>,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl GeodesicIndex {
    pub fn new(polygon: &Polygon) -> Self {
        let reflex = polygon.reflex_vertices();
        let k = reflex.len();
        let mut see = vec![false; k * k];
        for i in 0..k {
            see[i * k + i] = true;
            for j in i + 1..k {
                let s = visible(polygon, polygon.vertex(reflex[i]), polygon.vertex(reflex[j]));
                see[i * k + j] = s;
                see[j * k + i] = s;
            }
        }
        let mut index = Self {
            polygon: polygon.clone(),
            reflex,
            see,
            apsp: Vec::new(),
            vertex_vis: (0..polygon.len()).map(|_| OnceLock::new()).collect(),
        };
        let mut apsp = vec![f64::INFINITY; k * k];
        for s in 0..k {
            let mut init = vec![f64::INFINITY; k];
            init[s] = 0.0;
            let d = index.relax(init);
            apsp[s * k..(s + 1) * k].copy_from_slice(&d);
        }
        index.apsp = apsp;
        index
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn reflex(&self) -> &[usize] {
        &self.reflex
    }

    pub fn reflex_point(&self, i: usize) -> Point {
        self.polygon.vertex(self.reflex[i])
    }

    /// Dijkstra over the reflex visibility graph from initial labels.
    fn relax(&self, mut dist: Vec<f64>) -> Vec<f64> {
        let k = self.reflex.len();
        let mut heap: BinaryHeap<Item> = dist
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_finite())
            .map(|(i, &d)| Item(d, i))
            .collect();
        let mut done = vec![false; k];
        while let Some(Item(d, u)) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            let pu = self.reflex_point(u);
            for w in 0..k {
                if w != u && !done[w] && self.see[u * k + w] {
                    let nd = d + pu.dist(self.reflex_point(w));
                    if nd < dist[w] {
                        dist[w] = nd;
                        heap.push(Item(nd, w));
                    }
                }
            }
        }
        dist
    }

    pub fn visible(&self, p: Point, q: Point) -> bool {
        visible(&self.polygon, p, q)
    }

    /// Distances from `p` to every reflex vertex it sees directly.
    fn visible_reflex(&self, p: Point) -> Vec<(usize, f64)> {
        (0..self.reflex.len())
            .filter_map(|i| {
                let r = self.reflex_point(i);
                self.visible(p, r).then(|| (i, p.dist(r)))
            })
            .collect()
    }

    /// Geodesic distance without endpoint validation.
    pub fn distance(&self, p: Point, q: Point) -> f64 {
        if self.visible(p, q) {
            return p.dist(q);
        }
        let k = self.reflex.len();
        let from_p = self.visible_reflex(p);
        let from_q = self.visible_reflex(q);
        let mut best = f64::INFINITY;
        for &(u, du) in &from_p {
            for &(w, dw) in &from_q {
                best = best.min(du + self.apsp[u * k + w] + dw);
            }
        }
        best
    }

    /// Vertices of a shortest path from `p` to `q`.
    pub fn shortest_path(&self, p: Point, q: Point) -> Vec<Point> {
        if self.visible(p, q) {
            return vec![p, q];
        }
        let k = self.reflex.len();
        let mut init = vec![f64::INFINITY; k];
        for (u, du) in self.visible_reflex(p) {
            init[u] = du;
        }
        let dist = self.relax(init.clone());
        let mut best = (f64::INFINITY, usize::MAX);
        for (w, dw) in self.visible_reflex(q) {
            if dist[w] + dw < best.0 {
                best = (dist[w] + dw, w);
            }
        }
        if best.1 == usize::MAX {
            return vec![p, q];
        }
        let mut path = vec![q];
        let mut cur = best.1;
        loop {
            let pc = self.reflex_point(cur);
            path.push(pc);
            if (init[cur] - dist[cur]).abs() <= 1e-12 * (1.0 + dist[cur]) {
                break;
            }
            let prev = (0..k).find(|&u| {
                u != cur
                    && self.see[u * k + cur]
                    && (dist[u] + self.reflex_point(u).dist(pc) - dist[cur]).abs()
                        <= 1e-9 * (1.0 + dist[cur])
            });
            match prev {
                Some(u) => cur = u,
                None => break,
            }
        }
        path.push(p);
        path.reverse();
        path
    }

    /// Cached visibility region of polygon vertex `v`.
    pub fn vertex_visibility(&self, v: usize) -> &Region {
        self.vertex_vis[v]
            .get_or_init(|| Region::from_ring(&visibility_ring(&self.polygon, self.polygon.vertex(v))))
    }
}

/// Geodesic distance inside the polygon.
pub fn geodesic_distance(polygon: &Polygon, p: Point, q: Point) -> Result<f64, GeometryError> {
    for x in [p, q] {
        if polygon.locate(x) == PointLocation::Outside {
            return Err(GeometryError::PointOutside(x));
        }
    }
    Ok(GeodesicIndex::new(polygon).distance(p, q))
}

/// Geodesic distance field to a set of source segments.
#[derive(Clone, Debug)]
pub struct SourceField {
    segments: Vec<Segment>,
    /// Geodesic distance from each reflex vertex to the source.
    reflex_dist: Vec<f64>,
}

impl SourceField {
    pub fn new(index: &GeodesicIndex, segments: Vec<Segment>) -> Self {
        let k = index.reflex.len();
        let mut init = vec![f64::INFINITY; k];
        for (i, slot) in init.iter_mut().enumerate() {
            *slot = direct(index, &segments, index.reflex_point(i));
        }
        let reflex_dist = index.relax(init);
        Self {
            segments,
            reflex_dist,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn reflex_dist(&self) -> &[f64] {
        &self.reflex_dist
    }

    /// Geodesic distance from `x` to the nearest source point.
    pub fn distance(&self, index: &GeodesicIndex, x: Point) -> f64 {
        if self.segments.is_empty() {
            return f64::INFINITY;
        }
        let mut order: Vec<(f64, usize)> = self
            .segments
            .iter()
            .enumerate()
            .map(|(i, s)| (s.distance_to(x), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let lower = order[0].0;
        let mut best = f64::INFINITY;
        for &(e, i) in &order {
            if e >= best {
                break;
            }
            let s = &self.segments[i];
            for y in candidates(s, x) {
                let d = x.dist(y);
                if d < best && reaches(index, x, y) {
                    best = d;
                }
            }
            if best <= lower {
                return best;
            }
        }
        for (i, &g) in self.reflex_dist.iter().enumerate() {
            if !g.is_finite() {
                continue;
            }
            let r = index.reflex_point(i);
            let d = x.dist(r) + g;
            if d < best && index.visible(x, r) {
                best = d;
            }
        }
        best
    }
}

/// Points of `s` through which a straight path from `x` can reach it optimally.
fn candidates(s: &Segment, x: Point) -> impl Iterator<Item = Point> {
    let foot = s.closest_point(x);
    [foot, s.a, s.b].into_iter()
}

/// Visibility of a source point `y` from `x`, accepting source points that sit
/// within the boundary tolerance outside the polygon.
fn reaches(index: &GeodesicIndex, x: Point, y: Point) -> bool {
    if index.visible(x, y) {
        return true;
    }
    let d = x.dist(y);
    let eps = index.polygon().eps();
    if d <= eps {
        return true;
    }
    index.visible(x, y + (x - y) * (eps / d))
}

fn direct(index: &GeodesicIndex, segments: &[Segment], x: Point) -> f64 {
    let mut best = f64::INFINITY;
    for s in segments {
        for y in candidates(s, x) {
            let d = x.dist(y);
            if d < best && reaches(index, x, y) {
                best = d;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[(f64, f64)]) -> Polygon {
        Polygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn u_shape() -> Polygon {
        poly(&[
            (0.0, 0.0),
            (3.0, 0.0),
            (3.0, 3.0),
            (2.0, 3.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 3.0),
            (0.0, 3.0),
        ])
    }

    #[test]
    fn visible_pair_is_euclidean() {
        let p = u_shape();
        let g = GeodesicIndex::new(&p);
        let (a, b) = (Point::new(0.5, 0.5), Point::new(2.5, 0.5));
        assert!((g.distance(a, b) - 2.0).abs() < 1e-12);
        assert_eq!(g.distance(a, a), 0.0);
    }

    #[test]
    fn u_shape_bends_around_both_corners() {
        let p = u_shape();
        let g = GeodesicIndex::new(&p);
        let (a, b) = (Point::new(0.5, 2.5), Point::new(2.5, 2.5));
        let expect = 2.0 * Point::new(0.5, 2.5).dist(Point::new(1.0, 1.0)) + 1.0;
        assert!((g.distance(a, b) - expect).abs() < 1e-9);
        let path = g.shortest_path(a, b);
        assert_eq!(path.len(), 4);
        assert_eq!(path[1], Point::new(1.0, 1.0));
        assert_eq!(path[2], Point::new(2.0, 1.0));
    }

    #[test]
    fn segment_source_field() {
        let p = u_shape();
        let g = GeodesicIndex::new(&p);
        // Top of the left arm.
        let f = SourceField::new(&g, vec![Segment::new(Point::new(0.0, 2.0), Point::new(1.0, 2.0))]);
        assert!((f.distance(&g, Point::new(0.5, 1.5)) - 0.5).abs() < 1e-12);
        let x = Point::new(2.5, 2.5);
        let expect = 1.0 + Point::new(2.0, 1.0).dist(x) + 1.0;
        assert!((f.distance(&g, x) - expect).abs() < 1e-9);
    }
}
