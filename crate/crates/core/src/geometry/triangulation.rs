use std::collections::BTreeMap;

use serde::Serialize;

use super::point::Point;
use super::polygon::{PointLocation, Polygon};
use super::predicates::{orient, triangle_containment, Containment};
use super::GeometryError;

/// Sorted vertex pair.
pub type Edge = (usize, usize);

pub fn edge_key(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Triangulation of a simple polygon with its dual tree.
#[derive(Clone, Debug, Serialize)]
pub struct TriangulationGraph {
    n: usize,
    /// Counter-clockwise vertex triples, numbered in clipping order.
    triangles: Vec<[usize; 3]>,
    /// Interior diagonals, sorted.
    diagonals: Vec<Edge>,
    #[serde(skip)]
    edge_triangles: BTreeMap<Edge, Vec<usize>>,
    #[serde(skip)]
    vertex_triangles: Vec<Vec<usize>>,
    #[serde(skip)]
    dual: DualTree,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DualTree {
    /// One edge per diagonal: the two triangles it separates, lower id first.
    pub edges: Vec<DualEdge>,
    /// For each triangle, indices into `edges`.
    pub adjacency: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DualEdge {
    pub a: usize,
    pub b: usize,
    pub diagonal: Edge,
}

impl DualTree {
    pub fn neighbors(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[t].iter().map(move |&e| {
            let de = self.edges[e];
            if de.a == t {
                de.b
            } else {
                de.a
            }
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }
}

/// Ear clipping; the ear at the lowest remaining vertex index is clipped first.
pub fn triangulate(polygon: &Polygon) -> Result<TriangulationGraph, GeometryError> {
    let n = polygon.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices(n));
    }
    let v = polygon.vertices();
    let mut ring: Vec<usize> = (0..n).collect();
    let mut triangles = Vec::with_capacity(n - 2);
    while ring.len() > 3 {
        let m = ring.len();
        let ear = (0..m).find(|&j| {
            let (a, b, c) = (ring[(j + m - 1) % m], ring[j], ring[(j + 1) % m]);
            if orient(v[a], v[b], v[c]) <= 0.0 {
                return false;
            }
            ring.iter().all(|&w| {
                w == a
                    || w == b
                    || w == c
                    || triangle_containment(v[w], v[a], v[b], v[c]) == Containment::Outside
            })
        });
        let Some(j) = ear else {
            return Err(GeometryError::Degenerate("no ear found".into()));
        };
        triangles.push([ring[(j + m - 1) % m], ring[j], ring[(j + 1) % m]]);
        ring.remove(j);
    }
    triangles.push([ring[0], ring[1], ring[2]]);
    Ok(TriangulationGraph::from_triangles(n, triangles))
}

impl TriangulationGraph {
    /// Builds adjacency from counter-clockwise triangles of an `n`-gon.
    pub fn from_triangles(n: usize, triangles: Vec<[usize; 3]>) -> Self {
        let mut edge_triangles: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
        let mut vertex_triangles = vec![Vec::new(); n];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                edge_triangles
                    .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                    .or_default()
                    .push(t);
                vertex_triangles[tri[k]].push(t);
            }
        }
        let diagonals: Vec<Edge> = edge_triangles
            .iter()
            .filter(|(_, ts)| ts.len() == 2)
            .map(|(&e, _)| e)
            .collect();
        let mut dual = DualTree {
            edges: Vec::with_capacity(diagonals.len()),
            adjacency: vec![Vec::new(); triangles.len()],
        };
        for &d in &diagonals {
            let ts = &edge_triangles[&d];
            let (a, b) = (ts[0].min(ts[1]), ts[0].max(ts[1]));
            let id = dual.edges.len();
            dual.edges.push(DualEdge { a, b, diagonal: d });
            dual.adjacency[a].push(id);
            dual.adjacency[b].push(id);
        }
        Self {
            n,
            triangles,
            diagonals,
            edge_triangles,
            vertex_triangles,
            dual,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn diagonals(&self) -> &[Edge] {
        &self.diagonals
    }

    /// Boundary edges and diagonals, sorted.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edge_triangles.keys().copied()
    }

    pub fn is_diagonal(&self, e: Edge) -> bool {
        self.edge_triangles.get(&e).is_some_and(|t| t.len() == 2)
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edge_triangles.contains_key(&e)
    }

    pub fn edge_triangles(&self, e: Edge) -> &[usize] {
        self.edge_triangles.get(&e).map_or(&[], |v| v.as_slice())
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    pub fn triangle_has_vertex(&self, t: usize, v: usize) -> bool {
        self.triangles[t].contains(&v)
    }

    pub fn triangle_has_edge(&self, t: usize, e: Edge) -> bool {
        let tri = self.triangles[t];
        tri.contains(&e.0) && tri.contains(&e.1)
    }

    pub fn triangle_edges(&self, t: usize) -> [Edge; 3] {
        let [a, b, c] = self.triangles[t];
        [edge_key(a, b), edge_key(b, c), edge_key(c, a)]
    }

    pub fn dual(&self) -> &DualTree {
        &self.dual
    }

    pub fn triangle_points(&self, polygon: &Polygon, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [polygon.vertex(a), polygon.vertex(b), polygon.vertex(c)]
    }

    pub fn centroid(&self, polygon: &Polygon, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(polygon, t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Every triangle containing `p` (closed), in id order.
    pub fn containing(&self, polygon: &Polygon, p: Point) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&t| {
                let [a, b, c] = self.triangle_points(polygon, t);
                triangle_containment(p, a, b, c) != Containment::Outside
            })
            .collect()
    }

    /// Lowest-id triangle containing `p`. Points within the boundary tolerance that
    /// fall between triangles snap to the nearest one.
    pub fn locate(&self, polygon: &Polygon, p: Point) -> Result<usize, GeometryError> {
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(polygon, t);
            if triangle_containment(p, a, b, c) != Containment::Outside {
                return Ok(t);
            }
        }
        if polygon.locate(p) == PointLocation::Outside {
            return Err(GeometryError::PointOutside(p));
        }
        let mut best = (f64::INFINITY, 0);
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(polygon, t);
            let d = [(a, b), (b, c), (c, a)]
                .iter()
                .map(|&(u, w)| super::point::Segment::new(u, w).distance_to(p))
                .fold(f64::INFINITY, f64::min);
            if d < best.0 {
                best = (d, t);
            }
        }
        Ok(best.1)
    }
}

/// Dual tree of a triangulation.
pub fn dual_graph(tri: &TriangulationGraph) -> &DualTree {
    tri.dual()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[(f64, f64)]) -> Polygon {
        Polygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn quad_has_two_triangles() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let t = triangulate(&p).unwrap();
        assert_eq!(t.triangle_count(), 2);
        assert_eq!(t.diagonals().len(), 1);
        assert_eq!(t.dual().edges.len(), 1);
    }

    #[test]
    fn single_triangle() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let t = triangulate(&p).unwrap();
        assert_eq!(t.triangle_count(), 1);
        assert!(t.diagonals().is_empty());
        assert_eq!(t.dual().node_count(), 1);
    }

    #[test]
    fn lowest_index_ear_first() {
        let p = poly(&[(0.0, 0.0), (2.0, 0.0), (3.0, 1.0), (2.0, 2.0), (0.0, 2.0)]);
        let t = triangulate(&p).unwrap();
        assert_eq!(t.triangle(0), [4, 0, 1]);
    }

    #[test]
    fn locate_tie_breaks_low() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let t = triangulate(&p).unwrap();
        let d = t.diagonals()[0];
        let mid = p.vertex(d.0).lerp(p.vertex(d.1), 0.5);
        assert_eq!(t.locate(&p, mid).unwrap(), 0);
        for k in 0..2 {
            assert_eq!(t.locate(&p, t.centroid(&p, k)).unwrap(), k);
        }
        assert!(matches!(
            t.locate(&p, Point::new(2.0, 2.0)),
            Err(GeometryError::PointOutside(_))
        ));
    }
}
