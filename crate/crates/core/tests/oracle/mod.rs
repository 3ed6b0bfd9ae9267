//! Grid-graph oracles written against plain coordinates, sharing nothing with
//! the library geometry beyond the `Point` type.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use polyguard_core::Point;

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Polygon edges bucketed on a coarse grid for fast crossing queries.
pub struct Walls {
    pts: Vec<Point>,
    min: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl Walls {
    pub fn new(pts: &[Point]) -> Self {
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let cell = ((hi.x - lo.x).max(hi.y - lo.y) / 48.0).max(1e-9);
        let nx = ((hi.x - lo.x) / cell) as usize + 1;
        let ny = ((hi.y - lo.y) / cell) as usize + 1;
        let mut w = Self {
            pts: pts.to_vec(),
            min: lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            for c in w.cells(a, b) {
                w.buckets[c].push(i);
            }
        }
        w
    }

    fn cells(&self, a: Point, b: Point) -> Vec<usize> {
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        let x0 = clamp(((a.x.min(b.x)) - self.min.x) / self.cell, self.nx);
        let x1 = clamp(((a.x.max(b.x)) - self.min.x) / self.cell, self.nx);
        let y0 = clamp(((a.y.min(b.y)) - self.min.y) / self.cell, self.ny);
        let y1 = clamp(((a.y.max(b.y)) - self.min.y) / self.cell, self.ny);
        let mut out = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                out.push(y * self.nx + x);
            }
        }
        out
    }

    pub fn points(&self) -> &[Point] {
        &self.pts
    }

    /// Even-odd ray casting.
    pub fn inside(&self, p: Point) -> bool {
        let n = self.pts.len();
        let mut c = false;
        for i in 0..n {
            let (a, b) = (self.pts[i], self.pts[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    c = !c;
                }
            }
        }
        c
    }

    /// No polygon edge properly crosses the segment.
    pub fn clear(&self, a: Point, b: Point) -> bool {
        let n = self.pts.len();
        let mut seen: Vec<usize> = Vec::new();
        for c in self.cells(a, b) {
            for &i in &self.buckets[c] {
                if seen.contains(&i) {
                    continue;
                }
                seen.push(i);
                let (c, d) = (self.pts[i], self.pts[(i + 1) % n]);
                let o1 = orient(a, b, c);
                let o2 = orient(a, b, d);
                let o3 = orient(c, d, a);
                let o4 = orient(c, d, b);
                if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                    return false;
                }
            }
        }
        true
    }

    /// Like [`Walls::clear`], ignoring crossings within `tol` of either endpoint.
    pub fn sees(&self, a: Point, b: Point, tol: f64) -> bool {
        let n = self.pts.len();
        let mut seen: Vec<usize> = Vec::new();
        for c in self.cells(a, b) {
            for &i in &self.buckets[c] {
                if seen.contains(&i) {
                    continue;
                }
                seen.push(i);
                let (c, d) = (self.pts[i], self.pts[(i + 1) % n]);
                let o1 = orient(a, b, c);
                let o2 = orient(a, b, d);
                let o3 = orient(c, d, a);
                let o4 = orient(c, d, b);
                if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                    let t = o3 / (o3 - o4);
                    let x = a.lerp(b, t);
                    if x.dist(a) > tol && x.dist(b) > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn area(&self) -> f64 {
        let n = self.pts.len();
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (self.pts[i], self.pts[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            .abs()
    }
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

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Lattice of cell centres inside the polygon plus its reflex vertices, joined
/// along 48 directions (primitive offsets up to 4 cells).
pub struct Grid {
    pub walls: Walls,
    pub h: f64,
    origin: Point,
    nx: usize,
    ny: usize,
    cell_node: Vec<usize>,
    pos: Vec<Point>,
    cell_of: Vec<(i64, i64)>,
    offsets: Vec<(i64, i64)>,
    links: Vec<u64>,
    extra: HashMap<usize, Vec<(usize, f64)>>,
    grid_nodes: usize,
}

const K: i64 = 4;

impl Grid {
    pub fn new(pts: &[Point], h: f64) -> Self {
        let walls = Walls::new(pts);
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let nx = ((hi.x - lo.x) / h).ceil() as usize + 1;
        let ny = ((hi.y - lo.y) / h).ceil() as usize + 1;
        let origin = Point::new(lo.x + 0.5 * h, lo.y + 0.5 * h);
        let mut offsets = Vec::new();
        for dy in -K..=K {
            for dx in -K..=K {
                if (dx, dy) != (0, 0) && gcd(dx, dy) == 1 {
                    offsets.push((dx, dy));
                }
            }
        }
        assert!(offsets.len() <= 64);
        let mut cell_node = vec![usize::MAX; nx * ny];
        let mut pos = Vec::new();
        let mut cell_of = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let p = Point::new(origin.x + ix as f64 * h, origin.y + iy as f64 * h);
                if walls.inside(p) {
                    cell_node[iy * nx + ix] = pos.len();
                    pos.push(p);
                    cell_of.push((ix as i64, iy as i64));
                }
            }
        }
        let grid_nodes = pos.len();
        let mut g = Self {
            walls,
            h,
            origin,
            nx,
            ny,
            cell_node,
            pos,
            cell_of,
            offsets,
            links: Vec::new(),
            extra: HashMap::new(),
            grid_nodes,
        };
        g.links = (0..grid_nodes)
            .map(|u| {
                let (ix, iy) = g.cell_of[u];
                let mut mask = 0u64;
                for (k, &(dx, dy)) in g.offsets.iter().enumerate() {
                    if let Some(v) = g.node_at(ix + dx, iy + dy) {
                        if g.walls.clear(g.pos[u], g.pos[v]) {
                            mask |= 1 << k;
                        }
                    }
                }
                mask
            })
            .collect();
        // Reflex vertices as extra nodes.
        let n = pts.len();
        let ccw = orient_sum(pts) > 0.0;
        for i in 0..n {
            let (a, b, c) = (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
            let turn = orient(a, b, c);
            if (ccw && turn < 0.0) || (!ccw && turn > 0.0) {
                let id = g.pos.len();
                g.pos.push(b);
                for (v, d) in g.near(b) {
                    g.extra.entry(id).or_default().push((v, d));
                    g.extra.entry(v).or_default().push((id, d));
                }
            }
        }
        g
    }

    fn node_at(&self, ix: i64, iy: i64) -> Option<usize> {
        if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
            return None;
        }
        let v = self.cell_node[iy as usize * self.nx + ix as usize];
        (v != usize::MAX).then_some(v)
    }

    /// Grid nodes within `K + 1` cells of `p` with a clear segment to it.
    fn near(&self, p: Point) -> Vec<(usize, f64)> {
        let cx = ((p.x - self.origin.x) / self.h).round() as i64;
        let cy = ((p.y - self.origin.y) / self.h).round() as i64;
        let r = K + 1;
        let mut out = Vec::new();
        for iy in cy - r..=cy + r {
            for ix in cx - r..=cx + r {
                if let Some(v) = self.node_at(ix, iy) {
                    let q = self.pos[v];
                    let d = p.dist(q);
                    if d <= r as f64 * self.h && self.walls.clear(p, q) {
                        out.push((v, d));
                    }
                }
            }
        }
        out
    }

    fn neighbors(&self, u: usize, mut f: impl FnMut(usize, f64)) {
        if u < self.grid_nodes {
            let (ix, iy) = self.cell_of[u];
            let mask = self.links[u];
            for (k, &(dx, dy)) in self.offsets.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    let v = self.node_at(ix + dx, iy + dy).unwrap();
                    f(v, self.h * ((dx * dx + dy * dy) as f64).sqrt());
                }
            }
        }
        if let Some(list) = self.extra.get(&u) {
            for &(v, d) in list {
                f(v, d);
            }
        }
    }

    /// Shortest grid-graph path length between two interior points, or `None`
    /// when either point cannot reach the lattice.
    pub fn distance(&self, p: Point, q: Point) -> Option<f64> {
        if self.walls.clear(p, q) && self.walls.inside(p.lerp(q, 0.5)) {
            return Some(p.dist(q));
        }
        let targets: HashMap<usize, f64> = self.near(q).into_iter().collect();
        if targets.is_empty() {
            return None;
        }
        let mut dist = vec![f64::INFINITY; self.pos.len()];
        let mut heap = BinaryHeap::new();
        for (v, d) in self.near(p) {
            dist[v] = d;
            heap.push(Item(d, v));
        }
        let mut best = f64::INFINITY;
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if d >= best {
                break;
            }
            if let Some(&t) = targets.get(&u) {
                best = best.min(d + t);
            }
            self.neighbors(u, |v, w| {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            });
        }
        best.is_finite().then_some(best)
    }

    /// Grid-graph distance field from a set of segments, cut off at `limit`.
    pub fn field(&self, sources: &[(Point, Point)], limit: f64) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.pos.len()];
        let mut heap = BinaryHeap::new();
        for (u, &x) in self.pos.iter().enumerate() {
            for &(a, b) in sources {
                let ab = b - a;
                let t = ((x - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
                let c = a + ab * t;
                let d = x.dist(c);
                if d < dist[u] && d <= limit && self.walls.clear(x, c) {
                    dist[u] = d;
                }
            }
            if dist[u].is_finite() {
                heap.push(Item(dist[u], u));
            }
        }
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            self.neighbors(u, |v, w| {
                let nd = d + w;
                if nd < dist[v] && nd <= limit {
                    dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            });
        }
        dist
    }

    /// Area of lattice cells whose centre satisfies `keep`, given a field.
    pub fn area_where(&self, field: &[f64], mut keep: impl FnMut(Point, f64) -> bool) -> f64 {
        (0..self.grid_nodes).filter(|&u| keep(self.pos[u], field[u])).count() as f64 * self.h * self.h
    }

    /// Field value at the lattice node of the cell containing `x`, falling back
    /// to the closest node in the surrounding block.
    pub fn value_at(&self, field: &[f64], x: Point) -> f64 {
        let cx = ((x.x - self.origin.x) / self.h).round() as i64;
        let cy = ((x.y - self.origin.y) / self.h).round() as i64;
        let mut best = (f64::INFINITY, f64::INFINITY);
        for iy in cy - 2..=cy + 2 {
            for ix in cx - 2..=cx + 2 {
                if let Some(v) = self.node_at(ix, iy) {
                    let d = self.pos[v].dist(x);
                    if d < best.0 {
                        best = (d, field[v]);
                    }
                }
            }
        }
        best.1
    }

    pub fn grid_nodes(&self) -> usize {
        self.grid_nodes
    }

    pub fn node(&self, u: usize) -> Point {
        self.pos[u]
    }
}

fn orient_sum(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum()
}

/// Uniform point in the polygon by rejection from its bounding box.
pub fn sample_inside(walls: &Walls, rng: &mut impl FnMut() -> f64) -> Point {
    let pts = walls.points();
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    loop {
        let p = Point::new(lo.x + rng() * (hi.x - lo.x), lo.y + rng() * (hi.y - lo.y));
        if walls.inside(p) {
            return p;
        }
    }
}

/// Catalan-many triangulations of the convex polygon on vertices `i..=j`.
pub fn convex_triangulations(i: usize, j: usize) -> Vec<Vec<[usize; 3]>> {
    if j < i + 2 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in i + 1..j {
        for left in convex_triangulations(i, k) {
            for right in convex_triangulations(k, j) {
                let mut t = left.clone();
                t.extend(right);
                t.push([i, k, j]);
                out.push(t);
            }
        }
    }
    out
}
