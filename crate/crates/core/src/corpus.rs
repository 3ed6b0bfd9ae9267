//! Seeded random simple polygons and small hand-made shapes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::predicates::{segment_contact, SegmentContact};
use crate::geometry::{Point, Polygon};

/// Side of the square the random vertices are drawn from.
pub const CORPUS_EXTENT: f64 = 10.0;

/// Random simple polygon with `n` vertices: random points untangled by 2-opt moves,
/// rejected while any vertex comes too close to a non-incident edge.
pub fn random_polygon(n: usize, seed: u64) -> Polygon {
    assert!(n >= 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 48));
    let clearance = 0.25 * CORPUS_EXTENT / (n as f64).sqrt() * 0.2;
    loop {
        let pts = sample_points(&mut rng, n, clearance * 2.0);
        let ring = untangle(pts);
        if min_clearance(&ring) < clearance {
            continue;
        }
        if let Ok(p) = Polygon::new(ring) {
            return p;
        }
    }
}

/// `count` polygons with vertex counts drawn uniformly from `n_min..=n_max`.
pub fn random_corpus(count: usize, n_min: usize, n_max: usize, seed: u64) -> Vec<Polygon> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(n_min..=n_max);
            random_polygon(n, rng.random())
        })
        .collect()
}

fn sample_points(rng: &mut ChaCha8Rng, n: usize, spacing: f64) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = Point::new(
            rng.random::<f64>() * CORPUS_EXTENT,
            rng.random::<f64>() * CORPUS_EXTENT,
        );
        if pts.iter().all(|q| q.dist(p) >= spacing) {
            pts.push(p);
        }
    }
    pts
}

fn untangle(mut ring: Vec<Point>) -> Vec<Point> {
    let n = ring.len();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (ring[i], ring[i + 1]);
                let (c, d) = (ring[j], ring[(j + 1) % n]);
                if segment_contact(a, b, c, d) != SegmentContact::Disjoint {
                    ring[i + 1..=j].reverse();
                    changed = true;
                }
            }
        }
        if !changed {
            return ring;
        }
    }
}

fn min_clearance(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut best = f64::INFINITY;
    for (v, &p) in ring.iter().enumerate() {
        for e in 0..n {
            if e == v || (e + 1) % n == v {
                continue;
            }
            let s = crate::geometry::Segment::new(ring[e], ring[(e + 1) % n]);
            best = best.min(s.distance_to(p));
        }
    }
    best
}

pub fn polygon_from(pts: &[(f64, f64)]) -> Polygon {
    Polygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).expect("valid fixture")
}

pub fn square(side: f64) -> Polygon {
    polygon_from(&[(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)])
}

/// Regular convex polygon with `n` vertices on a circle of radius `r`.
pub fn regular(n: usize, r: f64) -> Polygon {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            (r * a.cos(), r * a.sin())
        })
        .collect();
    polygon_from(&pts)
}

pub fn l_shape() -> Polygon {
    polygon_from(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])
}

pub fn u_shape() -> Polygon {
    polygon_from(&[
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

/// Comb with `teeth` rectangular teeth rising from a base strip.
pub fn comb(teeth: usize) -> Polygon {
    let mut pts = vec![(0.0, 0.0), (2.0 * teeth as f64 - 1.0, 0.0)];
    for k in (0..teeth).rev() {
        let x0 = 2.0 * k as f64;
        pts.push((x0 + 1.0, 3.0));
        pts.push((x0, 3.0));
        if k > 0 {
            pts.push((x0, 1.0));
            pts.push((x0 - 1.0, 1.0));
        }
    }
    polygon_from(&pts)
}

/// 19-vertex polygon deployed with 3 diagonal guards and 2 vertex guards whose
/// staircase has two steps.
pub fn example_one() -> Polygon {
    fixture(include_str!("../data/example1.json"))
}

/// 48-vertex polygon with 9 diagonal guards and 5 vertex guards activated at five
/// distinct thresholds.
pub fn example_two() -> Polygon {
    fixture(include_str!("../data/example2.json"))
}

fn fixture(text: &str) -> Polygon {
    Polygon::from_json(text).expect("bundled fixture is valid").polygon
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_simple() {
        for n in [5, 12, 30, 60] {
            let a = random_polygon(n, 7);
            let b = random_polygon(n, 7);
            assert_eq!(a, b);
            assert_eq!(a.len(), n);
            assert!(a.area() > 0.0);
        }
    }

    #[test]
    fn comb_is_simple() {
        let c = comb(4);
        assert_eq!(c.len(), 4 * 4);
        assert!(c.area() > 0.0);
    }
}
