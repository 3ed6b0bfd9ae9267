//! Orientation and incidence predicates on top of adaptive-precision `orient2d`.

use robust::Coord;

use super::point::Point;

fn coord(p: Point) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Twice the signed area of `abc`; positive when counter-clockwise. Sign is exact.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

pub fn orient_sign(a: Point, b: Point, c: Point) -> i8 {
    let o = orient(a, b, c);
    if o > 0.0 {
        1
    } else if o < 0.0 {
        -1
    } else {
        0
    }
}

/// `p` lies on the closed segment `ab` (exact).
pub fn on_segment(p: Point, a: Point, b: Point) -> bool {
    orient_sign(a, b, p) == 0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentContact {
    Disjoint,
    /// Interiors cross at a single point.
    Proper,
    /// Closed segments meet, but not as a proper crossing.
    Touch,
}

pub fn segment_contact(p: Point, q: Point, a: Point, b: Point) -> SegmentContact {
    let o1 = orient_sign(p, q, a);
    let o2 = orient_sign(p, q, b);
    let o3 = orient_sign(a, b, p);
    let o4 = orient_sign(a, b, q);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return SegmentContact::Proper;
    }
    if (o1 == 0 && on_segment(a, p, q))
        || (o2 == 0 && on_segment(b, p, q))
        || (o3 == 0 && on_segment(p, a, b))
        || (o4 == 0 && on_segment(q, a, b))
    {
        return SegmentContact::Touch;
    }
    SegmentContact::Disjoint
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

/// Exact containment of `p` in the counter-clockwise triangle `abc`.
pub fn triangle_containment(p: Point, a: Point, b: Point, c: Point) -> Containment {
    let s = [orient_sign(a, b, p), orient_sign(b, c, p), orient_sign(c, a, p)];
    if s.iter().any(|&x| x < 0) {
        Containment::Outside
    } else if s.contains(&0) {
        Containment::Boundary
    } else {
        Containment::Inside
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn orientation_signs() {
        assert_eq!(orient_sign(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)), 1);
        assert_eq!(orient_sign(p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0)), -1);
        assert_eq!(orient_sign(p(0.0, 0.0), p(1.0, 1.0), p(3.0, 3.0)), 0);
    }

    #[test]
    fn contacts() {
        let (a, b) = (p(0.0, 0.0), p(2.0, 2.0));
        assert_eq!(segment_contact(a, b, p(0.0, 2.0), p(2.0, 0.0)), SegmentContact::Proper);
        assert_eq!(segment_contact(a, b, p(1.0, 1.0), p(2.0, 0.0)), SegmentContact::Touch);
        assert_eq!(segment_contact(a, b, p(3.0, 3.0), p(4.0, 4.0)), SegmentContact::Disjoint);
        assert_eq!(segment_contact(a, b, p(1.0, 1.0), p(3.0, 3.0)), SegmentContact::Touch);
    }

    #[test]
    fn triangle_cases() {
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
        assert_eq!(triangle_containment(p(0.2, 0.2), a, b, c), Containment::Inside);
        assert_eq!(triangle_containment(p(0.5, 0.0), a, b, c), Containment::Boundary);
        assert_eq!(triangle_containment(p(1.0, 1.0), a, b, c), Containment::Outside);
    }
}
