//! Plain 2D points/vectors and the small set of geometric predicates the
//! mesher and the geometry validators rely on.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product (signed parallelogram area).
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        Point2::new(self.x / n, self.y / n)
    }

    /// Rotation by +90° (counter-clockwise).
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    pub fn mid(self, other: Point2) -> Point2 {
        self.lerp(other, 0.5)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

fn coord(p: Point2) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Exact orientation test: > 0 when `c` lies to the left of `a -> b`,
/// 0 when collinear.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

/// Exact in-circle test: > 0 when `d` is strictly inside the circumcircle of
/// the counter-clockwise triangle `a, b, c`.
pub fn incircle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    robust::incircle(coord(a), coord(b), coord(c), coord(d))
}

/// Twice the signed area of triangle `a, b, c` (positive when ccw).
pub fn signed_area2(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Squared distance from `p` to the segment `a-b`.
pub fn dist_sq_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm_sq()
}

/// Proper or touching intersection of segments `a-b` and `c-d`.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2| {
        orient2d(p, q, r) == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

/// Even-odd point-in-polygon test. The polygon is implicitly closed.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Signed area of a polygon (positive when ccw, implicitly closed).
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let mut a = 0.0;
    let n = poly.len();
    for i in 0..n {
        a += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * a
}

/// Clip a convex polygon by the half-plane to the left of `a -> b`
/// (Sutherland–Hodgman step).
fn clip_halfplane(poly: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = signed_area2(a, b, p);
        let sq = signed_area2(a, b, q);
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            out.push(p.lerp(q, sp / (sp - sq)));
        }
    }
    out
}

/// Area of the intersection of two convex polygons (both ccw).
pub fn convex_intersection_area(p: &[Point2], q: &[Point2]) -> f64 {
    let mut acc: Vec<Point2> = p.to_vec();
    let n = q.len();
    for i in 0..n {
        if acc.is_empty() {
            return 0.0;
        }
        acc = clip_halfplane(&acc, q[i], q[(i + 1) % n]);
    }
    polygon_area(&acc).abs()
}

/// Sample a circular arc `angle_from -> angle_to` (radians, monotone in the
/// given direction) into a polyline whose chord error stays below
/// `max_chord_err`.
pub fn arc_points(
    center: Point2,
    radius: f64,
    angle_from: f64,
    angle_to: f64,
    max_chord_err: f64,
) -> Vec<Point2> {
    let sweep = angle_to - angle_from;
    // chord error e = r (1 − cos(dθ/2))
    let e = (max_chord_err / radius).min(0.5);
    let max_step = 2.0 * (1.0 - e).acos().max(1e-3);
    let n = ((sweep.abs() / max_step).ceil() as usize).max(2);
    (0..=n)
        .map(|i| {
            let a = angle_from + sweep * i as f64 / n as f64;
            center + Point2::new(radius * a.cos(), radius * a.sin())
        })
        .collect()
}

/// True if the closed polyline has a self-intersection between
/// non-adjacent segments.
pub fn polyline_self_intersects(poly: &[Point2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            // skip adjacent segments (shared endpoint)
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_signs() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(1.0, 0.0);
        assert!(orient2d(a, b, Point2::new(0.0, 1.0)) > 0.0);
        assert!(orient2d(a, b, Point2::new(0.0, -1.0)) < 0.0);
        assert_eq!(orient2d(a, b, Point2::new(2.0, 0.0)), 0.0);
    }

    #[test]
    fn convex_overlap() {
        let unit = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let shifted: Vec<Point2> = unit.iter().map(|p| *p + Point2::new(0.5, 0.0)).collect();
        let a = convex_intersection_area(&unit, &shifted);
        assert!((a - 0.5).abs() < 1e-12);
        let far: Vec<Point2> = unit.iter().map(|p| *p + Point2::new(3.0, 0.0)).collect();
        assert_eq!(convex_intersection_area(&unit, &far), 0.0);
    }

    #[test]
    fn polygon_tests() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        assert!(point_in_polygon(Point2::new(1.0, 1.0), &sq));
        assert!(!point_in_polygon(Point2::new(3.0, 1.0), &sq));
        assert!((polygon_area(&sq) - 4.0).abs() < 1e-12);
        assert!(!polyline_self_intersects(&sq));
        let bow = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(polyline_self_intersects(&bow));
    }
}
