//! Planar points and the polygon predicates shared by mesh construction and validation.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn lerp(self, other: Self, t: f64) -> Self {
        Self::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        Point2::new(self * rhs.x, self * rhs.y)
    }
}

/// Twice the signed area of the triangle (a, b, c); positive when counterclockwise.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

pub fn triangle_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * orient(a, b, c)
}

/// Shoelace signed area of a closed loop.
pub fn signed_area(loop_: &[Point2]) -> f64 {
    let n = loop_.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += loop_[i].cross(loop_[(i + 1) % n]);
    }
    0.5 * twice
}

/// Area centroid of a simple polygon. Falls back to the vertex average for
/// zero-area input so that callers get a finite point to report against.
pub fn polygon_centroid(loop_: &[Point2]) -> Point2 {
    let n = loop_.len();
    let mut twice_area = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = loop_[i];
        let q = loop_[(i + 1) % n];
        let w = p.cross(q);
        twice_area += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if twice_area.abs() <= f64::MIN_POSITIVE {
        let s = 1.0 / n as f64;
        return loop_
            .iter()
            .fold(Point2::default(), |acc, &p| acc + s * p);
    }
    Point2::new(cx / (3.0 * twice_area), cy / (3.0 * twice_area))
}

/// Largest distance between two vertices of the loop.
pub fn diameter(loop_: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &p) in loop_.iter().enumerate() {
        for &q in &loop_[i + 1..] {
            d = d.max(p.distance(q));
        }
    }
    d
}

/// Whether the closed segments [a, b] and [c, d] share a point.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// True when no two non-adjacent edges of the loop touch.
pub fn is_simple_polygon(loop_: &[Point2]) -> bool {
    let n = loop_.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (loop_[i], loop_[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (loop_[j], loop_[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Winding number of a set of oriented boundary edges about `p`.
/// Edges are given as point pairs; the set need not form a single loop.
pub fn winding_number(edges: impl IntoIterator<Item = (Point2, Point2)>, p: Point2) -> i32 {
    let mut wn = 0;
    for (a, b) in edges {
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Point-in-triangle test with a relative tolerance on the barycentric coordinates.
pub fn barycentric(a: Point2, b: Point2, c: Point2, p: Point2) -> [f64; 3] {
    let det = orient(a, b, c);
    let l1 = orient(p, b, c) / det;
    let l2 = orient(a, p, c) / det;
    [l1, l2, 1.0 - l1 - l2]
}
