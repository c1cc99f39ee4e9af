//! Planar primitives shared by the map model and the visibility code.

use std::ops::{Add, Mul, Sub};

/// Relative tolerance used for degenerate intersection tests.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn approx_eq(self, other: Point, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol && (self.y - other.y).abs() <= tol
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Twice the signed area of triangle `(a, b, c)`; positive when counter-clockwise
/// in a y-up frame.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Length of a polyline.
pub fn path_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Signed shoelace area of a closed loop.
pub fn signed_area(loop_: &[Point]) -> f64 {
    let n = loop_.len();
    (0..n)
        .map(|i| loop_[i].cross(loop_[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

/// Parameters along `p + t (q - p)` at which the segment meets segment `[a, b]`.
///
/// A proper crossing or a touch yields one parameter; a collinear overlap yields
/// the parameters of both overlap ends. Parameters are clamped to `[0, 1]`.
pub fn segment_hits(p: Point, q: Point, a: Point, b: Point, out: &mut Vec<f64>) {
    let d = q - p;
    let e = b - a;
    let len_scale = d.norm().max(e.norm()).max(1.0);
    let tol = EPS * len_scale * len_scale;
    let denom = d.cross(e);
    let ap = a - p;
    if denom.abs() <= tol {
        // parallel
        if ap.cross(d).abs() > tol {
            return;
        }
        let dd = d.dot(d);
        if dd == 0.0 {
            return;
        }
        let ta = ap.dot(d) / dd;
        let tb = (b - p).dot(d) / dd;
        let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
        if hi < -EPS || lo > 1.0 + EPS {
            return;
        }
        out.push(lo.clamp(0.0, 1.0));
        out.push(hi.clamp(0.0, 1.0));
        return;
    }
    let t = ap.cross(e) / denom;
    let u = ap.cross(d) / denom;
    if (-EPS..=1.0 + EPS).contains(&t) && (-EPS..=1.0 + EPS).contains(&u) {
        out.push(t.clamp(0.0, 1.0));
    }
}

/// Axis-aligned rectangle, closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }

    /// Closed triangle / rectangle overlap with an absolute slack `tol`.
    pub fn intersects_triangle(&self, tri: [Point; 3], tol: f64) -> bool {
        // separating axis test: rectangle axes, then triangle edge normals
        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in tri {
            lo_x = lo_x.min(p.x);
            hi_x = hi_x.max(p.x);
            lo_y = lo_y.min(p.y);
            hi_y = hi_y.max(p.y);
        }
        if hi_x < self.min.x - tol
            || lo_x > self.max.x + tol
            || hi_y < self.min.y - tol
            || lo_y > self.max.y + tol
        {
            return false;
        }
        let corners = self.corners();
        for i in 0..3 {
            let a = tri[i];
            let b = tri[(i + 1) % 3];
            let edge = b - a;
            let normal = Point::new(-edge.y, edge.x);
            let len = normal.norm();
            if len == 0.0 {
                continue;
            }
            let project = |p: Point| (p - a).dot(normal) / len;
            let tri_vals = tri.iter().map(|&p| project(p));
            let (t_lo, t_hi) =
                tri_vals.fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(v), h.max(v)));
            let (r_lo, r_hi) = corners
                .iter()
                .map(|&p| project(p))
                .fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(v), h.max(v)));
            if r_hi < t_lo - tol || r_lo > t_hi + tol {
                return false;
            }
        }
        true
    }

    /// Closed segment / rectangle overlap with slack `tol` (Liang-Barsky clip).
    pub fn intersects_segment(&self, a: Point, b: Point, tol: f64) -> bool {
        let d = b - a;
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        let checks = [
            (-d.x, a.x - (self.min.x - tol)),
            (d.x, (self.max.x + tol) - a.x),
            (-d.y, a.y - (self.min.y - tol)),
            (d.y, (self.max.y + tol) - a.y),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}
