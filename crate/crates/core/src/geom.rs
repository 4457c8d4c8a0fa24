//! Planar primitives: points, lines in normal form, segments and rectangles.
//!
//! A [`Line`] is stored as the locus `x cos α + y sin α = p` with `α ∈ [0, π)`.
//! This is the parametrisation under which an isotropic Poisson line process
//! has a flat intensity density, so the samplers in [`crate::lineproc`] work
//! directly in these coordinates.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular threshold below which two lines are treated as parallel.
pub const EPS_PARALLEL: f64 = 1e-12;

/// Relative tolerance used by [`side_of`].
pub const EPS_SIDE: f64 = 1e-12;

/// Parametric tolerance for segment intersections.
const EPS_PARAM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product.
    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Rotate counterclockwise by `angle` radians about the origin.
    #[inline]
    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// An undirected line `{ q : q·n(α) = p }` with unit normal `n(α) = (cos α, sin α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    p: f64,
    alpha: f64,
}

impl Line {
    /// Builds a line from any offset and angle, normalising `α` into `[0, π)`
    /// and flipping the sign of `p` when the normal is reversed.
    pub fn new(p: f64, alpha: f64) -> Self {
        let mut a = alpha.rem_euclid(2.0 * PI);
        let mut p = p;
        if a >= PI {
            a -= PI;
            p = -p;
        }
        // rem_euclid can round up to exactly 2π or π for tiny negative inputs
        if a >= PI {
            a = 0.0;
        }
        Line { p, alpha: a }
    }

    /// The line through two distinct points.
    pub fn through(a: Point, b: Point) -> Option<Line> {
        let d = b - a;
        if d.x == 0.0 && d.y == 0.0 {
            return None;
        }
        let alpha = d.y.atan2(d.x) + PI / 2.0;
        let (s, c) = alpha.sin_cos();
        Some(Line::new(a.x * c + a.y * s, alpha))
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn normal(&self) -> Point {
        let (s, c) = self.alpha.sin_cos();
        Point::new(c, s)
    }

    /// Unit vector along the line.
    #[inline]
    pub fn direction(&self) -> Point {
        let (s, c) = self.alpha.sin_cos();
        Point::new(-s, c)
    }

    /// `q·n − p`.
    #[inline]
    pub fn signed_distance(&self, q: Point) -> f64 {
        let (s, c) = self.alpha.sin_cos();
        q.x * c + q.y * s - self.p
    }

    /// Foot of the perpendicular from the origin.
    #[inline]
    pub fn foot(&self) -> Point {
        self.normal() * self.p
    }

    /// Re-express this line after rotating the plane by `angle` and then
    /// translating by `shift`.
    pub fn transformed(&self, angle: f64, shift: Point) -> Line {
        let alpha = self.alpha + angle;
        let (s, c) = alpha.sin_cos();
        Line::new(self.p + shift.x * c + shift.y * s, alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    #[inline]
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    #[inline]
    pub fn at(&self, t: f64) -> Point {
        self.a + (self.b - self.a) * t
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    /// Parameter of the orthogonal projection of `q` onto the supporting line.
    pub fn project(&self, q: Point) -> f64 {
        let d = self.b - self.a;
        let l2 = d.dot(d);
        if l2 == 0.0 {
            0.0
        } else {
            (q - self.a).dot(d) / l2
        }
    }
}

/// Axis-aligned rectangle `[min.x, max.x] × [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Rect {
            min: Point::new(x0, y0),
            max: Point::new(x1, y1),
        })
    }

    pub fn square(side: f64) -> Result<Self> {
        Rect::new(0.0, 0.0, side, side)
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point {
        (self.min + self.max) * 0.5
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    pub fn contains(&self, q: Point) -> bool {
        q.x >= self.min.x && q.x <= self.max.x && q.y >= self.min.y && q.y <= self.max.y
    }

    pub fn contains_strictly(&self, q: Point) -> bool {
        q.x > self.min.x && q.x < self.max.x && q.y > self.min.y && q.y < self.max.y
    }

    /// Corners in counterclockwise order starting at `min`.
    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }

    pub fn edges(&self) -> [Segment; 4] {
        let c = self.corners();
        [
            Segment::new(c[0], c[1]),
            Segment::new(c[1], c[2]),
            Segment::new(c[2], c[3]),
            Segment::new(c[3], c[0]),
        ]
    }
}

/// Sign of `q·n − p`, with zero reserved for points within
/// `EPS_SIDE · max(1, |p|, |q|)` of the line.
pub fn side_of(l: &Line, q: Point) -> i8 {
    let v = l.signed_distance(q);
    let eps = EPS_SIDE * 1f64.max(l.p.abs()).max(q.norm());
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

/// True iff `u` and `v` lie strictly on opposite sides of `l`.
pub fn separates(l: &Line, u: Point, v: Point) -> bool {
    side_of(l, u) * side_of(l, v) < 0
}

pub fn intersect_lines(l1: &Line, l2: &Line) -> Option<Point> {
    let d = (l1.alpha - l2.alpha).rem_euclid(PI);
    if d.min(PI - d) <= EPS_PARALLEL {
        return None;
    }
    let (s1, c1) = l1.alpha.sin_cos();
    let (s2, c2) = l2.alpha.sin_cos();
    let det = c1 * s2 - s1 * c2;
    Some(Point::new(
        (l1.p * s2 - l2.p * s1) / det,
        (c1 * l2.p - c2 * l1.p) / det,
    ))
}

/// Intersection of two closed segments.
///
/// Endpoint contacts return the endpoint itself (bit-exact), which keeps
/// node identification stable during planarisation. Collinear segments that
/// share more than a single point are rejected.
pub fn intersect_segments(s1: &Segment, s2: &Segment) -> Result<Option<Point>> {
    let r = s1.b - s1.a;
    let s = s2.b - s2.a;
    let rr = r.dot(r);
    let ss = s.dot(s);
    if rr == 0.0 || ss == 0.0 {
        return Ok(degenerate_contact(s1, s2));
    }
    let qp = s2.a - s1.a;
    let denom = r.cross(s);
    let scale = rr.sqrt() * ss.sqrt();

    if denom.abs() <= EPS_PARAM * scale {
        // parallel: only collinear segments can touch
        if qp.cross(r).abs() > EPS_PARAM * rr.sqrt() * qp.norm().max(rr.sqrt()) {
            return Ok(None);
        }
        let t0 = qp.dot(r) / rr;
        let t1 = t0 + s.dot(r) / rr;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let a = lo.max(0.0);
        let b = hi.min(1.0);
        if b < a - EPS_PARAM {
            return Ok(None);
        }
        if b - a > EPS_PARAM {
            return Err(Error::CollinearOverlap);
        }
        // single shared point
        return Ok(Some(snap_endpoint(s1, s2, s1.at(a.clamp(0.0, 1.0)))));
    }

    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    if t < -EPS_PARAM || t > 1.0 + EPS_PARAM || u < -EPS_PARAM || u > 1.0 + EPS_PARAM {
        return Ok(None);
    }
    let p = if t.abs() <= EPS_PARAM {
        s1.a
    } else if (t - 1.0).abs() <= EPS_PARAM {
        s1.b
    } else if u.abs() <= EPS_PARAM {
        s2.a
    } else if (u - 1.0).abs() <= EPS_PARAM {
        s2.b
    } else {
        s1.at(t)
    };
    Ok(Some(p))
}

fn snap_endpoint(s1: &Segment, s2: &Segment, p: Point) -> Point {
    [s1.a, s1.b, s2.a, s2.b]
        .into_iter()
        .min_by(|a, b| a.dist(p).total_cmp(&b.dist(p)))
        .unwrap_or(p)
}

fn degenerate_contact(s1: &Segment, s2: &Segment) -> Option<Point> {
    let on = |q: Point, seg: &Segment| -> bool {
        if seg.is_degenerate() {
            return q == seg.a;
        }
        let d = seg.b - seg.a;
        let tol = EPS_PARAM * d.norm().max(q.norm()).max(1.0);
        let t = seg.project(q);
        (-EPS_PARAM..=1.0 + EPS_PARAM).contains(&t) && d.cross(q - seg.a).abs() / d.norm() <= tol
    };
    if s1.is_degenerate() {
        on(s1.a, s2).then_some(s1.a)
    } else {
        on(s2.a, s1).then_some(s2.a)
    }
}

/// Chord of `l` inside `rect`; endpoints are snapped exactly onto the
/// boundary sides that bound them.
pub fn clip_line_to_rect(l: &Line, rect: &Rect) -> Option<Segment> {
    let base = l.foot();
    let dir = l.direction();
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    // which side limits each end: 0 = x-min, 1 = x-max, 2 = y-min, 3 = y-max
    let mut lim0 = usize::MAX;
    let mut lim1 = usize::MAX;

    let axes = [
        (base.x, dir.x, rect.min.x, rect.max.x, 0usize),
        (base.y, dir.y, rect.min.y, rect.max.y, 2usize),
    ];
    for (b, d, lo, hi, tag) in axes {
        if d.abs() < 1e-300 {
            if b < lo || b > hi {
                return None;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo - b) / d, (hi - b) / d);
        let (mut ia, mut ib) = (tag, tag + 1);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
            std::mem::swap(&mut ia, &mut ib);
        }
        if ta > t0 {
            t0 = ta;
            lim0 = ia;
        }
        if tb < t1 {
            t1 = tb;
            lim1 = ib;
        }
    }
    if !(t1 > t0) {
        return None;
    }
    let snap = |t: f64, lim: usize| -> Point {
        let mut q = base + dir * t;
        match lim {
            0 => q.x = rect.min.x,
            1 => q.x = rect.max.x,
            2 => q.y = rect.min.y,
            3 => q.y = rect.max.y,
            _ => {}
        }
        q.x = q.x.clamp(rect.min.x, rect.max.x);
        q.y = q.y.clamp(rect.min.y, rect.max.y);
        q
    };
    let a = snap(t0, lim0);
    let b = snap(t1, lim1);
    if a == b {
        return None;
    }
    Some(Segment::new(a, b))
}
