//! Brute-force arrangement oracle shared by the core tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::f64::consts::PI;

use linenet::lineproc::stream_rng;
use linenet::{Line, Point, Rect};
use rand::Rng;

/// Direct evaluation of `x cos α + y sin α − p`.
pub fn value(l: &Line, q: Point) -> f64 {
    q.x * l.alpha().cos() + q.y * l.alpha().sin() - l.p()
}

fn solve(a: (f64, f64, f64), b: (f64, f64, f64)) -> Option<Point> {
    // a.0 x + a.1 y = a.2
    let det = a.0 * b.1 - a.1 * b.0;
    if det.abs() < 1e-12 {
        return None;
    }
    Some(Point::new((a.2 * b.1 - a.1 * b.2) / det, (a.0 * b.2 - a.2 * b.0) / det))
}

pub fn hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.dist(*b) < 1e-9);
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-12 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-12 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Cell of the arrangement (window edges plus non-separating lines) that
/// contains `v1`, from all pairwise vertices that satisfy every constraint.
pub fn arrangement_cell(lines: &[Line], v1: Point, v2: Point, w: &Rect) -> Vec<Point> {
    let mut cons: Vec<(f64, f64, f64, f64)> = vec![
        (1.0, 0.0, w.max.x, -1.0),
        (1.0, 0.0, w.min.x, 1.0),
        (0.0, 1.0, w.max.y, -1.0),
        (0.0, 1.0, w.min.y, 1.0),
    ];
    for l in lines {
        let (s1, s2) = (value(l, v1), value(l, v2));
        if s1 * s2 < 0.0 {
            continue;
        }
        cons.push((l.alpha().cos(), l.alpha().sin(), l.p(), s1.signum()));
    }
    let mut verts = Vec::new();
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let (a, b) = (cons[i], cons[j]);
            if let Some(q) = solve((a.0, a.1, a.2), (b.0, b.1, b.2)) {
                let ok = cons
                    .iter()
                    .all(|c| c.3 * (c.0 * q.x + c.1 * q.y - c.2) >= -1e-9);
                if ok {
                    verts.push(q);
                }
            }
        }
    }
    hull(verts)
}

pub fn same_vertex_set(a: &[Point], b: &[Point]) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| p.dist(*q) <= 1e-9))
        && b.iter().all(|p| a.iter().any(|q| p.dist(*q) <= 1e-9))
}

pub fn random_instance(seed: u64) -> (Vec<Line>, Point, Point, Rect) {
    let mut rng = stream_rng(seed, 0);
    let w = Rect::new(-5.0, -5.0, 5.0, 5.0).unwrap();
    let mut pt = || Point::new(rng.random_range(-4.5..4.5), rng.random_range(-4.5..4.5));
    let (v1, v2) = (pt(), pt());
    let k = 1 + (seed % 10) as usize;
    let lines = (0..k)
        .map(|_| Line::new(rng.random_range(-7.0..7.0), rng.random_range(0.0..PI)))
        .collect();
    (lines, v1, v2, w)
}
