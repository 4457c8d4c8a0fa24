//! Stationary isotropic Poisson line processes.
//!
//! Normalisation: a process of intensity `η` has parameter density
//! `(η/2) dp dα` over `p ∈ ℝ`, `α ∈ [0, π)`. Under this convention the mean
//! number of lines hitting a segment of length `L` is `η L`, the mean number
//! hitting a convex body is `η · perimeter / 2`, and the mean length of line
//! pattern per unit area is `π η / 2`.
//!
//! All samplers are pure functions of `(seed, stream)`; one ChaCha stream is
//! used per replicate so that parallel Monte Carlo stays reproducible.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{intersect_lines, Line, Point, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineProcessParams {
    /// Expected number of lines hitting a unit-length segment.
    pub intensity: f64,
    pub seed: u64,
}

impl LineProcessParams {
    pub fn new(intensity: f64, seed: u64) -> Result<Self> {
        if !(intensity >= 0.0) || !intensity.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "intensity must be finite and non-negative, got {intensity}"
            )));
        }
        Ok(LineProcessParams { intensity, seed })
    }
}

/// Region whose hitting lines were sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SampleWindow {
    Disk { center: Point, radius: f64 },
    Rect(Rect),
    /// Rectangle around `v1 v2` dilated by `half_width` in every direction
    /// (in the frame of the segment). Only lines that do not separate the
    /// endpoints are present.
    Tube { v1: Point, v2: Point, half_width: f64 },
}

impl SampleWindow {
    pub fn contains(&self, q: Point) -> bool {
        match *self {
            SampleWindow::Disk { center, radius } => q.dist(center) <= radius,
            SampleWindow::Rect(r) => r.contains(q),
            SampleWindow::Tube { v1, v2, half_width } => match SegmentFrame::new(v1, v2) {
                Ok(f) => tube_rect(f.half_length, half_width)
                    .map(|r| r.contains(f.to_local(q)))
                    .unwrap_or(false),
                Err(_) => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSample {
    pub lines: Vec<Line>,
    pub window: SampleWindow,
    pub params: LineProcessParams,
}

/// Independent RNG stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as usize
}

/// Mean number of lines meeting a disk: `η π r`.
pub fn hitting_measure_disk(radius: f64, intensity: f64) -> Result<f64> {
    if radius < 0.0 {
        return Err(Error::NegativeRadius(radius));
    }
    Ok(intensity * PI * radius)
}

/// Mean number of lines meeting a segment: `η L`.
pub fn hitting_measure_segment(length: f64, intensity: f64) -> Result<f64> {
    if length < 0.0 {
        return Err(Error::NegativeLength(length));
    }
    Ok(intensity * length)
}

/// Mean number of lines meeting a convex body of the given perimeter.
pub fn hitting_measure_convex(perimeter: f64, intensity: f64) -> f64 {
    intensity * perimeter / 2.0
}

/// Mean total line length per unit area.
pub fn length_intensity(intensity: f64) -> f64 {
    PI * intensity / 2.0
}

/// Mean number of non-separating lines meeting a tube of the given half-width.
pub fn tube_nonseparating_measure(half_width: f64, intensity: f64) -> f64 {
    4.0 * intensity * half_width
}

/// Appends the lines hitting the disk to `out`.
pub fn sample_disk_into<R: Rng + ?Sized>(
    rng: &mut R,
    center: Point,
    radius: f64,
    intensity: f64,
    out: &mut Vec<Line>,
) {
    let count = poisson_count(rng, intensity * PI * radius);
    out.reserve(count);
    for _ in 0..count {
        let alpha = rng.random::<f64>() * PI;
        let off = (2.0 * rng.random::<f64>() - 1.0) * radius;
        let (s, c) = alpha.sin_cos();
        out.push(Line::new(off + center.x * c + center.y * s, alpha));
    }
}

pub fn sample_disk(center: Point, radius: f64, params: LineProcessParams) -> Result<LineSample> {
    if !(radius > 0.0) {
        return Err(Error::NonPositiveRadius(radius));
    }
    let mut rng = stream_rng(params.seed, 0);
    let mut lines = Vec::new();
    sample_disk_into(&mut rng, center, radius, params.intensity, &mut lines);
    Ok(LineSample {
        lines,
        window: SampleWindow::Disk { center, radius },
        params,
    })
}

/// Coordinates in which `v1 = (-h, 0)` and `v2 = (h, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentFrame {
    pub center: Point,
    pub angle: f64,
    pub half_length: f64,
}

impl SegmentFrame {
    pub fn new(v1: Point, v2: Point) -> Result<Self> {
        let d = v2 - v1;
        let len = d.norm();
        if !(len > 0.0) {
            return Err(Error::DegenerateSegment);
        }
        Ok(SegmentFrame {
            center: (v1 + v2) * 0.5,
            angle: d.y.atan2(d.x),
            half_length: len / 2.0,
        })
    }

    pub fn to_local(&self, q: Point) -> Point {
        (q - self.center).rotate(-self.angle)
    }

    pub fn to_global(&self, q: Point) -> Point {
        q.rotate(self.angle) + self.center
    }

    pub fn line_to_global(&self, l: &Line) -> Line {
        l.transformed(self.angle, self.center)
    }
}

/// Local-frame tube rectangle `[-h-w, h+w] × [-w, w]`.
pub fn tube_rect(half_length: f64, half_width: f64) -> Result<Rect> {
    Rect::new(
        -half_length - half_width,
        -half_width,
        half_length + half_width,
        half_width,
    )
}

/// Non-separating lines whose tube "depth" lies in `(w_lo, w_hi]`, in the
/// local frame of a segment of half-length `h`.
///
/// A line `(p, α)` meets the tube of half-width `w` without separating the
/// endpoints iff `h|cos α| ≤ |p| ≤ h|cos α| + w(|cos α| + sin α)`. The band
/// between two widths therefore has measure `4 η (w_hi − w_lo)` and angular
/// density proportional to `|cos α| + sin α`, which is sampled by rejection.
pub fn sample_tube_band<R: Rng + ?Sized>(
    rng: &mut R,
    half_length: f64,
    w_lo: f64,
    w_hi: f64,
    intensity: f64,
    out: &mut Vec<Line>,
) {
    let count = poisson_count(rng, tube_nonseparating_measure(w_hi - w_lo, intensity));
    out.reserve(count);
    for _ in 0..count {
        let (alpha, c, s) = loop {
            let a = rng.random::<f64>() * PI;
            let (s, c) = a.sin_cos();
            if rng.random::<f64>() * SQRT_2 <= c.abs() + s {
                break (a, c, s);
            }
        };
        let depth = w_lo + rng.random::<f64>() * (w_hi - w_lo);
        let mag = half_length * c.abs() + depth * (c.abs() + s);
        let p = if rng.random::<bool>() { mag } else { -mag };
        out.push(Line::new(p, alpha));
    }
}

pub fn sample_tube_nonseparating(
    v1: Point,
    v2: Point,
    half_width: f64,
    params: LineProcessParams,
) -> Result<LineSample> {
    let frame = SegmentFrame::new(v1, v2)?;
    if !(half_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tube half-width must be positive, got {half_width}"
        )));
    }
    let mut rng = stream_rng(params.seed, 0);
    let mut local = Vec::new();
    sample_tube_band(
        &mut rng,
        frame.half_length,
        0.0,
        half_width,
        params.intensity,
        &mut local,
    );
    let lines = local.iter().map(|l| frame.line_to_global(l)).collect();
    Ok(LineSample {
        lines,
        window: SampleWindow::Tube { v1, v2, half_width },
        params,
    })
}

/// Lines separating the endpoints of a segment of half-length `h` (local
/// frame): `|p| < h|cos α|`, measure `η · 2h`.
pub fn sample_separating<R: Rng + ?Sized>(
    rng: &mut R,
    half_length: f64,
    intensity: f64,
    out: &mut Vec<Line>,
) {
    let count = poisson_count(rng, intensity * 2.0 * half_length);
    for _ in 0..count {
        let (alpha, c) = loop {
            let a = rng.random::<f64>() * PI;
            let c = a.cos();
            if rng.random::<f64>() <= c.abs() {
                break (a, c);
            }
        };
        let p = (2.0 * rng.random::<f64>() - 1.0) * half_length * c.abs();
        out.push(Line::new(p, alpha));
    }
}

/// Every crossing between a line of `a` and a line of `b`, tagged with the
/// crossing angle `(α_b − α_a) mod π`.
pub fn intersection_angle_samples(a: &LineSample, b: &LineSample) -> Vec<(Point, f64)> {
    let mut out = Vec::new();
    for la in &a.lines {
        for lb in &b.lines {
            if let Some(q) = intersect_lines(la, lb) {
                out.push((q, (lb.alpha() - la.alpha()).rem_euclid(PI)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::separates;

    #[test]
    fn hitting_measures() {
        assert!((hitting_measure_disk(1.0, 1.0).unwrap() - PI).abs() < 1e-15);
        assert_eq!(hitting_measure_disk(0.0, 1.0).unwrap(), 0.0);
        assert!((hitting_measure_disk(2.0, 0.5).unwrap() - PI).abs() < 1e-15);
        assert!(matches!(
            hitting_measure_disk(-1.0, 1.0),
            Err(Error::NegativeRadius(_))
        ));
        assert_eq!(hitting_measure_segment(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(hitting_measure_segment(5.0, 1.0).unwrap(), 5.0);
        assert_eq!(hitting_measure_segment(3.0, 2.0).unwrap(), 6.0);
        assert!(hitting_measure_segment(-0.1, 1.0).is_err());
    }

    #[test]
    fn disk_measure_matches_density_integral() {
        // (η/2) ∫∫ 1{line (p, α) meets the disk} dp dα, midpoint rule over an
        // off-centre disk so the indicator actually depends on α
        let (c, r, eta) = (Point::new(1.3, -0.4), 1.7, 0.8);
        let (na, np, pmax) = (800, 4000, 4.0);
        let (da, dp) = (PI / na as f64, 2.0 * pmax / np as f64);
        let mut acc = 0.0;
        for i in 0..na {
            let alpha = (i as f64 + 0.5) * da;
            for j in 0..np {
                let p = -pmax + (j as f64 + 0.5) * dp;
                if Line::new(p, alpha).signed_distance(c).abs() <= r {
                    acc += eta / 2.0 * da * dp;
                }
            }
        }
        assert!((acc - hitting_measure_disk(r, eta).unwrap()).abs() < 2e-3);
    }

    #[test]
    fn zero_intensity_is_empty() {
        let s = sample_disk(Point::ORIGIN, 3.0, LineProcessParams::new(0.0, 1).unwrap()).unwrap();
        assert!(s.lines.is_empty());
        assert!(sample_disk(Point::ORIGIN, 0.0, LineProcessParams::new(1.0, 1).unwrap()).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = LineProcessParams::new(1.0, 42).unwrap();
        let a = sample_disk(Point::new(1.0, 2.0), 5.0, p).unwrap();
        let b = sample_disk(Point::new(1.0, 2.0), 5.0, p).unwrap();
        assert_eq!(a, b);
        let t1 = sample_tube_nonseparating(Point::ORIGIN, Point::new(3.0, 4.0), 2.0, p).unwrap();
        let t2 = sample_tube_nonseparating(Point::ORIGIN, Point::new(3.0, 4.0), 2.0, p).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn disk_lines_hit_disk() {
        let c = Point::new(-4.0, 9.0);
        let s = sample_disk(c, 2.5, LineProcessParams::new(3.0, 7).unwrap()).unwrap();
        assert!(!s.lines.is_empty());
        for l in &s.lines {
            assert!(l.signed_distance(c).abs() <= 2.5 + 1e-12);
        }
    }

    #[test]
    fn tube_lines_never_separate() {
        let v1 = Point::new(-2.0, 1.0);
        let v2 = Point::new(5.0, -3.0);
        let s = sample_tube_nonseparating(v1, v2, 4.0, LineProcessParams::new(2.0, 3).unwrap())
            .unwrap();
        assert!(s.lines.len() > 10);
        for l in &s.lines {
            assert!(!separates(l, v1, v2));
        }
        assert!(matches!(
            sample_tube_nonseparating(v1, v1, 1.0, LineProcessParams::new(1.0, 1).unwrap()),
            Err(Error::DegenerateSegment)
        ));
    }

    #[test]
    fn frame_round_trip() {
        let f = SegmentFrame::new(Point::new(1.0, 1.0), Point::new(4.0, 5.0)).unwrap();
        assert!((f.half_length - 2.5).abs() < 1e-15);
        let v1 = f.to_local(Point::new(1.0, 1.0));
        assert!((v1.x + 2.5).abs() < 1e-12 && v1.y.abs() < 1e-12);
        let q = Point::new(-7.0, 2.0);
        assert!(f.to_global(f.to_local(q)).dist(q) < 1e-12);
        let l = Line::new(0.7, 1.1);
        let g = f.line_to_global(&l);
        let x = Point::new(0.3, 0.7 / 1.1f64.sin() - 0.3 / 1.1f64.tan());
        assert!(l.signed_distance(x).abs() < 1e-12);
        assert!(g.signed_distance(f.to_global(x)).abs() < 1e-12);
    }

    #[test]
    fn crossing_angles() {
        let mk = |l: Line| LineSample {
            lines: vec![l],
            window: SampleWindow::Disk { center: Point::ORIGIN, radius: 10.0 },
            params: LineProcessParams::new(1.0, 0).unwrap(),
        };
        let x = intersection_angle_samples(&mk(Line::new(0.0, 0.0)), &mk(Line::new(0.0, PI / 2.0)));
        assert_eq!(x.len(), 1);
        assert!((x[0].1 - PI / 2.0).abs() < 1e-15);
        let x = intersection_angle_samples(&mk(Line::new(0.0, 0.3)), &mk(Line::new(2.0, 0.3)));
        assert!(x.is_empty());
    }
}
