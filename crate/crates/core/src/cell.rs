//! The two-point cell and its mean perimeter excess `J_m`.
//!
//! Given two points at distance `m`, drop every line of a Poisson line
//! process that separates them; the remaining lines bound a convex cell
//! containing both points. `J_m` is the mean of `perimeter − 2m` for a unit
//! intensity process. It is evaluated here three independent ways:
//!
//! * [`estimate_jm_mc`]: Monte Carlo over sampled cells,
//! * [`jm_quadrature`]: numerical integration of the exact double integral
//!   `J_m = ½ ∬ (φ − sin φ) exp(−½(η − m)) dx`,
//! * [`jm_asymptotic`]: `(8/3)(ln m + γ + 5/3)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geom::{side_of, Line, Point, Rect, EPS_SIDE};
use crate::lineproc::{sample_tube_band, stream_rng, tube_rect};
use crate::quad;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Widening stops once the half-width exceeds this multiple of the start.
const MAX_WIDENING: f64 = 65536.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCell {
    /// Counterclockwise.
    pub vertices: Vec<Point>,
    /// False when some edge lies on the window boundary.
    pub closed: bool,
}

impl ConvexCell {
    pub fn perimeter(&self) -> Result<f64> {
        perimeter(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    /// Present for Monte Carlo estimates.
    pub std_error: Option<f64>,
    /// Present for quadrature results.
    pub abs_tolerance: Option<f64>,
    /// Zero for deterministic evaluations.
    pub replicates: u64,
    pub seed: u64,
    pub meta: String,
}

/// Triangle quantities for an observation point `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointGeometry {
    pub m: f64,
    /// `|v1 − x| + |v2 − x|`.
    pub eta: f64,
    /// Exterior angle at `x`, the sum of the interior angles at `v1` and `v2`.
    pub phi: f64,
}

pub fn two_point_geometry(v1: Point, v2: Point, x: Point) -> TwoPointGeometry {
    let m = v1.dist(v2);
    let (a, b) = (x - v1, x - v2);
    let eta = a.norm() + b.norm();
    // interior angle at x is the angle between x→v1 and x→v2
    let at_x = a.cross(b).abs().atan2(a.dot(b));
    TwoPointGeometry {
        m,
        eta,
        phi: std::f64::consts::PI - at_x,
    }
}

/// Probability that no line of an intensity-`η` process cuts both `v1 x` and
/// `v2 x`: `exp(−(η/2)(|v1 − x| + |v2 − x| − m))`.
pub fn prob_no_separating(v1: Point, v2: Point, x: Point, intensity: f64) -> f64 {
    let g = two_point_geometry(v1, v2, x);
    (-(intensity / 2.0) * (g.eta - g.m).max(0.0)).exp()
}

pub fn jm_asymptotic(m: f64) -> f64 {
    8.0 / 3.0 * (m.ln() + EULER_GAMMA + 5.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeSource {
    Window,
    Line,
}

/// Convex polygon with a provenance tag per edge; edge `i` runs from
/// `verts[i]` to `verts[i + 1]`.
#[derive(Debug, Clone)]
struct ClipPolygon {
    verts: Vec<Point>,
    src: Vec<EdgeSource>,
    bbox: (Point, Point),
    scratch_v: Vec<Point>,
    scratch_s: Vec<EdgeSource>,
}

impl ClipPolygon {
    fn from_rect(r: &Rect) -> Self {
        ClipPolygon {
            verts: r.corners().to_vec(),
            src: vec![EdgeSource::Window; 4],
            bbox: (r.min, r.max),
            scratch_v: Vec::new(),
            scratch_s: Vec::new(),
        }
    }

    /// Keep `{ q : keep · (q·n − p) ≥ −eps }`.
    fn clip(&mut self, l: &Line, keep: f64, eps: f64) {
        let n = l.normal();
        let (lo, hi) = self.bbox;
        let c = (lo + hi) * 0.5;
        let half = (hi - lo) * 0.5;
        let reach = half.x * n.x.abs() + half.y * n.y.abs();
        let centre = keep * (c.dot(n) - l.p());
        if centre - reach >= -eps {
            return;
        }
        if centre + reach < -eps {
            // cannot happen for lines that keep the generator points
            self.verts.clear();
            self.src.clear();
            return;
        }
        let f: Vec<f64> = self.verts.iter().map(|v| keep * (v.dot(n) - l.p())).collect();
        if f.iter().all(|&x| x >= -eps) {
            return;
        }
        self.scratch_v.clear();
        self.scratch_s.clear();
        let k = self.verts.len();
        for i in 0..k {
            let j = (i + 1) % k;
            let (p, q) = (self.verts[i], self.verts[j]);
            let (fp, fq) = (f[i], f[j]);
            if fp >= -eps {
                self.scratch_v.push(p);
                self.scratch_s.push(self.src[i]);
                if fq < -eps && fp > eps {
                    let t = fp / (fp - fq);
                    self.scratch_v.push(p + (q - p) * t);
                    self.scratch_s.push(EdgeSource::Line);
                } else if fq < -eps {
                    // p sits on the clip line; its outgoing edge now follows it
                    *self.scratch_s.last_mut().expect("just pushed") = EdgeSource::Line;
                }
            } else if fq > eps {
                let t = fp / (fp - fq);
                self.scratch_v.push(p + (q - p) * t);
                self.scratch_s.push(self.src[i]);
            }
        }
        std::mem::swap(&mut self.verts, &mut self.scratch_v);
        std::mem::swap(&mut self.src, &mut self.scratch_s);
        self.dedup(eps);
        self.refresh_bbox();
    }

    fn dedup(&mut self, eps: f64) {
        let mut i = 0;
        while self.verts.len() > 1 && i < self.verts.len() {
            let j = (i + 1) % self.verts.len();
            if self.verts[i].dist(self.verts[j]) <= eps {
                // drop the zero-length edge i, keeping the outgoing tag of j
                self.verts.remove(i);
                self.src.remove(i);
            } else {
                i += 1;
            }
        }
    }

    fn refresh_bbox(&mut self) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.verts {
            lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        self.bbox = (lo, hi);
    }

    fn into_cell(self) -> ConvexCell {
        let closed = !self.src.contains(&EdgeSource::Window);
        ConvexCell {
            vertices: self.verts,
            closed,
        }
    }
}

/// Intersection of `window` with the half-planes of every line that does not
/// separate `v1` from `v2`, taking the side that contains both points.
pub fn two_point_cell(lines: &[Line], v1: Point, v2: Point, window: &Rect) -> Result<ConvexCell> {
    if !window.contains_strictly(v1) || !window.contains_strictly(v2) {
        return Err(Error::PointsOutsideWindow);
    }
    let scale = [window.min.x, window.min.y, window.max.x, window.max.y]
        .iter()
        .fold(1f64, |a, v| a.max(v.abs()));
    let eps = EPS_SIDE * scale;
    let mut poly = ClipPolygon::from_rect(window);
    for l in lines {
        let (s1, s2) = (side_of(l, v1), side_of(l, v2));
        if s1 * s2 < 0 {
            continue;
        }
        let keep = match (s1, s2) {
            (0, 0) => continue,
            (0, s) | (s, _) => s as f64,
        };
        poly.clip(l, keep, eps);
    }
    Ok(poly.into_cell())
}

pub fn perimeter(cell: &ConvexCell) -> Result<f64> {
    let v = &cell.vertices;
    if v.len() < 3 {
        return Err(Error::DegenerateCell);
    }
    Ok((0..v.len()).map(|i| v[i].dist(v[(i + 1) % v.len()])).sum())
}

/// Starting tube half-width for the cell sampler.
///
/// The cell of two points at distance `m` has transverse extent of order
/// `√(m/η)`, so starting there keeps the number of sampled lines small even
/// at `m = 10⁸`; doubling takes care of the tail.
pub fn initial_half_width(m: f64, intensity: f64) -> f64 {
    (10.0 / intensity).max(2.0 * (m / intensity).sqrt())
}

/// One sampled two-point cell, in the frame where `v1 = (−m/2, 0)` and
/// `v2 = (m/2, 0)`.
#[derive(Debug, Clone)]
pub struct SampledCell {
    pub cell: ConvexCell,
    /// Non-separating lines sampled up to the final tube.
    pub lines: Vec<Line>,
    pub half_width: f64,
    pub widenings: u32,
}

/// Samples the cell for separation `m` by tube widening: lines are drawn
/// band by band (fresh lines only in each new band) until the cell closes
/// strictly inside the tube. Lines outside the tube then cannot touch it,
/// so the result is an exact draw of the full cell.
pub fn sample_two_point_cell<R: rand::Rng + ?Sized>(
    rng: &mut R,
    m: f64,
    intensity: f64,
    initial_width: f64,
) -> Result<SampledCell> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("separation must be positive, got {m}")));
    }
    if !(intensity > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cell sampling needs a positive intensity, got {intensity}"
        )));
    }
    let h = m / 2.0;
    let v1 = Point::new(-h, 0.0);
    let v2 = Point::new(h, 0.0);
    let mut lines = Vec::new();
    let mut w_lo = 0.0;
    let mut w = initial_width;
    let mut widenings = 0;
    while w <= initial_width * MAX_WIDENING {
        sample_tube_band(rng, h, w_lo, w, intensity, &mut lines);
        let cell = two_point_cell(&lines, v1, v2, &tube_rect(h, w)?)?;
        if cell.closed {
            return Ok(SampledCell {
                cell,
                lines,
                half_width: w,
                widenings,
            });
        }
        w_lo = w;
        w *= 2.0;
        widenings += 1;
    }
    Err(Error::NonConvergentWidening { half_width: w_lo })
}

#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub initial_half_width: Option<f64>,
    pub exec: Exec,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            initial_half_width: None,
            exec: Exec::Parallel,
        }
    }
}

/// Per-replicate perimeter excesses `perimeter − 2m`, replicate `i` drawn
/// from RNG stream `i` of `seed`.
pub fn sample_perimeter_excess(
    m: f64,
    intensity: f64,
    replicates: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<Vec<f64>> {
    let w0 = opts
        .initial_half_width
        .unwrap_or_else(|| initial_half_width(m, intensity));
    opts.exec.try_map(replicates, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let s = sample_two_point_cell(&mut rng, m, intensity, w0)?;
        let per = perimeter(&s.cell)?;
        // a convex set containing a length-m segment has perimeter ≥ 2m
        assert!(
            per >= 2.0 * m * (1.0 - 1e-12),
            "cell perimeter {per} below 2m = {}",
            2.0 * m
        );
        Ok(per - 2.0 * m)
    })
}

pub fn estimate_jm_mc(m: f64, intensity: f64, replicates: usize, seed: u64) -> Result<EstimateReport> {
    estimate_jm_mc_with(m, intensity, replicates, seed, &McOptions::default())
}

pub fn estimate_jm_mc_with(
    m: f64,
    intensity: f64,
    replicates: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<EstimateReport> {
    if replicates < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 replicates, got {replicates}"
        )));
    }
    let xs = sample_perimeter_excess(m, intensity, replicates, seed, opts)?;
    let (mean, se) = mean_and_se(&xs);
    Ok(EstimateReport {
        value: mean,
        std_error: Some(se),
        abs_tolerance: None,
        replicates: replicates as u64,
        seed,
        meta: format!("monte-carlo tube sampler, m={m}, intensity={intensity}"),
    })
}

pub(crate) fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[inline]
fn phi_minus_sin(phi: f64) -> f64 {
    if phi < 0.05 {
        let p2 = phi * phi;
        phi * p2 * (1.0 / 6.0 - p2 * (1.0 / 120.0 - p2 * (1.0 / 5040.0 - p2 / 362_880.0)))
    } else {
        phi - phi.sin()
    }
}

/// Integrand of the polar form about `v2 = (m/2, 0)`, with `θ` measured from
/// the direction of `v1`, including the Jacobian `r`.
fn polar_integrand(m: f64, r: f64, theta: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let (s, c) = theta.sin_cos();
    let ax = m - r * c;
    let ay = r * s;
    let d1 = ax.hypot(ay);
    let half = (0.5 * theta).sin();
    // η − m = r(1 − cos θ) + (|x − v1| − (m − r cos θ)), both terms stable
    let excess = 2.0 * r * half * half + ay * ay / (d1 + ax);
    let phi = theta + ay.atan2(ax);
    phi_minus_sin(phi) * (-0.5 * excess).exp() * r
}

/// `J_m` for a unit-intensity process by nested adaptive quadrature.
///
/// Region A (`0 < θ < π/2`, `r < (m/2) sec θ`) holds the logarithmic ridge
/// near the axis and is integrated in `u = ln θ`; region B (`θ > π/2`) is
/// cut at `r = 80`.
pub fn jm_quadrature(m: f64, rel_tol: f64) -> Result<EstimateReport> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("separation must be positive, got {m}")));
    }
    if !(rel_tol > 0.0 && rel_tol < 0.1) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol must lie in (0, 0.1), got {rel_tol}"
        )));
    }
    const MAX_INTERVALS: usize = 4000;
    let inner_tol = rel_tol * 1e-2;
    let half_pi = std::f64::consts::FRAC_PI_2;

    let inner_a = |theta: f64| -> (f64, f64) {
        let c = theta.cos();
        let one_minus_c = 2.0 * (0.5 * theta).sin().powi(2);
        let r_max = (0.5 * m / c).min(180.0 / one_minus_c);
        let scale = 2.0 / one_minus_c;
        let br = quad::breakpoints(0.0, r_max, &[scale, 5.0 * scale, 20.0 * scale, 60.0 * scale]);
        let q = quad::integrate(|r| (polar_integrand(m, r, theta), 0.0), &br, 0.0, inner_tol, MAX_INTERVALS);
        (q.value, q.abs_err)
    };
    let u_lo = (1e-4 / m.sqrt()).min(1e-4).ln();
    let u_hi = half_pi.ln();
    let ubr = quad::breakpoints(
        u_lo,
        u_hi,
        &[-0.5 * m.ln(), -m.ln() / 3.0, (0.3f64).ln()],
    );
    let region_a = quad::integrate(
        |u| {
            let t = u.exp();
            let (v, e) = inner_a(t);
            (v * t, e * t)
        },
        &ubr,
        0.0,
        rel_tol * 0.25,
        MAX_INTERVALS,
    );

    let inner_b = |theta: f64| -> (f64, f64) {
        let br = quad::breakpoints(0.0, 80.0, &[2.0, 10.0, 30.0]);
        let q = quad::integrate(|r| (polar_integrand(m, r, theta), 0.0), &br, 0.0, inner_tol, MAX_INTERVALS);
        (q.value, q.abs_err)
    };
    let region_b = quad::integrate(
        inner_b,
        &[half_pi, 0.75 * std::f64::consts::PI, std::f64::consts::PI],
        0.0,
        rel_tol * 0.25,
        MAX_INTERVALS,
    );

    let value = 2.0 * (region_a.value + region_b.value);
    let tol = 2.0 * (region_a.abs_err + region_a.aux + region_b.abs_err + region_b.aux);
    if tol > rel_tol * value.abs() {
        return Err(Error::ToleranceNotMet {
            requested: rel_tol * value.abs(),
            achieved: tol,
        });
    }
    Ok(EstimateReport {
        value,
        std_error: None,
        abs_tolerance: Some(tol),
        replicates: 0,
        seed: 0,
        meta: format!(
            "nested Gauss-Kronrod, m={m}, intervals A={} B={}",
            region_a.intervals, region_b.intervals
        ),
    })
}
