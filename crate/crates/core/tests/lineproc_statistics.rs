use std::f64::consts::PI;

use linenet::geom::clip_line_to_rect;
use linenet::lineproc::{
    intersection_angle_samples, length_intensity, sample_disk, sample_disk_into, stream_rng,
    LineProcessParams, LineSample, SampleWindow,
};
use linenet::{Line, Point, Rect};

const REPS: u64 = 4000;

fn mean_se(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt(), var)
}

fn disk_lines(seed: u64, radius: f64, eta: f64) -> Vec<Line> {
    sample_disk(Point::ORIGIN, radius, LineProcessParams::new(eta, seed).unwrap())
        .unwrap()
        .lines
}

#[test]
fn disk_counts_are_poisson() {
    let (r, eta) = (5.0, 1.0);
    let counts: Vec<f64> = (0..REPS).map(|s| disk_lines(s, r, eta).len() as f64).collect();
    let (m, se, var) = mean_se(&counts);
    let mu = eta * PI * r;
    assert!((m - mu).abs() < 3.0 * se, "mean {m} vs {mu}");
    // sample variance of a Poisson count has variance ≈ (μ + 2μ²)/n
    let var_se = ((mu + 2.0 * mu * mu) / REPS as f64).sqrt();
    assert!((var - mu).abs() < 3.0 * var_se, "variance {var} vs {mu}");
}

#[test]
fn segment_hits_scale_with_length() {
    let eta = 0.7;
    let (a, b) = (Point::new(-1.5, 0.2), Point::new(1.5, 0.2));
    let hits: Vec<f64> = (0..REPS)
        .map(|s| {
            disk_lines(s, 2.0, eta)
                .iter()
                .filter(|l| l.signed_distance(a) * l.signed_distance(b) < 0.0)
                .count() as f64
        })
        .collect();
    let (m, se, _) = mean_se(&hits);
    assert!((m - eta * 3.0).abs() < 3.0 * se, "{m}");
}

#[test]
fn chord_length_per_area() {
    // lines of a covering disk clipped to a 4 × 4 square
    let eta = 1.3;
    let sq = Rect::new(-2.0, -2.0, 2.0, 2.0).unwrap();
    let lens: Vec<f64> = (0..REPS)
        .map(|s| {
            disk_lines(s, 8f64.sqrt(), eta)
                .iter()
                .filter_map(|l| clip_line_to_rect(l, &sq))
                .map(|c| c.length())
                .sum()
        })
        .collect();
    let (m, se, _) = mean_se(&lens);
    let expected = 16.0 * length_intensity(eta);
    assert!((expected - 16.0 * PI * eta / 2.0).abs() < 1e-12);
    assert!((m - expected).abs() < 3.0 * se, "{m} vs {expected}");
}

#[test]
fn cross_intersections_per_area() {
    let sq = Rect::new(-2.0, -2.0, 2.0, 2.0).unwrap();
    let counts: Vec<f64> = (0..REPS)
        .map(|s| {
            let p = LineProcessParams::new(1.0, s).unwrap();
            let a = sample_disk(Point::ORIGIN, 3.0, p).unwrap();
            let mut b = a.clone();
            b.lines.clear();
            sample_disk_into(&mut stream_rng(s, 9), Point::ORIGIN, 3.0, 1.0, &mut b.lines);
            intersection_angle_samples(&a, &b)
                .iter()
                .filter(|(q, _)| sq.contains(*q))
                .count() as f64
        })
        .collect();
    let (m, se, _) = mean_se(&counts);
    let expected = 16.0 * PI / 2.0;
    assert!((m - expected).abs() < 3.0 * se, "{m} vs {expected}");
}

#[test]
fn crossing_angles_follow_half_sine() {
    let radius = 3.0;
    let mut angles = Vec::new();
    for s in 0..REPS {
        let mut rng = stream_rng(s, 4);
        let a0 = Line::new(0.0, rand::Rng::random::<f64>(&mut rng) * PI);
        let a = LineSample {
            lines: vec![a0],
            window: SampleWindow::Disk {
                center: Point::ORIGIN,
                radius,
            },
            params: LineProcessParams::new(1.0, s).unwrap(),
        };
        let b = sample_disk(Point::ORIGIN, radius, LineProcessParams::new(1.0, s).unwrap()).unwrap();
        angles.extend(
            intersection_angle_samples(&a, &b)
                .into_iter()
                .filter(|(q, _)| q.norm() <= radius)
                .map(|(_, xi)| xi),
        );
    }
    angles.sort_by(f64::total_cmp);
    let n = angles.len() as f64;
    let d = angles
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = (1.0 - x.cos()) / 2.0;
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.63 / n.sqrt(), "KS distance {d} over {n} angles");
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let a = disk_lines(42, 4.0, 1.0);
    assert_eq!(a, disk_lines(42, 4.0, 1.0));
    assert_ne!(a, disk_lines(43, 4.0, 1.0));
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    sample_disk_into(&mut stream_rng(42, 1), Point::ORIGIN, 4.0, 1.0, &mut s1);
    sample_disk_into(&mut stream_rng(42, 2), Point::ORIGIN, 4.0, 1.0, &mut s2);
    assert_ne!(s1, s2);
}
