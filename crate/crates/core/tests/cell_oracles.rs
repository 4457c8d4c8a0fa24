use std::f64::consts::PI;

use linenet::cell::{
    estimate_jm_mc, jm_asymptotic, jm_quadrature, perimeter, sample_two_point_cell, two_point_cell,
    ConvexCell,
};
use linenet::geom::clip_line_to_rect;
use linenet::lineproc::{sample_disk_into, sample_tube_band, stream_rng, tube_rect};
use linenet::{Line, Point, Rect};
use rand::Rng;

mod common;
use common::{arrangement_cell, random_instance, same_vertex_set, value};

#[test]
fn half_plane_cell_matches_arrangement() {
    for seed in 0..100 {
        let (lines, v1, v2, w) = random_instance(seed);
        let cell = two_point_cell(&lines, v1, v2, &w).unwrap();
        let oracle = arrangement_cell(&lines, v1, v2, &w);
        assert!(
            same_vertex_set(&cell.vertices, &oracle),
            "seed {seed}: {:?} vs {:?}",
            cell.vertices,
            oracle
        );
    }
}

fn contains(cell: &ConvexCell, q: Point, tol: f64) -> bool {
    let v = &cell.vertices;
    (0..v.len()).all(|i| (v[(i + 1) % v.len()] - v[i]).cross(q - v[i]) >= -tol)
}

#[test]
fn cells_are_convex_and_contain_generators() {
    for seed in 100..400 {
        let (lines, v1, v2, w) = random_instance(seed);
        let cell = two_point_cell(&lines, v1, v2, &w).unwrap();
        let v = &cell.vertices;
        assert!(v.len() >= 3);
        for i in 0..v.len() {
            let (a, b, c) = (v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]);
            assert!((b - a).cross(c - b) >= -1e-9, "seed {seed}: not convex");
        }
        assert!(contains(&cell, v1, 1e-9) && contains(&cell, v2, 1e-9));
        for l in &lines {
            let sides: Vec<f64> = v.iter().map(|&q| value(l, q)).collect();
            let crosses = sides.iter().any(|&s| s > 1e-9) && sides.iter().any(|&s| s < -1e-9);
            let separating = value(l, v1) * value(l, v2) < 0.0;
            assert!(separating || !crosses, "seed {seed}: retained line crosses the cell");
        }
    }
}

#[test]
fn adding_a_line_never_grows_the_cell() {
    for seed in 400..600 {
        let (mut lines, v1, v2, w) = random_instance(seed);
        let before = two_point_cell(&lines, v1, v2, &w).unwrap();
        let mut rng = stream_rng(seed, 1);
        lines.push(Line::new(rng.random_range(-7.0..7.0), rng.random_range(0.0..PI)));
        let after = two_point_cell(&lines, v1, v2, &w).unwrap();
        assert!(after.vertices.iter().all(|&q| contains(&before, q, 1e-9)));
        assert!(perimeter(&after).unwrap() <= perimeter(&before).unwrap() + 1e-9);
    }
}

#[test]
fn perimeter_matches_independent_sum() {
    for seed in 600..700 {
        let (lines, v1, v2, w) = random_instance(seed);
        let cell = two_point_cell(&lines, v1, v2, &w).unwrap();
        let v = &cell.vertices;
        let mut acc = 0.0;
        for (i, a) in v.iter().enumerate() {
            let b = if i + 1 == v.len() { v[0] } else { v[i + 1] };
            acc += ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        }
        let p = perimeter(&cell).unwrap();
        assert!((p - acc).abs() <= 1e-9 * acc);
    }
}

/// Non-separating lines meeting the tube, by rejection from a covering disk.
fn tube_by_rejection(seed: u64, h: f64, w: f64, eta: f64) -> Vec<Line> {
    let mut rng = stream_rng(seed, 7);
    let rect = tube_rect(h, w).unwrap();
    let radius = (h + w).hypot(w);
    let mut lines = Vec::new();
    sample_disk_into(&mut rng, Point::ORIGIN, radius, eta, &mut lines);
    let (v1, v2) = (Point::new(-h, 0.0), Point::new(h, 0.0));
    lines
        .into_iter()
        .filter(|l| clip_line_to_rect(l, &rect).is_some() && value(l, v1) * value(l, v2) >= 0.0)
        .collect()
}

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn tube_sampler_matches_rejection_route() {
    let (h, w, eta, reps): (f64, f64, f64, u64) = (5.0, 5.0, 1.0, 4000);
    // semi-perimeter of the tube minus the separating measure of the segment
    let expected = eta * ((2.0 * (h + w) + 2.0 * w) - 2.0 * h);
    assert!((expected - 20.0).abs() < 1e-12);
    let (mut direct, mut oracle) = (Vec::new(), Vec::new());
    let (mut nd, mut no) = (0.0, 0.0);
    for seed in 0..reps {
        let mut rng = stream_rng(seed, 3);
        let mut lines = Vec::new();
        sample_tube_band(&mut rng, h, 0.0, w, eta, &mut lines);
        nd += lines.len() as f64;
        direct.extend(lines.iter().map(|l| l.alpha()));
        let r = tube_by_rejection(seed, h, w, eta);
        no += r.len() as f64;
        oracle.extend(r.iter().map(|l| l.alpha()));
    }
    let se = (expected / reps as f64).sqrt();
    assert!((nd / reps as f64 - expected).abs() < 3.0 * se, "direct mean {}", nd / reps as f64);
    assert!((no / reps as f64 - expected).abs() < 3.0 * se, "oracle mean {}", no / reps as f64);
    let (n1, n2) = (direct.len() as f64, oracle.len() as f64);
    let d = ks_two_sample(direct, oracle);
    // 1% critical value of the two-sample statistic
    assert!(d < 1.63 * ((n1 + n2) / (n1 * n2)).sqrt(), "KS distance {d}");
}

#[test]
fn tube_collapses_to_nothing() {
    let mut total = 0;
    for seed in 0..200 {
        let mut lines = Vec::new();
        sample_tube_band(&mut stream_rng(seed, 0), 3.0, 0.0, 1e-9, 1.0, &mut lines);
        total += lines.len();
    }
    assert_eq!(total, 0);
}

#[test]
fn widened_cells_match_full_window_cells() {
    // J_10 from cells cut out of a large window of disk-sampled lines
    let (m, reps) = (10.0, 4000u64);
    let w = Rect::new(-30.0, -25.0, 30.0, 25.0).unwrap();
    let (v1, v2) = (Point::new(-m / 2.0, 0.0), Point::new(m / 2.0, 0.0));
    let mut xs = Vec::new();
    for seed in 0..reps {
        let mut lines = Vec::new();
        sample_disk_into(&mut stream_rng(seed, 11), Point::ORIGIN, 40.0, 1.0, &mut lines);
        let cell = two_point_cell(&lines, v1, v2, &w).unwrap();
        assert!(cell.closed);
        xs.push(perimeter(&cell).unwrap() - 2.0 * m);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let tube = estimate_jm_mc(m, 1.0, reps as usize, 5).unwrap();
    let quad = jm_quadrature(m, 1e-6).unwrap().value;
    assert!((mean - quad).abs() < 3.0 * se, "window {mean} ± {se} vs {quad}");
    let tse = tube.std_error.unwrap();
    assert!((tube.value - quad).abs() < 3.0 * tse, "tube {} ± {tse} vs {quad}", tube.value);
    assert!((mean - tube.value).abs() < 3.0 * se.hypot(tse));
}

#[test]
fn intensity_scaling() {
    let a = estimate_jm_mc(50.0, 2.0, 4000, 21).unwrap();
    let b = estimate_jm_mc(100.0, 1.0, 4000, 22).unwrap();
    let se = (a.std_error.unwrap()).hypot(b.std_error.unwrap() / 2.0);
    assert!((a.value - b.value / 2.0).abs() < 3.0 * se, "{} vs {}", a.value, b.value / 2.0);
}

#[test]
fn mc_at_ten_thousand_matches_asymptotic() {
    let r = estimate_jm_mc(1e4, 1.0, 10_000, 31).unwrap();
    let semi = r.value / 2.0;
    let se = r.std_error.unwrap() / 2.0;
    let target = jm_asymptotic(1e4) / 2.0;
    assert!((target - 15.2723).abs() < 5e-5);
    assert!((semi - target).abs() < 3.0 * se + 0.1, "{semi} ± {se}");
}

#[test]
fn widening_reports_state() {
    let mut rng = stream_rng(1, 0);
    let s = sample_two_point_cell(&mut rng, 1e3, 1.0, 1.0).unwrap();
    assert!(s.widenings > 0);
    assert!(s.cell.closed);
    let rect = tube_rect(500.0, s.half_width).unwrap();
    assert!(s.cell.vertices.iter().all(|&q| rect.contains_strictly(q)));
}

#[test]
fn quadrature_differences_follow_the_logarithm() {
    let a = jm_quadrature(1e2, 1e-6).unwrap().value;
    let b = jm_quadrature(1e4, 1e-6).unwrap().value;
    assert!(((b - a) - 8.0 / 3.0 * 100f64.ln()).abs() < 0.3);
}

#[test]
fn quadrature_reference_values() {
    // independent scipy evaluation of the Cartesian double integral
    let frozen = [
        (1.0, 10.601_951_694_0),
        (10.0, 13.344_690_942_7),
        (100.0, 18.467_318_336_8),
        (1000.0, 24.432_233_365_0),
        (1e4, 30.548_120_133_1),
        (1e5, 36.685_247_136_6),
    ];
    for (m, v) in frozen {
        let r = jm_quadrature(m, 1e-7).unwrap();
        assert!((r.value - v).abs() < 1e-6 * v, "m={m}: {} vs {v}", r.value);
    }
}
