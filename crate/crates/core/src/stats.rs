//! Route-length statistics of a network over a point configuration.
//!
//! For distinct configuration points `x_i, x_j` with network route length
//! `ℓ(x_i, x_j)` the module reports the mean excess `ℓ − |x_i − x_j|` and the
//! mean ratio `ℓ / |x_i − x_j| − 1`, either over all pairs or over a uniform
//! sample of distinct pairs. It also measures how far a configuration is
//! from a uniform law, by optimal assignment against a reference sample and
//! by box counting.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geom::Point;
use crate::lineproc::stream_rng;
use crate::netbuild::{Configuration, PlanarNetwork};

/// Point pairs closer than this are treated as coincident.
pub const COINCIDENT: f64 = 1e-9;

/// Largest configuration for which [`PairSamplePlan::AllPairs`] is accepted.
pub const ALL_PAIRS_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy)]
struct HeapItem(f64, usize);

impl PartialEq for HeapItem {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o).is_eq()
    }
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Single-source shortest-path distances; unreachable nodes are `+∞`.
///
/// When `targets` is given the search stops once all of them are settled and
/// only their entries are guaranteed final.
pub fn dijkstra(net: &PlanarNetwork, source: usize, targets: Option<&[usize]>) -> Vec<f64> {
    let n = net.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut pending = match targets {
        Some(t) => {
            let mut want = vec![false; n];
            let mut k = 0;
            for &x in t {
                if !want[x] {
                    want[x] = true;
                    k += 1;
                }
            }
            Some((want, k))
        }
        None => None,
    };
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse(HeapItem(0.0, source)));
    while let Some(Reverse(HeapItem(d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if let Some((want, left)) = pending.as_mut() {
            if want[u] {
                *left -= 1;
                if *left == 0 {
                    break;
                }
            }
        }
        for &(v, w) in net.neighbors(u) {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse(HeapItem(nd, v)));
            }
        }
    }
    dist
}

/// Network node at `p`.
pub fn node_of(net: &PlanarNetwork, p: Point) -> Result<usize> {
    net.locate(p).ok_or(Error::NodeMismatch { x: p.x, y: p.y })
}

/// Shortest-path length between two network nodes given by position.
pub fn route_length(net: &PlanarNetwork, a: Point, b: Point) -> Result<f64> {
    let (ia, ib) = (node_of(net, a)?, node_of(net, b)?);
    let d = dijkstra(net, ia, Some(&[ib]))[ib];
    if !d.is_finite() {
        return Err(Error::Disconnected(ia, ib));
    }
    check_route(d, net.nodes()[ia].dist(net.nodes()[ib]));
    Ok(d)
}

fn check_route(route: f64, euclid: f64) {
    assert!(
        route >= euclid * (1.0 - 1e-12) - 1e-12,
        "route {route} shorter than straight line {euclid}"
    );
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairSamplePlan {
    AllPairs,
    /// `count` distinct unordered pairs drawn uniformly without replacement.
    RandomPairs { count: usize, seed: u64 },
}

impl PairSamplePlan {
    /// All pairs up to [`ALL_PAIRS_LIMIT`] points, else `min(2000, N)` sampled pairs.
    pub fn default_for(n: usize, seed: u64) -> Self {
        if n <= ALL_PAIRS_LIMIT {
            PairSamplePlan::AllPairs
        } else {
            PairSamplePlan::RandomPairs {
                count: 2000.min(pair_count(n)),
                seed,
            }
        }
    }

    /// Unordered index pairs `i < j`, sorted.
    pub fn pairs(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        let total = pair_count(n);
        match *self {
            PairSamplePlan::AllPairs => {
                if n > ALL_PAIRS_LIMIT {
                    return Err(Error::InvalidArgument(format!(
                        "all-pairs statistics are limited to {ALL_PAIRS_LIMIT} points, got {n}"
                    )));
                }
                Ok((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect())
            }
            PairSamplePlan::RandomPairs { count, seed } => {
                if count == 0 || count > total {
                    return Err(Error::InvalidArgument(format!(
                        "pair count must be in 1..={total}, got {count}"
                    )));
                }
                let mut rng = stream_rng(seed, 0);
                let mut pairs: Vec<_> = rand::seq::index::sample(&mut rng, total, count)
                    .into_iter()
                    .map(|k| unrank_pair(n, k))
                    .collect();
                pairs.sort_unstable();
                Ok(pairs)
            }
        }
    }
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Pair with lexicographic rank `k` among `{(i, j) : i < j < n}`.
fn unrank_pair(n: usize, k: usize) -> (usize, usize) {
    // row i starts at rank i·n − i(i+1)/2
    let start = |i: usize| i * n - i * (i + 1) / 2;
    let (mut lo, mut hi) = (0usize, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if start(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, lo + 1 + (k - start(lo)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub euclid: f64,
    pub route: f64,
}

impl PairRecord {
    pub fn excess(&self) -> f64 {
        self.route - self.euclid
    }

    /// `None` for coincident points.
    pub fn ratio(&self) -> Option<f64> {
        (self.euclid >= COINCIDENT).then(|| self.route / self.euclid - 1.0)
    }
}

/// Route lengths for every pair of the plan, one Dijkstra per source point.
pub fn pair_routes(
    net: &PlanarNetwork,
    config: &Configuration,
    plan: &PairSamplePlan,
    exec: Exec,
) -> Result<Vec<PairRecord>> {
    let pts = config.points();
    let node: Vec<usize> = pts.iter().map(|&p| node_of(net, p)).collect::<Result<_>>()?;
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, j) in plan.pairs(pts.len())? {
        by_source.entry(i).or_default().push(j);
    }
    let groups: Vec<(usize, Vec<usize>)> = by_source.into_iter().collect();
    let per_source = exec.try_map(groups.len(), |g| {
        let (i, ref js) = groups[g];
        let targets: Vec<usize> = js.iter().map(|&j| node[j]).collect();
        let dist = dijkstra(net, node[i], Some(&targets));
        js.iter()
            .map(|&j| {
                let route = dist[node[j]];
                if !route.is_finite() {
                    return Err(Error::Disconnected(node[i], node[j]));
                }
                let euclid = pts[i].dist(pts[j]);
                check_route(route, euclid);
                Ok(PairRecord { i, j, euclid, route })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per_source.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub excess: f64,
    pub ratio: f64,
    /// Pairs entering the excess average.
    pub pairs_used: usize,
    /// Coincident pairs left out of the ratio average.
    pub excluded_coincident: usize,
    /// Sampled plans only; includes the finite-population correction.
    pub excess_std_error: Option<f64>,
    pub ratio_std_error: Option<f64>,
}

/// Mean and standard error of a sample of `k` values drawn without
/// replacement from a population of `total`.
fn mean_se(values: &[f64], total: usize) -> (f64, f64) {
    let k = values.len();
    let mean = values.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let fpc = if total > 1 {
        ((total - k) as f64 / (total - 1) as f64).max(0.0)
    } else {
        0.0
    };
    (mean, (var / k as f64 * fpc).sqrt())
}

/// Summary of per-pair records. The ratio is `NaN` when every pair is
/// coincident.
pub fn summarize(records: &[PairRecord], sampled_from: Option<usize>) -> StatReport {
    let excess: Vec<f64> = records.iter().map(PairRecord::excess).collect();
    let ratio: Vec<f64> = records.iter().filter_map(PairRecord::ratio).collect();
    let total = sampled_from.unwrap_or(records.len());
    let (e, e_se) = mean_se(&excess, total);
    let (r, r_se) = if ratio.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        // the coincident fraction is assumed the same in sample and population
        let scaled = (total as f64 * ratio.len() as f64 / records.len() as f64).round() as usize;
        mean_se(&ratio, scaled.max(ratio.len()))
    };
    StatReport {
        excess: e,
        ratio: r,
        pairs_used: records.len(),
        excluded_coincident: records.len() - ratio.len(),
        excess_std_error: sampled_from.map(|_| e_se),
        ratio_std_error: sampled_from.map(|_| r_se),
    }
}

fn report(net: &PlanarNetwork, config: &Configuration, plan: &PairSamplePlan, exec: Exec) -> Result<StatReport> {
    let records = pair_routes(net, config, plan, exec)?;
    let sampled_from = match plan {
        PairSamplePlan::AllPairs => None,
        PairSamplePlan::RandomPairs { .. } => Some(pair_count(config.n())),
    };
    Ok(summarize(&records, sampled_from))
}

/// Mean route-length excess (the ratio field is filled when defined).
pub fn excess_stat(net: &PlanarNetwork, config: &Configuration, plan: &PairSamplePlan) -> Result<StatReport> {
    report(net, config, plan, Exec::default())
}

/// Mean route-length ratio minus one over non-coincident pairs.
pub fn ratio_stat(net: &PlanarNetwork, config: &Configuration, plan: &PairSamplePlan) -> Result<StatReport> {
    let r = report(net, config, plan, Exec::default())?;
    if r.excluded_coincident == r.pairs_used {
        return Err(Error::CoincidentPoints);
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    /// Uniform on the configuration window.
    UniformSquare,
    /// Uniform on the disk of the same area centred in the window.
    UniformDisk,
}

impl Reference {
    pub fn sample(self, config: &Configuration, size: usize, seed: u64) -> Vec<Point> {
        let mut rng = stream_rng(seed, 1);
        let side = config.side();
        match self {
            Reference::UniformSquare => (0..size)
                .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
                .collect(),
            Reference::UniformDisk => {
                let c = Point::new(side / 2.0, side / 2.0);
                let r = side / std::f64::consts::PI.sqrt();
                (0..size)
                    .map(|_| {
                        let rad = r * rng.random::<f64>().sqrt();
                        let th = rng.random::<f64>() * std::f64::consts::TAU;
                        c + Point::new(rad * th.cos(), rad * th.sin())
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquidistReport {
    #[serde(rename = "L")]
    pub l: f64,
    pub cost: f64,
    pub reference: Reference,
    pub reference_sample_size: usize,
    pub seed: u64,
}

/// Minimum over bijections `σ` of `(1/n) Σ min(1, |x_i − y_σ(i)| / L)`.
pub fn matching_cost(xs: &[Point], ys: &[Point], l: f64) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch {
            points: xs.len(),
            reference: ys.len(),
        });
    }
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("L must be positive, got {l}")));
    }
    if xs.is_empty() {
        return Ok(0.0);
    }
    let n = xs.len();
    let cost: Vec<f64> = xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| (x.dist(*y) / l).min(1.0)))
        .collect();
    let assignment = min_cost_assignment(&cost, n);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok((total / n as f64).clamp(0.0, 1.0))
}

/// Truncated transport cost between the configuration and a fresh reference
/// sample of equal size.
pub fn equidist_cost(
    config: &Configuration,
    l: f64,
    reference: Reference,
    reference_sample_size: usize,
    seed: u64,
) -> Result<EquidistReport> {
    if reference_sample_size != config.n() {
        return Err(Error::SizeMismatch {
            points: config.n(),
            reference: reference_sample_size,
        });
    }
    let ys = reference.sample(config, reference_sample_size, seed);
    Ok(EquidistReport {
        l,
        cost: matching_cost(config.points(), &ys, l)?,
        reference,
        reference_sample_size,
        seed,
    })
}

/// Row-to-column assignment minimising the total of a dense `n × n`
/// row-major cost matrix (shortest augmenting paths with potentials, `O(n³)`).
pub fn min_cost_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    // 1-based arrays; column 0 is the virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}

/// `(1/n) Σ_boxes |N(box) − λ²|` over the partition of the window into
/// boxes of side `λ`.
pub fn box_count_equidist(config: &Configuration, lambda: f64) -> Result<f64> {
    let side = config.side();
    let ratio = side / lambda;
    let k = ratio.round();
    if !(lambda > 0.0) || k < 1.0 || (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::NonIntegralRatio {
            what: "window side / lambda",
            ratio,
        });
    }
    let k = k as usize;
    let mut counts = vec![0usize; k * k];
    let idx = |v: f64| ((v / side * k as f64).floor() as usize).min(k - 1);
    for p in config.points() {
        counts[idx(p.y) * k + idx(p.x)] += 1;
    }
    let expect = config.n() as f64 / (k * k) as f64;
    Ok(counts.iter().map(|&c| (c as f64 - expect).abs()).sum::<f64>() / config.n() as f64)
}
