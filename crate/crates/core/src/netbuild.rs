//! Hierarchical low-cost network construction.
//!
//! Starting from a spanning tree on the configuration, the builder adds
//!
//! 1. a medium-scale square grid of side `s` covering `[0, √n]²`,
//! 2. "hot-spot" boxes: cells of a finer grid (side `t`, refining the medium
//!    grid) holding two or more points, with their perimeters and a short
//!    connector from each point inside to the nearest side,
//! 3. Poisson lines of intensity `η` clipped to the window,
//!
//! and planarises the result so that every crossing is a routable node.
//! The exact Steiner tree is replaced by the Euclidean minimum spanning tree,
//! which is at most `2/√3` times longer.

use std::collections::{BTreeMap, HashMap};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{clip_line_to_rect, intersect_segments, Point, Rect, Segment};
use crate::lineproc::{sample_disk_into, stream_rng};

/// Distance below which two network nodes are identified.
pub const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    Tree,
    MediumGrid,
    HotspotCell,
    HotspotConnector,
    PoissonLine,
}

impl Layer {
    pub const ALL: [Layer; 5] = [
        Layer::Tree,
        Layer::MediumGrid,
        Layer::HotspotCell,
        Layer::HotspotConnector,
        Layer::PoissonLine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Tree => "Tree",
            Layer::MediumGrid => "MediumGrid",
            Layer::HotspotCell => "HotspotCell",
            Layer::HotspotConnector => "HotspotConnector",
            Layer::PoissonLine => "PoissonLine",
        }
    }
}

/// `n ≥ 2` points in the square `[0, side]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<Point>,
    side: f64,
}

impl Configuration {
    pub fn new(points: Vec<Point>, side: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a configuration needs at least 2 points, got {}",
                points.len()
            )));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::InvalidArgument(format!("window side must be positive, got {side}")));
        }
        if let Some(p) = points
            .iter()
            .find(|p| !p.is_finite() || p.x < 0.0 || p.y < 0.0 || p.x > side || p.y > side)
        {
            return Err(Error::InvalidArgument(format!(
                "point ({}, {}) lies outside [0, {side}]²",
                p.x, p.y
            )));
        }
        Ok(Configuration { points, side })
    }

    /// Window `[0, √n]²`.
    pub fn in_unit_density_window(points: Vec<Point>) -> Result<Self> {
        let side = (points.len() as f64).sqrt();
        Configuration::new(points, side)
    }

    /// `n` independent uniform points in `[0, √n]²`.
    pub fn uniform(n: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        let side = (n as f64).sqrt();
        let mut rng = stream_rng(seed, u64::MAX);
        let points = (0..n)
            .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
            .collect();
        Configuration::new(points, side)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn window(&self) -> Rect {
        Rect::square(self.side).expect("side validated positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub intensity: f64,
    /// Medium grid spacing.
    pub s: f64,
    /// Hot-spot grid spacing.
    pub t: f64,
    pub seed: u64,
}

impl BuildParams {
    /// Default spacings `s ≈ (ln n)^{1/3}` and `t ≈ (ln n)^{−1/6}`, rounded so
    /// that `side/s` and `s/t` are integers.
    pub fn for_configuration(config: &Configuration, intensity: f64, seed: u64) -> Self {
        let (s, t) = default_spacings(config.side(), config.n());
        BuildParams { intensity, s, t, seed }
    }

    /// Returns `(side/s, s/t)`.
    pub fn validate(&self, side: f64) -> Result<(usize, usize)> {
        if !(self.intensity >= 0.0) || !self.intensity.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "intensity must be finite and non-negative, got {}",
                self.intensity
            )));
        }
        if !(self.s > 0.0 && self.t > 0.0) {
            return Err(Error::InvalidArgument("grid spacings must be positive".into()));
        }
        let ks = integral_ratio("window side / s", side, self.s)?;
        let kt = integral_ratio("s / t", self.s, self.t)?;
        Ok((ks, kt))
    }
}

pub fn default_spacings(side: f64, n: usize) -> (f64, f64) {
    let ln = (n.max(2) as f64).ln();
    let ks = ((side / ln.cbrt()).round() as usize).max(1);
    let s = side / ks as f64;
    let kt = ((s * ln.powf(1.0 / 6.0)).round() as usize).max(1);
    (s, s / kt as f64)
}

fn integral_ratio(what: &'static str, a: f64, b: f64) -> Result<usize> {
    let r = a / b;
    let k = r.round();
    if k < 1.0 || (r - k).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::NonIntegralRatio { what, ratio: r });
    }
    Ok(k as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub layer: Layer,
}

/// Hash of quantised coordinates for snapping points onto existing nodes.
#[derive(Debug, Clone, Default)]
struct NodeLocator {
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl NodeLocator {
    fn key(p: Point) -> (i64, i64) {
        ((p.x / SNAP).floor() as i64, (p.y / SNAP).floor() as i64)
    }

    fn find(&self, nodes: &[Point], p: Point) -> Option<usize> {
        let (kx, ky) = Self::key(p);
        let mut best: Option<(usize, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        let d = nodes[id].dist(p);
                        if d <= SNAP && best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((id, d));
                        }
                    }
                }
            }
        }
        best.map(|(id, _)| id)
    }

    fn insert(&mut self, p: Point, id: usize) {
        self.cells.entry(Self::key(p)).or_default().push(id);
    }
}

/// Undirected graph embedded in the plane, with a CSR adjacency index.
#[derive(Debug, Clone)]
pub struct PlanarNetwork {
    nodes: Vec<Point>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<(usize, f64)>,
    locator: NodeLocator,
}

impl PlanarNetwork {
    pub fn from_parts(nodes: Vec<Point>, edges: Vec<Edge>) -> Result<Self> {
        if let Some(e) = edges.iter().find(|e| e.a >= nodes.len() || e.b >= nodes.len()) {
            return Err(Error::InvalidArgument(format!(
                "edge ({}, {}) refers to a missing node",
                e.a, e.b
            )));
        }
        if let Some(e) = edges.iter().find(|e| !(e.length >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative edge length {}", e.length)));
        }
        let mut degree = vec![0usize; nodes.len() + 1];
        for e in &edges {
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        let mut offsets = vec![0usize; nodes.len() + 1];
        for i in 0..nodes.len() {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0usize, 0.0); offsets[nodes.len()]];
        for e in &edges {
            adjacency[fill[e.a]] = (e.b, e.length);
            fill[e.a] += 1;
            adjacency[fill[e.b]] = (e.a, e.length);
            fill[e.b] += 1;
        }
        let mut locator = NodeLocator::default();
        for (i, p) in nodes.iter().enumerate() {
            locator.insert(*p, i);
        }
        Ok(PlanarNetwork {
            nodes,
            edges,
            offsets,
            adjacency,
            locator,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[self.offsets[node]..self.offsets[node + 1]]
    }

    /// Node within [`SNAP`] of `p`.
    pub fn locate(&self, p: Point) -> Option<usize> {
        self.locator.find(&self.nodes, p)
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn layer_length(&self, layer: Layer) -> f64 {
        self.edges.iter().filter(|e| e.layer == layer).map(|e| e.length).sum()
    }

    /// Connected-component label per node.
    pub fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.nodes.len());
        for e in &self.edges {
            uf.union(e.a, e.b);
        }
        (0..self.nodes.len()).map(|i| uf.find(i)).collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Per-layer network length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthAccounting {
    pub tree: f64,
    pub medium_grid: f64,
    pub hotspot_cell: f64,
    pub hotspot_connector: f64,
    pub poisson_line: f64,
    pub total: f64,
    /// Length of the spanning tree before any overlap with the grid was
    /// credited to the grid layer.
    pub baseline_tree_length: f64,
}

impl LengthAccounting {
    pub fn of(net: &PlanarNetwork, baseline_tree_length: f64) -> Self {
        let mut by_layer = [0.0; 5];
        for e in net.edges() {
            by_layer[e.layer as usize] += e.length;
        }
        LengthAccounting {
            tree: by_layer[0],
            medium_grid: by_layer[1],
            hotspot_cell: by_layer[2],
            hotspot_connector: by_layer[3],
            poisson_line: by_layer[4],
            total: by_layer.iter().sum(),
            baseline_tree_length,
        }
    }

    /// Network length in excess of the spanning tree.
    pub fn excess_over_tree(&self) -> f64 {
        self.total - self.baseline_tree_length
    }
}

/// Edges `(i, j)` of a Euclidean minimum spanning tree (dense Prim, `O(n²)`).
pub fn euclidean_mst(points: &[Point]) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let pc = points[cur];
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = (points[j] - pc).dot(points[j] - pc);
            if d < best[j] {
                best[j] = d;
                parent[j] = cur;
            }
            if best[j] < next_d {
                next_d = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next));
        cur = next;
    }
    edges
}

/// Distinct point locations (within [`SNAP`]) in first-seen order.
fn distinct_points(points: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    let mut loc = NodeLocator::default();
    for (i, &p) in points.iter().enumerate() {
        if let Some(j) = loc.find(&out, p) {
            warn!("point {i} at ({}, {}) coincides with an earlier point; merged", p.x, p.y);
            let _ = j;
            continue;
        }
        loc.insert(p, out.len());
        out.push(p);
    }
    out
}

/// Spanning-tree network on the configuration; coincident points are merged
/// with a logged warning.
pub fn steiner_surrogate(config: &Configuration) -> Result<PlanarNetwork> {
    let pts = distinct_points(config.points());
    let edges = euclidean_mst(&pts)
        .into_iter()
        .map(|(a, b)| Edge {
            a,
            b,
            length: pts[a].dist(pts[b]),
            layer: Layer::Tree,
        })
        .collect();
    PlanarNetwork::from_parts(pts, edges)
}

fn grid_coord(side: f64, k: usize, j: usize) -> f64 {
    if j == k {
        side
    } else {
        side * j as f64 / k as f64
    }
}

fn grid_segments(side: f64, k_fine: usize, stride: usize) -> Vec<Segment> {
    let mut out = Vec::new();
    for j in (0..=k_fine).step_by(stride) {
        let c = grid_coord(side, k_fine, j);
        out.push(Segment::new(Point::new(c, 0.0), Point::new(c, side)));
        out.push(Segment::new(Point::new(0.0, c), Point::new(side, c)));
    }
    out
}

/// Full vertical and horizontal lines at spacing `s`, both boundaries
/// included; total length `2(1 + side/s)·side`.
pub fn medium_grid(window: &Rect, s: f64) -> Result<Vec<Segment>> {
    let side = window.width();
    let k = integral_ratio("window side / s", side, s)?;
    Ok(grid_segments(side, k, 1)
        .into_iter()
        .map(|seg| {
            Segment::new(
                Point::new(seg.a.x + window.min.x, seg.a.y + window.min.y),
                Point::new(seg.b.x + window.min.x, seg.b.y + window.min.y),
            )
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hotspots {
    /// Fine-grid indices `(ix, iy)` of cells holding two or more points.
    pub indices: Vec<(usize, usize)>,
    pub cells: Vec<Rect>,
    pub connectors: Vec<Segment>,
}

impl Hotspots {
    /// Upper bound `4(n/2)t + n t/2` on the added length.
    pub fn length_bound(n: usize, t: f64) -> f64 {
        4.0 * (n as f64 / 2.0) * t + n as f64 * t / 2.0
    }

    pub fn added_length(&self) -> f64 {
        self.cells.iter().map(Rect::perimeter).sum::<f64>()
            + self.connectors.iter().map(Segment::length).sum::<f64>()
    }
}

pub fn hotspot_cells(config: &Configuration, t: f64) -> Result<Hotspots> {
    let side = config.side();
    let k = integral_ratio("window side / t", side, t)?;
    let mut buckets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let cell_of = |v: f64| ((v / side * k as f64).floor() as usize).min(k - 1);
    for (i, p) in config.points().iter().enumerate() {
        buckets.entry((cell_of(p.x), cell_of(p.y))).or_default().push(i);
    }
    let mut hs = Hotspots {
        indices: Vec::new(),
        cells: Vec::new(),
        connectors: Vec::new(),
    };
    for ((ix, iy), members) in buckets {
        if members.len() < 2 {
            continue;
        }
        let r = Rect::new(
            grid_coord(side, k, ix),
            grid_coord(side, k, iy),
            grid_coord(side, k, ix + 1),
            grid_coord(side, k, iy + 1),
        )?;
        for &i in &members {
            let p = config.points()[i];
            let options = [
                (p.x - r.min.x, Point::new(r.min.x, p.y)),
                (r.max.x - p.x, Point::new(r.max.x, p.y)),
                (p.y - r.min.y, Point::new(p.x, r.min.y)),
                (r.max.y - p.y, Point::new(p.x, r.max.y)),
            ];
            let (d, target) = options
                .into_iter()
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("four candidates");
            if d > 0.0 {
                hs.connectors.push(Segment::new(p, target));
            }
        }
        hs.indices.push((ix, iy));
        hs.cells.push(r);
    }
    assert!(hs.cells.len() <= config.n() / 2);
    Ok(hs)
}

/// Splits every segment at all intersections and endpoint contacts.
///
/// Zero-length segments are allowed and act as node markers: they force a
/// node at their location (splitting anything passing through it) but add
/// no edge.
pub fn planarize(segments: &[(Segment, Layer)]) -> Result<PlanarNetwork> {
    let mut nodes: Vec<Point> = Vec::new();
    let mut locator = NodeLocator::default();
    let mut node_id = |p: Point, nodes: &mut Vec<Point>| -> usize {
        if let Some(id) = locator.find(nodes, p) {
            return id;
        }
        locator.insert(p, nodes.len());
        nodes.push(p);
        nodes.len() - 1
    };

    let mut splits: Vec<Vec<(f64, usize)>> = Vec::with_capacity(segments.len());
    for (seg, _) in segments {
        let a = node_id(seg.a, &mut nodes);
        let b = node_id(seg.b, &mut nodes);
        splits.push(vec![(0.0, a), (1.0, b)]);
    }

    for (i, j) in candidate_pairs(segments) {
        let (si, sj) = (&segments[i].0, &segments[j].0);
        if let Some(p) = intersect_segments(si, sj)? {
            let id = node_id(p, &mut nodes);
            splits[i].push((si.project(p), id));
            splits[j].push((sj.project(p), id));
        }
    }

    let mut edges = Vec::new();
    for ((_, layer), mut cuts) in segments.iter().zip(splits) {
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cuts.dedup_by_key(|c| c.1);
        for w in cuts.windows(2) {
            let (u, v) = (w[0].1, w[1].1);
            if u != v {
                edges.push(Edge {
                    a: u,
                    b: v,
                    length: nodes[u].dist(nodes[v]),
                    layer: *layer,
                });
            }
        }
    }
    PlanarNetwork::from_parts(nodes, edges)
}

/// Sorted, unique index pairs of segments whose padded cell footprints in a
/// uniform bucket grid overlap.
fn candidate_pairs(segments: &[(Segment, Layer)]) -> Vec<(usize, usize)> {
    if segments.len() < 2 {
        return Vec::new();
    }
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (s, _) in segments {
        for p in [s.a, s.b] {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    let extent = (hi.x - lo.x).max(hi.y - lo.y).max(SNAP);
    let g = ((segments.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
    let cs = extent / g as f64;
    let pad = 4.0 * SNAP + 1e-12 * extent;
    let idx = |v: f64, o: f64| (((v - o) / cs).floor().max(0.0) as usize).min(g - 1);

    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); g * g];
    for (i, (s, _)) in segments.iter().enumerate() {
        let (x0, x1) = (s.a.x.min(s.b.x), s.a.x.max(s.b.x));
        let (cx0, cx1) = (idx(x0 - pad, lo.x), idx(x1 + pad, lo.x));
        let dx = s.b.x - s.a.x;
        for cx in cx0..=cx1 {
            // y-range of the segment over this column (padded)
            let (ylo, yhi) = if dx.abs() <= pad {
                (s.a.y.min(s.b.y), s.a.y.max(s.b.y))
            } else {
                let col_lo = (lo.x + cx as f64 * cs - pad).max(x0);
                let col_hi = (lo.x + (cx + 1) as f64 * cs + pad).min(x1);
                let ya = s.a.y + (col_lo - s.a.x) / dx * (s.b.y - s.a.y);
                let yb = s.a.y + (col_hi - s.a.x) / dx * (s.b.y - s.a.y);
                (ya.min(yb), ya.max(yb))
            };
            for cy in idx(ylo - pad, lo.y)..=idx(yhi + pad, lo.y) {
                buckets[cy * g + cx].push(i as u32);
            }
        }
    }
    let mut pairs = Vec::new();
    for b in &buckets {
        for (k, &i) in b.iter().enumerate() {
            for &j in &b[k + 1..] {
                pairs.push((i.min(j) as usize, i.max(j) as usize));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Merges collinear axis-parallel pieces so that no two input segments
/// overlap. Coverage is granted in layer order (grid, hot-spot sides, tree,
/// connectors, lines); later pieces keep only the uncovered remainder.
fn resolve_axis_overlaps(segments: Vec<(Segment, Layer)>) -> Vec<(Segment, Layer)> {
    fn priority(l: Layer) -> u8 {
        match l {
            Layer::MediumGrid => 0,
            Layer::HotspotCell => 1,
            Layer::Tree => 2,
            Layer::HotspotConnector => 3,
            Layer::PoissonLine => 4,
        }
    }
    fn bits(v: f64) -> u64 {
        (v + 0.0).to_bits()
    }

    let mut out = Vec::with_capacity(segments.len());
    // key: (vertical?, fixed coordinate) → (interval lo, hi, layer, order)
    let mut lines: BTreeMap<(bool, u64), Vec<(f64, f64, Layer, usize)>> = BTreeMap::new();
    for (order, (s, layer)) in segments.into_iter().enumerate() {
        if s.a == s.b {
            out.push((s, layer));
        } else if s.a.x == s.b.x {
            let (lo, hi) = (s.a.y.min(s.b.y), s.a.y.max(s.b.y));
            lines.entry((true, bits(s.a.x))).or_default().push((lo, hi, layer, order));
        } else if s.a.y == s.b.y {
            let (lo, hi) = (s.a.x.min(s.b.x), s.a.x.max(s.b.x));
            lines.entry((false, bits(s.a.y))).or_default().push((lo, hi, layer, order));
        } else {
            out.push((s, layer));
        }
    }
    for ((vertical, cbits), mut pieces) in lines {
        let c = f64::from_bits(cbits);
        pieces.sort_by(|a, b| priority(a.2).cmp(&priority(b.2)).then(a.3.cmp(&b.3)));
        let mut covered: Vec<(f64, f64)> = Vec::new();
        for (lo, hi, layer, _) in pieces {
            for (a, b) in subtract_intervals(lo, hi, &covered) {
                let seg = if vertical {
                    Segment::new(Point::new(c, a), Point::new(c, b))
                } else {
                    Segment::new(Point::new(a, c), Point::new(b, c))
                };
                out.push((seg, layer));
            }
            covered.push((lo, hi));
            covered.sort_by(|x, y| x.0.total_cmp(&y.0));
        }
    }
    out
}

fn subtract_intervals(lo: f64, hi: f64, covered: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut parts = vec![(lo, hi)];
    for &(cl, ch) in covered {
        let mut next = Vec::with_capacity(parts.len() + 1);
        for (a, b) in parts {
            if ch <= a || cl >= b {
                next.push((a, b));
                continue;
            }
            if cl > a {
                next.push((a, cl));
            }
            if ch < b {
                next.push((ch, b));
            }
        }
        parts = next;
    }
    parts.retain(|(a, b)| b - a > SNAP);
    parts
}

/// Builds the layered network and its length accounting.
pub fn build_network(config: &Configuration, params: &BuildParams) -> Result<(PlanarNetwork, LengthAccounting)> {
    let (ks, kt) = params.validate(config.side())?;
    let side = config.side();
    let k_fine = ks * kt;
    let window = config.window();

    let pts = distinct_points(config.points());
    let mst = euclidean_mst(&pts);
    let baseline_tree_length: f64 = mst.iter().map(|&(a, b)| pts[a].dist(pts[b])).sum();

    let mut segs: Vec<(Segment, Layer)> = Vec::new();
    for &(a, b) in &mst {
        segs.push((Segment::new(pts[a], pts[b]), Layer::Tree));
    }
    for seg in grid_segments(side, k_fine, kt) {
        segs.push((seg, Layer::MediumGrid));
    }
    let hs = hotspot_cells(config, side / k_fine as f64)?;
    for &(ix, iy) in &hs.indices {
        let x0 = grid_coord(side, k_fine, ix);
        let x1 = grid_coord(side, k_fine, ix + 1);
        let y0 = grid_coord(side, k_fine, iy);
        let y1 = grid_coord(side, k_fine, iy + 1);
        for (a, b) in [
            ((x0, y0), (x1, y0)),
            ((x1, y0), (x1, y1)),
            ((x0, y1), (x1, y1)),
            ((x0, y0), (x0, y1)),
        ] {
            segs.push((
                Segment::new(Point::new(a.0, a.1), Point::new(b.0, b.1)),
                Layer::HotspotCell,
            ));
        }
    }
    for c in &hs.connectors {
        segs.push((*c, Layer::HotspotConnector));
    }
    if params.intensity > 0.0 {
        let mut rng = stream_rng(params.seed, 0);
        let mut lines = Vec::new();
        let radius = side / std::f64::consts::SQRT_2;
        sample_disk_into(&mut rng, window.center(), radius, params.intensity, &mut lines);
        for l in &lines {
            if let Some(chord) = clip_line_to_rect(l, &window) {
                segs.push((chord, Layer::PoissonLine));
            }
        }
    }
    // every configuration point must be a node even where its tree edges were
    // absorbed by a grid line
    for p in &pts {
        segs.push((Segment::new(*p, *p), Layer::Tree));
    }

    let segs = resolve_axis_overlaps(segs);
    let mut net = planarize(&segs)?;

    // The tree only misses the grid when every point sits strictly inside a
    // single medium cell; attach it with one perpendicular to that cell's
    // nearest side.
    let comp = net.components();
    let tree_comp = net.locate(pts[0]).map(|i| comp[i]);
    let grid_comp = net.locate(Point::new(0.0, 0.0)).map(|i| comp[i]);
    if tree_comp != grid_comp {
        let s = side / ks as f64;
        let p = pts[0];
        let (cx, cy) = ((p.x / s).floor() * s, (p.y / s).floor() * s);
        let options = [
            (p.x - cx, Point::new(cx, p.y)),
            (cx + s - p.x, Point::new((cx + s).min(side), p.y)),
            (p.y - cy, Point::new(p.x, cy)),
            (cy + s - p.y, Point::new(p.x, (cy + s).min(side))),
        ];
        let (_, target) = options
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("four candidates");
        let mut segs = segs;
        segs.push((Segment::new(p, target), Layer::Tree));
        net = planarize(&resolve_axis_overlaps(segs))?;
    }

    let acc = LengthAccounting::of(&net, baseline_tree_length);
    Ok((net, acc))
}
