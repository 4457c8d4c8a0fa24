//! `linenet` command-line interface.
//!
//! Every command is a pure function of its arguments: randomness comes only
//! from explicit seeds, and artifacts contain no timestamps. A run manifest
//! (parameters, seeds, outputs, duration, status) is written to `--manifest`
//! or to stderr, including for failed runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use linenet::cell::{
    jm_asymptotic, jm_quadrature, perimeter, sample_two_point_cell, estimate_jm_mc_with, initial_half_width,
    McOptions,
};
use linenet::export::{cell_svg, fmt_real, network_from_json, network_svg, network_to_json};
use linenet::lineproc::{sample_separating, stream_rng};
use linenet::netbuild::{build_network, default_spacings, BuildParams, Configuration};
use linenet::search::{calibrate_thresholds, rejection_search, SearchSpec};
use linenet::stats::{equidist_cost, pair_routes, summarize, PairSamplePlan, Reference};
use linenet::{Error, Exec, Point, Rect};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "linenet", version, about = "Poisson line cells and short-route networks")]
struct Cli {
    /// Write the run manifest to this file instead of stderr.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
enum Command {
    /// Mean perimeter excess J_m of the two-point cell.
    Jm(JmArgs),
    /// Draw one sampled two-point cell as SVG.
    CellSvg(CellSvgArgs),
    /// Build the layered network for a configuration.
    Build(BuildArgs),
    /// Excess and ratio statistics of a network.
    Stats(StatsArgs),
    /// Truncated transport cost to a uniform reference sample.
    Equidist(EquidistArgs),
    /// Rejection search for a network meeting both excess thresholds.
    Search(SearchArgs),
    /// Sweep n and report seed-averaged statistics.
    Scaling(ScalingArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Jm(_) => "jm",
            Command::CellSvg(_) => "cell-svg",
            Command::Build(_) => "build",
            Command::Stats(_) => "stats",
            Command::Equidist(_) => "equidist",
            Command::Search(_) => "search",
            Command::Scaling(_) => "scaling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Mc,
    Quad,
    Asymptotic,
    All,
}

#[derive(Args, Debug, Serialize)]
struct JmArgs {
    /// Separations, comma separated (e.g. 1e2,1e3).
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    intensity: f64,
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    #[arg(long, value_enum, default_value_t = Method::All)]
    method: Method,
    /// Required for Monte Carlo.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance of the quadrature.
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    /// Starting tube half-width for the cell sampler.
    #[arg(long)]
    initial_half_width: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct JmRow {
    m: f64,
    intensity: f64,
    method: &'static str,
    value: f64,
    semi_excess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_tol: Option<f64>,
    replicates: usize,
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct CellSvgArgs {
    #[arg(long)]
    m: f64,
    #[arg(long, default_value_t = 1.0)]
    intensity: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the sampled lines as CSV (p, alpha) in the cell frame.
    #[arg(long)]
    lines_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ConfigArgs {
    /// CSV of x,y pairs (an optional header row is skipped).
    #[arg(long, conflicts_with = "uniform")]
    points: Option<PathBuf>,
    /// Window side for --points (default √n).
    #[arg(long, requires = "points")]
    side: Option<f64>,
    /// Generate n uniform points in [0, √n]² from --seed.
    #[arg(long)]
    uniform: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct NetArgs {
    #[arg(long, default_value_t = 0.1)]
    intensity: f64,
    /// Medium grid spacing (default from n).
    #[arg(long)]
    s: Option<f64>,
    /// Hot-spot grid spacing (default from n).
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    net: NetArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_json: PathBuf,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// Length accounting JSON (stdout if absent).
    #[arg(long)]
    out_accounting: Option<PathBuf>,
    /// Write the configuration as CSV.
    #[arg(long)]
    out_points: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    #[arg(long)]
    network: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Seed of a --uniform configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// `all` or a number of distinct random pairs.
    #[arg(long, default_value = "all")]
    pairs: String,
    #[arg(long)]
    pair_seed: Option<u64>,
    /// StatReport JSON (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-pair CSV (i, j, euclid, route, excess, ratio).
    #[arg(long)]
    pairs_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ReferenceArg {
    Square,
    Disk,
}

#[derive(Args, Debug, Serialize)]
struct EquidistArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long = "L")]
    l: f64,
    #[arg(long, value_enum, default_value_t = ReferenceArg::Square)]
    reference: ReferenceArg,
    /// Seeds the configuration (with --uniform) and reference sample r
    /// (seed + r).
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    net: NetArgs,
    /// Attempt k uses build seed `seed + k`.
    #[arg(long)]
    seed: u64,
    /// Pilot builds use seeds `pilot_seed + 1, …` (default seed + 2³²).
    #[arg(long)]
    pilot_seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pilot: usize,
    #[arg(long)]
    length_threshold: Option<f64>,
    #[arg(long)]
    excess_threshold: Option<f64>,
    #[arg(long, default_value_t = 10)]
    max_attempts: usize,
    /// Number of random pairs in the fixed route-excess plan.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    /// JSON search log (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted network JSON.
    #[arg(long)]
    out_network: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ScalingArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0.2)]
    intensity: f64,
    /// Number of seeds per n.
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    /// Run k uses seed `seed + k`.
    #[arg(long)]
    seed: u64,
    /// Random pairs per network (capped at the number of pairs).
    #[arg(long, default_value_t = 2000)]
    pairs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    parameters: serde_json::Value,
    seeds: Vec<u64>,
    version: &'static str,
    outputs: Vec<String>,
    duration_seconds: f64,
    status: &'a str,
    error: Option<String>,
}

/// Failure of argument validation, reported with exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Default)]
struct Run {
    outputs: Vec<String>,
    seeds: Vec<u64>,
}

impl Run {
    /// Writes `text` to `path`, or to stdout when `path` is `None`.
    fn emit(&mut self, path: Option<&Path>, text: &str) -> anyhow::Result<()> {
        match path {
            Some(p) => {
                fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
                self.outputs.push(p.display().to_string());
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                self.outputs.push("-".into());
            }
        }
        Ok(())
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn read_points(path: &Path) -> anyhow::Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut pts = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(x), Some(y)) => pts.push(Point::new(x, y)),
            _ if i == 0 => continue,
            _ => bail!("{}: row {} is not an x,y pair", path.display(), i + 1),
        }
    }
    Ok(pts)
}

fn points_csv(pts: &[Point]) -> anyhow::Result<String> {
    let rows: Vec<Vec<String>> = pts.iter().map(|p| vec![fmt_real(p.x), fmt_real(p.y)]).collect();
    csv_text(&["x", "y"], &rows)
}

fn load_config(args: &ConfigArgs, seed: Option<u64>) -> anyhow::Result<Configuration> {
    match (&args.points, args.uniform) {
        (Some(path), _) => {
            let pts = read_points(path)?;
            let side = args.side.unwrap_or((pts.len() as f64).sqrt());
            Ok(Configuration::new(pts, side)?)
        }
        (None, Some(n)) => {
            let seed = seed.ok_or_else(|| usage("--uniform needs --seed"))?;
            Ok(Configuration::uniform(n, seed)?)
        }
        (None, None) => Err(usage("give a configuration with --points or --uniform")),
    }
}

fn build_params(config: &Configuration, net: &NetArgs, seed: u64) -> BuildParams {
    let (s0, t0) = default_spacings(config.side(), config.n());
    let s = net.s.unwrap_or(s0);
    let t = net.t.unwrap_or(if net.s.is_some() { s / (s / t0).round().max(1.0) } else { t0 });
    BuildParams {
        intensity: net.intensity,
        s,
        t,
        seed,
    }
}

fn cmd_jm(a: &JmArgs, run: &mut Run) -> anyhow::Result<()> {
    let mc = matches!(a.method, Method::Mc | Method::All);
    if mc && a.replicates < 2 {
        return Err(usage(format!("--replicates must be at least 2 for Monte Carlo, got {}", a.replicates)));
    }
    if !(a.intensity > 0.0) {
        return Err(usage("--intensity must be positive"));
    }
    let seed = match (mc, a.seed) {
        (true, None) => return Err(usage("Monte Carlo needs --seed")),
        (_, s) => s,
    };
    if mc {
        run.seeds.extend(seed);
    }
    let eta = a.intensity;
    let mut rows = Vec::new();
    for &m in &a.m {
        if !(m > 0.0) {
            return Err(usage(format!("--m values must be positive, got {m}")));
        }
        let row = |method, value: f64| JmRow {
            m,
            intensity: eta,
            method,
            value,
            semi_excess: value / 2.0,
            std_error: None,
            abs_tol: None,
            replicates: 0,
            seed: None,
        };
        if mc {
            let seed = seed.expect("checked above");
            let opts = McOptions {
                initial_half_width: a.initial_half_width,
                exec: Exec::Parallel,
            };
            let r = estimate_jm_mc_with(m, eta, a.replicates, seed, &opts)?;
            rows.push(JmRow {
                std_error: r.std_error,
                replicates: a.replicates,
                seed: Some(seed),
                ..row("mc", r.value)
            });
        }
        // J_η(m) = J_1(ηm) / η
        if matches!(a.method, Method::Quad | Method::All) {
            let r = jm_quadrature(eta * m, a.rel_tol)?;
            rows.push(JmRow {
                abs_tol: r.abs_tolerance.map(|t| t / eta),
                ..row("quad", r.value / eta)
            });
        }
        if matches!(a.method, Method::Asymptotic | Method::All) {
            rows.push(row("asymptotic", jm_asymptotic(eta * m) / eta));
        }
    }
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_real(r.m),
                        r.method.to_string(),
                        fmt_real(r.value),
                        fmt_real(r.semi_excess),
                        opt_real(r.std_error.or(r.abs_tol)),
                        r.replicates.to_string(),
                        r.seed.map(|s| s.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            csv_text(
                &["m", "method", "jm", "semi_excess", "uncertainty", "replicates", "seed"],
                &cells,
            )?
        }
    };
    run.emit(a.out.as_deref(), &text)
}

fn cmd_cell_svg(a: &CellSvgArgs, run: &mut Run) -> anyhow::Result<()> {
    run.seeds.push(a.seed);
    let mut rng = stream_rng(a.seed, 0);
    let s = sample_two_point_cell(&mut rng, a.m, a.intensity, initial_half_width(a.m, a.intensity))?;
    let per = perimeter(&s.cell)?;
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for v in &s.cell.vertices {
        lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
        hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
    }
    let pad = 0.1 * (hi.x - lo.x).max(hi.y - lo.y);
    let c = (lo + hi) * 0.5;
    let half = 0.5 * (hi.x - lo.x).max(hi.y - lo.y) + pad;
    let window = Rect::new(c.x - half, c.y - half, c.x + half, c.y + half)?;
    let h = a.m / 2.0;
    let mut deleted = Vec::new();
    sample_separating(&mut stream_rng(a.seed, 1), h, a.intensity, &mut deleted);
    let svg = cell_svg(&s.cell, &s.lines, &deleted, Point::new(-h, 0.0), Point::new(h, 0.0), &window);
    run.emit(Some(&a.out), &svg)?;
    if let Some(p) = &a.lines_csv {
        let rows: Vec<Vec<String>> = s.lines.iter().map(|l| vec![fmt_real(l.p()), fmt_real(l.alpha())]).collect();
        run.emit(Some(p), &csv_text(&["p", "alpha"], &rows)?)?;
    }
    let summary = json!({
        "m": a.m,
        "perimeter": per,
        "excess": per - 2.0 * a.m,
        "half_width": s.half_width,
        "widenings": s.widenings,
        "lines": s.lines.len(),
    });
    run.emit(None, &format!("{summary}\n"))
}

fn cmd_build(a: &BuildArgs, run: &mut Run) -> anyhow::Result<()> {
    run.seeds.push(a.seed);
    let config = load_config(&a.config, Some(a.seed))?;
    let params = build_params(&config, &a.net, a.seed);
    let (net, acc) = build_network(&config, &params)?;
    run.emit(Some(&a.out_json), &network_to_json(&net))?;
    if let Some(p) = &a.out_svg {
        run.emit(Some(p), &network_svg(&net, &config.window(), config.points()))?;
    }
    if let Some(p) = &a.out_points {
        run.emit(Some(p), &points_csv(config.points())?)?;
    }
    let text = serde_json::to_string_pretty(&json!({ "params": params, "accounting": acc }))? + "\n";
    run.emit(a.out_accounting.as_deref(), &text)
}

fn parse_plan(pairs: &str, pair_seed: Option<u64>) -> anyhow::Result<PairSamplePlan> {
    if pairs == "all" {
        return Ok(PairSamplePlan::AllPairs);
    }
    let count: usize = pairs
        .parse()
        .map_err(|_| usage(format!("--pairs must be `all` or a count, got {pairs}")))?;
    let seed = pair_seed.ok_or_else(|| usage("random pairs need --pair-seed"))?;
    Ok(PairSamplePlan::RandomPairs { count, seed })
}

fn cmd_stats(a: &StatsArgs, run: &mut Run) -> anyhow::Result<()> {
    run.seeds.extend(a.seed.iter().chain(a.pair_seed.iter()));
    let net = network_from_json(
        &fs::read_to_string(&a.network).with_context(|| format!("reading {}", a.network.display()))?,
    )?;
    let config = load_config(&a.config, a.seed)?;
    let plan = parse_plan(&a.pairs, a.pair_seed)?;
    let records = pair_routes(&net, &config, &plan, Exec::Parallel)?;
    let sampled_from = match plan {
        PairSamplePlan::AllPairs => None,
        PairSamplePlan::RandomPairs { .. } => Some(config.n() * (config.n() - 1) / 2),
    };
    let report = summarize(&records, sampled_from);
    if let Some(p) = &a.pairs_csv {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.i.to_string(),
                    r.j.to_string(),
                    fmt_real(r.euclid),
                    fmt_real(r.route),
                    fmt_real(r.excess()),
                    opt_real(r.ratio()),
                ]
            })
            .collect();
        run.emit(Some(p), &csv_text(&["i", "j", "euclid", "route", "excess", "ratio"], &rows)?)?;
    }
    let text = serde_json::to_string_pretty(&json!({ "plan": plan, "report": report }))? + "\n";
    run.emit(a.out.as_deref(), &text)
}

fn cmd_equidist(a: &EquidistArgs, run: &mut Run) -> anyhow::Result<()> {
    run.seeds.push(a.seed);
    if a.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let config = load_config(&a.config, Some(a.seed))?;
    let reference = match a.reference {
        ReferenceArg::Square => Reference::UniformSquare,
        ReferenceArg::Disk => Reference::UniformDisk,
    };
    let reports = Exec::Parallel.try_map(a.repeats, |r| {
        equidist_cost(&config, a.l, reference, config.n(), a.seed.wrapping_add(r as u64))
    })?;
    let k = reports.len() as f64;
    let mean = reports.iter().map(|r| r.cost).sum::<f64>() / k;
    let se = if reports.len() > 1 {
        (reports.iter().map(|r| (r.cost - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
    } else {
        f64::NAN
    };
    let text = serde_json::to_string_pretty(&json!({
        "mean_cost": mean,
        "std_error": if se.is_finite() { Some(se) } else { None },
        "reports": reports,
    }))? + "\n";
    run.emit(a.out.as_deref(), &text)
}

fn cmd_search(a: &SearchArgs, run: &mut Run) -> anyhow::Result<()> {
    let pilot_seed = a.pilot_seed.unwrap_or(a.seed.wrapping_add(1 << 32));
    run.seeds.extend([a.seed, pilot_seed]);
    let config = load_config(&a.config, Some(a.seed))?;
    let params = build_params(&config, &a.net, a.seed);
    let total = config.n() * (config.n() - 1) / 2;
    let plan = PairSamplePlan::RandomPairs {
        count: a.pairs.min(total),
        seed: a.seed,
    };
    let calibrated = match (a.length_threshold, a.excess_threshold) {
        (Some(_), Some(_)) => None,
        _ => Some(calibrate_thresholds(&config, &params, a.pilot, pilot_seed, &plan, Exec::Parallel)?),
    };
    let spec = SearchSpec {
        length_threshold: a.length_threshold.or(calibrated.map(|t| t.length_threshold)).expect("set"),
        excess_threshold: a.excess_threshold.or(calibrated.map(|t| t.excess_threshold)).expect("set"),
        config,
        params,
        max_attempts: a.max_attempts,
        base_seed: a.seed,
        pair_plan: plan,
        exec: Exec::Parallel,
    };
    let (result, failure) = match rejection_search(&spec) {
        Ok(r) => (r, None),
        Err(Error::ExhaustedAttempts(r)) => {
            let msg = format!("no attempt met both thresholds after {} attempts", r.attempts_used);
            (*r, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    let text = serde_json::to_string_pretty(&json!({
        "length_threshold": spec.length_threshold,
        "excess_threshold": spec.excess_threshold,
        "calibration": calibrated,
        "accepted": result.accepted,
        "attempts_used": result.attempts_used,
        "best_attempt": result.best_attempt,
        "accounting": result.accounting,
        "log": result.log,
    }))? + "\n";
    run.emit(a.out.as_deref(), &text)?;
    if let (Some(p), Some(net)) = (&a.out_network, &result.network) {
        run.emit(Some(p), &network_to_json(net))?;
    }
    match failure {
        Some(msg) => bail!(msg),
        None => Ok(()),
    }
}

fn cmd_scaling(a: &ScalingArgs, run: &mut Run) -> anyhow::Result<()> {
    if a.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    if a.n.iter().any(|&n| n < 2) {
        return Err(usage("every --n must be at least 2"));
    }
    run.seeds.extend((0..a.seeds).map(|k| a.seed.wrapping_add(k as u64)));
    let mut rows = Vec::new();
    for &n in &a.n {
        let runs = Exec::Parallel.try_map(a.seeds, |k| -> linenet::Result<[f64; 4]> {
            let seed = a.seed.wrapping_add(k as u64);
            let config = Configuration::uniform(n, seed)?;
            let params = BuildParams::for_configuration(&config, a.intensity, seed);
            let (net, acc) = build_network(&config, &params)?;
            let plan = PairSamplePlan::RandomPairs {
                count: a.pairs.min(n * (n - 1) / 2),
                seed,
            };
            let r = summarize(&pair_routes(&net, &config, &plan, Exec::Sequential)?, None);
            Ok([r.excess, r.ratio, acc.total, acc.baseline_tree_length])
        })?;
        let mut mean = [0.0; 4];
        for (k, r) in runs.iter().enumerate() {
            let mut row = vec![n.to_string(), a.seed.wrapping_add(k as u64).to_string()];
            row.extend(r.iter().map(|v| fmt_real(*v)));
            rows.push(row);
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / runs.len() as f64;
            }
        }
        let mut row = vec![n.to_string(), "mean".to_string()];
        row.extend(mean.iter().map(|v| fmt_real(*v)));
        rows.push(row);
    }
    let text = csv_text(&["n", "seed", "excess", "ratio", "total_length", "tree_length"], &rows)?;
    run.emit(a.out.as_deref(), &text)
}

fn dispatch(cmd: &Command, run: &mut Run) -> anyhow::Result<()> {
    match cmd {
        Command::Jm(a) => cmd_jm(a, run),
        Command::CellSvg(a) => cmd_cell_svg(a, run),
        Command::Build(a) => cmd_build(a, run),
        Command::Stats(a) => cmd_stats(a, run),
        Command::Equidist(a) => cmd_equidist(a, run),
        Command::Search(a) => cmd_search(a, run),
        Command::Scaling(a) => cmd_scaling(a, run),
    }
}

fn write_manifest(path: Option<&Path>, m: &RunManifest) {
    let text = serde_json::to_string_pretty(m).expect("manifest serialisation is infallible") + "\n";
    let written = match path {
        Some(p) => fs::write(p, &text).map_err(|e| e.to_string()),
        None => std::io::stderr().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("linenet: could not write manifest: {e}");
    }
}

/// `--manifest` value from raw arguments, for runs whose parsing failed.
fn raw_manifest_path() -> Option<PathBuf> {
    let args: Vec<String> = std::env::args().collect();
    args.iter().enumerate().find_map(|(i, a)| {
        a.strip_prefix("--manifest=")
            .map(PathBuf::from)
            .or_else(|| (a == "--manifest").then(|| args.get(i + 1).map(PathBuf::from)).flatten())
    })
}

fn configure_threads() {
    if let Some(n) = std::env::var("LINENET_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("ignoring LINENET_THREADS: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code != 0 {
                write_manifest(
                    raw_manifest_path().as_deref(),
                    &RunManifest {
                        command: "",
                        parameters: json!(std::env::args().skip(1).collect::<Vec<_>>()),
                        seeds: Vec::new(),
                        version: VERSION,
                        outputs: Vec::new(),
                        duration_seconds: started.elapsed().as_secs_f64(),
                        status: "usage-error",
                        error: Some(e.to_string().trim().to_string()),
                    },
                );
            }
            return ExitCode::from(code as u8);
        }
    };
    configure_threads();
    let mut run = Run::default();
    let outcome = dispatch(&cli.command, &mut run);
    let (status, error, code) = match &outcome {
        Ok(()) => ("ok", None, 0u8),
        Err(e) if e.is::<UsageError>() => ("usage-error", Some(format!("{e:#}")), 2),
        Err(e) => ("error", Some(format!("{e:#}")), 1),
    };
    if let Some(msg) = &error {
        eprintln!("linenet: {msg}");
    }
    write_manifest(
        cli.manifest.as_deref(),
        &RunManifest {
            command: cli.command.name(),
            parameters: serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null),
            seeds: run.seeds,
            version: VERSION,
            outputs: run.outputs,
            duration_seconds: started.elapsed().as_secs_f64(),
            status,
            error,
        },
    );
    ExitCode::from(code)
}
