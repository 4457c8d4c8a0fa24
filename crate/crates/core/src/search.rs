//! Rejection search for a network whose length excess and route excess are
//! both small.
//!
//! Attempt `k` (counting from 1) builds the network with seed
//! `base_seed + k`. Both excesses are nonnegative, so by Markov's inequality
//! each exceeds three times its mean with probability at most 1/3 and an
//! attempt passes both thresholds with probability at least 1/3. The means
//! are unknown; [`calibrate_thresholds`] estimates them from pilot builds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::netbuild::{build_network, BuildParams, Configuration, LengthAccounting, PlanarNetwork};
use crate::stats::{pair_routes, summarize, PairSamplePlan};

#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub config: Configuration,
    /// `seed` is replaced per attempt.
    pub params: BuildParams,
    pub length_threshold: f64,
    pub excess_threshold: f64,
    pub max_attempts: usize,
    pub base_seed: u64,
    /// Shared by every attempt.
    pub pair_plan: PairSamplePlan,
    pub exec: Exec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    pub seed: u64,
    /// Network length minus spanning-tree length.
    pub length_excess: f64,
    pub route_excess: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub accepted: bool,
    pub attempts_used: usize,
    /// Present iff `accepted`.
    pub network: Option<PlanarNetwork>,
    pub accounting: Option<LengthAccounting>,
    pub log: Vec<AttemptRecord>,
    /// Index into `log` of the attempt with the smallest
    /// `max(length_excess / length_threshold, route_excess / excess_threshold)`.
    pub best_attempt: usize,
}

struct Measured {
    network: PlanarNetwork,
    accounting: LengthAccounting,
    route_excess: f64,
}

fn measure(config: &Configuration, params: &BuildParams, plan: &PairSamplePlan, exec: Exec) -> Result<Measured> {
    let (network, accounting) = build_network(config, params)?;
    let records = pair_routes(&network, config, plan, exec)?;
    let route_excess = summarize(&records, None).excess;
    Ok(Measured {
        network,
        accounting,
        route_excess,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub length_threshold: f64,
    pub excess_threshold: f64,
    pub pilot_length_mean: f64,
    pub pilot_excess_mean: f64,
    pub pilot_excess_std_error: f64,
    pub pilot_attempts: usize,
}

/// Three times the pilot means of both excesses, over builds with seeds
/// `seed + 1, …, seed + pilot_attempts`.
pub fn calibrate_thresholds(
    config: &Configuration,
    params: &BuildParams,
    pilot_attempts: usize,
    seed: u64,
    plan: &PairSamplePlan,
    exec: Exec,
) -> Result<Thresholds> {
    if pilot_attempts < 2 {
        return Err(Error::InvalidArgument(format!(
            "calibration needs at least 2 pilot builds, got {pilot_attempts}"
        )));
    }
    // parallelism goes to the builds, each measured sequentially
    let pilots = exec.try_map(pilot_attempts, |k| {
        let p = BuildParams {
            seed: seed.wrapping_add(k as u64 + 1),
            ..*params
        };
        measure(config, &p, plan, Exec::Sequential).map(|m| (m.accounting.excess_over_tree(), m.route_excess))
    })?;
    let k = pilots.len() as f64;
    let len_mean = pilots.iter().map(|p| p.0).sum::<f64>() / k;
    let exc_mean = pilots.iter().map(|p| p.1).sum::<f64>() / k;
    let exc_var = pilots.iter().map(|p| (p.1 - exc_mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(Thresholds {
        length_threshold: 3.0 * len_mean,
        excess_threshold: 3.0 * exc_mean,
        pilot_length_mean: len_mean,
        pilot_excess_mean: exc_mean,
        pilot_excess_std_error: (exc_var / k).sqrt(),
        pilot_attempts,
    })
}

fn validate(spec: &SearchSpec) -> Result<()> {
    if !(spec.length_threshold >= 0.0 && spec.excess_threshold >= 0.0) {
        return Err(Error::InvalidArgument("thresholds must be non-negative".into()));
    }
    if spec.max_attempts == 0 {
        return Err(Error::InvalidArgument("max_attempts must be at least 1".into()));
    }
    Ok(())
}

/// Builds attempts in order until one meets both thresholds.
///
/// With [`Exec::Parallel`] attempts are built speculatively in batches of the
/// thread-pool size; the decision still scans the batch in attempt order, so
/// the result does not depend on the execution strategy.
pub fn rejection_search(spec: &SearchSpec) -> Result<SearchResult> {
    validate(spec)?;
    let batch = match spec.exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => rayon::current_num_threads().max(1),
        _ => 1,
    };
    let rel = |v: f64, t: f64| if t > 0.0 { v / t } else if v > 0.0 { f64::INFINITY } else { 0.0 };
    let score = |r: &AttemptRecord| {
        rel(r.length_excess, spec.length_threshold).max(rel(r.route_excess, spec.excess_threshold))
    };
    let mut log: Vec<AttemptRecord> = Vec::new();
    let mut next = 1usize;
    while next <= spec.max_attempts {
        let size = batch.min(spec.max_attempts - next + 1);
        let first = next;
        let built = spec.exec.try_map(size, |b| {
            let attempt = first + b;
            let seed = spec.base_seed.wrapping_add(attempt as u64);
            let params = BuildParams { seed, ..spec.params };
            measure(&spec.config, &params, &spec.pair_plan, Exec::Sequential).map(|m| (attempt, seed, m))
        })?;
        for (attempt, seed, m) in built {
            let length_excess = m.accounting.excess_over_tree();
            let accepted = length_excess <= spec.length_threshold && m.route_excess <= spec.excess_threshold;
            log.push(AttemptRecord {
                attempt,
                seed,
                length_excess,
                route_excess: m.route_excess,
                accepted,
            });
            if accepted {
                return Ok(SearchResult {
                    accepted: true,
                    attempts_used: attempt,
                    network: Some(m.network),
                    accounting: Some(m.accounting),
                    best_attempt: log.len() - 1,
                    log,
                });
            }
        }
        next += size;
    }
    let best_attempt = (0..log.len())
        .min_by(|&a, &b| score(&log[a]).total_cmp(&score(&log[b])))
        .expect("at least one attempt");
    Err(Error::ExhaustedAttempts(Box::new(SearchResult {
        accepted: false,
        attempts_used: log.len(),
        network: None,
        accounting: None,
        log,
        best_attempt,
    })))
}
