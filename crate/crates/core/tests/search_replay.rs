use linenet::netbuild::{build_network, BuildParams, Configuration};
use linenet::search::{calibrate_thresholds, rejection_search, SearchSpec};
use linenet::stats::{excess_stat, PairSamplePlan};
use linenet::{Error, Exec};

fn spec(length_threshold: f64, excess_threshold: f64) -> SearchSpec {
    let config = Configuration::uniform(120, 8).unwrap();
    let params = BuildParams::for_configuration(&config, 0.6, 0);
    SearchSpec {
        config,
        params,
        length_threshold,
        excess_threshold,
        max_attempts: 6,
        base_seed: 40,
        pair_plan: PairSamplePlan::RandomPairs { count: 500, seed: 3 },
        exec: Exec::Parallel,
    }
}

#[test]
fn search_is_reproducible() {
    let s = spec(f64::INFINITY, f64::INFINITY);
    let a = rejection_search(&s).unwrap();
    let b = rejection_search(&s).unwrap();
    assert_eq!(a.log, b.log);
    let (na, nb) = (a.network.unwrap(), b.network.unwrap());
    assert_eq!(na.edges(), nb.edges());
}

#[test]
fn logged_attempts_replay_exactly() {
    let s = spec(0.0, 0.0);
    let log = match rejection_search(&s) {
        Err(Error::ExhaustedAttempts(r)) => r.log,
        other => panic!("expected exhaustion, got {other:?}"),
    };
    assert_eq!(log.len(), s.max_attempts);
    for rec in &log {
        assert_eq!(rec.seed, s.base_seed + rec.attempt as u64);
        let p = BuildParams { seed: rec.seed, ..s.params };
        let (net, acc) = build_network(&s.config, &p).unwrap();
        assert_eq!(acc.excess_over_tree(), rec.length_excess);
        let st = excess_stat(&net, &s.config, &s.pair_plan).unwrap();
        assert!((st.excess - rec.route_excess).abs() <= 1e-12 * rec.route_excess.max(1.0));
    }
}

#[test]
fn lineless_calibration_is_deterministic() {
    let s = spec(0.0, 0.0);
    let params = BuildParams { intensity: 0.0, ..s.params };
    let t = calibrate_thresholds(&s.config, &params, 4, 9, &s.pair_plan, Exec::Parallel).unwrap();
    let (_, acc) = build_network(&s.config, &params).unwrap();
    assert_eq!(t.length_threshold, 3.0 * acc.excess_over_tree());
    assert_eq!(t.pilot_excess_std_error, 0.0);
}

#[test]
fn independent_pilots_agree() {
    let s = spec(0.0, 0.0);
    let a = calibrate_thresholds(&s.config, &s.params, 12, 1_000, &s.pair_plan, Exec::Parallel).unwrap();
    let b = calibrate_thresholds(&s.config, &s.params, 12, 2_000, &s.pair_plan, Exec::Sequential).unwrap();
    let se = a.pilot_excess_std_error.hypot(b.pilot_excess_std_error);
    assert!((a.pilot_excess_mean - b.pilot_excess_mean).abs() < 3.0 * se);
    assert!(calibrate_thresholds(&s.config, &s.params, 1, 0, &s.pair_plan, Exec::Sequential).is_err());
}
