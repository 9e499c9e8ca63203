//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

mod common;

use std::time::{Duration, Instant};

use common::{
    desk, miller_reference, rel_err, search_time_reference, truncated_poisson_mean, Audit,
};
use event_parking::assignment::{brute_force_assignment, solve_assignment, CostMatrix, FillMode};
use event_parking::geo::{miller_project, miller_unproject, GeoCoord, CIRCUMFERENCE_M};
use event_parking::lot_model::search_time_at;
use event_parking::report::{
    emit_csv, failed_search_matrix, failed_search_table, running_means, runs_table, vehicles_table,
};
use event_parking::scenario::{KinematicParams, ParkingLot};
use event_parking::simulator::{
    monte_carlo, run_simulation_observed, Method, SimOptions, SimOutcome,
};
use event_parking::stochastic::{sample_patience, sample_segment, seeded_rng, PatienceParams};
use event_parking::strategies::{StrategyKind, StrategyMix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Gamma};

const SOLVER_INSTANCES: usize = 200;
const SOLVER_BUDGET: Duration = Duration::from_secs(10);
const ORDERING_BATCHES: u64 = 20;
const ORDERING_RUNS_PER_BATCH: usize = 10;
const ORDERING_MIN_SHARE: f64 = 0.9;
const ORDERING_BUDGET: Duration = Duration::from_secs(60);
const CONVERGENCE_RUNS: usize = 20;
const CONVERGENCE_AFTER: usize = 10;
const CONVERGENCE_REL: f64 = 0.05;
const SEARCH_TIME_DRAWS: usize = 1000;
const SEARCH_TIME_REL: f64 = 1e-9;
const PROJECTION_POINTS: usize = 10_000;
const ROUND_TRIP_RAD: f64 = 1e-9;
const ORIGIN_REL: f64 = 1e-9;
const SAMPLES: usize = 100_000;
const MEAN_REL: f64 = 0.02;
const KS_MAX: f64 = 0.01;
const SIM_RUNS: usize = 20;
const BASE_SEED: u64 = 1;

fn report(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

#[test]
fn solver_matches_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let mut mismatches = 0;
    for _ in 0..SOLVER_INSTANCES {
        let k = rng.random_range(1..=8usize);
        let m = rng.random_range(1..=4usize);
        let mut caps: Vec<usize> = (0..m).map(|_| rng.random_range(0..=4)).collect();
        while caps.iter().sum::<usize>() < k {
            caps[rng.random_range(0..m)] += 1;
        }
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..m).map(|_| rng.random_range(0.0..900.0)).collect())
            .collect();
        let c = CostMatrix::from_rows(&rows).unwrap();
        let fast = solve_assignment(&c, &caps, FillMode::AtMost).unwrap();
        let slow = brute_force_assignment(&c, &caps).unwrap();
        fast.check_feasible(&caps).unwrap();
        if fast.total_cost_ms != slow.total_cost_ms {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        "solver optimality",
        mismatches == 0 && elapsed < SOLVER_BUDGET,
        format!("{mismatches} of {SOLVER_INSTANCES} instances differ, {elapsed:.2?}"),
    );
}

fn mean_rerouting(outcomes: &[SimOutcome]) -> f64 {
    outcomes.iter().map(|o| o.mean_rerouting_time).sum::<f64>() / outcomes.len() as f64
}

#[test]
fn optimized_beats_multicriteria_beats_no_guidance() {
    let s = desk();
    let opts = SimOptions::default();
    let start = Instant::now();
    let mc = Method::Mix(StrategyMix::single(StrategyKind::MultiCriteria(
        Default::default(),
    )));
    let ng = Method::Mix(StrategyMix::single(StrategyKind::NoGuidanceNearest));
    let mut ordered = 0;
    let mut opt_failures = 0;
    let mut means = Vec::new();
    for b in 0..ORDERING_BATCHES {
        let seed = BASE_SEED + b * ORDERING_RUNS_PER_BATCH as u64;
        let run =
            |m: &Method| monte_carlo(&s, m, ORDERING_RUNS_PER_BATCH, seed, &opts, true).unwrap();
        let opt = run(&Method::Optimized);
        opt_failures += opt
            .iter()
            .map(SimOutcome::total_failed_searches)
            .sum::<u64>();
        let (o, m, n) = (
            mean_rerouting(&opt),
            mean_rerouting(&run(&mc)),
            mean_rerouting(&run(&ng)),
        );
        if o < m && m < n {
            ordered += 1;
        }
        means.push((o, m, n));
    }
    let elapsed = start.elapsed();
    let share = ordered as f64 / ORDERING_BATCHES as f64;
    let avg = |f: fn(&(f64, f64, f64)) -> f64| {
        means.iter().map(f).sum::<f64>() / means.len() as f64 / 60.0
    };
    report(
        "method ordering",
        share >= ORDERING_MIN_SHARE && opt_failures == 0 && elapsed < ORDERING_BUDGET,
        format!(
            "{ordered}/{ORDERING_BATCHES} batches ordered, optimized failed searches {opt_failures}, \
             mean rerouting opt {:.2} / MC {:.2} / NG {:.2} min, {elapsed:.2?}",
            avg(|t| t.0),
            avg(|t| t.1),
            avg(|t| t.2)
        ),
    );
}

/// Largest step-to-step relative change of the running mean after `after` values.
fn worst_late_change(values: &[f64], after: usize) -> f64 {
    let m = running_means(values);
    (after..m.len())
        .map(|n| {
            let (prev, cur) = (m[n - 1], m[n]);
            if prev == cur {
                0.0
            } else {
                (cur - prev).abs() / prev.abs()
            }
        })
        .fold(0.0, f64::max)
}

#[test]
fn running_means_settle_after_ten_runs() {
    let s = desk();
    let outcomes = monte_carlo(
        &s,
        &Method::Mix(s.effective_mix()),
        CONVERGENCE_RUNS,
        BASE_SEED,
        &SimOptions::default(),
        true,
    )
    .unwrap();
    let per_run: Vec<f64> = outcomes.iter().map(|o| o.mean_rerouting_time).collect();
    let rerouting = worst_late_change(&per_run, CONVERGENCE_AFTER);
    let matrix = failed_search_matrix(&outcomes);
    let (worst_lot, lot_change) = matrix
        .iter()
        .enumerate()
        .map(|(lot, row)| {
            let row: Vec<f64> = row.iter().map(|&c| c as f64).collect();
            (lot, worst_late_change(&row, CONVERGENCE_AFTER))
        })
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    // Not part of the pass condition: change of the whole per-lot profile, L1 norm.
    let lot_means: Vec<Vec<f64>> = matrix
        .iter()
        .map(|row| running_means(&row.iter().map(|&c| c as f64).collect::<Vec<_>>()))
        .collect();
    let profile_change = (CONVERGENCE_AFTER..CONVERGENCE_RUNS)
        .map(|n| {
            let moved: f64 = lot_means.iter().map(|m| (m[n] - m[n - 1]).abs()).sum();
            moved / lot_means.iter().map(|m| m[n - 1]).sum::<f64>()
        })
        .fold(0.0, f64::max);
    report(
        "convergence",
        rerouting < CONVERGENCE_REL && lot_change < CONVERGENCE_REL,
        format!(
            "worst change after run {CONVERGENCE_AFTER}: rerouting {:.2}%, per-lot failed searches {:.2}% (lot {}); \
             whole per-lot profile {:.2}%",
            100.0 * rerouting,
            100.0 * lot_change,
            s.lots[worst_lot].id,
            100.0 * profile_change
        ),
    );
}

fn lot(capacity: u32, floor_capacities: Vec<u32>, ramp_length: f64) -> ParkingLot {
    ParkingLot {
        id: "A".into(),
        lat: 37.87,
        lon: -122.25,
        capacity,
        floors: floor_capacities.len() as u32,
        floor_capacities,
        ramp_length,
    }
}

#[test]
fn search_time_formula() {
    let k = KinematicParams::default();
    let single = lot(100, vec![100], 0.0);
    let empty_is_stop = search_time_at(&single, &k, 0.0, 0.0) == k.stop_time;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut monotone = true;
    for _ in 0..SEARCH_TIME_DRAWS {
        let floors = rng.random_range(1..=4u32);
        let per_floor = rng.random_range(1..=200u32);
        let caps = vec![per_floor; floors as usize];
        let l = lot(per_floor * floors, caps, rng.random_range(0.0..60.0));
        let kin = KinematicParams {
            spot_width: rng.random_range(1.5..4.0),
            cruise_speed: rng.random_range(1.0..10.0),
            walk_speed: rng.random_range(0.5..2.0),
            ramp_speed: rng.random_range(1.0..10.0),
            stop_time: rng.random_range(0.0..60.0),
            turn_time: rng.random_range(0.0..30.0),
        };
        let (o, t): (f64, f64) = (rng.random(), rng.random());
        let (o2, t2) = (rng.random_range(o..=1.0), rng.random_range(t..=1.0));
        monotone &= search_time_at(&l, &kin, o, t) <= search_time_at(&l, &kin, o2, t);
        monotone &= search_time_at(&l, &kin, o, t) <= search_time_at(&l, &kin, o, t2);
    }

    let half = search_time_at(&single, &k, 0.5, 0.5);
    let half_ref =
        search_time_reference(2.5, 100, 0.5, 2.78, 1.2, 30.0, 1, 0.0, 2.78, 100, 0.5, 10.0);
    let two = lot(100, vec![50, 50], 30.0);
    let ramp = search_time_at(&two, &k, 0.5, 0.4) - search_time_at(&single, &k, 0.5, 0.4);
    let ramp_ref =
        search_time_reference(2.5, 100, 0.5, 2.78, 1.2, 30.0, 2, 30.0, 2.78, 50, 0.4, 10.0)
            - search_time_reference(2.5, 100, 0.5, 2.78, 1.2, 30.0, 1, 30.0, 2.78, 50, 0.4, 10.0);
    let (e1, e2) = (rel_err(half, &half_ref), rel_err(ramp, &ramp_ref));
    report(
        "search time",
        empty_is_stop && monotone && e1 < SEARCH_TIME_REL && e2 < SEARCH_TIME_REL,
        format!(
            "empty lot = t_stop: {empty_is_stop}, monotone over {SEARCH_TIME_DRAWS} draws: {monotone}, \
             half-full {half:.4} s (rel err {e1:.1e}), ramp term {ramp:.4} s (rel err {e2:.1e})"
        ),
    );
}

#[test]
fn projection_round_trip_and_origin() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let limit = std::f64::consts::FRAC_PI_2 - 1e-3;
    let mut worst = 0.0f64;
    for _ in 0..PROJECTION_POINTS {
        let g = GeoCoord::new(
            rng.random_range(-limit..limit),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        )
        .unwrap();
        let back = miller_unproject(miller_project(g)).unwrap();
        worst = worst
            .max((back.lat() - g.lat()).abs())
            .max((back.lon() - g.lon()).abs());
    }
    let origin = miller_project(GeoCoord::new(0.0, 0.0).unwrap());
    let (rx, ry) = miller_reference(0.0, 0.0);
    let ex = rel_err(origin.x, &rx).max((origin.x / (CIRCUMFERENCE_M / 2.0) - 1.0).abs());
    let ey = rel_err(origin.y, &ry).max((origin.y / (CIRCUMFERENCE_M / 4.0) - 1.0).abs());
    report(
        "projection",
        worst < ROUND_TRIP_RAD && ex < ORIGIN_REL && ey < ORIGIN_REL,
        format!("worst round trip {worst:.1e} rad over {PROJECTION_POINTS} points, origin rel err ({ex:.1e}, {ey:.1e})"),
    );
}

#[test]
fn samplers_match_their_laws() {
    let s = desk();
    let n_seg = s.time_window.n_segments();
    let lambda = s.arrival.lambda_segment;
    let mut rng = seeded_rng(BASE_SEED, 99);
    let seg_mean = (0..SAMPLES)
        .map(|_| sample_segment(&mut rng, lambda, n_seg) as f64)
        .sum::<f64>()
        / SAMPLES as f64;
    let seg_ref = truncated_poisson_mean(lambda, n_seg);
    let seg_err = (seg_mean / seg_ref - 1.0).abs();

    let p = PatienceParams::default();
    let mut draws: Vec<f64> = (0..SAMPLES)
        .map(|_| sample_patience(&mut rng, &p))
        .collect();
    let gamma_mean = draws.iter().sum::<f64>() / SAMPLES as f64;
    let gamma_err = (gamma_mean / (p.shape * p.scale) - 1.0).abs();

    draws.sort_by(f64::total_cmp);
    let law = Gamma::new(p.shape, 1.0 / p.scale).unwrap();
    let n = SAMPLES as f64;
    let ks = draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    report(
        "stochastic samplers",
        seg_err < MEAN_REL && gamma_err < MEAN_REL && ks < KS_MAX,
        format!(
            "segment mean {seg_mean:.4} vs {seg_ref:.4} ({:.2}%), patience mean {gamma_mean:.1} s ({:.2}%), KS {ks:.4}",
            100.0 * seg_err,
            100.0 * gamma_err
        ),
    );
}

fn csv_bytes(s: &event_parking::scenario::Scenario, outcomes: &[SimOutcome]) -> Vec<Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    let tables = [
        runs_table(outcomes),
        vehicles_table(s, outcomes),
        failed_search_table(s, outcomes),
    ];
    tables
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = dir.path().join(format!("{i}.csv"));
            emit_csv(t, &p).unwrap();
            std::fs::read(p).unwrap()
        })
        .collect()
}

#[test]
fn simulation_conserves_vehicles_and_is_deterministic() {
    let s = desk();
    let opts = SimOptions::default();
    let methods = [
        Method::Mix(s.effective_mix()),
        Method::Mix(StrategyMix::single(StrategyKind::NoGuidanceNearest)),
        Method::Optimized,
    ];
    let mut audited = 0;
    let mut violations = Vec::new();
    for m in &methods {
        for seed in BASE_SEED..BASE_SEED + 5 {
            let mut audit = Audit::new(&s);
            run_simulation_observed(&s, m, seed, &opts, &mut audit).unwrap();
            audited += audit.events;
            violations.extend(audit.violations);
        }
    }
    let mix = Method::Mix(s.effective_mix());
    let serial = monte_carlo(&s, &mix, SIM_RUNS, BASE_SEED, &opts, false).unwrap();
    let parallel = monte_carlo(&s, &mix, SIM_RUNS, BASE_SEED, &opts, true).unwrap();
    let again = monte_carlo(&s, &mix, SIM_RUNS, BASE_SEED, &opts, true).unwrap();
    let same_sequence = serial == parallel;
    let same_bytes = csv_bytes(&s, &parallel) == csv_bytes(&s, &again);
    report(
        "conservation and determinism",
        violations.is_empty() && same_sequence && same_bytes,
        format!(
            "{audited} events audited, {} violations, serial == parallel: {same_sequence}, identical CSVs: {same_bytes}",
            violations.len()
        ),
    );
}

#[test]
fn guided_drivers_all_park_when_demand_equals_supply() {
    let s = desk();
    let opts = SimOptions {
        infinite_patience: true,
        ..SimOptions::default()
    };
    let mixes = [
        StrategyMix::default(),
        StrategyMix::single(StrategyKind::MultiCriteria(Default::default())),
    ];
    let mut bad_runs = 0;
    for mix in &mixes {
        assert!(mix.all_guided());
        for o in monte_carlo(
            &s,
            &Method::Mix(mix.clone()),
            SIM_RUNS,
            BASE_SEED,
            &opts,
            true,
        )
        .unwrap()
        {
            if o.parked_count != s.demand || o.abandonment_count != 0 {
                bad_runs += 1;
            }
        }
    }
    report(
        "full parking",
        bad_runs == 0,
        format!(
            "{bad_runs} of {} runs left a vehicle unparked (K = {})",
            mixes.len() * SIM_RUNS,
            s.demand
        ),
    );
}
