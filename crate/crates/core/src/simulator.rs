//! Seeded discrete-event simulation of the parking process.
//!
//! Each vehicle enters at its arrival time, drives (Manhattan distance at the
//! cruise speed) to the lot its rule picks, and either parks there or finds it
//! full. A driver who meets a full lot is redirected to its next choice,
//! recomputed from the lot it is standing at, unless the time since its first
//! lot arrival already exceeds its patience, in which case it leaves.
//!
//! Time is continuous. Simultaneous events are processed in the order they
//! were scheduled, so a run is a pure function of scenario, method, seed and
//! options.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::assignment::{
    build_cost_matrix, solve_assignment, Assignment, FillMode, PlanningOccupancy,
};
use crate::error::{Error, Result};
use crate::geo::{manhattan_distance, PlanarCoord};
use crate::layout::Layout;
use crate::lot_model::{search_time, try_admit, Admission, LotState};
use crate::report::{summarize, Summary};
use crate::scenario::Scenario;
use crate::stochastic::should_abandon;
use crate::strategies::{generate_vehicles, next_choice, StrategyKind, StrategyMix, Vehicle};

/// How drivers pick lots in a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Each driver follows a rule drawn from the mix.
    Mix(StrategyMix),
    /// Vehicle `k` goes to `lot_of[k]`.
    Assigned(Assignment),
    /// The plan is re-optimized for every run's own vehicle draw.
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Time lost at a full lot before the driver moves on, seconds.
    pub detection_overhead: f64,
    /// Assigned vehicles hold their spot from the moment they enter.
    pub reservation: bool,
    /// Ignore sampled patience; nobody abandons.
    pub infinite_patience: bool,
    pub planning_occupancy: PlanningOccupancy,
    pub fill_mode: FillMode,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            detection_overhead: 0.0,
            reservation: true,
            infinite_patience: false,
            planning_occupancy: PlanningOccupancy::Uniform,
            fill_mode: FillMode::AtMost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptOutcome {
    Parked { floor: usize },
    Full,
}

/// One drive to one lot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attempt {
    pub lot: usize,
    pub depart: f64,
    pub arrive: f64,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleRecord {
    pub vehicle: usize,
    pub entry: usize,
    /// `None` when the vehicle followed an assignment.
    pub strategy: Option<StrategyKind>,
    pub entered_at: f64,
    pub attempts: Vec<Attempt>,
    pub parked_lot: Option<usize>,
    /// Drive time plus detection overhead spent on legs to lots that were full.
    pub rerouting_time: f64,
    pub total_drive_time: f64,
    pub total_search_time: f64,
    pub walk_time: f64,
    pub abandoned: bool,
    pub abandoned_at: Option<f64>,
    pub detection_overhead: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub seed: u64,
    pub records: Vec<VehicleRecord>,
    /// Failed searches per lot index.
    pub failed_searches: Vec<u64>,
    pub abandonment_count: usize,
    pub parked_count: usize,
    /// Mean rerouting time over vehicles that parked, seconds.
    pub mean_rerouting_time: f64,
}

impl SimOutcome {
    pub fn total_failed_searches(&self) -> u64 {
        self.failed_searches.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Enter,
    ArriveLot,
    Full,
    Park,
    Abandon,
    ReachDestination,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Enter => "enter",
            EventKind::ArriveLot => "arrive_lot",
            EventKind::Full => "full",
            EventKind::Park => "park",
            EventKind::Abandon => "abandon",
            EventKind::ReachDestination => "reach_destination",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub vehicle: usize,
    pub kind: EventKind,
    pub lot: Option<usize>,
    pub floor: Option<usize>,
}

/// Number of vehicles in each phase. Always sums to the demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Census {
    pub pending: usize,
    pub en_route: usize,
    /// Standing at a full lot, about to decide.
    pub searching: usize,
    /// Holding a spot (parked, searching inside the lot or walking).
    pub parked: usize,
    pub abandoned: usize,
}

impl Census {
    fn slot(&mut self, phase: Phase) -> &mut usize {
        match phase {
            Phase::Pending => &mut self.pending,
            Phase::EnRoute => &mut self.en_route,
            Phase::Searching => &mut self.searching,
            Phase::Parked => &mut self.parked,
            Phase::Abandoned => &mut self.abandoned,
        }
    }

    pub fn total(&self) -> usize {
        self.pending + self.en_route + self.searching + self.parked + self.abandoned
    }
}

/// Called after every processed event.
pub trait SimObserver {
    fn on_event(&mut self, event: &EventRecord, census: &Census, states: &[LotState]);
}

impl SimObserver for Vec<EventRecord> {
    fn on_event(&mut self, event: &EventRecord, _: &Census, _: &[LotState]) {
        self.push(*event);
    }
}

struct NoObserver;

impl SimObserver for NoObserver {
    fn on_event(&mut self, _: &EventRecord, _: &Census, _: &[LotState]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Pending,
    EnRoute,
    Searching,
    Parked,
    Abandoned,
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Enter,
    ArriveLot(usize),
    Decide,
    ReachDestination,
}

struct Scheduled {
    time: f64,
    seq: u64,
    vehicle: usize,
    action: Action,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // reversed: BinaryHeap is a max-heap and we want the earliest first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Per-vehicle mutable state during a run.
struct Driver {
    phase: Phase,
    position: PlanarCoord,
    visited: Vec<bool>,
    first_lot_arrival: Option<f64>,
    holds_reservation: bool,
    leg_start: f64,
    patience: f64,
    plan: Option<usize>,
    record: VehicleRecord,
}

struct World<'a, O: SimObserver> {
    s: &'a Scenario,
    layout: &'a Layout,
    opts: SimOptions,
    states: Vec<LotState>,
    drivers: Vec<Driver>,
    census: Census,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    observer: &'a mut O,
}

impl<O: SimObserver> World<'_, O> {
    fn schedule(&mut self, time: f64, vehicle: usize, action: Action) {
        self.queue.push(Scheduled {
            time,
            seq: self.seq,
            vehicle,
            action,
        });
        self.seq += 1;
    }

    fn set_phase(&mut self, v: usize, phase: Phase) {
        let old = self.drivers[v].phase;
        *self.census.slot(old) -= 1;
        *self.census.slot(phase) += 1;
        self.drivers[v].phase = phase;
    }

    fn emit(
        &mut self,
        time: f64,
        vehicle: usize,
        kind: EventKind,
        lot: Option<usize>,
        floor: Option<usize>,
    ) {
        let event = EventRecord {
            time,
            vehicle,
            kind,
            lot,
            floor,
        };
        self.observer.on_event(&event, &self.census, &self.states);
    }

    fn choose(&self, v: usize) -> Option<usize> {
        let d = &self.drivers[v];
        let kind = match d.record.strategy {
            Some(kind) => kind,
            // assigned vehicle whose planned lot was taken
            None => StrategyKind::MinTotal,
        };
        next_choice(
            kind,
            &d.visited,
            d.position,
            self.s,
            self.layout,
            &self.states,
        )
    }

    fn start_leg(&mut self, v: usize, lot: usize, now: f64) {
        let d = &mut self.drivers[v];
        let drive =
            manhattan_distance(d.position, self.layout.lots[lot]) / self.s.kinematics.cruise_speed;
        d.leg_start = now;
        d.record.total_drive_time += drive;
        self.set_phase(v, Phase::EnRoute);
        self.schedule(now + drive, v, Action::ArriveLot(lot));
    }

    fn abandon(&mut self, v: usize, now: f64) {
        let d = &mut self.drivers[v];
        d.record.abandoned = true;
        d.record.abandoned_at = Some(now);
        self.set_phase(v, Phase::Abandoned);
        self.emit(now, v, EventKind::Abandon, None, None);
    }

    fn handle(&mut self, ev: Scheduled) {
        let (v, now) = (ev.vehicle, ev.time);
        match ev.action {
            Action::Enter => {
                self.set_phase(v, Phase::EnRoute);
                self.emit(now, v, EventKind::Enter, None, None);
                let target = match self.drivers[v].plan {
                    Some(lot) => {
                        if self.opts.reservation {
                            let ok = self.states[lot].reserve(&self.s.lots[lot]);
                            debug_assert!(ok, "feasible plan always has a spot to hold");
                            self.drivers[v].holds_reservation = ok;
                        }
                        Some(lot)
                    }
                    None => self.choose(v),
                };
                match target {
                    Some(lot) => self.start_leg(v, lot, now),
                    None => self.abandon(v, now),
                }
            }
            Action::ArriveLot(lot) => {
                self.emit(now, v, EventKind::ArriveLot, Some(lot), None);
                let def = &self.s.lots[lot];
                let ts = search_time(def, &self.states[lot], &self.s.kinematics);
                let d = &mut self.drivers[v];
                d.first_lot_arrival.get_or_insert(now);
                let depart = d.leg_start;
                let admission = if d.holds_reservation {
                    d.holds_reservation = false;
                    Admission::Admitted {
                        floor: self.states[lot].admit_reserved(def),
                    }
                } else {
                    try_admit(&mut self.states[lot], def)
                };
                debug_assert!(
                    self.states[lot].occupied() + self.states[lot].reserved <= def.capacity
                );

                let d = &mut self.drivers[v];
                d.record.attempts.push(Attempt {
                    lot,
                    depart,
                    arrive: now,
                    outcome: match admission {
                        Admission::Admitted { floor } => AttemptOutcome::Parked { floor },
                        Admission::Full => AttemptOutcome::Full,
                    },
                });
                match admission {
                    Admission::Admitted { floor } => {
                        let walk = self.layout.walk_distance(lot) / self.s.kinematics.walk_speed;
                        d.record.parked_lot = Some(lot);
                        d.record.total_search_time = ts;
                        d.record.walk_time = walk;
                        self.set_phase(v, Phase::Parked);
                        self.emit(now, v, EventKind::Park, Some(lot), Some(floor));
                        self.schedule(now + ts + walk, v, Action::ReachDestination);
                    }
                    Admission::Full => {
                        d.record.rerouting_time += (now - depart) + self.opts.detection_overhead;
                        d.visited[lot] = true;
                        d.position = self.layout.lots[lot];
                        self.set_phase(v, Phase::Searching);
                        self.emit(now, v, EventKind::Full, Some(lot), None);
                        self.schedule(now + self.opts.detection_overhead, v, Action::Decide);
                    }
                }
            }
            Action::Decide => {
                let d = &self.drivers[v];
                let elapsed = now - d.first_lot_arrival.unwrap_or(now);
                if should_abandon(elapsed, d.patience) {
                    self.abandon(v, now);
                    return;
                }
                match self.choose(v) {
                    Some(lot) => self.start_leg(v, lot, now),
                    None => self.abandon(v, now),
                }
            }
            Action::ReachDestination => {
                let lot = self.drivers[v].record.parked_lot;
                self.emit(now, v, EventKind::ReachDestination, lot, None);
            }
        }
    }
}

/// One replication.
pub fn run_simulation(
    s: &Scenario,
    method: &Method,
    seed: u64,
    opts: &SimOptions,
) -> Result<SimOutcome> {
    run_simulation_observed(s, method, seed, opts, &mut NoObserver)
}

/// As [`run_simulation`], reporting every event to `observer`.
pub fn run_simulation_observed<O: SimObserver>(
    s: &Scenario,
    method: &Method,
    seed: u64,
    opts: &SimOptions,
    observer: &mut O,
) -> Result<SimOutcome> {
    let layout = Layout::new(s)?;
    let mix = match method {
        Method::Mix(mix) => mix.clone(),
        _ => s.effective_mix(),
    };
    let vehicles = generate_vehicles(s, &mix, seed)?;
    let plan: Option<Vec<usize>> = match method {
        Method::Mix(_) => None,
        Method::Assigned(a) => {
            if a.lot_of.len() != vehicles.len() {
                return Err(Error::DimensionMismatch(format!(
                    "assignment covers {} vehicles but the scenario demands {}",
                    a.lot_of.len(),
                    vehicles.len()
                )));
            }
            a.check_feasible(&s.capacities())?;
            Some(a.lot_of.clone())
        }
        Method::Optimized => {
            let c = build_cost_matrix(s, &vehicles, opts.planning_occupancy)?;
            Some(solve_assignment(&c, &s.capacities(), opts.fill_mode)?.lot_of)
        }
    };
    Ok(simulate_vehicles(
        s,
        &layout,
        &vehicles,
        plan.as_deref(),
        seed,
        opts,
        observer,
    ))
}

fn simulate_vehicles<O: SimObserver>(
    s: &Scenario,
    layout: &Layout,
    vehicles: &[Vehicle],
    plan: Option<&[usize]>,
    seed: u64,
    opts: &SimOptions,
    observer: &mut O,
) -> SimOutcome {
    let n_lots = s.lots.len();
    let drivers: Vec<Driver> = vehicles
        .iter()
        .map(|v| Driver {
            phase: Phase::Pending,
            position: layout.entries[v.entry],
            visited: vec![false; n_lots],
            first_lot_arrival: None,
            holds_reservation: false,
            leg_start: v.actual_arrival,
            patience: if opts.infinite_patience {
                f64::INFINITY
            } else {
                v.patience
            },
            plan: plan.map(|p| p[v.id]),
            record: VehicleRecord {
                vehicle: v.id,
                entry: v.entry,
                strategy: if plan.is_some() {
                    None
                } else {
                    Some(v.strategy)
                },
                entered_at: v.actual_arrival,
                attempts: Vec::new(),
                parked_lot: None,
                rerouting_time: 0.0,
                total_drive_time: 0.0,
                total_search_time: 0.0,
                walk_time: 0.0,
                abandoned: false,
                abandoned_at: None,
                detection_overhead: opts.detection_overhead,
            },
        })
        .collect();

    let mut world = World {
        s,
        layout,
        opts: *opts,
        states: s
            .lots
            .iter()
            .enumerate()
            .map(|(i, l)| LotState::empty(i, l))
            .collect(),
        census: Census {
            pending: vehicles.len(),
            ..Census::default()
        },
        drivers,
        queue: BinaryHeap::new(),
        seq: 0,
        observer,
    };

    let mut order: Vec<usize> = (0..vehicles.len()).collect();
    order.sort_by(|&a, &b| {
        vehicles[a]
            .actual_arrival
            .total_cmp(&vehicles[b].actual_arrival)
            .then(a.cmp(&b))
    });
    for v in order {
        world.schedule(vehicles[v].actual_arrival, v, Action::Enter);
    }
    while let Some(ev) = world.queue.pop() {
        world.handle(ev);
    }

    let failed_searches = world
        .states
        .iter()
        .map(|st| st.failed_search_count)
        .collect();
    let records: Vec<VehicleRecord> = world.drivers.into_iter().map(|d| d.record).collect();
    let parked: Vec<&VehicleRecord> = records.iter().filter(|r| r.parked_lot.is_some()).collect();
    let mean_rerouting_time = if parked.is_empty() {
        0.0
    } else {
        parked.iter().map(|r| r.rerouting_time).sum::<f64>() / parked.len() as f64
    };
    SimOutcome {
        seed,
        failed_searches,
        abandonment_count: records.iter().filter(|r| r.abandoned).count(),
        parked_count: parked.len(),
        mean_rerouting_time,
        records,
    }
}

/// Rerouting time of a finished record, rebuilt from the scenario geometry:
/// the drive time of every leg that ended at a full lot, plus the detection
/// overhead for each.
pub fn rerouting_time_of(record: &VehicleRecord, s: &Scenario) -> Result<f64> {
    let layout = Layout::new(s)?;
    Ok(rerouting_time_in(record, s, &layout))
}

pub fn rerouting_time_in(record: &VehicleRecord, s: &Scenario, layout: &Layout) -> f64 {
    let mut position = layout.entries[record.entry];
    let mut total = 0.0;
    for a in &record.attempts {
        let lot = layout.lots[a.lot];
        if a.outcome == AttemptOutcome::Full {
            total += manhattan_distance(position, lot) / s.kinematics.cruise_speed
                + record.detection_overhead;
        }
        position = lot;
    }
    total
}

/// `n_runs` replications; run `r` uses seed `base_seed + r`. The result is in
/// run order whether or not it was computed in parallel.
pub fn monte_carlo(
    s: &Scenario,
    method: &Method,
    n_runs: usize,
    base_seed: u64,
    opts: &SimOptions,
    parallel: bool,
) -> Result<Vec<SimOutcome>> {
    if n_runs == 0 {
        return Err(Error::InvalidArgument("n_runs must be >= 1".into()));
    }
    let run = |r: usize| run_simulation(s, method, base_seed.wrapping_add(r as u64), opts);
    if parallel {
        (0..n_runs).into_par_iter().map(run).collect()
    } else {
        (0..n_runs).map(run).collect()
    }
}

/// One row of a method comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodComparison {
    pub label: String,
    pub summary: Summary,
}

/// Runs every method over the same seed range, so all methods see the same
/// vehicles, entries, arrival times and patiences.
pub fn compare_methods(
    s: &Scenario,
    methods: &[(String, Method)],
    n_runs: usize,
    base_seed: u64,
    opts: &SimOptions,
) -> Result<Vec<MethodComparison>> {
    if methods.len() < 2 {
        return Err(Error::InvalidArgument(
            "compare needs at least two methods".into(),
        ));
    }
    methods
        .iter()
        .map(|(label, method)| {
            let outcomes = monte_carlo(s, method, n_runs, base_seed, opts, true)?;
            Ok(MethodComparison {
                label: label.clone(),
                summary: summarize(&outcomes)?,
            })
        })
        .collect()
}
