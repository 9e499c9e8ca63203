//! Vehicle-to-lot assignment minimizing drive + in-lot search + walk time.
//!
//! The problem is a transportation problem: unit-demand vehicles, capacitated
//! lots. [`solve_assignment`] solves it exactly as a min-cost flow by
//! successive shortest augmenting paths. Vehicles are inserted one at a time;
//! the augmenting path from a new vehicle runs over a residual graph whose
//! nodes are the lots, where the arc `j -> l` costs the cheapest move of a
//! vehicle currently in `j` over to `l`. Since the lot count is small, each
//! insertion is a Bellman-Ford pass over `m` nodes.
//!
//! Costs are rounded to integer milliseconds before solving so optimality is
//! exact and tie handling does not depend on floating-point noise.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geo::{manhattan_distance, travel_time};
use crate::layout::Layout;
use crate::lot_model::search_time_at;
use crate::scenario::Scenario;
use crate::strategies::Vehicle;

/// Dense `vehicles x lots` matrix of assignment costs in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n_vehicles: usize,
    n_lots: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n_vehicles: usize, n_lots: usize, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != n_vehicles * n_lots {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n_vehicles}x{n_lots} matrix",
                costs.len()
            )));
        }
        if let Some(bad) = costs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::Domain(format!(
                "cost entries must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self {
            n_vehicles,
            n_lots,
            costs,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_lots = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_lots) {
            return Err(Error::DimensionMismatch("ragged cost rows".into()));
        }
        Self::new(rows.len(), n_lots, rows.concat())
    }

    pub fn n_vehicles(&self) -> usize {
        self.n_vehicles
    }

    pub fn n_lots(&self) -> usize {
        self.n_lots
    }

    pub fn get(&self, vehicle: usize, lot: usize) -> f64 {
        self.costs[vehicle * self.n_lots + lot]
    }

    pub fn row(&self, vehicle: usize) -> &[f64] {
        &self.costs[vehicle * self.n_lots..(vehicle + 1) * self.n_lots]
    }

    /// Entries rounded to whole milliseconds.
    pub fn to_millis(&self) -> Vec<i64> {
        self.costs.iter().map(|&c| to_millis(c)).collect()
    }
}

pub fn to_millis(seconds: f64) -> i64 {
    (seconds * 1000.0).round() as i64
}

/// Occupancy assumed for the search-time term while planning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlanningOccupancy {
    Empty,
    /// Demand over total capacity, applied to every lot and floor.
    #[default]
    Uniform,
    Full,
}

impl PlanningOccupancy {
    pub fn fraction(&self, s: &Scenario) -> f64 {
        match self {
            PlanningOccupancy::Empty => 0.0,
            PlanningOccupancy::Uniform => {
                (s.demand as f64 / s.total_capacity().max(1) as f64).min(1.0)
            }
            PlanningOccupancy::Full => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillMode {
    /// Every lot ends exactly full; requires demand equal to total capacity.
    ExactFill,
    #[default]
    AtMost,
}

/// The three cost components of sending one vehicle to one lot, seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostTerms {
    pub drive: f64,
    pub search: f64,
    pub walk: f64,
}

impl CostTerms {
    pub fn total(&self) -> f64 {
        self.drive + self.search + self.walk
    }
}

pub fn cost_terms(
    s: &Scenario,
    layout: &Layout,
    vehicle: &Vehicle,
    lot: usize,
    occupancy: f64,
) -> Result<CostTerms> {
    let k = &s.kinematics;
    let drive = travel_time(
        manhattan_distance(layout.entries[vehicle.entry], layout.lots[lot]),
        k.cruise_speed,
    )?;
    let walk = travel_time(layout.walk_distance(lot), k.walk_speed)?;
    let search = search_time_at(&s.lots[lot], k, occupancy, occupancy);
    Ok(CostTerms {
        drive,
        search,
        walk,
    })
}

pub fn build_cost_matrix(
    s: &Scenario,
    vehicles: &[Vehicle],
    occupancy: PlanningOccupancy,
) -> Result<CostMatrix> {
    let layout = Layout::new(s)?;
    let o = occupancy.fraction(s);
    let mut costs = Vec::with_capacity(vehicles.len() * s.lots.len());
    for v in vehicles {
        for lot in 0..s.lots.len() {
            costs.push(cost_terms(s, &layout, v, lot, o)?.total());
        }
    }
    CostMatrix::new(vehicles.len(), s.lots.len(), costs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Lot index for each vehicle.
    pub lot_of: Vec<usize>,
    /// Sum of the chosen entries, seconds.
    pub total_cost: f64,
    /// Same sum over millisecond-rounded entries; this is what is optimized.
    pub total_cost_ms: i64,
}

impl Assignment {
    fn from_lots(lot_of: Vec<usize>, c: &CostMatrix) -> Self {
        let total_cost = lot_of.iter().enumerate().map(|(k, &i)| c.get(k, i)).sum();
        let total_cost_ms = lot_of
            .iter()
            .enumerate()
            .map(|(k, &i)| to_millis(c.get(k, i)))
            .sum();
        Self {
            lot_of,
            total_cost,
            total_cost_ms,
        }
    }

    pub fn counts(&self, n_lots: usize) -> Vec<usize> {
        let mut counts = vec![0; n_lots];
        for &i in &self.lot_of {
            counts[i] += 1;
        }
        counts
    }

    /// Checks one-lot-per-vehicle and capacity bounds against `capacities`.
    pub fn check_feasible(&self, capacities: &[usize]) -> Result<()> {
        if let Some(&bad) = self.lot_of.iter().find(|&&i| i >= capacities.len()) {
            return Err(Error::DimensionMismatch(format!(
                "assignment uses lot index {bad} but only {} lots exist",
                capacities.len()
            )));
        }
        let counts = self.counts(capacities.len());
        if let Some(i) = (0..capacities.len()).find(|&i| counts[i] > capacities[i]) {
            return Err(Error::Infeasible {
                demand: counts[i],
                capacity: capacities[i],
                rule: "assignment overfills a lot",
            });
        }
        Ok(())
    }
}

fn check_dimensions(c: &CostMatrix, capacities: &[usize]) -> Result<()> {
    if capacities.len() != c.n_lots() {
        return Err(Error::DimensionMismatch(format!(
            "{} capacities for {} lots",
            capacities.len(),
            c.n_lots()
        )));
    }
    Ok(())
}

/// Optimal assignment of every vehicle to one lot within capacity.
pub fn solve_assignment(
    c: &CostMatrix,
    capacities: &[usize],
    mode: FillMode,
) -> Result<Assignment> {
    check_dimensions(c, capacities)?;
    let k = c.n_vehicles();
    let supply: usize = capacities.iter().sum();
    match mode {
        FillMode::ExactFill if k != supply => {
            return Err(Error::Infeasible {
                demand: k,
                capacity: supply,
                rule: "exact fill needs demand equal to capacity",
            })
        }
        FillMode::AtMost if k > supply => {
            return Err(Error::Infeasible {
                demand: k,
                capacity: supply,
                rule: "demand exceeds capacity",
            })
        }
        _ => {}
    }

    let lot_of = LotGraphSolver::new(c, capacities).run();
    let a = Assignment::from_lots(lot_of, c);
    a.check_feasible(capacities)?;
    if mode == FillMode::ExactFill {
        debug_assert!(a.counts(c.n_lots()) == capacities);
    }
    Ok(a)
}

const UNASSIGNED: usize = usize::MAX;

struct LotGraphSolver<'a> {
    m: usize,
    costs: Vec<i64>,
    capacities: &'a [usize],
    lot_of: Vec<usize>,
    counts: Vec<usize>,
    /// `moves[j * m + l]`: (cost of moving v from j to l, v), lazily pruned.
    moves: Vec<BinaryHeap<Reverse<(i64, usize)>>>,
}

impl<'a> LotGraphSolver<'a> {
    fn new(c: &CostMatrix, capacities: &'a [usize]) -> Self {
        let m = c.n_lots();
        Self {
            m,
            costs: c.to_millis(),
            capacities,
            lot_of: vec![UNASSIGNED; c.n_vehicles()],
            counts: vec![0; m],
            moves: (0..m * m).map(|_| BinaryHeap::new()).collect(),
        }
    }

    fn cost(&self, v: usize, lot: usize) -> i64 {
        self.costs[v * self.m + lot]
    }

    fn place(&mut self, v: usize, lot: usize) {
        self.lot_of[v] = lot;
        for other in (0..self.m).filter(|&l| l != lot) {
            let delta = self.cost(v, other) - self.cost(v, lot);
            self.moves[lot * self.m + other].push(Reverse((delta, v)));
        }
    }

    /// Cheapest valid move `j -> l`, dropping entries for vehicles that left `j`.
    fn best_move(&mut self, j: usize, l: usize) -> Option<(i64, usize)> {
        let heap = &mut self.moves[j * self.m + l];
        while let Some(&Reverse((delta, v))) = heap.peek() {
            if self.lot_of[v] == j {
                return Some((delta, v));
            }
            heap.pop();
        }
        None
    }

    fn run(mut self) -> Vec<usize> {
        let m = self.m;
        let n = self.lot_of.len();
        let mut arcs: Vec<Option<(i64, usize)>> = vec![None; m * m];
        for new in 0..n {
            for j in 0..m {
                for l in 0..m {
                    arcs[j * m + l] = if j != l && self.counts[j] > 0 {
                        self.best_move(j, l)
                    } else {
                        None
                    };
                }
            }

            let mut dist: Vec<i64> = (0..m).map(|l| self.cost(new, l)).collect();
            // predecessor lot and the vehicle that moves along that arc
            let mut pred: Vec<Option<(usize, usize)>> = vec![None; m];
            let mut rounds = 0;
            loop {
                let mut changed = false;
                for j in 0..m {
                    for l in 0..m {
                        if let Some((w, v)) = arcs[j * m + l] {
                            if dist[j] + w < dist[l] {
                                dist[l] = dist[j] + w;
                                pred[l] = Some((j, v));
                                changed = true;
                            }
                        }
                    }
                }
                rounds += 1;
                if !changed {
                    break;
                }
                assert!(rounds <= m, "negative cycle in residual lot graph");
            }

            let target = (0..m)
                .filter(|&l| self.counts[l] < self.capacities[l])
                .min_by_key(|&l| (dist[l], l))
                .expect("capacity checked before solving");

            let mut cur = target;
            while let Some((from, v)) = pred[cur] {
                self.place(v, cur);
                cur = from;
            }
            self.place(new, cur);
            self.counts[target] += 1;
        }
        self.lot_of
    }
}

/// Largest instance [`brute_force_assignment`] accepts.
pub const BRUTE_FORCE_MAX_VEHICLES: usize = 10;
pub const BRUTE_FORCE_MAX_CAPACITY: usize = 12;

/// Exhaustive search over all feasible assignments. Among optimal ones the
/// lexicographically smallest `lot_of` is returned.
pub fn brute_force_assignment(c: &CostMatrix, capacities: &[usize]) -> Result<Assignment> {
    check_dimensions(c, capacities)?;
    let supply: usize = capacities.iter().sum();
    if c.n_vehicles() > BRUTE_FORCE_MAX_VEHICLES || supply > BRUTE_FORCE_MAX_CAPACITY {
        return Err(Error::SizeGuard(format!(
            "{} vehicles / {supply} spaces (limits {BRUTE_FORCE_MAX_VEHICLES} / {BRUTE_FORCE_MAX_CAPACITY})",
            c.n_vehicles()
        )));
    }
    if c.n_vehicles() > supply {
        return Err(Error::Infeasible {
            demand: c.n_vehicles(),
            capacity: supply,
            rule: "demand exceeds capacity",
        });
    }

    struct Search {
        costs: Vec<i64>,
        m: usize,
        remaining: Vec<usize>,
        current: Vec<usize>,
        best: Option<(i64, Vec<usize>)>,
    }

    impl Search {
        fn go(&mut self, k: usize, acc: i64) {
            if k == self.current.len() {
                if self.best.as_ref().is_none_or(|(b, _)| acc < *b) {
                    self.best = Some((acc, self.current.clone()));
                }
                return;
            }
            for lot in 0..self.m {
                if self.remaining[lot] == 0 {
                    continue;
                }
                self.remaining[lot] -= 1;
                self.current[k] = lot;
                self.go(k + 1, acc + self.costs[k * self.m + lot]);
                self.remaining[lot] += 1;
            }
        }
    }

    let mut search = Search {
        costs: c.to_millis(),
        m: c.n_lots(),
        remaining: capacities.to_vec(),
        current: vec![0; c.n_vehicles()],
        best: None,
    };
    search.go(0, 0);
    let (_, lot_of) = search
        .best
        .expect("capacity checked, so some assignment exists");
    Ok(Assignment::from_lots(lot_of, c))
}

/// Recomputes the objective of `a` under `c`, seconds.
pub fn assignment_cost(a: &Assignment, c: &CostMatrix) -> Result<f64> {
    if a.lot_of.len() != c.n_vehicles() {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} vehicles, matrix has {}",
            a.lot_of.len(),
            c.n_vehicles()
        )));
    }
    if let Some(&bad) = a.lot_of.iter().find(|&&i| i >= c.n_lots()) {
        return Err(Error::DimensionMismatch(format!(
            "lot index {bad} out of range for {} lots",
            c.n_lots()
        )));
    }
    Ok(a.lot_of.iter().enumerate().map(|(k, &i)| c.get(k, i)).sum())
}
