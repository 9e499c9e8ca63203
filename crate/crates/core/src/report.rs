//! Aggregation of Monte Carlo outcomes and CSV output.
//!
//! Every table is written with a header row and a fixed column order. Real
//! numbers are printed with six significant digits; integers and labels are
//! printed as-is.

use std::fs;
use std::path::Path;

use crate::assignment::{cost_terms, Assignment, CostMatrix};
use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::scenario::Scenario;
use crate::simulator::{AttemptOutcome, EventRecord, MethodComparison, SimOutcome};
use crate::strategies::Vehicle;

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Seed of the first run.
    pub base_seed: u64,
    pub runs: usize,
    /// Mean over runs of each run's mean rerouting time, minutes.
    pub mean_rerouting_min: f64,
    /// Median rerouting time over all parked vehicles of all runs, minutes.
    pub median_rerouting_min: f64,
    /// Mean failed searches per run, by lot index.
    pub failed_searches_per_lot: Vec<f64>,
    pub failed_searches_total: u64,
    /// Abandoned vehicles over all vehicles simulated.
    pub abandonment_rate: f64,
    pub parked_fraction: f64,
    /// Per-run mean rerouting time, minutes, in run order.
    pub per_run_rerouting_min: Vec<f64>,
}

pub fn summarize(outcomes: &[SimOutcome]) -> Result<Summary> {
    if outcomes.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot summarize zero outcomes".into(),
        ));
    }
    let runs = outcomes.len();
    let per_run_rerouting_min: Vec<f64> = outcomes
        .iter()
        .map(|o| o.mean_rerouting_time / 60.0)
        .collect();
    let mut pooled: Vec<f64> = outcomes
        .iter()
        .flat_map(|o| o.records.iter())
        .filter(|r| r.parked_lot.is_some())
        .map(|r| r.rerouting_time / 60.0)
        .collect();
    pooled.sort_by(f64::total_cmp);

    let n_lots = outcomes[0].failed_searches.len();
    let mut failed_searches_per_lot = vec![0.0; n_lots];
    for o in outcomes {
        for (acc, &f) in failed_searches_per_lot.iter_mut().zip(&o.failed_searches) {
            *acc += f as f64;
        }
    }
    failed_searches_per_lot
        .iter_mut()
        .for_each(|x| *x /= runs as f64);

    let vehicles: usize = outcomes.iter().map(|o| o.records.len()).sum();
    let ratio = |n: usize| {
        if vehicles == 0 {
            0.0
        } else {
            n as f64 / vehicles as f64
        }
    };
    Ok(Summary {
        base_seed: outcomes[0].seed,
        runs,
        mean_rerouting_min: per_run_rerouting_min.iter().sum::<f64>() / runs as f64,
        median_rerouting_min: median(&pooled),
        failed_searches_per_lot,
        failed_searches_total: outcomes.iter().map(SimOutcome::total_failed_searches).sum(),
        abandonment_rate: ratio(outcomes.iter().map(|o| o.abandonment_count).sum()),
        parked_fraction: ratio(outcomes.iter().map(|o| o.parked_count).sum()),
        per_run_rerouting_min,
    })
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

/// Prefix means: element `n - 1` is the mean of the first `n` values.
pub fn running_means(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            acc / (i + 1) as f64
        })
        .collect()
}

/// `(n, running mean of rerouting time in minutes after n runs)`.
pub fn convergence_series(outcomes: &[SimOutcome]) -> Vec<(usize, f64)> {
    let per_run: Vec<f64> = outcomes
        .iter()
        .map(|o| o.mean_rerouting_time / 60.0)
        .collect();
    running_means(&per_run)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (i + 1, m))
        .collect()
}

/// `matrix[lot][run]` = failed searches at `lot` during `run`.
pub fn failed_search_matrix(outcomes: &[SimOutcome]) -> Vec<Vec<u64>> {
    let n_lots = outcomes.first().map_or(0, |o| o.failed_searches.len());
    (0..n_lots)
        .map(|lot| outcomes.iter().map(|o| o.failed_searches[lot]).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_sig6(*x),
            Cell::Text(t) => t.clone(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(i: $t) -> Self {
                Cell::Int(i as i64)
            }
        }
    )*};
}
int_cell!(usize, u64, u32, i64);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn rendered_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(Cell::render).collect())
            .collect()
    }
}

/// `x` with six significant digits; scientific notation outside `[1e-4, 1e6)`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, x)
    } else {
        sci
    }
}

pub fn emit_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&table.header).map_err(csv_err)?;
    for row in table.rendered_rows() {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Header and string cells of a CSV file.
pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)?;
    Ok((header, rows))
}

/// One row per run.
pub fn runs_table(outcomes: &[SimOutcome]) -> Table {
    let mut t = Table::new(&[
        "run",
        "seed",
        "mean_rerouting_min",
        "parked",
        "abandoned",
        "failed_searches",
    ]);
    for (r, o) in outcomes.iter().enumerate() {
        t.push(vec![
            r.into(),
            o.seed.into(),
            (o.mean_rerouting_time / 60.0).into(),
            o.parked_count.into(),
            o.abandonment_count.into(),
            o.total_failed_searches().into(),
        ]);
    }
    t
}

/// One row per vehicle per run.
pub fn vehicles_table(s: &Scenario, outcomes: &[SimOutcome]) -> Table {
    let mut t = Table::new(&[
        "run",
        "vehicle_id",
        "entry_id",
        "strategy",
        "entered_s",
        "attempts",
        "failed_attempts",
        "parked_lot",
        "parked_floor",
        "rerouting_s",
        "drive_s",
        "search_s",
        "walk_s",
        "abandoned",
    ]);
    for (run, o) in outcomes.iter().enumerate() {
        for r in &o.records {
            let floor = r.attempts.iter().find_map(|a| match a.outcome {
                AttemptOutcome::Parked { floor } => Some(floor),
                AttemptOutcome::Full => None,
            });
            t.push(vec![
                run.into(),
                r.vehicle.into(),
                s.entries[r.entry].id.as_str().into(),
                r.strategy.map_or("assigned", |k| k.label()).into(),
                r.entered_at.into(),
                r.attempts.len().into(),
                r.attempts
                    .iter()
                    .filter(|a| a.outcome == AttemptOutcome::Full)
                    .count()
                    .into(),
                r.parked_lot
                    .map_or(String::new(), |l| s.lots[l].id.clone())
                    .into(),
                floor.map_or(String::new(), |f| f.to_string()).into(),
                r.rerouting_time.into(),
                r.total_drive_time.into(),
                r.total_search_time.into(),
                r.walk_time.into(),
                u32::from(r.abandoned).into(),
            ]);
        }
    }
    t
}

/// Lots as rows, runs as columns.
pub fn failed_search_table(s: &Scenario, outcomes: &[SimOutcome]) -> Table {
    let mut header = vec!["lot_id".to_string()];
    header.extend((0..outcomes.len()).map(|r| format!("run_{r}")));
    let mut t = Table::new(&header);
    for (lot, counts) in failed_search_matrix(outcomes).into_iter().enumerate() {
        let mut row: Vec<Cell> = vec![s.lots[lot].id.as_str().into()];
        row.extend(counts.into_iter().map(Cell::from));
        t.push(row);
    }
    t
}

pub fn convergence_table(outcomes: &[SimOutcome]) -> Table {
    let mut t = Table::new(&["n_runs", "running_mean_rerouting_min"]);
    for (n, m) in convergence_series(outcomes) {
        t.push(vec![n.into(), m.into()]);
    }
    t
}

fn summary_header() -> [&'static str; 9] {
    [
        "method",
        "base_seed",
        "runs",
        "mean_rerouting_min",
        "median_rerouting_min",
        "failed_searches_total",
        "failed_searches_per_run",
        "abandonment_rate",
        "parked_fraction",
    ]
}

fn summary_row(label: &str, sm: &Summary) -> Vec<Cell> {
    vec![
        label.into(),
        sm.base_seed.into(),
        sm.runs.into(),
        sm.mean_rerouting_min.into(),
        sm.median_rerouting_min.into(),
        sm.failed_searches_total.into(),
        (sm.failed_searches_total as f64 / sm.runs as f64).into(),
        sm.abandonment_rate.into(),
        sm.parked_fraction.into(),
    ]
}

pub fn summary_table(label: &str, sm: &Summary) -> Table {
    let mut t = Table::new(&summary_header());
    t.push(summary_row(label, sm));
    t
}

pub fn comparison_table(rows: &[MethodComparison]) -> Table {
    let mut t = Table::new(&summary_header());
    for row in rows {
        t.push(summary_row(&row.label, &row.summary));
    }
    t
}

pub fn events_table(s: &Scenario, events: &[EventRecord]) -> Table {
    let mut t = Table::new(&["time_s", "vehicle_id", "event", "lot_id", "floor"]);
    for e in events {
        t.push(vec![
            e.time.into(),
            e.vehicle.into(),
            e.kind.as_str().into(),
            e.lot.map_or(String::new(), |l| s.lots[l].id.clone()).into(),
            e.floor.map_or(String::new(), |f| f.to_string()).into(),
        ]);
    }
    t
}

/// Assignment with its cost breakdown, one row per vehicle.
pub fn assignment_table(
    s: &Scenario,
    vehicles: &[Vehicle],
    a: &Assignment,
    occupancy: f64,
) -> Result<Table> {
    let layout = Layout::new(s)?;
    let mut t = Table::new(&["vehicle_id", "lot_id", "td_s", "ts_s", "tw_s", "total_s"]);
    for (v, &lot) in vehicles.iter().zip(&a.lot_of) {
        let c = cost_terms(s, &layout, v, lot, occupancy)?;
        t.push(vec![
            v.id.into(),
            s.lots[lot].id.as_str().into(),
            c.drive.into(),
            c.search.into(),
            c.walk.into(),
            c.total().into(),
        ]);
    }
    Ok(t)
}

/// Reads an assignment written by [`assignment_table`]. Vehicles must be
/// listed once each with ids `0..n`.
pub fn read_assignment_csv(path: impl AsRef<Path>, s: &Scenario) -> Result<Assignment> {
    let path = path.as_ref();
    let (header, rows) = read_csv(path)?;
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidArgument(format!("{}: missing column {name}", path.display()))
        })
    };
    let (vc, lc, tc) = (col("vehicle_id")?, col("lot_id")?, col("total_s")?);
    let mut lot_of = vec![usize::MAX; rows.len()];
    let mut costs = vec![0.0; rows.len()];
    for row in &rows {
        let bad = |what: &str| {
            Error::InvalidArgument(format!("{}: bad {what} in row {row:?}", path.display()))
        };
        let v: usize = row[vc].parse().map_err(|_| bad("vehicle_id"))?;
        if v >= rows.len() || lot_of[v] != usize::MAX {
            return Err(bad("vehicle_id"));
        }
        lot_of[v] = s.lot_index(&row[lc]).ok_or_else(|| bad("lot_id"))?;
        costs[v] = row[tc].parse().map_err(|_| bad("total_s"))?;
    }
    let c = CostMatrix::new(rows.len(), 1, costs)?;
    let total_cost = (0..rows.len()).map(|k| c.get(k, 0)).sum();
    let total_cost_ms = (0..rows.len())
        .map(|k| crate::assignment::to_millis(c.get(k, 0)))
        .sum();
    let a = Assignment {
        lot_of,
        total_cost,
        total_cost_ms,
    };
    a.check_feasible(&s.capacities())?;
    Ok(a)
}
