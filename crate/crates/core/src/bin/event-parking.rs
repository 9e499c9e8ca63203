use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use event_parking::assignment::{build_cost_matrix, solve_assignment, FillMode, PlanningOccupancy};
use event_parking::report::{
    assignment_table, comparison_table, convergence_table, emit_csv, events_table,
    failed_search_table, read_assignment_csv, runs_table, summarize, summary_table, vehicles_table,
};
use event_parking::scenario::{
    load_scenario_file, save_scenario_file, synth_scenario, Region, Scenario, SynthOverrides,
};
use event_parking::simulator::{
    compare_methods, monte_carlo, run_simulation_observed, EventRecord, Method, SimOptions,
};
use event_parking::strategies::{generate_vehicles, StrategyKind, StrategyMix};
use event_parking::{Error, Result};

#[derive(Parser)]
#[command(
    name = "event-parking",
    version,
    about = "Parking assignment and simulation for large events"
)]
struct Cli {
    /// Directory for CSV and scenario output.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario around the Berkeley stadium.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 21)]
        lots: usize,
        #[arg(long, default_value_t = 3992)]
        capacity: usize,
        #[arg(long, default_value_t = 12)]
        entries: usize,
        /// Number of vehicles; defaults to the total capacity.
        #[arg(long)]
        demand: Option<usize>,
        #[arg(long, default_value = "scenario.toml")]
        file: String,
    },
    /// Check a scenario file and list every problem found.
    Validate { file: PathBuf },
    /// Solve the vehicle-to-lot assignment for one vehicle draw.
    Optimize {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::AtMost)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Occupancy::Uniform)]
        occupancy: Occupancy,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Monte Carlo simulation of one method.
    Simulate {
        file: PathBuf,
        /// Strategy mix such as G1=0.5,NG=0.5; defaults to the scenario's mix.
        #[arg(long, group = "method")]
        mix: Option<StrategyMix>,
        /// Fixed assignment CSV as written by `optimize`.
        #[arg(long, group = "method")]
        assignment: Option<PathBuf>,
        /// Re-optimize the assignment for every run.
        #[arg(long, group = "method")]
        optimized: bool,
        #[command(flatten)]
        run: RunArgs,
        /// Event log of the first run.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Simulate several methods on common random numbers.
    Compare {
        file: PathBuf,
        /// Comma-separated: opt, g-mix, scenario-mix, nearest, multicriteria, or a strategy label.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "opt,g-mix,nearest,multicriteria"
        )]
        methods: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Seconds lost at each full lot.
    #[arg(long, default_value_t = 0.0)]
    overhead: f64,
    /// Assigned vehicles do not hold their spot while driving.
    #[arg(long)]
    no_reservation: bool,
    #[arg(long)]
    infinite_patience: bool,
    #[arg(long, value_enum, default_value_t = Mode::AtMost)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Occupancy::Uniform)]
    occupancy: Occupancy,
}

impl RunArgs {
    fn options(&self) -> SimOptions {
        SimOptions {
            detection_overhead: self.overhead,
            reservation: !self.no_reservation,
            infinite_patience: self.infinite_patience,
            planning_occupancy: self.occupancy.into(),
            fill_mode: self.mode.into(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Mode {
    ExactFill,
    AtMost,
}

impl From<Mode> for FillMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::ExactFill => FillMode::ExactFill,
            Mode::AtMost => FillMode::AtMost,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Occupancy {
    Empty,
    Uniform,
    Full,
}

impl From<Occupancy> for PlanningOccupancy {
    fn from(o: Occupancy) -> Self {
        match o {
            Occupancy::Empty => PlanningOccupancy::Empty,
            Occupancy::Uniform => PlanningOccupancy::Uniform,
            Occupancy::Full => PlanningOccupancy::Full,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // keep 2 for infeasibility
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli.command, &cli.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cmd: &Command, out: &Path) -> Result<()> {
    match cmd {
        Command::Synth {
            seed,
            lots,
            capacity,
            entries,
            demand,
            file,
        } => {
            let overrides = SynthOverrides {
                demand: *demand,
                ..SynthOverrides::default()
            };
            let s = synth_scenario(
                *seed,
                *lots,
                *capacity,
                *entries,
                Region::BERKELEY,
                overrides,
            )?;
            let path = out.join(file);
            save_scenario_file(&s, &path)?;
            println!(
                "wrote {} ({} lots, {} spaces, {} entries, demand {}, seed {seed})",
                path.display(),
                s.lots.len(),
                s.total_capacity(),
                s.entries.len(),
                s.demand
            );
        }
        Command::Validate { file } => {
            let s = load_scenario_file(file)?;
            println!(
                "{}: ok ({} lots, {} spaces, {} entries, demand {})",
                file.display(),
                s.lots.len(),
                s.total_capacity(),
                s.entries.len(),
                s.demand
            );
        }
        Command::Optimize {
            file,
            mode,
            occupancy,
            seed,
        } => {
            let s = load_scenario_file(file)?;
            let vehicles = generate_vehicles(&s, &s.effective_mix(), *seed)?;
            let occ: PlanningOccupancy = (*occupancy).into();
            let c = build_cost_matrix(&s, &vehicles, occ)?;
            let a = solve_assignment(&c, &s.capacities(), (*mode).into())?;
            let path = out.join("assignment.csv");
            emit_csv(
                &assignment_table(&s, &vehicles, &a, occ.fraction(&s))?,
                &path,
            )?;
            println!(
                "seed {seed}: {} vehicles, total cost {:.2} min, mean {:.2} min per vehicle -> {}",
                vehicles.len(),
                a.total_cost / 60.0,
                a.total_cost / 60.0 / vehicles.len().max(1) as f64,
                path.display()
            );
        }
        Command::Simulate {
            file,
            mix,
            assignment,
            optimized,
            run,
            events,
        } => {
            let s = load_scenario_file(file)?;
            let (label, method) = if *optimized {
                ("opt".to_string(), Method::Optimized)
            } else if let Some(p) = assignment {
                (
                    "assigned".to_string(),
                    Method::Assigned(read_assignment_csv(p, &s)?),
                )
            } else {
                let mix = mix.clone().unwrap_or_else(|| s.effective_mix());
                (mix.to_string(), Method::Mix(mix))
            };
            let opts = run.options();
            let outcomes = monte_carlo(&s, &method, run.runs, run.seed, &opts, true)?;
            emit_csv(&runs_table(&outcomes), out.join("runs.csv"))?;
            emit_csv(&vehicles_table(&s, &outcomes), out.join("vehicles.csv"))?;
            emit_csv(
                &failed_search_table(&s, &outcomes),
                out.join("failed_searches.csv"),
            )?;
            emit_csv(&convergence_table(&outcomes), out.join("convergence.csv"))?;
            let summary = summarize(&outcomes)?;
            emit_csv(&summary_table(&label, &summary), out.join("summary.csv"))?;
            if let Some(path) = events {
                let mut log: Vec<EventRecord> = Vec::new();
                run_simulation_observed(&s, &method, run.seed, &opts, &mut log)?;
                emit_csv(&events_table(&s, &log), path)?;
            }
            println!(
                "{label}: {} runs from seed {}, mean rerouting {:.2} min, median {:.2} min, {:.2} failed searches per run, abandonment {:.2}%",
                summary.runs,
                run.seed,
                summary.mean_rerouting_min,
                summary.median_rerouting_min,
                summary.failed_searches_total as f64 / summary.runs as f64,
                100.0 * summary.abandonment_rate
            );
        }
        Command::Compare { file, methods, run } => {
            let s = load_scenario_file(file)?;
            let methods = methods
                .iter()
                .map(|m| parse_method(m, &s).map(|method| (m.clone(), method)))
                .collect::<Result<Vec<_>>>()?;
            let rows = compare_methods(&s, &methods, run.runs, run.seed, &run.options())?;
            emit_csv(&comparison_table(&rows), out.join("comparison.csv"))?;
            println!("{} runs from seed {}", run.runs, run.seed);
            for row in &rows {
                println!(
                    "{:>14}  mean rerouting {:>6.2} min  failed searches/run {:>8.2}  abandonment {:>6.2}%",
                    row.label,
                    row.summary.mean_rerouting_min,
                    row.summary.failed_searches_total as f64 / row.summary.runs as f64,
                    100.0 * row.summary.abandonment_rate
                );
            }
        }
    }
    Ok(())
}

fn parse_method(name: &str, s: &Scenario) -> Result<Method> {
    Ok(match name {
        "opt" | "optimized" => Method::Optimized,
        "g-mix" => Method::Mix(StrategyMix::default()),
        "scenario-mix" => Method::Mix(s.effective_mix()),
        other => Method::Mix(StrategyMix::single(other.parse::<StrategyKind>()?)),
    })
}
