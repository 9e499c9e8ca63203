//! Solves the vehicle-to-lot assignment for one arrival draw and shows how the
//! plan spreads vehicles over lots.
//!
//!     cargo run --release --example optimize_assignment [seed]

use event_parking::assignment::{build_cost_matrix, solve_assignment, FillMode, PlanningOccupancy};
use event_parking::scenario::{synth_scenario, Region, SynthOverrides};
use event_parking::strategies::generate_vehicles;

fn main() -> event_parking::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let s = synth_scenario(1, 21, 420, 12, Region::BERKELEY, SynthOverrides::default())?;
    let vehicles = generate_vehicles(&s, &s.effective_mix(), seed)?;
    let c = build_cost_matrix(&s, &vehicles, PlanningOccupancy::Uniform)?;

    for mode in [FillMode::AtMost, FillMode::ExactFill] {
        let a = solve_assignment(&c, &s.capacities(), mode)?;
        println!(
            "{mode:?}: {} vehicles, mean cost {:.2} min",
            vehicles.len(),
            a.total_cost / 60.0 / vehicles.len() as f64
        );
    }

    let a = solve_assignment(&c, &s.capacities(), FillMode::AtMost)?;
    println!("\nlot   cap  assigned");
    for (lot, n) in s.lots.iter().zip(a.counts(s.lots.len())) {
        println!("{:<4} {:>4}  {:>4}", lot.id, lot.capacity, n);
    }
    Ok(())
}
