//! One simulated event day, with every driver following one rule, and an
//! event log for the first few vehicles.
//!
//!     cargo run --release --example simulate_strategies

use event_parking::scenario::{synth_scenario, Region, SynthOverrides};
use event_parking::simulator::{
    run_simulation, run_simulation_observed, EventRecord, Method, SimOptions,
};
use event_parking::strategies::{StrategyKind, StrategyMix};

fn main() -> event_parking::Result<()> {
    let s = synth_scenario(1, 21, 420, 12, Region::BERKELEY, SynthOverrides::default())?;
    let opts = SimOptions::default();
    let kinds = ["G1", "G2", "G3", "G4", "NG", "MC"];

    println!("rule  parked  abandoned  failed  rerouting_min");
    for label in kinds {
        let kind: StrategyKind = label.parse()?;
        let out = run_simulation(&s, &Method::Mix(StrategyMix::single(kind)), 7, &opts)?;
        println!(
            "{label:<4}  {:>6}  {:>9}  {:>6}  {:>13.2}",
            out.parked_count,
            out.abandonment_count,
            out.total_failed_searches(),
            out.mean_rerouting_time / 60.0
        );
    }

    let mut log: Vec<EventRecord> = Vec::new();
    let ng = Method::Mix(StrategyMix::single(StrategyKind::NoGuidanceNearest));
    run_simulation_observed(&s, &ng, 7, &opts, &mut log)?;
    let unlucky = log
        .iter()
        .find(|e| e.kind.as_str() == "full")
        .map(|e| e.vehicle);
    if let Some(v) = unlucky {
        println!("\nevents of vehicle {v} without guidance:");
        for e in log.iter().filter(|e| e.vehicle == v) {
            let lot = e.lot.map_or("-", |l| s.lots[l].id.as_str());
            println!("  {:>9.1} s  {:<17} {lot}", e.time, e.kind.as_str());
        }
    }
    Ok(())
}
