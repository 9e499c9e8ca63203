//! Builds a scenario in code, saves it as TOML, and reads it back.
//!
//!     cargo run --example synth_scenario [path]

use event_parking::scenario::{
    load_scenario_file, save_scenario_file, synth_scenario, validate_scenario, LatLon, Region,
    SynthOverrides,
};
use event_parking::strategies::StrategyMix;

fn main() -> event_parking::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/small_event.toml".into());
    let overrides = SynthOverrides {
        destination: Some(LatLon::new(37.8712, -122.2506)),
        demand: Some(250),
        mix: Some("G3=0.5,MC=0.3,NG=0.2".parse::<StrategyMix>()?),
        ..SynthOverrides::default()
    };
    let s = synth_scenario(42, 8, 300, 4, Region::BERKELEY, overrides)?;
    assert!(validate_scenario(&s).is_empty());
    save_scenario_file(&s, &path)?;

    let back = load_scenario_file(&path)?;
    assert_eq!(back, s);
    println!(
        "{path}: {} lots, {} spaces, demand {}",
        back.lots.len(),
        back.total_capacity(),
        back.demand
    );
    for lot in &back.lots {
        println!(
            "  {}  {:>3} spaces on {} floor(s)  ({:.5}, {:.5})",
            lot.id, lot.capacity, lot.floors, lot.lat, lot.lon
        );
    }
    println!("mix: {}", back.effective_mix());
    Ok(())
}
