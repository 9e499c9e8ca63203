//! Optimized assignment against guided and unguided drivers, all on the same
//! vehicle draws.
//!
//!     cargo run --release --example compare_methods

use event_parking::scenario::{synth_scenario, Region, SynthOverrides};
use event_parking::simulator::{compare_methods, Method, SimOptions};
use event_parking::strategies::{StrategyKind, StrategyMix};

fn main() -> event_parking::Result<()> {
    let s = synth_scenario(1, 21, 420, 12, Region::BERKELEY, SynthOverrides::default())?;
    let single = |k: StrategyKind| Method::Mix(StrategyMix::single(k));
    let methods = vec![
        ("optimized".to_string(), Method::Optimized),
        (
            "guided mix".to_string(),
            Method::Mix(StrategyMix::default()),
        ),
        (
            "multi-criteria".to_string(),
            single(StrategyKind::MultiCriteria(Default::default())),
        ),
        (
            "no guidance".to_string(),
            single(StrategyKind::NoGuidanceNearest),
        ),
    ];

    for overhead in [0.0, 30.0] {
        let opts = SimOptions {
            detection_overhead: overhead,
            ..SimOptions::default()
        };
        println!("{overhead} s lost at each full lot, 20 runs:");
        for row in compare_methods(&s, &methods, 20, 1, &opts)? {
            let sm = &row.summary;
            println!(
                "  {:<15} rerouting {:>5.2} min (median {:>5.2})  failed/run {:>7.1}  abandoned {:>5.2}%",
                row.label,
                sm.mean_rerouting_min,
                sm.median_rerouting_min,
                sm.failed_searches_total as f64 / sm.runs as f64,
                100.0 * sm.abandonment_rate
            );
        }
    }
    Ok(())
}
