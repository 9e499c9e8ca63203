//! Running mean of rerouting time as Monte Carlo runs accumulate, written to
//! CSV for plotting.
//!
//!     cargo run --release --example monte_carlo_convergence [runs] [out_dir]

use event_parking::report::{convergence_table, emit_csv, failed_search_table, summarize};
use event_parking::scenario::{synth_scenario, Region, SynthOverrides};
use event_parking::simulator::{monte_carlo, Method, SimOptions};

fn main() -> event_parking::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|s| s.parse().ok()).unwrap_or(30);
    let out = args.next().unwrap_or_else(|| "target/convergence".into());

    let s = synth_scenario(1, 21, 420, 12, Region::BERKELEY, SynthOverrides::default())?;
    let outcomes = monte_carlo(
        &s,
        &Method::Mix(s.effective_mix()),
        runs,
        1,
        &SimOptions::default(),
        true,
    )?;
    let summary = summarize(&outcomes)?;

    let mut prev = None;
    for (n, &mean) in summary.per_run_rerouting_min.iter().enumerate() {
        let running = summary.per_run_rerouting_min[..=n].iter().sum::<f64>() / (n + 1) as f64;
        let change = prev.map_or(String::new(), |p: f64| {
            format!("{:+.2}%", 100.0 * (running - p) / p)
        });
        println!(
            "run {:>3}  this run {mean:>5.2} min  running mean {running:>5.2} min  {change}",
            n + 1
        );
        prev = Some(running);
    }

    emit_csv(
        &convergence_table(&outcomes),
        format!("{out}/convergence.csv"),
    )?;
    emit_csv(
        &failed_search_table(&s, &outcomes),
        format!("{out}/failed_searches.csv"),
    )?;
    println!("wrote {out}/convergence.csv and {out}/failed_searches.csv");
    Ok(())
}
