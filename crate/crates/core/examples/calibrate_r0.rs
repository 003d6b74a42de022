//! Find the network transmission probability that gives R0 close to 2.8
//! without mitigation.
//!
//! cargo run --release --example calibrate_r0 -- [replicates]

use ctasim::engine::ScenarioConfig;
use ctasim::experiments::calibrate;
use ctasim::synthpop::{generate_population, PopulationSpec};

fn main() -> ctasim::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let pop = generate_population(&PopulationSpec::default_city(), 1)?;
    let mut template = ScenarioConfig::business_as_usual();
    // R0 only needs the first three weeks.
    template.horizon_days = 60;
    let report = calibrate(&pop, &template, 2.8, &[0.06, 0.07, 0.08, 0.09], reps, 1, 0)?;
    for r in &report.rows {
        println!("beta_c {:.3}: R0 {:.2} (sd {:.2})", r.beta_c, r.mean_r0, r.sd_r0);
    }
    println!("best beta_c {}", report.best_beta_c);
    if let Some(w) = report.warning {
        println!("warning: {w}");
    }
    Ok(())
}
