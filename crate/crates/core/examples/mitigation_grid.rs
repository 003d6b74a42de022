//! A slice of the mitigation grid: CTA adoption against testing capacity
//! under the priority policy, written as CSV under `target/mitigation_grid`.
//!
//! cargo run --release --example mitigation_grid -- [replicates]

use std::path::Path;

use ctasim::config::RunConfig;
use ctasim::experiments::{sweep_grid, GridFilter};
use ctasim::mitigation::{Capacity, TestingPolicy};
use ctasim::synthpop::generate_population;

fn main() -> ctasim::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let cfg = RunConfig {
        replicates: reps,
        ..RunConfig::default()
    };
    let pop = generate_population(&cfg.population, cfg.seed)?;
    let filter = GridFilter {
        cta: Some(vec![0.0, 0.4, 0.8]),
        capacity: Some(vec![Capacity::Weekly(0.015), Capacity::Unlimited]),
        compliance: Some(vec![0.9]),
        policy: Some(vec![TestingPolicy::PrioritySymptomatic]),
    };
    let out = sweep_grid(&pop, &cfg, &filter, 0)?;
    let base_peak = out.reference_peak().unwrap_or(f64::NAN);
    println!("reference: peak {:.2}%", 100.0 * base_peak);
    for row in &out.rows {
        let total = row.total_infected_quartiles().median;
        let peak = row.peak_quartiles().median;
        println!(
            "{:<40} total {:5.1}%  peak reduction {:5.1}%",
            row.config.name,
            100.0 * total,
            100.0 * (1.0 - peak / base_peak)
        );
    }
    let dir = Path::new("target/mitigation_grid");
    out.write(dir, "mitigation_grid example", &cfg)?;
    println!("wrote {}", dir.display());
    Ok(())
}
