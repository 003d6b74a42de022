//! One simulated epidemic with optional overrides, printed every ten days.
//!
//! cargo run --release --example single_run -- [key=value ...]
//! e.g. `mitigation.capacity=0.03 mitigation.cta_adoption=0.6`

use ctasim::config::RunConfig;
use ctasim::engine::run_replicate;
use ctasim::synthpop::generate_population;

fn main() -> ctasim::Result<()> {
    let overrides: Vec<String> = std::env::args().skip(1).collect();
    let cfg = RunConfig::default().with_overrides(&overrides)?;
    cfg.validate()?;
    let pop = generate_population(&cfg.population, cfg.seed)?;
    let run = run_replicate(&pop, &cfg.scenario, cfg.seed, 0)?;

    println!("day  active  cumulative  isolating  tests  positives");
    for d in run.days.iter().filter(|d| d.day % 10 == 0) {
        println!(
            "{:>3}  {:>6}  {:>10}  {:>9}  {:>5}  {:>9}",
            d.day, d.active, d.cumulative_infections, d.isolating, d.tests_used, d.positives
        );
    }
    println!(
        "\ntotal infected {:.1}%, peak {:.2}% on day {}, R0 estimate {}, deaths {}",
        100.0 * run.total_infected_fraction,
        100.0 * run.peak_prevalence_fraction,
        run.peak_day,
        run.estimated_r0.map_or("n/a".into(), |r| format!("{r:.2}")),
        run.deaths
    );
    Ok(())
}
