//! Daily contacts per agent under business as usual and under distancing.
//!
//! cargo run --release --example contact_distribution -- [days]

use ctasim::contacts::{contact_distribution_report, ContactPolicy};
use ctasim::synthpop::{generate_population, PopulationSpec};

fn main() -> ctasim::Result<()> {
    let days: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let pop = generate_population(&PopulationSpec::default_city(), 1)?;
    for (name, policy) in [
        ("business as usual", ContactPolicy::business_as_usual()),
        ("distancing", ContactPolicy::baseline_distancing()),
    ] {
        let r = contact_distribution_report(&pop, &policy, days, 1);
        println!("{name}: mean {:.2}, sd {:.2} over {} agent-days", r.mean, r.sd, r.agent_days);
        for (lo, hi) in [(0, 4), (5, 9), (10, 19), (20, 39), (40, usize::MAX)] {
            println!("  {lo:>2}..{:<3} {:5.1}%", if hi == usize::MAX { "+".into() } else { hi.to_string() }, 100.0 * r.fraction_between(lo, hi));
        }
    }
    Ok(())
}
