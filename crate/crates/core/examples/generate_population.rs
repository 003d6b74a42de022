//! Build the synthetic city and print its household, employment and
//! friendship structure.
//!
//! cargo run --release --example generate_population -- [agents] [seed]

use std::collections::BTreeMap;

use ctasim::synthpop::{generate_population, Employment, PopulationSpec};

fn main() -> ctasim::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(103_000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let spec = if n == 103_000 { PopulationSpec::default_city() } else { PopulationSpec::scaled(n) };
    let pop = generate_population(&spec, seed)?;

    println!("{} agents in {} zones, {} households", pop.len(), pop.zone_residents.len(), pop.households.len());
    let mut sizes = BTreeMap::new();
    for h in &pop.households {
        *sizes.entry(h.len().min(6)).or_insert(0usize) += 1;
    }
    for (k, c) in sizes {
        let label = if k == 6 { "6+".to_string() } else { k.to_string() };
        println!("  household size {label:>2}: {:5.1}%", 100.0 * c as f64 / pop.households.len() as f64);
    }

    let count = |e: Employment| pop.agents.iter().filter(|a| a.employment == e).count();
    println!(
        "office workers {}, public-facing {}, pupils {} in {} classes",
        count(Employment::Office),
        count(Employment::PublicFacing),
        count(Employment::Pupil),
        pop.classes.len()
    );

    let mut degrees: Vec<usize> = pop
        .agents
        .iter()
        .map(|a| pop.network.friendship.neighbors(a.id).len())
        .filter(|&d| d > 0)
        .collect();
    degrees.sort_unstable();
    println!(
        "friendship graph: {} members, median degree {}, max {}",
        degrees.len(),
        degrees[degrees.len() / 2],
        degrees.last().copied().unwrap_or(0)
    );
    for w in &pop.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
