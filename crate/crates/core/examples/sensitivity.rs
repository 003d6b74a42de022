//! Total infections against CTA adoption for several network transmission
//! probabilities, with 1.5% weekly testing and unlimited tests.
//!
//! cargo run --release --example sensitivity -- [parameter] [replicates]

use ctasim::engine::ScenarioConfig;
use ctasim::experiments::{sensitivity_sweep, SensitivityParam};
use ctasim::synthpop::{generate_population, PopulationSpec};

fn main() -> ctasim::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let param = SensitivityParam::parse(args.get(1).map_or("beta_c", String::as_str))?;
    let reps: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let pop = generate_population(&PopulationSpec::default_city(), 1)?;
    let values = param.default_values();
    let rows = sensitivity_sweep(&pop, &ScenarioConfig::baseline(), param, &values, reps, 1, 0)?;
    println!("{param:>8}  capacity  cta  total infected");
    for r in &rows {
        println!("{:>8}  {:>8}  {:.1}  {:5.1}%", r.value, r.capacity.to_string(), r.cta_adoption, 100.0 * r.median());
    }
    Ok(())
}
