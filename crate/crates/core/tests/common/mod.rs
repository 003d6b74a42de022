#![allow(dead_code)]

use std::sync::OnceLock;

use ctasim::engine::ScenarioConfig;
use ctasim::synthpop::{generate_population, Population, PopulationSpec};

/// Scaled-down population shared by a test binary.
pub fn small_pop() -> &'static Population {
    static POP: OnceLock<Population> = OnceLock::new();
    POP.get_or_init(|| generate_population(&PopulationSpec::scaled(4000), 3).unwrap())
}

/// Full 103k-agent population, generated once per test binary.
pub fn full_pop() -> &'static Population {
    static POP: OnceLock<Population> = OnceLock::new();
    POP.get_or_init(|| generate_population(&PopulationSpec::default_city(), 1).unwrap())
}

/// Baseline scenario sized for `small_pop`.
pub fn small_scenario() -> ScenarioConfig {
    ScenarioConfig {
        initial_infected: 40,
        horizon_days: 150,
        ..ScenarioConfig::baseline()
    }
}

/// Household contacts only: nobody works, studies or meets anyone else.
pub fn household_only() -> ctasim::contacts::ContactPolicy {
    ctasim::contacts::ContactPolicy {
        school_per_week: 0.0,
        workplace_per_week: 0.0,
        friendship_per_week: 0.0,
        friendship_per_week_elderly: 0.0,
        relatives_per_week: 0.0,
        random_per_week: 0.0,
        random_per_week_elderly: 0.0,
        ..ctasim::contacts::ContactPolicy::business_as_usual()
    }
}
