//! Whole-run orchestration: daily phase pipeline, metrics, reproduction
//! number, peak reduction and parallel scenario sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contacts::{ContactLayer, ContactPolicy};
use crate::disease::{DiseaseParams, DiseaseState};
use crate::error::{Error, Result};
use crate::mitigation::{MitigationParams, TestingDay};
use crate::rng;
use crate::stats;
use crate::synthpop::{AgentId, Population};
use crate::transmission::{seed_epidemic, step_day, DayLedger, InfectionRecord, World};

pub const N_LAYERS: usize = ContactLayer::ALL.len();

/// Last infection day of the cohort used for the reproduction number.
pub const R0_COHORT_LAST_DAY: u32 = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyPreset {
    BusinessAsUsual,
    BaselineDistancing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub name: String,
    pub contacts: ContactPolicy,
    pub disease: DiseaseParams,
    pub mitigation: MitigationParams,
    pub initial_infected: usize,
    pub initial_recovered_fraction: f64,
    pub horizon_days: u32,
    /// Record app encounters at all. Off reproduces a build without the app.
    pub cta_enabled: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::baseline()
    }
}

impl ScenarioConfig {
    pub fn from_preset(preset: PolicyPreset) -> Self {
        match preset {
            PolicyPreset::BusinessAsUsual => ScenarioConfig::business_as_usual(),
            PolicyPreset::BaselineDistancing => ScenarioConfig::baseline(),
        }
    }

    /// Pre-pandemic contacts and transmission, no tests, no app.
    /// Unmitigated spread: nobody self-isolates on symptoms.
    pub fn business_as_usual() -> Self {
        ScenarioConfig {
            name: "business_as_usual".into(),
            contacts: ContactPolicy::business_as_usual(),
            disease: DiseaseParams::default(),
            mitigation: MitigationParams {
                symptomatic_self_isolation: false,
                ..MitigationParams::default()
            },
            initial_infected: 300,
            initial_recovered_fraction: 0.07,
            horizon_days: 400,
            cta_enabled: true,
        }
    }

    /// Post-lockdown distancing: reduced contacts and a 30% lower
    /// transmission probability outside the household.
    pub fn baseline() -> Self {
        let bau = DiseaseParams::default();
        ScenarioConfig {
            name: "baseline".into(),
            contacts: ContactPolicy::baseline_distancing(),
            disease: DiseaseParams {
                beta_c: 0.056,
                beta_household: Some(bau.beta_c),
                ..bau
            },
            mitigation: MitigationParams::default(),
            ..ScenarioConfig::business_as_usual()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.contacts.validate()?;
        self.disease.validate()?;
        self.mitigation.validate()?;
        if !(0.0..=1.0).contains(&self.initial_recovered_fraction) {
            return Err(Error::config("initial_recovered_fraction", "must be in [0, 1]"));
        }
        if self.horizon_days == 0 {
            return Err(Error::config("horizon_days", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyMetrics {
    pub day: u32,
    pub susceptible: usize,
    pub active: usize,
    pub new_infections: usize,
    pub cumulative_infections: usize,
    pub recovered: usize,
    pub dead: usize,
    pub hospitalized: usize,
    pub isolating: usize,
    pub tests_available: u64,
    pub tests_used: u64,
    pub positives: u64,
    pub queue_depth: u64,
    /// Stock left after today's tests; infinite under unlimited capacity.
    pub stock: f64,
    pub starved_symptomatic: u64,
    pub cta_log_entries: usize,
    pub oldest_cta_entry_day: Option<u32>,
    pub infections_by_layer: [u64; N_LAYERS],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub population: usize,
    pub days: Vec<DailyMetrics>,
    pub peak_prevalence_fraction: f64,
    pub peak_day: u32,
    /// Everyone infected during the run, seeds included, over the population.
    pub total_infected_fraction: f64,
    /// `None` when the early cohort is empty.
    pub estimated_r0: Option<f64>,
    pub infections_by_layer: [u64; N_LAYERS],
    pub tests_used: u64,
    pub positives: u64,
    pub deaths: usize,
    #[serde(skip)]
    pub infection_log: Vec<InfectionRecord>,
}

impl RunResult {
    /// Positive tests over tests used; zero when no test was taken.
    pub fn positive_share(&self) -> f64 {
        if self.tests_used == 0 {
            0.0
        } else {
            self.positives as f64 / self.tests_used as f64
        }
    }

    pub fn prevalence(&self) -> Vec<f64> {
        self.days
            .iter()
            .map(|d| d.active as f64 / self.population as f64)
            .collect()
    }
}

/// Mean secondary infections caused by agents infected on days
/// `0..=cohort_last_day`, counted over their whole course.
pub fn estimate_r0(log: &[InfectionRecord], cohort_last_day: u32) -> Result<f64> {
    let mut cohort: Vec<AgentId> = log.iter().filter(|r| r.day <= cohort_last_day).map(|r| r.target).collect();
    if cohort.is_empty() {
        return Err(Error::Undefined("R0", "no infections in the early cohort".into()));
    }
    cohort.sort_unstable();
    let secondary = log
        .iter()
        .filter_map(|r| r.source)
        .filter(|s| cohort.binary_search(s).is_ok())
        .count();
    Ok(secondary as f64 / cohort.len() as f64)
}

/// Percent reduction of `peak` relative to `baseline_peak`.
pub fn peak_reduction(peak: f64, baseline_peak: f64) -> Result<f64> {
    if baseline_peak <= 0.0 {
        return Err(Error::Undefined("peak reduction", "baseline peak is zero".into()));
    }
    Ok(100.0 * (1.0 - peak / baseline_peak))
}

/// Callback invoked after every simulated day.
pub type DayObserver<'a> = dyn FnMut(&World, &DayLedger, &DailyMetrics) + 'a;

/// One run with the given seed.
pub fn run(pop: &Population, config: &ScenarioConfig, seed: u64) -> Result<RunResult> {
    run_observed(pop, config, seed, &mut |_, _, _| {})
}

/// Replicate `index` of a run family rooted at `base_seed`.
pub fn run_replicate(pop: &Population, config: &ScenarioConfig, base_seed: u64, index: u64) -> Result<RunResult> {
    run(pop, config, rng::replicate_seed(base_seed, index))
}

fn advance_courses(world: &mut World, day: u32) {
    let pop = world.pop;
    let mut resolved = false;
    for k in 0..world.active.len() {
        let a = world.active[k];
        let i = a as usize;
        let Some(t) = world.courses[i].as_mut().and_then(|c| c.advance_day(day)) else {
            continue;
        };
        debug_assert!(t.from.can_transition_to(t.to));
        world.states[i] = t.to;
        match t.to {
            DiseaseState::Mild | DiseaseState::SevereHome => world.testing.on_symptoms(a, day),
            DiseaseState::Hospitalized => world.testing.on_hospitalized(a, day, pop, &world.states[..]),
            DiseaseState::Recovered => {
                world.recovered += 1;
                world.testing.on_recovered(a);
                resolved = true;
            }
            DiseaseState::Dead => {
                world.dead += 1;
                world.testing.on_recovered(a);
                resolved = true;
            }
            _ => {}
        }
    }
    if resolved {
        let states = &world.states;
        world.active.retain(|&a| states[a as usize].is_active());
    }
}

/// [`run`] with a per-day observer, used for ledger dumps and invariant checks.
pub fn run_observed(
    pop: &Population,
    config: &ScenarioConfig,
    seed: u64,
    observer: &mut DayObserver<'_>,
) -> Result<RunResult> {
    config.validate()?;
    let mut world = World::new(
        pop,
        config.contacts.clone(),
        config.disease.clone(),
        config.mitigation.clone(),
        seed,
        seed,
    );
    world.cta_enabled = config.cta_enabled;
    seed_epidemic(&mut world, config.initial_infected, config.initial_recovered_fraction, seed)?;

    let n = pop.len();
    let mut days = Vec::new();
    let mut by_layer = [0u64; N_LAYERS];
    let mut tests_used = 0;
    let mut positives = 0;
    for day in 0..config.horizon_days {
        world.testing.begin_day(day, &world.states[..]);
        let testing: TestingDay = world.testing.process_testing_day(day, pop, &world.states[..]);
        world.testing.deliver_results(day, pop, &world.states[..]);
        advance_courses(&mut world, day);
        let ledger = step_day(&mut world, day);
        world.testing.prune_cta_logs(day);

        for (acc, x) in by_layer.iter_mut().zip(ledger.infections_by_layer) {
            *acc += x;
        }
        tests_used += testing.tests_used;
        positives += testing.positives;
        let metrics = DailyMetrics {
            day,
            susceptible: world.susceptible,
            active: world.active.len(),
            new_infections: ledger.new_infections.len() + if day == 0 { config.initial_infected } else { 0 },
            cumulative_infections: world.infections.len(),
            recovered: world.recovered,
            dead: world.dead,
            hospitalized: world.hospitalized(),
            isolating: world.testing.isolating_count(day),
            tests_available: testing.tests_available,
            tests_used: testing.tests_used,
            positives: testing.positives,
            queue_depth: testing.queue_depth,
            stock: world.testing.stock_level(),
            starved_symptomatic: testing.starved_symptomatic,
            cta_log_entries: world.testing.cta_logs.total_entries(),
            oldest_cta_entry_day: world.testing.cta_logs.oldest_entry_day(),
            infections_by_layer: ledger.infections_by_layer,
        };
        debug_assert!(world.is_conserved());
        observer(&world, &ledger, &metrics);
        days.push(metrics);
        if world.active.is_empty() {
            break;
        }
    }

    let (peak_day, peak_active) = days
        .iter()
        .map(|d| (d.day, d.active))
        .fold((0, 0), |best, x| if x.1 > best.1 { x } else { best });
    let infection_log = std::mem::take(&mut world.infections);
    Ok(RunResult {
        seed,
        population: n,
        peak_prevalence_fraction: peak_active as f64 / n as f64,
        peak_day,
        total_infected_fraction: infection_log.len() as f64 / n as f64,
        estimated_r0: estimate_r0(&infection_log, R0_COHORT_LAST_DAY).ok(),
        infections_by_layer: by_layer,
        tests_used,
        positives,
        deaths: world.dead,
        days,
        infection_log,
    })
}

/// Lower quartile, median, upper quartile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(xs: &[f64]) -> Self {
        let (q1, median, q3) = stats::quartiles(xs);
        Quartiles { q1, median, q3 }
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Scalars kept from each replicate of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub index: u64,
    pub seed: u64,
    pub total_infected_fraction: f64,
    pub peak_prevalence_fraction: f64,
    pub peak_day: u32,
    pub estimated_r0: Option<f64>,
    pub positive_share: f64,
    pub tests_used: u64,
    pub prevalence: Vec<f64>,
}

impl ReplicateOutcome {
    fn from_run(index: u64, r: &RunResult) -> Self {
        ReplicateOutcome {
            index,
            seed: r.seed,
            total_infected_fraction: r.total_infected_fraction,
            peak_prevalence_fraction: r.peak_prevalence_fraction,
            peak_day: r.peak_day,
            estimated_r0: r.estimated_r0,
            positive_share: r.positive_share(),
            tests_used: r.tests_used,
            prevalence: r.prevalence(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub config: ScenarioConfig,
    pub replicates: Vec<ReplicateOutcome>,
    /// First replicate failure; the other statistics are then empty.
    pub error: Option<String>,
}

impl ScenarioSummary {
    fn column(&self, f: impl Fn(&ReplicateOutcome) -> f64) -> Vec<f64> {
        self.replicates.iter().map(f).collect()
    }

    pub fn total_infected(&self) -> Vec<f64> {
        self.column(|r| r.total_infected_fraction)
    }

    pub fn peak_prevalence(&self) -> Vec<f64> {
        self.column(|r| r.peak_prevalence_fraction)
    }

    pub fn positive_share(&self) -> Vec<f64> {
        self.column(|r| r.positive_share)
    }

    pub fn r0(&self) -> Vec<f64> {
        self.replicates.iter().filter_map(|r| r.estimated_r0).collect()
    }

    pub fn total_infected_quartiles(&self) -> Quartiles {
        Quartiles::of(&self.total_infected())
    }

    pub fn peak_quartiles(&self) -> Quartiles {
        Quartiles::of(&self.peak_prevalence())
    }

    /// Median prevalence per day across replicates; finished runs count as zero.
    pub fn median_prevalence(&self) -> Vec<f64> {
        let len = self.replicates.iter().map(|r| r.prevalence.len()).max().unwrap_or(0);
        (0..len)
            .map(|d| {
                let xs: Vec<f64> = self
                    .replicates
                    .iter()
                    .map(|r| r.prevalence.get(d).copied().unwrap_or(0.0))
                    .collect();
                stats::median(&xs)
            })
            .collect()
    }
}

/// Run every scenario `replicates` times on a pool of `workers` threads.
/// Replicate `i` of every scenario uses the same derived seed, so scenarios
/// are compared under common random numbers. Output order follows `grid`.
/// `workers == 0` uses one thread per core.
pub fn sweep(
    pop: &Population,
    grid: &[ScenarioConfig],
    replicates: u64,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<ScenarioSummary>> {
    if grid.is_empty() {
        return Err(Error::config("grid", "no scenarios to run"));
    }
    if replicates == 0 {
        return Err(Error::config("replicates", "must be at least 1"));
    }
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|s| (0..replicates).map(move |r| (s, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let outcomes: Vec<Result<ReplicateOutcome>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, r)| {
                let res = run_replicate(pop, &grid[s], base_seed, r)?;
                log::debug!("{} replicate {r}: total {:.3}", grid[s].name, res.total_infected_fraction);
                Ok(ReplicateOutcome::from_run(r, &res))
            })
            .collect()
    });
    let mut out: Vec<ScenarioSummary> = grid
        .iter()
        .map(|c| ScenarioSummary {
            config: c.clone(),
            replicates: Vec::new(),
            error: None,
        })
        .collect();
    for (&(s, _), o) in jobs.iter().zip(outcomes) {
        let row = &mut out[s];
        match o {
            Ok(o) if row.error.is_none() => row.replicates.push(o),
            Ok(_) => {}
            Err(e) => {
                if row.error.is_none() {
                    row.error = Some(e.to_string());
                }
                row.replicates.clear();
            }
        }
    }
    Ok(out)
}
