//! Seeded synthetic population: agents with demographics grouped into
//! households, workplaces, school classes, relatives and a friendship graph.

mod friendship;
mod households;
mod network;
mod relatives;
mod workplaces;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

pub use friendship::{attachment_edges_for_median, build_friendship_graph};
pub use households::{build_households, HouseholdAssignment};
pub use network::{Layer, NetworkLayer, SocialNetwork};
pub use relatives::link_relatives;
pub use workplaces::{assign_classes, assign_workplaces, ClassAssignment, WorkplaceAssignment};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

pub type AgentId = u32;

pub const ZONE_MIN_RESIDENTS: usize = 200;
pub const ZONE_MAX_RESIDENTS: usize = 2700;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Employment {
    None,
    Office,
    PublicFacing,
    Pupil,
}

impl Employment {
    pub fn is_worker(self) -> bool {
        matches!(self, Employment::Office | Employment::PublicFacing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub age: u8,
    pub sex: Sex,
    /// Index into [`PopulationSpec::zones`].
    pub zone: u32,
    pub household: u32,
    pub employment: Employment,
    /// Workplace site for workers, class for pupils.
    pub workplace_or_class: Option<u32>,
    pub has_cta: bool,
}

impl Agent {
    pub fn new(id: AgentId, age: u8, sex: Sex, zone: u32) -> Self {
        Agent {
            id,
            age,
            sex,
            zone,
            household: 0,
            employment: Employment::None,
            workplace_or_class: None,
            has_cta: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeBand {
    pub min: u8,
    pub max: u8,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeBand {
    pub min: usize,
    pub max: usize,
    pub weight: f64,
}

/// Family composition. Households without children are governed by
/// [`PopulationSpec::cohabitation_fraction_over20`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HouseholdMix {
    /// Probability that a family with children has a single parent.
    pub lone_parent_share: f64,
    /// `children_per_family[k]` is the weight of families with `k + 1` children.
    pub children_per_family: Vec<f64>,
}

impl Default for HouseholdMix {
    fn default() -> Self {
        HouseholdMix {
            lone_parent_share: 0.3,
            children_per_family: vec![0.45, 0.38, 0.13, 0.04],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZoneSpec {
    pub id: u32,
    pub residents: usize,
    pub age_distribution: Vec<AgeBand>,
    pub male_fraction: f64,
    pub households: HouseholdMix,
}

impl Default for ZoneSpec {
    fn default() -> Self {
        ZoneSpec {
            id: 0,
            residents: 1100,
            age_distribution: uk_age_pyramid(),
            male_fraction: 0.48,
            households: HouseholdMix::default(),
        }
    }
}

/// Urban UK-like age pyramid in five-year bands.
pub fn uk_age_pyramid() -> Vec<AgeBand> {
    const BANDS: [(u8, u8, f64); 18] = [
        (0, 4, 5.6),
        (5, 9, 5.3),
        (10, 14, 5.0),
        (15, 19, 5.7),
        (20, 24, 8.8),
        (25, 29, 9.0),
        (30, 34, 7.6),
        (35, 39, 6.6),
        (40, 44, 6.4),
        (45, 49, 6.9),
        (50, 54, 6.9),
        (55, 59, 6.1),
        (60, 64, 5.2),
        (65, 69, 4.4),
        (70, 74, 3.6),
        (75, 79, 2.9),
        (80, 84, 2.1),
        (85, 95, 1.7),
    ];
    BANDS
        .iter()
        .map(|&(min, max, weight)| AgeBand { min, max, weight })
        .collect()
}

/// Site-count weights by workplace size band, skewed towards small firms.
pub fn default_workplace_sizes() -> Vec<SizeBand> {
    const BANDS: [(usize, usize, f64); 7] = [
        (1, 4, 0.52),
        (5, 9, 0.21),
        (10, 19, 0.13),
        (20, 49, 0.085),
        (50, 99, 0.03),
        (100, 249, 0.019),
        (250, 500, 0.006),
    ];
    BANDS
        .iter()
        .map(|&(min, max, weight)| SizeBand { min, max, weight })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationSpec {
    pub total_agents: usize,
    pub zones: Vec<ZoneSpec>,
    pub workplace_size_distribution: Vec<SizeBand>,
    /// Share of employed agents in customer-facing jobs.
    pub public_facing_fraction: f64,
    /// Share of working-age agents with a workplace.
    pub employment_rate: f64,
    pub working_age_min: u8,
    pub working_age_max: u8,
    pub school_age_min: u8,
    pub school_age_max: u8,
    pub class_max_size: usize,
    /// Agents at or above this age join the friendship graph.
    pub friendship_min_age: u8,
    pub friendship_median_degree: usize,
    /// Width of the Gaussian age kernel applied to preferential attachment.
    pub friendship_age_sigma: f64,
    pub cohabitation_fraction_over20: f64,
    pub close_colleague_group_size: usize,
    pub parent_age_gap_min: u8,
    pub parent_age_gap_max: u8,
    pub relative_generation_gap_min: u8,
    pub relative_generation_gap_max: u8,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec::default_city()
    }
}

impl PopulationSpec {
    /// 103,000 agents in 93 zones averaging ~1,100 residents.
    pub fn default_city() -> Self {
        PopulationSpec::with_zone_sizes(default_zone_sizes(93, 103_000))
    }

    /// A smaller city with zones of ~1,100 residents.
    pub fn scaled(total_agents: usize) -> Self {
        let n = ((total_agents as f64 / 1100.0).round() as usize)
            .clamp(1, (total_agents / ZONE_MIN_RESIDENTS).max(1));
        PopulationSpec::with_zone_sizes(default_zone_sizes(n, total_agents))
    }

    pub fn with_zone_sizes(sizes: Vec<usize>) -> Self {
        let zones: Vec<ZoneSpec> = sizes
            .iter()
            .enumerate()
            .map(|(i, &residents)| ZoneSpec {
                id: i as u32 + 1,
                residents,
                ..ZoneSpec::default()
            })
            .collect();
        PopulationSpec {
            total_agents: sizes.iter().sum(),
            zones,
            workplace_size_distribution: default_workplace_sizes(),
            public_facing_fraction: 0.13,
            employment_rate: 0.70,
            working_age_min: 18,
            working_age_max: 64,
            school_age_min: 6,
            school_age_max: 17,
            class_max_size: 30,
            friendship_min_age: 15,
            friendship_median_degree: 14,
            friendship_age_sigma: 10.0,
            cohabitation_fraction_over20: 0.7,
            close_colleague_group_size: 5,
            parent_age_gap_min: 20,
            parent_age_gap_max: 45,
            relative_generation_gap_min: 23,
            relative_generation_gap_max: 38,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.zones.is_empty() {
            return Err(Error::config("zones", "at least one zone is required"));
        }
        let sum: usize = self.zones.iter().map(|z| z.residents).sum();
        if sum != self.total_agents {
            return Err(Error::config(
                "total_agents",
                format!("zone residents sum to {sum}, expected {}", self.total_agents),
            ));
        }
        for (i, z) in self.zones.iter().enumerate() {
            if !(ZONE_MIN_RESIDENTS..=ZONE_MAX_RESIDENTS).contains(&z.residents) {
                return Err(Error::config(
                    format!("zones[{i}].residents"),
                    format!("{} outside [{ZONE_MIN_RESIDENTS}, {ZONE_MAX_RESIDENTS}]", z.residents),
                ));
            }
            check_fraction(&format!("zones[{i}].male_fraction"), z.male_fraction)?;
            check_fraction(
                &format!("zones[{i}].households.lone_parent_share"),
                z.households.lone_parent_share,
            )?;
            check_weights(
                &format!("zones[{i}].households.children_per_family"),
                z.households.children_per_family.iter().copied(),
            )?;
            check_weights(
                &format!("zones[{i}].age_distribution"),
                z.age_distribution.iter().map(|b| b.weight),
            )?;
            if z.age_distribution.iter().any(|b| b.min > b.max || b.max > 120) {
                return Err(Error::config(
                    format!("zones[{i}].age_distribution"),
                    "bands need min <= max <= 120",
                ));
            }
        }
        check_fraction("public_facing_fraction", self.public_facing_fraction)?;
        check_fraction("employment_rate", self.employment_rate)?;
        check_fraction("cohabitation_fraction_over20", self.cohabitation_fraction_over20)?;
        check_weights(
            "workplace_size_distribution",
            self.workplace_size_distribution.iter().map(|b| b.weight),
        )?;
        if self
            .workplace_size_distribution
            .iter()
            .any(|b| b.min == 0 || b.min > b.max)
        {
            return Err(Error::config(
                "workplace_size_distribution",
                "bands need 1 <= min <= max",
            ));
        }
        if self.class_max_size == 0 {
            return Err(Error::config("class_max_size", "must be positive"));
        }
        if self.close_colleague_group_size < 2 {
            return Err(Error::config("close_colleague_group_size", "must be at least 2"));
        }
        if self.friendship_median_degree == 0 {
            return Err(Error::config("friendship_median_degree", "must be positive"));
        }
        if self.friendship_age_sigma.is_nan() || self.friendship_age_sigma <= 0.0 {
            return Err(Error::config("friendship_age_sigma", "must be positive"));
        }
        if self.parent_age_gap_min > self.parent_age_gap_max {
            return Err(Error::config("parent_age_gap_min", "exceeds parent_age_gap_max"));
        }
        if self.relative_generation_gap_min > self.relative_generation_gap_max {
            return Err(Error::config(
                "relative_generation_gap_min",
                "exceeds relative_generation_gap_max",
            ));
        }
        if self.working_age_min > self.working_age_max || self.school_age_min > self.school_age_max {
            return Err(Error::config("working_age_min", "age ranges need min <= max"));
        }
        Ok(())
    }
}

fn check_fraction(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} is not in [0, 1]")))
    }
}

fn check_weights(field: &str, ws: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for w in ws {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::config(field, format!("weight {w} is not a finite non-negative number")));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::config(field, "weights must have a positive sum"));
    }
    Ok(())
}

/// Zone sizes from a clipped log-normal, adjusted to sum to `total`.
/// Deterministic: the sizes are part of the default spec, not of a run.
pub fn default_zone_sizes(n_zones: usize, total: usize) -> Vec<usize> {
    assert!(n_zones > 0);
    assert!(
        total >= n_zones * ZONE_MIN_RESIDENTS && total <= n_zones * ZONE_MAX_RESIDENTS,
        "cannot split {total} agents into {n_zones} zones within bounds"
    );
    let mut rng = rng::stream(0x5EED_2011, Purpose::DefaultZones, n_zones as u64, total as u64);
    let dist = LogNormal::new(0.0, 0.55).expect("valid log-normal");
    let raw: Vec<f64> = (0..n_zones).map(|_| dist.sample(&mut rng)).collect();
    let scale = total as f64 / raw.iter().sum::<f64>();
    let mut sizes: Vec<usize> = raw
        .iter()
        .map(|r| ((r * scale).round() as usize).clamp(ZONE_MIN_RESIDENTS, ZONE_MAX_RESIDENTS))
        .collect();
    loop {
        let sum: usize = sizes.iter().sum();
        if sum == total {
            break;
        }
        let i = rng.random_range(0..n_zones);
        if sum < total && sizes[i] < ZONE_MAX_RESIDENTS {
            sizes[i] += 1;
        } else if sum > total && sizes[i] > ZONE_MIN_RESIDENTS {
            sizes[i] -= 1;
        }
    }
    sizes
}

pub(crate) fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// A generated population. Immutable once built and shared across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub agents: Vec<Agent>,
    pub network: SocialNetwork,
    pub households: Vec<Vec<AgentId>>,
    pub zone_residents: Vec<Vec<AgentId>>,
    pub classes: Vec<Vec<AgentId>>,
    /// Non-fatal generation diagnostics.
    pub warnings: Vec<String>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    #[inline]
    pub fn zone_population(&self, agent: AgentId) -> usize {
        self.zone_residents[self.agents[agent as usize].zone as usize].len()
    }

    /// Assemble a population from explicit agents, grouping them with the
    /// regular household/workplace/school/friendship builders.
    pub fn from_agents(mut agents: Vec<Agent>, spec: &PopulationSpec, seed: u64) -> Result<Self> {
        let n_zones = spec.zones.len();
        for (i, a) in agents.iter_mut().enumerate() {
            a.id = i as AgentId;
            if a.zone as usize >= n_zones {
                return Err(Error::config("agents.zone", format!("zone index {} out of range", a.zone)));
            }
        }
        let hh = build_households(&mut agents, spec, seed);
        let work = assign_workplaces(&mut agents, spec, seed);
        let classes = assign_classes(&mut agents, spec, seed);
        let friendship = build_friendship_graph(&agents, spec, seed);
        let relatives = link_relatives(&agents, spec, seed);
        let n = agents.len();
        let household = Layer::from_cliques(n, hh.households.iter().map(Vec::as_slice));
        let close_colleagues = Layer::from_cliques(n, work.close_groups.iter().map(Vec::as_slice));
        let classmates = Layer::from_cliques(n, classes.classes.iter().map(Vec::as_slice));
        let mut zone_residents = vec![Vec::new(); n_zones];
        for a in &agents {
            zone_residents[a.zone as usize].push(a.id);
        }
        Ok(Population {
            agents,
            network: SocialNetwork {
                household,
                relatives,
                close_colleagues,
                classmates,
                friendship,
                sites: work.sites,
            },
            households: hh.households,
            zone_residents,
            classes: classes.classes,
            warnings: hh.warnings,
        })
    }
}

/// Generate the full population for `spec`. Deterministic for `(spec, seed)`.
pub fn generate_population(spec: &PopulationSpec, seed: u64) -> Result<Population> {
    spec.validate()?;
    let mut agents = Vec::with_capacity(spec.total_agents);
    for (zi, zone) in spec.zones.iter().enumerate() {
        let mut rng = rng::stream(seed, Purpose::Ages, zi as u64, 0);
        let weights: Vec<f64> = zone.age_distribution.iter().map(|b| b.weight).collect();
        for _ in 0..zone.residents {
            let band = zone.age_distribution[pick_weighted(&weights, &mut rng)];
            let age = rng.random_range(band.min..=band.max);
            let sex = if rng.random_bool(zone.male_fraction) {
                Sex::Male
            } else {
                Sex::Female
            };
            agents.push(Agent::new(agents.len() as AgentId, age, sex, zi as u32));
        }
    }
    Population::from_agents(agents, spec, seed)
}
