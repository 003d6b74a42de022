//! Per-agent disease courses.
//!
//! All stochastic branches and durations are drawn once, at infection time,
//! so a course is fully replayable from its record and advancing it is
//! deterministic.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::contacts::{BetaClass, ContactEvent, ContactLayer};
use crate::error::{Error, Result};
use crate::synthpop::{Agent, Sex};

/// Piecewise-constant function of age: `(from_age, value)` rows sorted by
/// `from_age`, the first starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeTable(pub Vec<(u8, f64)>);

impl AgeTable {
    pub fn lookup(&self, age: u8) -> f64 {
        self.0
            .iter()
            .rev()
            .find(|(from, _)| *from <= age)
            .map(|(_, v)| *v)
            .unwrap_or(self.0[0].1)
    }

    fn validate(&self, field: &str, probability: bool) -> Result<()> {
        if self.0.is_empty() || self.0[0].0 != 0 {
            return Err(Error::config(field, "table must start at age 0"));
        }
        if self.0.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::config(field, "age bands must be strictly increasing"));
        }
        for &(_, v) in &self.0 {
            let ok = if probability {
                (0.0..=1.0).contains(&v)
            } else {
                v > 0.0 && v.is_finite()
            };
            if !ok {
                return Err(Error::config(field, format!("value {v} out of range")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiseaseParams {
    /// Transmission probability per network contact.
    pub beta_c: f64,
    /// Per random contact; `beta_c × random_beta_factor` when unset.
    pub beta_r: Option<f64>,
    /// Per household contact; `beta_c` when unset.
    pub beta_household: Option<f64>,
    pub school_beta_factor: f64,
    pub random_beta_factor: f64,
    /// Probability of becoming symptomatic.
    pub symptomatic_by_age: AgeTable,
    /// Probability a symptomatic case becomes severe.
    pub severe_by_age: AgeTable,
    /// Probability a severe male case dies.
    pub death_by_age_male: AgeTable,
    pub female_death_factor: f64,
    pub incubation_shape: f64,
    pub incubation_scale: f64,
    /// Mean duration of asymptomatic and mild illness.
    pub illness_mean_days_by_age: AgeTable,
    pub hospital_mean_days_by_age: AgeTable,
    /// Duration standard deviation as a fraction of the mean.
    pub duration_sd_factor: f64,
    pub presymptomatic_window_days: u32,
    pub presymptomatic_daily_prob: f64,
    /// Asymptomatic infectiousness stays at 1 for this many infectious days,
    /// then decays geometrically.
    pub asymptomatic_full_days: u32,
    pub asymptomatic_decay: f64,
    pub severe_home_shape: f64,
    pub severe_home_rate: f64,
    pub symptomatic_cap_min_days: u32,
    pub symptomatic_cap_max_days: u32,
    pub child_susceptibility_age: u8,
    pub child_susceptibility_factor: f64,
    /// Household transmission multiplier when the source self-isolates.
    pub isolating_household_factor: f64,
}

impl Default for DiseaseParams {
    fn default() -> Self {
        let durations = AgeTable(vec![(0, 8.0), (40, 12.0), (50, 15.0), (60, 15.0), (70, 20.0)]);
        DiseaseParams {
            beta_c: 0.08,
            beta_r: None,
            beta_household: None,
            school_beta_factor: 0.5,
            random_beta_factor: 0.1,
            symptomatic_by_age: AgeTable(vec![
                (0, 0.02),
                (10, 0.26),
                (20, 0.55),
                (40, 0.62),
                (50, 0.72),
                (70, 0.82),
            ]),
            severe_by_age: AgeTable(vec![
                (0, 0.02),
                (15, 0.06),
                (40, 0.09),
                (50, 0.13),
                (60, 0.17),
                (70, 0.20),
            ]),
            death_by_age_male: AgeTable(vec![
                (0, 0.005),
                (15, 0.03),
                (40, 0.08),
                (50, 0.09),
                (60, 0.16),
                (70, 0.25),
                (80, 0.50),
            ]),
            female_death_factor: 0.8,
            incubation_shape: 5.1,
            incubation_scale: 1.0,
            illness_mean_days_by_age: durations.clone(),
            hospital_mean_days_by_age: durations,
            duration_sd_factor: 0.25,
            presymptomatic_window_days: 3,
            presymptomatic_daily_prob: 0.25,
            asymptomatic_full_days: 3,
            asymptomatic_decay: 0.9,
            severe_home_shape: 6.5,
            severe_home_rate: 0.9,
            symptomatic_cap_min_days: 7,
            symptomatic_cap_max_days: 11,
            child_susceptibility_age: 16,
            child_susceptibility_factor: 0.5,
            isolating_household_factor: 0.7,
        }
    }
}

impl DiseaseParams {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [
            ("beta_c", Some(self.beta_c)),
            ("beta_r", self.beta_r),
            ("beta_household", self.beta_household),
            ("school_beta_factor", Some(self.school_beta_factor)),
            ("random_beta_factor", Some(self.random_beta_factor)),
        ] {
            if let Some(b) = b {
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::config(format!("disease.{name}"), format!("{b} not in [0, 1]")));
                }
            }
        }
        self.symptomatic_by_age.validate("disease.symptomatic_by_age", true)?;
        self.severe_by_age.validate("disease.severe_by_age", true)?;
        self.death_by_age_male.validate("disease.death_by_age_male", true)?;
        self.illness_mean_days_by_age.validate("disease.illness_mean_days_by_age", false)?;
        self.hospital_mean_days_by_age.validate("disease.hospital_mean_days_by_age", false)?;
        for (name, p) in [
            ("female_death_factor", self.female_death_factor),
            ("presymptomatic_daily_prob", self.presymptomatic_daily_prob),
            ("child_susceptibility_factor", self.child_susceptibility_factor),
            ("isolating_household_factor", self.isolating_household_factor),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("disease.{name}"), format!("{p} not in [0, 1]")));
            }
        }
        if !(self.asymptomatic_decay > 0.0 && self.asymptomatic_decay < 1.0) {
            return Err(Error::config("disease.asymptomatic_decay", "must be in (0, 1)"));
        }
        for (name, v) in [
            ("incubation_shape", self.incubation_shape),
            ("incubation_scale", self.incubation_scale),
            ("severe_home_shape", self.severe_home_shape),
            ("severe_home_rate", self.severe_home_rate),
            ("duration_sd_factor", self.duration_sd_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("disease.{name}"), "must be positive"));
            }
        }
        if self.symptomatic_cap_min_days > self.symptomatic_cap_max_days {
            return Err(Error::config("disease.symptomatic_cap_min_days", "exceeds the maximum"));
        }
        Ok(())
    }

    pub fn betas(&self) -> TransmissionBetas {
        TransmissionBetas {
            household: self.beta_household.unwrap_or(self.beta_c),
            network: self.beta_c,
            school: self.beta_c * self.school_beta_factor,
            random: self.beta_r.unwrap_or(self.beta_c * self.random_beta_factor),
        }
    }

    pub fn death_probability(&self, age: u8, sex: Sex) -> f64 {
        let male = self.death_by_age_male.lookup(age);
        match sex {
            Sex::Male => male,
            Sex::Female => male * self.female_death_factor,
        }
    }

    pub fn susceptibility(&self, age: u8) -> f64 {
        if age < self.child_susceptibility_age {
            self.child_susceptibility_factor
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiseaseState {
    Susceptible,
    Incubating,
    Asymptomatic,
    Mild,
    SevereHome,
    Hospitalized,
    Recovered,
    Dead,
}

impl DiseaseState {
    pub fn is_active(self) -> bool {
        matches!(
            self,
            DiseaseState::Incubating
                | DiseaseState::Asymptomatic
                | DiseaseState::Mild
                | DiseaseState::SevereHome
                | DiseaseState::Hospitalized
        )
    }

    pub fn is_absorbing(self) -> bool {
        matches!(self, DiseaseState::Recovered | DiseaseState::Dead)
    }

    pub fn is_symptomatic(self) -> bool {
        matches!(self, DiseaseState::Mild | DiseaseState::SevereHome | DiseaseState::Hospitalized)
    }

    /// The edge set of the progression diagram.
    pub fn can_transition_to(self, to: DiseaseState) -> bool {
        use DiseaseState::*;
        matches!(
            (self, to),
            (Susceptible, Incubating)
                | (Incubating, Asymptomatic)
                | (Incubating, Mild)
                | (Incubating, SevereHome)
                | (Asymptomatic, Recovered)
                | (Mild, Recovered)
                | (SevereHome, Hospitalized)
                | (Hospitalized, Recovered)
                | (Hospitalized, Dead)
        )
    }
}

/// Pre-sampled branch of a course.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Asymptomatic,
    Mild,
    Severe,
    Fatal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub from: DiseaseState,
    pub to: DiseaseState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiseaseCourse {
    pub state: DiseaseState,
    pub day_infected: u32,
    pub incubation_days: u32,
    pub infectious_from_day: u32,
    pub will_be: Outcome,
    /// Asymptomatic or mild illness length after incubation.
    pub illness_days: u32,
    pub severe_home_days: u32,
    pub hospital_days: u32,
    /// Days after symptom onset at which a symptomatic case stops infecting.
    pub symptomatic_cap_days: u32,
    pub state_entered_day: u32,
    pub infectiousness: f64,
    pub asymptomatic_decay: f64,
    pub asymptomatic_full_days: u32,
}

fn rounded_days(x: f64) -> u32 {
    x.round().max(1.0) as u32
}

/// Draw a complete course for `agent` infected on `day`.
pub fn sample_course<R: Rng + ?Sized>(agent: &Agent, day: u32, params: &DiseaseParams, rng: &mut R) -> DiseaseCourse {
    let incubation = Gamma::new(params.incubation_shape, params.incubation_scale).expect("valid gamma");
    let incubation_days = rounded_days(incubation.sample(rng));
    let onset = day + incubation_days;

    let window_start = onset.saturating_sub(params.presymptomatic_window_days).max(day + 1);
    let mut infectious_from_day = onset;
    for d in window_start..onset {
        if rng.random::<f64>() < params.presymptomatic_daily_prob {
            infectious_from_day = d;
            break;
        }
    }

    let will_be = if rng.random::<f64>() >= params.symptomatic_by_age.lookup(agent.age) {
        Outcome::Asymptomatic
    } else if rng.random::<f64>() >= params.severe_by_age.lookup(agent.age) {
        Outcome::Mild
    } else if rng.random::<f64>() >= params.death_probability(agent.age, agent.sex) {
        Outcome::Severe
    } else {
        Outcome::Fatal
    };

    let normal_days = |mean: f64, rng: &mut R| {
        let d = Normal::new(mean, params.duration_sd_factor * mean).expect("valid normal");
        rounded_days(d.sample(rng))
    };
    let illness_days = normal_days(params.illness_mean_days_by_age.lookup(agent.age), rng);
    let severe_home = Gamma::new(params.severe_home_shape, 1.0 / params.severe_home_rate).expect("valid gamma");
    let severe_home_days = rounded_days(severe_home.sample(rng));
    let hospital_days = normal_days(params.hospital_mean_days_by_age.lookup(agent.age), rng);
    let symptomatic_cap_days = rng.random_range(params.symptomatic_cap_min_days..=params.symptomatic_cap_max_days);

    DiseaseCourse {
        state: DiseaseState::Incubating,
        day_infected: day,
        incubation_days,
        infectious_from_day,
        will_be,
        illness_days,
        severe_home_days,
        hospital_days,
        symptomatic_cap_days,
        state_entered_day: day,
        infectiousness: 0.0,
        asymptomatic_decay: params.asymptomatic_decay,
        asymptomatic_full_days: params.asymptomatic_full_days,
    }
}

impl DiseaseCourse {
    pub fn onset_day(&self) -> u32 {
        self.day_infected + self.incubation_days
    }

    pub fn is_symptomatic_branch(&self) -> bool {
        self.will_be != Outcome::Asymptomatic
    }

    /// Infectiousness multiplier on `day` given the current state.
    pub fn infectiousness_on(&self, day: u32) -> f64 {
        use DiseaseState::*;
        match self.state {
            Susceptible | Hospitalized | Recovered | Dead => 0.0,
            _ if day < self.infectious_from_day => 0.0,
            Incubating | Asymptomatic if self.will_be == Outcome::Asymptomatic => {
                let infectious_day = day - self.infectious_from_day + 1;
                let decayed = infectious_day.saturating_sub(self.asymptomatic_full_days);
                self.asymptomatic_decay.powi(decayed as i32)
            }
            Incubating => 1.0,
            Asymptomatic | Mild | SevereHome => {
                if day >= self.onset_day() + self.symptomatic_cap_days {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn is_infectious_on(&self, day: u32) -> bool {
        self.infectiousness_on(day) > 0.0
    }

    /// Move the course to `day`. At most one transition fires per day since
    /// every sampled duration is at least one day. Absorbing states are left
    /// untouched.
    pub fn advance_day(&mut self, day: u32) -> Option<Transition> {
        use DiseaseState::*;
        let from = self.state;
        let elapsed = day.saturating_sub(self.state_entered_day);
        let to = match from {
            Incubating if day >= self.onset_day() => Some(match self.will_be {
                Outcome::Asymptomatic => Asymptomatic,
                Outcome::Mild => Mild,
                Outcome::Severe | Outcome::Fatal => SevereHome,
            }),
            Asymptomatic | Mild if elapsed >= self.illness_days => Some(Recovered),
            SevereHome if elapsed >= self.severe_home_days => Some(Hospitalized),
            Hospitalized if elapsed >= self.hospital_days => Some(if self.will_be == Outcome::Fatal {
                Dead
            } else {
                Recovered
            }),
            _ => None,
        };
        if let Some(to) = to {
            self.state = to;
            self.state_entered_day = day;
        }
        self.infectiousness = self.infectiousness_on(day);
        to.map(|to| Transition { from, to })
    }
}

/// Per-contact transmission probabilities before infectiousness and
/// susceptibility adjustments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionBetas {
    pub household: f64,
    pub network: f64,
    pub school: f64,
    pub random: f64,
}

impl TransmissionBetas {
    /// School contacts at half and random contacts at a tenth of `beta_c`;
    /// household contacts at `beta_c` as well.
    pub fn from_beta_c(beta_c: f64) -> Self {
        TransmissionBetas {
            household: beta_c,
            network: beta_c,
            school: beta_c * 0.5,
            random: beta_c * 0.1,
        }
    }

    pub fn for_class(&self, class: BetaClass) -> f64 {
        match class {
            BetaClass::Household => self.household,
            BetaClass::Network => self.network,
            BetaClass::School => self.school,
            BetaClass::Random => self.random,
        }
    }
}

/// Probability that `contact` transmits from a source with `source_infectiousness`.
pub fn effective_beta(
    contact: &ContactEvent,
    source_infectiousness: f64,
    source_isolating: bool,
    target: &Agent,
    betas: &TransmissionBetas,
    params: &DiseaseParams,
) -> f64 {
    let mut p = betas.for_class(contact.beta_class()) * source_infectiousness * params.susceptibility(target.age);
    if source_isolating && contact.layer == ContactLayer::Household {
        p *= params.isolating_household_factor;
    }
    p.clamp(0.0, 1.0)
}
