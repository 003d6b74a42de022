//! Simulation state and one day of contacts and infections.
//!
//! Infected agents draw their daily contacts; public-facing workers also
//! meet customers whether or not they are infected, and infection can pass
//! either way across the counter. All draws come from per-(agent, day)
//! streams and candidate infections are merged in (target, source) order,
//! so the result does not depend on the order sources are visited.

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::contacts::{self, ContactEvent, ContactLayer, ContactPolicy, Presence};
use crate::disease::{effective_beta, sample_course, DiseaseCourse, DiseaseParams, DiseaseState, TransmissionBetas};
use crate::error::{Error, Result};
use crate::mitigation::{InfectionView, MitigationParams, TestingSystem};
use crate::rng::{self, Purpose};
use crate::synthpop::{AgentId, Employment, Population};

impl InfectionView for [DiseaseState] {
    fn is_infected(&self, agent: AgentId) -> bool {
        self[agent as usize].is_active()
    }

    fn is_symptomatic(&self, agent: AgentId) -> bool {
        self[agent as usize].is_symptomatic()
    }

    fn is_removed(&self, agent: AgentId) -> bool {
        matches!(self[agent as usize], DiseaseState::Hospitalized | DiseaseState::Dead)
    }
}

/// One entry of the transmission audit log. Seeded infections have no source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InfectionRecord {
    pub day: u32,
    pub source: Option<AgentId>,
    pub target: AgentId,
    pub layer: Option<ContactLayer>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DayLedger {
    pub day: u32,
    /// (source, target, layer), ascending by target.
    pub new_infections: Vec<(AgentId, AgentId, ContactLayer)>,
    /// App encounters logged today, one entry per pair.
    pub cta_pairs_recorded: Vec<(AgentId, AgentId)>,
    pub infections_by_layer: [u64; ContactLayer::ALL.len()],
    pub contacts_evaluated: u64,
}

/// Mutable state of one simulation run over a shared population.
pub struct World<'p> {
    pub pop: &'p Population,
    pub policy: ContactPolicy,
    pub disease: DiseaseParams,
    pub betas: TransmissionBetas,
    pub seed: u64,
    pub states: Vec<DiseaseState>,
    pub courses: Vec<Option<DiseaseCourse>>,
    /// Agents with an active course. Ascending between days; new infections
    /// are appended and sorted in at the end of the day.
    pub active: Vec<AgentId>,
    pub presence: Vec<Presence>,
    pub testing: TestingSystem,
    pub infections: Vec<InfectionRecord>,
    /// When false, app encounters are never recorded.
    pub cta_enabled: bool,
    public_facing: Vec<AgentId>,
    pub susceptible: usize,
    pub recovered: usize,
    pub dead: usize,
}

impl<'p> World<'p> {
    /// Fresh world with everyone susceptible. `seed` keys every stream of
    /// the run; the app adopters are drawn from `cta_seed`.
    pub fn new(
        pop: &'p Population,
        policy: ContactPolicy,
        disease: DiseaseParams,
        mitigation: MitigationParams,
        seed: u64,
        cta_seed: u64,
    ) -> Self {
        let n = pop.len();
        let public_facing = pop
            .agents
            .iter()
            .filter(|a| a.employment == Employment::PublicFacing)
            .map(|a| a.id)
            .collect();
        World {
            pop,
            policy,
            betas: disease.betas(),
            disease,
            seed,
            states: vec![DiseaseState::Susceptible; n],
            courses: vec![None; n],
            active: Vec::new(),
            presence: vec![Presence::Free; n],
            testing: TestingSystem::new(pop, mitigation, seed, cta_seed),
            infections: Vec::new(),
            cta_enabled: true,
            public_facing,
            susceptible: n,
            recovered: 0,
            dead: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn infectiousness(&self, agent: AgentId) -> f64 {
        self.courses[agent as usize].as_ref().map_or(0.0, |c| c.infectiousness)
    }

    pub fn hospitalized(&self) -> usize {
        self.active
            .iter()
            .filter(|&&a| self.states[a as usize] == DiseaseState::Hospitalized)
            .count()
    }

    /// Give `agent` a freshly sampled course starting on `day`.
    pub fn infect(&mut self, agent: AgentId, day: u32, source: Option<(AgentId, ContactLayer)>) {
        let i = agent as usize;
        debug_assert_eq!(self.states[i], DiseaseState::Susceptible);
        let mut r = rng::stream(self.seed, Purpose::Course, agent as u64, 0);
        let course = sample_course(&self.pop.agents[i], day, &self.disease, &mut r);
        self.states[i] = DiseaseState::Incubating;
        self.courses[i] = Some(course);
        self.susceptible -= 1;
        self.active.push(agent);
        self.infections.push(InfectionRecord {
            day,
            source: source.map(|s| s.0),
            target: agent,
            layer: source.map(|s| s.1),
        });
    }

    /// Presence of every agent on `day` from disease state and isolation.
    pub fn refresh_presence(&mut self, day: u32) {
        for (i, p) in self.presence.iter_mut().enumerate() {
            *p = match self.states[i] {
                DiseaseState::Dead => Presence::Dead,
                DiseaseState::Hospitalized => Presence::Hospitalized,
                _ if self.testing.is_isolating(i as AgentId, day) => Presence::Isolating,
                _ => Presence::Free,
            };
        }
    }

    /// Conservation check: susceptible + active + recovered + dead = N.
    pub fn is_conserved(&self) -> bool {
        self.susceptible + self.active.len() + self.recovered + self.dead == self.len()
    }
}

/// Mark `recovered_fraction` of agents recovered and infect `n_infected`
/// others on day 0, both uniformly at random.
pub fn seed_epidemic(world: &mut World, n_infected: usize, recovered_fraction: f64, seed: u64) -> Result<()> {
    let n = world.len();
    if !(0.0..=1.0).contains(&recovered_fraction) {
        return Err(Error::config("initial_recovered_fraction", "must be in [0, 1]"));
    }
    let n_recovered = (recovered_fraction * n as f64).round() as usize;
    if n_recovered + n_infected > n {
        return Err(Error::config(
            "initial_infected",
            format!("{n_infected} infected + {n_recovered} recovered exceed population {n}"),
        ));
    }
    let mut r = rng::stream(seed, Purpose::Seeding, 0, 0);
    let chosen = index::sample(&mut r, n, n_recovered + n_infected).into_vec();
    for &i in &chosen[..n_recovered] {
        world.states[i] = DiseaseState::Recovered;
    }
    world.susceptible -= n_recovered;
    world.recovered += n_recovered;
    let mut infected: Vec<usize> = chosen[n_recovered..].to_vec();
    infected.sort_unstable();
    for i in infected {
        world.infect(i as AgentId, 0, None);
    }
    world.active.sort_unstable();
    Ok(())
}

/// Run today's contacts: record app encounters, draw transmissions and
/// start courses for the newly infected.
pub fn step_day(world: &mut World, day: u32) -> DayLedger {
    world.refresh_presence(day);
    let w = &*world;
    let mut candidates: Vec<(AgentId, AgentId, ContactLayer)> = Vec::new();
    let mut cta_pairs = Vec::new();
    let mut evaluated = 0u64;
    let has_cta = &w.testing.has_cta;
    let record = |e: &ContactEvent, pairs: &mut Vec<(AgentId, AgentId)>| {
        if w.cta_enabled && e.layer.records_cta() && has_cta[e.source as usize] && has_cta[e.target as usize] {
            pairs.push((e.source, e.target));
        }
    };
    let beta = |e: &ContactEvent, source_inf: f64| {
        effective_beta(
            e,
            source_inf,
            w.presence[e.source as usize] == Presence::Isolating,
            &w.pop.agents[e.target as usize],
            &w.betas,
            &w.disease,
        )
    };

    for &s in &w.active {
        if matches!(w.presence[s as usize], Presence::Hospitalized | Presence::Dead) {
            continue;
        }
        let inf = w.infectiousness(s);
        let mut tr = rng::stream(w.seed, Purpose::Transmission, s as u64, day as u64);
        contacts::for_each_network_contact(s, day, &w.policy, w.pop, &w.presence, w.seed, &mut |e| {
            evaluated += 1;
            record(&e, &mut cta_pairs);
            if inf > 0.0 && w.states[e.target as usize] == DiseaseState::Susceptible {
                let p = beta(&e, inf);
                if p > 0.0 && tr.random::<f64>() < p {
                    candidates.push((e.target, s, e.layer));
                }
            }
        });
    }

    // App users log co-presence whether or not either side is infected.
    if w.cta_enabled {
        for (u, &uses) in has_cta.iter().enumerate() {
            if !uses || w.states[u].is_active() {
                continue;
            }
            contacts::for_each_network_contact(u as AgentId, day, &w.policy, w.pop, &w.presence, w.seed, &mut |e| {
                record(&e, &mut cta_pairs);
            });
        }
    }

    for &s in &w.public_facing {
        let mut tr = rng::stream(w.seed, Purpose::CustomerTransmission, s as u64, day as u64);
        let worker_inf = w.infectiousness(s);
        let worker_susceptible = w.states[s as usize] == DiseaseState::Susceptible;
        contacts::for_each_customer_contact(s, day, &w.policy, w.pop, &w.presence, w.seed, &mut |e| {
            evaluated += 1;
            record(&e, &mut cta_pairs);
            let k = e.target;
            if worker_inf > 0.0 && w.states[k as usize] == DiseaseState::Susceptible {
                let p = beta(&e, worker_inf);
                if p > 0.0 && tr.random::<f64>() < p {
                    candidates.push((k, s, e.layer));
                }
            }
            let customer_inf = w.infectiousness(k);
            if worker_susceptible && customer_inf > 0.0 {
                let back = ContactEvent {
                    source: k,
                    target: s,
                    layer: e.layer,
                };
                let p = beta(&back, customer_inf);
                if p > 0.0 && tr.random::<f64>() < p {
                    candidates.push((s, k, e.layer));
                }
            }
        });
    }

    candidates.sort_unstable_by_key(|&(t, s, l)| (t, s, l));
    candidates.dedup_by_key(|c| c.0);

    world.testing.cta_logs.record_many(day, &cta_pairs);
    world.testing.cta_logs.seal();
    let mut ledger = DayLedger {
        day,
        new_infections: Vec::with_capacity(candidates.len()),
        cta_pairs_recorded: cta_pairs,
        contacts_evaluated: evaluated,
        ..DayLedger::default()
    };
    for (target, source, layer) in candidates {
        world.infect(target, day, Some((source, layer)));
        ledger.infections_by_layer[layer.index()] += 1;
        ledger.new_infections.push((source, target, layer));
    }
    world.active.sort_unstable();
    ledger
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthpop::{generate_population, PopulationSpec};

    fn small_pop() -> Population {
        generate_population(&PopulationSpec::scaled(2000), 5).unwrap()
    }

    fn world(pop: &Population) -> World<'_> {
        World::new(
            pop,
            ContactPolicy::business_as_usual(),
            DiseaseParams::default(),
            MitigationParams::default(),
            9,
            9,
        )
    }

    #[test]
    fn seeding_counts() {
        let pop = small_pop();
        let mut w = world(&pop);
        seed_epidemic(&mut w, 30, 0.07, 1).unwrap();
        assert_eq!(w.recovered, 140);
        assert_eq!(w.active.len(), 30);
        assert!(w.is_conserved());
        assert!(w.active.iter().all(|&a| w.states[a as usize] == DiseaseState::Incubating));

        let mut w2 = world(&pop);
        seed_epidemic(&mut w2, 30, 0.07, 1).unwrap();
        assert_eq!(w.active, w2.active);

        let mut w3 = world(&pop);
        assert!(matches!(seed_epidemic(&mut w3, 1990, 0.07, 1), Err(Error::Config { .. })));
    }

    #[test]
    fn zero_beta_never_transmits() {
        let pop = small_pop();
        let mut w = world(&pop);
        w.betas = TransmissionBetas::from_beta_c(0.0);
        seed_epidemic(&mut w, 50, 0.0, 2).unwrap();
        for day in 0..40 {
            for a in w.active.clone() {
                w.courses[a as usize].as_mut().unwrap().advance_day(day);
            }
            let ledger = step_day(&mut w, day);
            assert!(ledger.new_infections.is_empty());
        }
    }

    #[test]
    fn one_infection_per_target_per_day() {
        let pop = small_pop();
        let mut w = world(&pop);
        w.betas = TransmissionBetas::from_beta_c(1.0);
        seed_epidemic(&mut w, 100, 0.0, 3).unwrap();
        for a in w.active.clone() {
            let c = w.courses[a as usize].as_mut().unwrap();
            c.infectious_from_day = 0;
            c.infectiousness = 1.0;
        }
        let ledger = step_day(&mut w, 1);
        assert!(!ledger.new_infections.is_empty());
        let mut targets: Vec<_> = ledger.new_infections.iter().map(|x| x.1).collect();
        targets.dedup();
        assert_eq!(targets.len(), ledger.new_infections.len());
        let by_layer: u64 = ledger.infections_by_layer.iter().sum();
        assert_eq!(by_layer as usize, ledger.new_infections.len());
        assert!(w.is_conserved());
    }
}
