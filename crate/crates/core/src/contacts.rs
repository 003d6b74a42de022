//! Daily contact generation over the social network.
//!
//! Weekly encounter frequencies are realised as independent daily
//! Bernoulli(frequency / 7) draws. Work and school attendance come from a
//! dedicated per-(agent, day) stream so that colleague contacts and a
//! public-facing worker's customer contacts agree on whether the agent works.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose, SimRng};
use crate::stats;
use crate::synthpop::{AgentId, Employment, Population};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactLayer {
    Household,
    School,
    Friendship,
    Relatives,
    WorkplaceClose,
    WorkplaceSite,
    PublicFacingRandom,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaClass {
    Household,
    Network,
    School,
    Random,
}

impl ContactLayer {
    pub const ALL: [ContactLayer; 8] = [
        ContactLayer::Household,
        ContactLayer::School,
        ContactLayer::Friendship,
        ContactLayer::Relatives,
        ContactLayer::WorkplaceClose,
        ContactLayer::WorkplaceSite,
        ContactLayer::PublicFacingRandom,
        ContactLayer::Random,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ContactLayer::Household => "household",
            ContactLayer::School => "school",
            ContactLayer::Friendship => "friendship",
            ContactLayer::Relatives => "relatives",
            ContactLayer::WorkplaceClose => "workplace_close",
            ContactLayer::WorkplaceSite => "workplace_site",
            ContactLayer::PublicFacingRandom => "public_facing_random",
            ContactLayer::Random => "random",
        }
    }

    /// Transmission class. Household contacts use the network probability
    /// but keep their own class so distancing can leave them untouched.
    pub fn beta_class(self) -> BetaClass {
        match self {
            ContactLayer::Household => BetaClass::Household,
            ContactLayer::School => BetaClass::School,
            ContactLayer::Random | ContactLayer::PublicFacingRandom => BetaClass::Random,
            _ => BetaClass::Network,
        }
    }

    /// Layers on which two app users register each other. Household, school
    /// and relative meetings are not recorded.
    pub fn records_cta(self) -> bool {
        matches!(
            self,
            ContactLayer::Friendship
                | ContactLayer::WorkplaceClose
                | ContactLayer::WorkplaceSite
                | ContactLayer::PublicFacingRandom
                | ContactLayer::Random
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContactEvent {
    pub source: AgentId,
    pub target: AgentId,
    pub layer: ContactLayer,
}

impl ContactEvent {
    pub fn beta_class(&self) -> BetaClass {
        self.layer.beta_class()
    }
}

/// Whether an agent takes part in contacts today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Presence {
    #[default]
    Free,
    /// Household contacts only.
    Isolating,
    Hospitalized,
    Dead,
}

pub trait PresenceView {
    fn presence(&self, id: AgentId) -> Presence;
}

impl PresenceView for [Presence] {
    #[inline]
    fn presence(&self, id: AgentId) -> Presence {
        self[id as usize]
    }
}

impl PresenceView for Vec<Presence> {
    #[inline]
    fn presence(&self, id: AgentId) -> Presence {
        self[id as usize]
    }
}

/// Everyone free: used for contact-pattern reports.
pub struct AllFree;

impl PresenceView for AllFree {
    #[inline]
    fn presence(&self, _: AgentId) -> Presence {
        Presence::Free
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactPolicy {
    pub household_per_week: f64,
    pub school_per_week: f64,
    pub workplace_per_week: f64,
    pub friendship_per_week: f64,
    pub friendship_per_week_elderly: f64,
    pub relatives_per_week: f64,
    pub random_per_week: f64,
    pub random_per_week_elderly: f64,
    pub elderly_age: u8,
    /// `p`: strangers met per day as a fraction of the zone population.
    pub random_fraction: f64,
    /// Customer contacts of public-facing workers, as a multiple of `p`.
    pub public_facing_multiplier: f64,
    pub school_fraction_met: f64,
    /// Upper bound on friends met per encounter, as a fraction of ties.
    pub friend_fraction_cap: f64,
    pub distancing: bool,
}

impl Default for ContactPolicy {
    fn default() -> Self {
        ContactPolicy::business_as_usual()
    }
}

impl ContactPolicy {
    pub fn business_as_usual() -> Self {
        ContactPolicy {
            household_per_week: 7.0,
            school_per_week: 5.0,
            workplace_per_week: 5.0,
            friendship_per_week: 7.0,
            friendship_per_week_elderly: 3.5,
            relatives_per_week: 2.0,
            random_per_week: 7.0,
            random_per_week_elderly: 3.5,
            elderly_age: 65,
            random_fraction: 0.01,
            public_facing_multiplier: 3.0,
            school_fraction_met: 0.5,
            friend_fraction_cap: 0.10,
            distancing: false,
        }
    }

    /// Three-day work and school weeks; school contacts, stranger contacts
    /// and the frequency of social meetings each cut by 30%.
    pub fn baseline_distancing() -> Self {
        let bau = ContactPolicy::business_as_usual();
        ContactPolicy {
            school_per_week: 3.0,
            workplace_per_week: 3.0,
            friendship_per_week: 4.9,
            friendship_per_week_elderly: 2.45,
            random_fraction: 0.007,
            school_fraction_met: 0.35,
            distancing: true,
            ..bau
        }
    }

    pub fn validate(&self) -> Result<()> {
        let freqs = [
            ("household_per_week", self.household_per_week),
            ("school_per_week", self.school_per_week),
            ("workplace_per_week", self.workplace_per_week),
            ("friendship_per_week", self.friendship_per_week),
            ("friendship_per_week_elderly", self.friendship_per_week_elderly),
            ("relatives_per_week", self.relatives_per_week),
            ("random_per_week", self.random_per_week),
            ("random_per_week_elderly", self.random_per_week_elderly),
        ];
        for (name, f) in freqs {
            if !(0.0..=7.0).contains(&f) {
                return Err(Error::config(format!("contacts.{name}"), format!("{f} not in [0, 7]")));
            }
        }
        if !(self.random_fraction > 0.0 && self.random_fraction < 1.0) {
            return Err(Error::config("contacts.random_fraction", "must be in (0, 1)"));
        }
        for (name, f) in [
            ("school_fraction_met", self.school_fraction_met),
            ("friend_fraction_cap", self.friend_fraction_cap),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::config(format!("contacts.{name}"), format!("{f} not in (0, 1]")));
            }
        }
        if self.public_facing_multiplier.is_nan() || self.public_facing_multiplier < 0.0 {
            return Err(Error::config("contacts.public_facing_multiplier", "must be non-negative"));
        }
        Ok(())
    }
}

#[inline]
fn encounter(rng: &mut SimRng, per_week: f64) -> bool {
    if per_week >= 7.0 {
        true
    } else if per_week <= 0.0 {
        false
    } else {
        rng.random::<f64>() < per_week / 7.0
    }
}

#[inline]
fn poisson_count(rng: &mut SimRng, lambda: f64) -> usize {
    if lambda <= 0.0 {
        return 0;
    }
    let d = Poisson::new(lambda).expect("positive rate");
    d.sample(rng) as usize
}

/// Does the agent go to work or school on `day`?
pub fn attends(agent: AgentId, day: u32, policy: &ContactPolicy, pop: &Population, seed: u64) -> bool {
    let per_week = match pop.agents[agent as usize].employment {
        Employment::Office | Employment::PublicFacing => policy.workplace_per_week,
        Employment::Pupil => policy.school_per_week,
        Employment::None => return false,
    };
    let mut rng = rng::stream(seed, Purpose::Attendance, agent as u64, day as u64);
    encounter(&mut rng, per_week)
}

fn uniform_stranger(rng: &mut SimRng, residents: &[AgentId], agent: AgentId) -> Option<AgentId> {
    if residents.len() < 2 {
        return None;
    }
    let i = rng.random_range(0..residents.len());
    let t = residents[i];
    Some(if t == agent { residents[(i + 1) % residents.len()] } else { t })
}

/// Household, school, workplace, relatives, friendship and random-stranger
/// contacts drawn by `agent` on `day`. Customer contacts are separate, see
/// [`for_each_customer_contact`].
pub fn for_each_network_contact<P: PresenceView + ?Sized>(
    agent: AgentId,
    day: u32,
    policy: &ContactPolicy,
    pop: &Population,
    presence: &P,
    seed: u64,
    sink: &mut impl FnMut(ContactEvent),
) {
    let own = presence.presence(agent);
    if matches!(own, Presence::Hospitalized | Presence::Dead) {
        return;
    }
    let net = &pop.network;
    let me = &pop.agents[agent as usize];
    let mut rng = rng::stream(seed, Purpose::Contacts, agent as u64, day as u64);
    let mut emit = |target: AgentId, layer: ContactLayer| {
        let ok = match presence.presence(target) {
            Presence::Free => true,
            Presence::Isolating => layer == ContactLayer::Household,
            Presence::Hospitalized | Presence::Dead => false,
        };
        if ok && target != agent {
            sink(ContactEvent {
                source: agent,
                target,
                layer,
            });
        }
    };

    if encounter(&mut rng, policy.household_per_week) {
        for &h in net.household.neighbors(agent) {
            emit(h, ContactLayer::Household);
        }
    }
    if own == Presence::Isolating {
        return;
    }

    let elderly = me.age >= policy.elderly_age;
    let random_week = if elderly {
        policy.random_per_week_elderly
    } else {
        policy.random_per_week
    };
    if encounter(&mut rng, random_week) {
        let residents = &pop.zone_residents[me.zone as usize];
        let k = poisson_count(&mut rng, policy.random_fraction * residents.len() as f64);
        for _ in 0..k {
            if let Some(t) = uniform_stranger(&mut rng, residents, agent) {
                emit(t, ContactLayer::Random);
            }
        }
    }

    if encounter(&mut rng, policy.relatives_per_week) {
        let rel = net.relatives.neighbors(agent);
        if !rel.is_empty() {
            emit(rel[rng.random_range(0..rel.len())], ContactLayer::Relatives);
        }
    }

    match me.employment {
        Employment::Office | Employment::PublicFacing => {
            if attends(agent, day, policy, pop, seed) {
                for &c in net.close_colleagues.neighbors(agent) {
                    emit(c, ContactLayer::WorkplaceClose);
                }
                if let Some(site) = me.workplace_or_class {
                    let members = &net.sites[site as usize];
                    if members.len() > 1 {
                        let mut t = members[rng.random_range(0..members.len())];
                        if t == agent {
                            t = members[rng.random_range(0..members.len())];
                        }
                        emit(t, ContactLayer::WorkplaceSite);
                    }
                }
            }
        }
        Employment::Pupil => {
            if attends(agent, day, policy, pop, seed) {
                let mates = net.classmates.neighbors(agent);
                let k = (policy.school_fraction_met * mates.len() as f64).round() as usize;
                if k > 0 {
                    for i in index::sample(&mut rng, mates.len(), k.min(mates.len())) {
                        emit(mates[i], ContactLayer::School);
                    }
                }
            }
        }
        Employment::None => {}
    }

    let friend_week = if elderly {
        policy.friendship_per_week_elderly
    } else {
        policy.friendship_per_week
    };
    let friends = net.friendship.neighbors(agent);
    if !friends.is_empty() && encounter(&mut rng, friend_week) {
        let cap = ((policy.friend_fraction_cap * friends.len() as f64).floor() as usize).max(1);
        let k = rng.random_range(1..=cap).min(friends.len());
        for i in index::sample(&mut rng, friends.len(), k) {
            emit(friends[i], ContactLayer::Friendship);
        }
    }
}

/// Customers met by a public-facing worker on a work day:
/// Poisson(multiplier * p * zone population) strangers from the own zone.
pub fn for_each_customer_contact<P: PresenceView + ?Sized>(
    agent: AgentId,
    day: u32,
    policy: &ContactPolicy,
    pop: &Population,
    presence: &P,
    seed: u64,
    sink: &mut impl FnMut(ContactEvent),
) {
    let me = &pop.agents[agent as usize];
    if me.employment != Employment::PublicFacing || presence.presence(agent) != Presence::Free {
        return;
    }
    if !attends(agent, day, policy, pop, seed) {
        return;
    }
    let residents = &pop.zone_residents[me.zone as usize];
    let mut rng = rng::stream(seed, Purpose::Customers, agent as u64, day as u64);
    let lambda = policy.public_facing_multiplier * policy.random_fraction * residents.len() as f64;
    let k = poisson_count(&mut rng, lambda);
    for _ in 0..k {
        if let Some(t) = uniform_stranger(&mut rng, residents, agent) {
            if presence.presence(t) == Presence::Free {
                sink(ContactEvent {
                    source: agent,
                    target: t,
                    layer: ContactLayer::PublicFacingRandom,
                });
            }
        }
    }
}

/// All contacts `agent` draws on `day`, customers included.
pub fn daily_contacts<P: PresenceView + ?Sized>(
    agent: AgentId,
    day: u32,
    policy: &ContactPolicy,
    pop: &Population,
    presence: &P,
    seed: u64,
) -> Vec<ContactEvent> {
    let mut out = Vec::new();
    let mut push = |e: ContactEvent| out.push(e);
    for_each_network_contact(agent, day, policy, pop, presence, seed, &mut push);
    for_each_customer_contact(agent, day, policy, pop, presence, seed, &mut push);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactReport {
    /// contacts per agent-day -> number of agent-days
    pub histogram: BTreeMap<usize, u64>,
    pub mean: f64,
    pub sd: f64,
    pub agent_days: u64,
}

impl ContactReport {
    /// Share of agent-days with a contact count in `[lo, hi]`.
    pub fn fraction_between(&self, lo: usize, hi: usize) -> f64 {
        let n: u64 = self.histogram.range(lo..=hi).map(|(_, c)| c).sum();
        n as f64 / self.agent_days as f64
    }

    /// CSV with columns `contacts,frequency`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["contacts", "frequency"])?;
        for (k, c) in &self.histogram {
            w.write_record([k.to_string(), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<contacts report>", e))?;
        Ok(())
    }
}

/// Pool every agent's daily contact count over `n_days` days with nobody
/// isolating or infected.
pub fn contact_distribution_report(pop: &Population, policy: &ContactPolicy, n_days: u32, seed: u64) -> ContactReport {
    assert!(n_days >= 1, "n_days must be at least 1");
    let seed = rng::derive(seed, Purpose::Report, 0, 0);
    let mut histogram = BTreeMap::new();
    let mut counts = Vec::with_capacity(pop.len() * n_days as usize);
    for day in 0..n_days {
        for a in 0..pop.len() as AgentId {
            let mut k = 0usize;
            let mut tally = |_: ContactEvent| k += 1;
            for_each_network_contact(a, day, policy, pop, &AllFree, seed, &mut tally);
            for_each_customer_contact(a, day, policy, pop, &AllFree, seed, &mut tally);
            *histogram.entry(k).or_insert(0u64) += 1;
            counts.push(k as f64);
        }
    }
    ContactReport {
        histogram,
        mean: stats::mean(&counts),
        sd: stats::std_dev(&counts),
        agent_days: counts.len() as u64,
    }
}
