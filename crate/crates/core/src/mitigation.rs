//! Testing stock and queue, isolation decisions, contact-tracing-app logs
//! and the notification cascades that follow a diagnosis.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution, Poisson};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::synthpop::{AgentId, Employment, Population};

/// Weekly testing capacity as a fraction of the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Weekly(f64),
    Unlimited,
}

impl Capacity {
    pub fn daily_restock(self, population: usize) -> f64 {
        match self {
            Capacity::Weekly(f) => f * population as f64 / 7.0,
            Capacity::Unlimited => f64::INFINITY,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "unlimited") {
            return Ok(Capacity::Unlimited);
        }
        let f: f64 = t
            .parse()
            .map_err(|_| Error::config("testing.capacity", format!("cannot parse `{s}`")))?;
        if f.is_infinite() && f > 0.0 {
            Ok(Capacity::Unlimited)
        } else {
            Ok(Capacity::Weekly(f))
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Weekly(x) => write!(f, "{x}"),
            Capacity::Unlimited => f.write_str("inf"),
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Capacity::Weekly(x) => s.serialize_f64(*x),
            Capacity::Unlimited => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Capacity::Weekly(x)),
            Repr::Text(s) => Capacity::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestingPolicy {
    /// Symptomatic test-seekers first, then everyone else in arrival order.
    PrioritySymptomatic,
    FirstCome,
}

impl fmt::Display for TestingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestingPolicy::PrioritySymptomatic => "priority",
            TestingPolicy::FirstCome => "first_come",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestCause {
    Symptoms,
    Ili,
    CtaNotice,
    RelativeNotice,
    Classmate,
}

impl TestCause {
    /// Served first under the priority policy. Influenza-like illness is
    /// indistinguishable from COVID symptoms at the test site.
    pub fn is_symptomatic(self) -> bool {
        matches!(self, TestCause::Symptoms | TestCause::Ili)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueEntry {
    pub agent: AgentId,
    pub cause: TestCause,
    pub day_enqueued: u32,
}

/// Per-agent isolation probability ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaModel {
    /// Beta distribution with the given mean and concentration α + β.
    Beta { mean: f64, concentration: f64 },
    Point { value: f64 },
}

impl OmegaModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OmegaModel::Beta { mean, concentration } => {
                if !(mean > 0.0 && mean < 1.0) {
                    return Err(Error::config("mitigation.omega.mean", "must be in (0, 1)"));
                }
                if !(concentration > 0.0 && concentration.is_finite()) {
                    return Err(Error::config("mitigation.omega.concentration", "must be positive"));
                }
            }
            OmegaModel::Point { value } => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::config("mitigation.omega.value", "must be in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            OmegaModel::Beta { mean, concentration } => Beta::new(mean * concentration, (1.0 - mean) * concentration)
                .expect("valid beta")
                .sample(rng),
            OmegaModel::Point { value } => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MitigationParams {
    pub capacity: Capacity,
    pub policy: TestingPolicy,
    pub cta_adoption: f64,
    /// Ω: multiplier on ω for CTA-notified agents that could not get a test.
    pub compliance: f64,
    pub omega: OmegaModel,
    /// Youngest age at which an agent can own the app.
    pub cta_min_age: u8,
    pub cta_log_days: u32,
    pub quarantine_days: u32,
    pub symptom_test_delay_min: u32,
    pub symptom_test_delay_max: u32,
    pub ili_weekly_fraction: f64,
    pub ili_test_fraction: f64,
    /// Optional cap on accumulated stock, in days of restock.
    pub max_stock_days: Option<f64>,
    /// Symptomatic agents who cannot get a test isolate with probability ω.
    pub symptomatic_self_isolation: bool,
    /// Notified relatives queue for a test instead of deciding on isolation
    /// straight away.
    pub relatives_seek_testing: bool,
}

impl Default for MitigationParams {
    fn default() -> Self {
        MitigationParams {
            capacity: Capacity::Weekly(0.0),
            policy: TestingPolicy::PrioritySymptomatic,
            cta_adoption: 0.0,
            compliance: 0.9,
            omega: OmegaModel::Beta {
                mean: 0.7,
                concentration: 10.0,
            },
            cta_min_age: 15,
            cta_log_days: 10,
            quarantine_days: 14,
            symptom_test_delay_min: 1,
            symptom_test_delay_max: 3,
            ili_weekly_fraction: 0.035,
            ili_test_fraction: 0.30,
            max_stock_days: None,
            symptomatic_self_isolation: true,
            relatives_seek_testing: false,
        }
    }
}

impl MitigationParams {
    pub fn validate(&self) -> Result<()> {
        if let Capacity::Weekly(f) = self.capacity {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::config("mitigation.capacity", format!("{f} not in [0, 1] or inf")));
            }
        }
        if !(0.0..=1.0).contains(&self.cta_adoption) {
            return Err(Error::config("mitigation.cta_adoption", "must be in [0, 1]"));
        }
        if !(self.compliance > 0.0 && self.compliance <= 1.0) {
            return Err(Error::config("mitigation.compliance", "must be in (0, 1]"));
        }
        self.omega.validate()?;
        for (name, f) in [
            ("ili_weekly_fraction", self.ili_weekly_fraction),
            ("ili_test_fraction", self.ili_test_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::config(format!("mitigation.{name}"), "must be in [0, 1]"));
            }
        }
        if self.symptom_test_delay_min > self.symptom_test_delay_max {
            return Err(Error::config("mitigation.symptom_test_delay_min", "exceeds the maximum"));
        }
        if let Some(d) = self.max_stock_days {
            if d.is_nan() || d < 1.0 {
                return Err(Error::config("mitigation.max_stock_days", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Expected influenza-like-illness test seekers per day.
    pub fn ili_daily_rate(&self, population: usize) -> f64 {
        self.ili_weekly_fraction * self.ili_test_fraction * population as f64 / 7.0
    }
}

/// Pick app users: exactly `round(fraction × eligible)` agents aged at least
/// `min_age`. Adopters at a lower fraction are a subset of those at a higher
/// one for the same seed.
pub fn assign_cta(pop: &Population, fraction: f64, min_age: u8, seed: u64) -> Vec<bool> {
    let mut keyed: Vec<(u64, AgentId)> = pop
        .agents
        .iter()
        .filter(|a| a.age >= min_age)
        .map(|a| (rng::derive(seed, Purpose::CtaAdoption, a.id as u64, 0), a.id))
        .collect();
    keyed.sort_unstable();
    let k = (fraction * keyed.len() as f64).round() as usize;
    let mut out = vec![false; pop.len()];
    for &(_, id) in keyed.iter().take(k) {
        out[id as usize] = true;
    }
    out
}

/// One day of app-to-app encounters. Pairs are appended once and indexed
/// under both endpoints when the day is sealed.
#[derive(Debug, Clone)]
struct DayLog {
    day: u32,
    pairs: Vec<(AgentId, AgentId)>,
    offsets: Vec<u32>,
    others: Vec<AgentId>,
}

impl DayLog {
    fn empty(day: u32) -> Self {
        DayLog {
            day,
            pairs: Vec::new(),
            offsets: Vec::new(),
            others: Vec::new(),
        }
    }

    fn sealed(&self) -> bool {
        self.pairs.is_empty()
    }

    fn len(&self) -> usize {
        2 * self.pairs.len() + self.others.len()
    }

    fn seal(&mut self, population: usize) {
        if self.sealed() {
            return;
        }
        // Fold earlier sealed entries back in so late records are kept.
        let mut directed: Vec<(AgentId, AgentId)> = Vec::new();
        for owner in 0..self.offsets.len().saturating_sub(1) {
            for i in self.offsets[owner]..self.offsets[owner + 1] {
                directed.push((owner as AgentId, self.others[i as usize]));
            }
        }
        let mut offsets = vec![0u32; population + 1];
        for &(a, b) in &self.pairs {
            offsets[a as usize + 1] += 1;
            offsets[b as usize + 1] += 1;
        }
        for &(o, _) in &directed {
            offsets[o as usize + 1] += 1;
        }
        for i in 0..population {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut others = vec![0; offsets[population] as usize];
        let mut put = |o: AgentId, x: AgentId| {
            let c = &mut cursor[o as usize];
            others[*c as usize] = x;
            *c += 1;
        };
        for &(o, x) in &directed {
            put(o, x);
        }
        for &(a, b) in &self.pairs {
            put(a, b);
            put(b, a);
        }
        self.offsets = offsets;
        self.others = others;
        self.pairs = Vec::new();
    }

    fn of(&self, agent: AgentId) -> Box<dyn Iterator<Item = AgentId> + '_> {
        let mut it: Box<dyn Iterator<Item = AgentId> + '_> = Box::new(std::iter::empty());
        if !self.offsets.is_empty() {
            let (a, b) = (self.offsets[agent as usize], self.offsets[agent as usize + 1]);
            it = Box::new(self.others[a as usize..b as usize].iter().copied());
        }
        if !self.pairs.is_empty() {
            let loose = self.pairs.iter().filter_map(move |&(a, b)| match () {
                _ if a == agent => Some(b),
                _ if b == agent => Some(a),
                _ => None,
            });
            it = Box::new(it.chain(loose));
        }
        it
    }
}

/// Recent app-to-app encounters, bucketed by day.
#[derive(Debug, Clone, Default)]
pub struct CtaLogs {
    days: VecDeque<DayLog>,
    population: usize,
    window: u32,
}

impl CtaLogs {
    pub fn new(population: usize, window_days: u32) -> Self {
        CtaLogs {
            days: VecDeque::new(),
            population,
            window: window_days,
        }
    }

    fn bucket(&mut self, day: u32) -> &mut DayLog {
        let pos = self.days.iter().position(|d| d.day >= day);
        let idx = match pos {
            Some(i) if self.days[i].day == day => i,
            Some(i) => {
                self.days.insert(i, DayLog::empty(day));
                i
            }
            None => {
                self.days.push_back(DayLog::empty(day));
                self.days.len() - 1
            }
        };
        &mut self.days[idx]
    }

    /// Both parties log the encounter.
    pub fn record(&mut self, a: AgentId, b: AgentId, day: u32) {
        self.bucket(day).pairs.push((a, b));
    }

    /// Log a batch of encounters that all happened on `day`.
    pub fn record_many(&mut self, day: u32, pairs: &[(AgentId, AgentId)]) {
        self.bucket(day).pairs.extend_from_slice(pairs);
    }

    /// Index everything recorded so far; lookups are linear until then.
    pub fn seal(&mut self) {
        let n = self.population;
        for d in self.days.iter_mut() {
            d.seal(n);
        }
    }

    /// Drop entries more than `window` days old.
    pub fn prune(&mut self, day: u32) {
        while self.days.front().is_some_and(|d| day.saturating_sub(d.day) > self.window) {
            self.days.pop_front();
        }
    }

    /// Logged encounters of `agent`, oldest day first.
    pub fn entries(&self, agent: AgentId) -> impl Iterator<Item = (AgentId, u32)> + '_ {
        self.days.iter().flat_map(move |d| d.of(agent).map(move |x| (x, d.day)))
    }

    /// Distinct logged contacts of `agent`, ascending.
    pub fn contacts(&self, agent: AgentId) -> Vec<AgentId> {
        let mut v: Vec<AgentId> = self.entries(agent).map(|(a, _)| a).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn oldest_entry_day(&self) -> Option<u32> {
        self.days.iter().find(|d| d.len() > 0).map(|d| d.day)
    }

    pub fn total_entries(&self) -> usize {
        self.days.iter().map(DayLog::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsolationReason {
    Symptoms,
    Cta,
    Relative,
    Household,
    Classmate,
    Confirmed,
}

impl IsolationReason {
    /// Isolation that lasts until recovery instead of a fixed quarantine.
    pub fn until_recovery(self) -> bool {
        matches!(self, IsolationReason::Confirmed | IsolationReason::Symptoms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsolationState {
    pub reason: IsolationReason,
    /// First day the agent is free again; `u32::MAX` while tied to recovery.
    pub until_day: u32,
}

/// What the mitigation layer needs to know about each agent's infection.
pub trait InfectionView {
    /// Currently infected (a test would come back positive).
    fn is_infected(&self, agent: AgentId) -> bool;
    fn is_symptomatic(&self, agent: AgentId) -> bool;
    /// Dead or in hospital: out of the community.
    fn is_removed(&self, agent: AgentId) -> bool;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TestingDay {
    pub tests_available: u64,
    pub tests_used: u64,
    pub positives: u64,
    pub queue_depth: u64,
    pub unserved: u64,
    /// Symptomatic entries left untested on a day when a non-symptomatic
    /// entry was served. Always zero under the priority policy.
    pub starved_symptomatic: u64,
}

/// Stock, queue, results and isolation bookkeeping for one run.
#[derive(Debug, Clone)]
pub struct TestingSystem {
    pub params: MitigationParams,
    pub stock: f64,
    pub daily_restock: f64,
    pub queue: Vec<QueueEntry>,
    /// Entries enqueued today, merged into the queue in (cause, agent) order.
    incoming: Vec<QueueEntry>,
    /// Tests taken yesterday: (agent, cause, positive).
    results_due: Vec<(AgentId, TestCause, bool)>,
    symptom_seekers: Vec<(u32, AgentId)>,
    pending: Vec<bool>,
    pub diagnosed: Vec<bool>,
    pub isolation: Vec<Option<IsolationState>>,
    pub omega: Vec<f64>,
    pub has_cta: Vec<bool>,
    pub cta_logs: CtaLogs,
    seed: u64,
    pub total_restocked: f64,
    pub total_used: u64,
}

impl TestingSystem {
    pub fn new(pop: &Population, params: MitigationParams, seed: u64, cta_seed: u64) -> Self {
        let n = pop.len();
        let omega = (0..n)
            .map(|i| params.omega.sample(&mut rng::stream(seed, Purpose::Omega, i as u64, 0)))
            .collect();
        let has_cta = assign_cta(pop, params.cta_adoption, params.cta_min_age, cta_seed);
        let daily_restock = params.capacity.daily_restock(n);
        TestingSystem {
            stock: 0.0,
            daily_restock,
            queue: Vec::new(),
            incoming: Vec::new(),
            results_due: Vec::new(),
            symptom_seekers: Vec::new(),
            pending: vec![false; n],
            diagnosed: vec![false; n],
            isolation: vec![None; n],
            omega,
            has_cta,
            cta_logs: CtaLogs::new(n, params.cta_log_days),
            seed,
            total_restocked: 0.0,
            total_used: 0,
            params,
        }
    }

    pub fn is_isolating(&self, agent: AgentId, day: u32) -> bool {
        self.isolation[agent as usize].is_some_and(|s| s.until_day > day)
    }

    pub fn isolating_count(&self, day: u32) -> usize {
        self.isolation.iter().filter(|s| s.is_some_and(|s| s.until_day > day)).count()
    }

    fn decide(&self, agent: AgentId, day: u32, salt: u64, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        let mut r = rng::stream(self.seed, Purpose::Isolation, agent as u64, ((day as u64) << 8) | salt);
        r.random::<f64>() < p
    }

    /// Start or extend isolation. Confirmed isolation is never downgraded.
    pub fn isolate(&mut self, agent: AgentId, day: u32, reason: IsolationReason) {
        let until_day = if reason.until_recovery() {
            u32::MAX
        } else {
            day + self.params.quarantine_days
        };
        let slot = &mut self.isolation[agent as usize];
        match slot {
            Some(s) if s.until_day > day && (s.until_day > until_day || s.reason == IsolationReason::Confirmed) => {}
            _ => *slot = Some(IsolationState { reason, until_day }),
        }
    }

    /// Release isolation tied to the course once the agent recovers.
    pub fn on_recovered(&mut self, agent: AgentId) {
        if self.isolation[agent as usize].is_some_and(|s| s.reason.until_recovery()) {
            self.isolation[agent as usize] = None;
        }
    }

    pub fn enqueue(&mut self, agent: AgentId, cause: TestCause, day: u32, world: &(impl InfectionView + ?Sized)) {
        let i = agent as usize;
        if self.pending[i] || self.diagnosed[i] || world.is_removed(agent) {
            return;
        }
        if matches!(cause, TestCause::CtaNotice | TestCause::RelativeNotice) && self.is_isolating(agent, day) {
            return;
        }
        self.pending[i] = true;
        self.incoming.push(QueueEntry {
            agent,
            cause,
            day_enqueued: day,
        });
    }

    fn flush_incoming(&mut self) {
        self.incoming.sort_by_key(|e| (e.day_enqueued, e.cause, e.agent));
        self.queue.append(&mut self.incoming);
    }

    /// An agent just developed symptoms: schedule a test 1 to 3 days later.
    pub fn on_symptoms(&mut self, agent: AgentId, day: u32) {
        let mut r = rng::stream(self.seed, Purpose::SymptomDelay, agent as u64, day as u64);
        let delay = r.random_range(self.params.symptom_test_delay_min..=self.params.symptom_test_delay_max);
        self.symptom_seekers.push((day + delay, agent));
    }

    /// Restock, then enqueue today's symptomatic and ILI test seekers.
    pub fn begin_day(&mut self, day: u32, world: &(impl InfectionView + ?Sized)) {
        if self.daily_restock.is_finite() {
            self.stock += self.daily_restock;
            self.total_restocked += self.daily_restock;
            if let Some(cap) = self.params.max_stock_days {
                self.stock = self.stock.min(cap * self.daily_restock);
            }
        }
        let mut due = Vec::new();
        self.symptom_seekers.retain(|&(d, a)| {
            if d <= day {
                due.push(a);
                false
            } else {
                true
            }
        });
        for a in due {
            self.enqueue(a, TestCause::Symptoms, day, world);
        }
        self.ili_background(day, world);
        self.flush_incoming();
    }

    /// Draw today's influenza-like-illness test seekers among uninfected agents.
    pub fn ili_background(&mut self, day: u32, world: &(impl InfectionView + ?Sized)) {
        let n = self.pending.len();
        let lambda = self.params.ili_daily_rate(n);
        if lambda <= 0.0 || n == 0 {
            return;
        }
        let mut r = rng::stream(self.seed, Purpose::Ili, day as u64, 0);
        let k = Poisson::new(lambda).expect("positive rate").sample(&mut r) as usize;
        for _ in 0..k {
            let a = r.random_range(0..n) as AgentId;
            if !world.is_infected(a) {
                self.enqueue(a, TestCause::Ili, day, world);
            }
        }
    }

    /// Serve the queue from stock. Unserved entries take their no-test
    /// branch and leave the queue; served tests return results tomorrow.
    pub fn process_testing_day(&mut self, day: u32, pop: &Population, world: &(impl InfectionView + ?Sized)) -> TestingDay {
        let mut queue = std::mem::take(&mut self.queue);
        if self.params.policy == TestingPolicy::PrioritySymptomatic {
            // stable: arrival order kept within each group
            queue.sort_by_key(|e| !e.cause.is_symptomatic());
        }
        let available = if self.daily_restock.is_finite() {
            self.stock.max(0.0).floor() as usize
        } else {
            usize::MAX
        };
        let served = available.min(queue.len());
        let mut report = TestingDay {
            tests_available: available.min(u64::MAX as usize) as u64,
            tests_used: served as u64,
            queue_depth: queue.len() as u64,
            unserved: (queue.len() - served) as u64,
            ..TestingDay::default()
        };
        if served > 0 && queue[..served].iter().any(|e| !e.cause.is_symptomatic()) {
            report.starved_symptomatic = queue[served..].iter().filter(|e| e.cause.is_symptomatic()).count() as u64;
        }
        if self.daily_restock.is_finite() {
            self.stock -= served as f64;
        }
        self.total_used += served as u64;
        for e in &queue[..served] {
            let positive = world.is_infected(e.agent);
            report.positives += positive as u64;
            self.results_due.push((e.agent, e.cause, positive));
        }
        for e in &queue[served..] {
            self.pending[e.agent as usize] = false;
            self.untested(e.agent, e.cause, day, pop, world);
        }
        report
    }

    /// Deliver results of tests taken before `day`.
    pub fn deliver_results(&mut self, day: u32, pop: &Population, world: &(impl InfectionView + ?Sized)) {
        let due = std::mem::take(&mut self.results_due);
        for (agent, _, positive) in due {
            self.pending[agent as usize] = false;
            if positive {
                self.process_positive(agent, day, pop, world);
            } else if self.isolation[agent as usize].is_some_and(|s| !s.reason.until_recovery()) {
                self.isolation[agent as usize] = None;
            }
        }
        self.flush_incoming();
    }

    /// Hospital admissions are diagnosed without a community test.
    pub fn on_hospitalized(&mut self, agent: AgentId, day: u32, pop: &Population, world: &(impl InfectionView + ?Sized)) {
        self.process_positive(agent, day, pop, world);
        self.flush_incoming();
    }

    fn isolate_household(&mut self, agent: AgentId, day: u32, pop: &Population) {
        for &h in pop.network.household.neighbors(agent) {
            if self.decide(h, day, 1, self.omega[h as usize]) {
                self.isolate(h, day, IsolationReason::Household);
            }
        }
    }

    /// Relatives isolate with their own ω, or queue for a test when
    /// `relatives_seek_testing` is set.
    fn notify_relatives(&mut self, agent: AgentId, day: u32, pop: &Population, world: &(impl InfectionView + ?Sized)) {
        for &r in pop.network.relatives.neighbors(agent) {
            if self.params.relatives_seek_testing {
                self.enqueue(r, TestCause::RelativeNotice, day, world);
            } else if !world.is_removed(r) && self.decide(r, day, 4, self.omega[r as usize]) {
                self.isolate(r, day, IsolationReason::Relative);
            }
        }
    }

    /// Positive result: confirmed isolation, household isolation with
    /// probability ω, relatives notified, classmates quarantined and tested,
    /// app contacts notified.
    pub fn process_positive(&mut self, agent: AgentId, day: u32, pop: &Population, world: &(impl InfectionView + ?Sized)) {
        if self.diagnosed[agent as usize] {
            return;
        }
        self.diagnosed[agent as usize] = true;
        self.isolate(agent, day, IsolationReason::Confirmed);
        self.isolate_household(agent, day, pop);
        self.notify_relatives(agent, day, pop, world);
        if pop.agents[agent as usize].employment == Employment::Pupil {
            for &c in pop.network.classmates.neighbors(agent) {
                if !world.is_removed(c) {
                    self.isolate(c, day, IsolationReason::Classmate);
                }
                self.enqueue(c, TestCause::Classmate, day, world);
            }
        }
        if self.has_cta[agent as usize] {
            for c in self.cta_logs.contacts(agent) {
                self.enqueue(c, TestCause::CtaNotice, day, world);
            }
        }
    }

    /// No test was available for `agent`.
    fn untested(&mut self, agent: AgentId, cause: TestCause, day: u32, pop: &Population, world: &(impl InfectionView + ?Sized)) {
        let omega = self.omega[agent as usize];
        match cause {
            TestCause::Symptoms => {
                if self.params.symptomatic_self_isolation && self.decide(agent, day, 2, omega) {
                    self.isolate(agent, day, IsolationReason::Symptoms);
                    self.isolate_household(agent, day, pop);
                    self.notify_relatives(agent, day, pop, world);
                }
            }
            TestCause::CtaNotice => {
                let p = if world.is_symptomatic(agent) {
                    omega
                } else {
                    omega * self.params.compliance
                };
                if self.decide(agent, day, 3, p) {
                    self.isolate(agent, day, IsolationReason::Cta);
                }
            }
            TestCause::RelativeNotice => {
                if self.decide(agent, day, 5, omega) {
                    self.isolate(agent, day, IsolationReason::Relative);
                }
            }
            TestCause::Classmate | TestCause::Ili => {}
        }
    }

    pub fn prune_cta_logs(&mut self, day: u32) {
        self.cta_logs.prune(day);
    }

    /// Current stock; infinite under unlimited capacity.
    pub fn stock_level(&self) -> f64 {
        if self.daily_restock.is_finite() {
            self.stock
        } else {
            f64::INFINITY
        }
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len() + self.incoming.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_parse_and_serde() {
        assert_eq!(Capacity::parse("inf").unwrap(), Capacity::Unlimited);
        assert_eq!(Capacity::parse("0.03").unwrap(), Capacity::Weekly(0.03));
        assert!(Capacity::parse("lots").is_err());
        let s = serde_json::to_string(&Capacity::Unlimited).unwrap();
        assert_eq!(s, "\"inf\"");
        let c: Capacity = serde_json::from_str("0.015").unwrap();
        assert_eq!(c, Capacity::Weekly(0.015));
        assert!((Capacity::Weekly(0.07).daily_restock(1000) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn cta_log_window_boundary() {
        let mut logs = CtaLogs::new(4, 10);
        logs.prune(0);
        assert_eq!(logs.total_entries(), 0);
        logs.record(0, 1, 3);
        logs.prune(13);
        assert_eq!(logs.contacts(0), vec![1]);
        logs.prune(14);
        assert!(logs.contacts(0).is_empty());
        assert!(logs.contacts(1).is_empty());
        assert_eq!(logs.oldest_entry_day(), None);
    }

    #[test]
    fn ili_rate() {
        let p = MitigationParams::default();
        assert!((p.ili_daily_rate(103_000) - 154.5).abs() < 1e-9);
    }

    #[test]
    fn omega_beta_mean() {
        let m = OmegaModel::Beta {
            mean: 0.7,
            concentration: 10.0,
        };
        let mut r = rng::stream(3, Purpose::Omega, 0, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| m.sample(&mut r)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.7).abs() < 0.01, "{mean}");
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}
