mod common;

use ctasim::mitigation::{
    assign_cta, Capacity, InfectionView, IsolationReason, MitigationParams, OmegaModel, QueueEntry, TestCause,
    TestingPolicy, TestingSystem,
};
use ctasim::synthpop::{AgentId, Employment};
use proptest::prelude::*;

use common::small_pop;

/// Hand-set infection status.
struct Status {
    infected: Vec<bool>,
    symptomatic: Vec<bool>,
}

impl Status {
    fn all(n: usize, infected: bool) -> Self {
        Status {
            infected: vec![infected; n],
            symptomatic: vec![false; n],
        }
    }
}

impl InfectionView for Status {
    fn is_infected(&self, a: AgentId) -> bool {
        self.infected[a as usize]
    }
    fn is_symptomatic(&self, a: AgentId) -> bool {
        self.symptomatic[a as usize]
    }
    fn is_removed(&self, _: AgentId) -> bool {
        false
    }
}

fn params(capacity: Capacity, policy: TestingPolicy) -> MitigationParams {
    MitigationParams {
        capacity,
        policy,
        ili_weekly_fraction: 0.0,
        omega: OmegaModel::Point { value: 0.7 },
        ..MitigationParams::default()
    }
}

/// Adults without app, class or relatives, so a diagnosis cascades nowhere.
fn quiet_agents(k: usize) -> Vec<AgentId> {
    let pop = small_pop();
    pop.agents
        .iter()
        .filter(|a| a.employment != Employment::Pupil && pop.network.relatives.neighbors(a.id).is_empty())
        .map(|a| a.id)
        .take(k)
        .collect()
}

fn queue_of(agents: &[AgentId]) -> Vec<QueueEntry> {
    // four app notices arrive before three symptomatic seekers
    agents
        .iter()
        .enumerate()
        .map(|(i, &agent)| QueueEntry {
            agent,
            cause: if i < 4 { TestCause::CtaNotice } else { TestCause::Symptoms },
            day_enqueued: 0,
        })
        .collect()
}

fn served_after(policy: TestingPolicy) -> (Vec<bool>, u64) {
    let pop = small_pop();
    let world = Status::all(pop.len(), true);
    let agents = quiet_agents(7);
    let mut sys = TestingSystem::new(pop, params(Capacity::Weekly(0.0), policy), 1, 1);
    sys.stock = 5.0;
    sys.queue = queue_of(&agents);
    let report = sys.process_testing_day(0, pop, &world);
    assert_eq!(report.tests_used, 5);
    assert_eq!(report.unserved, 2);
    assert_eq!(sys.stock, 0.0);
    sys.deliver_results(1, pop, &world);
    (agents.iter().map(|&a| sys.diagnosed[a as usize]).collect(), report.starved_symptomatic)
}

#[test]
fn priority_serves_symptomatic_first() {
    let (served, starved) = served_after(TestingPolicy::PrioritySymptomatic);
    assert_eq!(served, vec![true, true, false, false, true, true, true]);
    assert_eq!(starved, 0);
}

#[test]
fn first_come_serves_in_arrival_order() {
    let (served, starved) = served_after(TestingPolicy::FirstCome);
    assert_eq!(served, vec![true, true, true, true, true, false, false]);
    assert_eq!(starved, 2);
}

#[test]
fn untested_app_notice_isolates_with_omega_times_compliance() {
    let pop = small_pop();
    let mut world = Status::all(pop.len(), false);
    let mut sys = TestingSystem::new(pop, params(Capacity::Weekly(0.0), TestingPolicy::PrioritySymptomatic), 2, 2);
    let n = pop.len() as AgentId;
    for a in 0..n {
        world.symptomatic[a as usize] = a % 2 == 1;
        sys.enqueue(a, TestCause::CtaNotice, 0, &world);
    }
    sys.begin_day(0, &world);
    sys.process_testing_day(0, pop, &world);
    let rate = |odd: bool| {
        let group: Vec<AgentId> = (0..n).filter(|a| (a % 2 == 1) == odd).collect();
        let iso = group.iter().filter(|&&a| sys.is_isolating(a, 1)).count();
        (iso as f64 / group.len() as f64, group.len() as f64)
    };
    for (odd, p) in [(false, 0.7 * 0.9), (true, 0.7)] {
        let (r, m) = rate(odd);
        let sigma = (p * (1.0 - p) / m).sqrt();
        assert!((r - p).abs() < 3.0 * sigma, "isolation rate {r} vs {p}");
    }
    // fixed quarantine for precautionary isolation
    let a = (0..n).find(|&a| sys.is_isolating(a, 1)).unwrap();
    assert!(sys.is_isolating(a, 13));
    assert!(!sys.is_isolating(a, 14));
}

#[test]
fn untested_symptomatic_agent_does_not_notify_app_contacts() {
    let pop = small_pop();
    let world = Status::all(pop.len(), true);
    let mut p = params(Capacity::Weekly(0.0), TestingPolicy::PrioritySymptomatic);
    p.omega = OmegaModel::Point { value: 1.0 };
    p.cta_adoption = 1.0;
    let mut sys = TestingSystem::new(pop, p, 3, 3);
    let agent = quiet_agents(1)[0];
    for other in [agent + 1, agent + 2, agent + 3] {
        sys.cta_logs.record(agent, other, 0);
    }
    sys.cta_logs.seal();
    sys.enqueue(agent, TestCause::Symptoms, 1, &world);
    sys.begin_day(1, &world);
    sys.process_testing_day(1, pop, &world);
    assert!(sys.is_isolating(agent, 2));
    assert!(!sys.diagnosed[agent as usize]);
    assert_eq!(sys.queue_len(), 0);
}

#[test]
fn positive_app_user_notifies_logged_contacts() {
    let pop = small_pop();
    let world = Status::all(pop.len(), false);
    let mut p = params(Capacity::Unlimited, TestingPolicy::PrioritySymptomatic);
    p.cta_adoption = 1.0;
    let mut sys = TestingSystem::new(pop, p, 4, 4);
    let agent = quiet_agents(1)[0];
    let contacts: Vec<AgentId> = (0..40).map(|i| (agent + 100 + 7 * i) % pop.len() as AgentId).collect();
    for (d, &c) in contacts.iter().enumerate() {
        sys.cta_logs.record(agent, c, d as u32 % 10);
        // repeated encounters notify once
        sys.cta_logs.record(c, agent, d as u32 % 10);
    }
    sys.cta_logs.seal();
    sys.process_positive(agent, 10, pop, &world);
    assert_eq!(sys.queue_len(), 40);
    assert!(sys.is_isolating(agent, 100));
    assert_eq!(sys.isolation[agent as usize].unwrap().reason, IsolationReason::Confirmed);
}

#[test]
fn positive_pupil_quarantines_the_class() {
    let pop = small_pop();
    let world = Status::all(pop.len(), false);
    let mut sys = TestingSystem::new(pop, params(Capacity::Unlimited, TestingPolicy::PrioritySymptomatic), 5, 5);
    let pupil = pop
        .agents
        .iter()
        .find(|a| a.employment == Employment::Pupil && pop.network.classmates.neighbors(a.id).len() >= 10)
        .unwrap()
        .id;
    let mates = pop.network.classmates.neighbors(pupil);
    sys.process_positive(pupil, 3, pop, &world);
    assert!(mates.iter().all(|&m| sys.is_isolating(m, 4)));
    assert!(sys.queue_len() >= mates.len());

    // negative results release the precautionary quarantine
    sys.begin_day(4, &world);
    sys.process_testing_day(4, pop, &world);
    sys.deliver_results(5, pop, &world);
    assert!(mates.iter().all(|&m| !sys.is_isolating(m, 5)));
    assert!(sys.is_isolating(pupil, 5));
}

#[test]
fn pending_agents_are_not_queued_twice() {
    let pop = small_pop();
    let world = Status::all(pop.len(), false);
    let mut sys = TestingSystem::new(pop, params(Capacity::Unlimited, TestingPolicy::FirstCome), 6, 6);
    for cause in [TestCause::Symptoms, TestCause::CtaNotice, TestCause::Classmate] {
        sys.enqueue(9, cause, 0, &world);
    }
    assert_eq!(sys.queue_len(), 1);
}

#[test]
fn app_adopters_are_nested_and_adults_only() {
    let pop = small_pop();
    let eligible = pop.agents.iter().filter(|a| a.age >= 15).count();
    let mut previous = vec![false; pop.len()];
    for frac in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let users = assign_cta(pop, frac, 15, 77);
        assert_eq!(users.iter().filter(|&&u| u).count(), (frac * eligible as f64).round() as usize);
        for (i, &u) in users.iter().enumerate() {
            assert!(!u || pop.agents[i].age >= 15);
            assert!(!previous[i] || u, "adopter {i} dropped at {frac}");
        }
        previous = users;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stock_never_negative_and_priority_never_starves_symptomatic(
        capacity in 0.0f64..0.05,
        days in proptest::collection::vec(proptest::collection::vec((0u32..4000, 0u8..4), 0..60), 1..15),
        priority in any::<bool>(),
    ) {
        let pop = small_pop();
        let world = Status::all(pop.len(), false);
        let policy = if priority { TestingPolicy::PrioritySymptomatic } else { TestingPolicy::FirstCome };
        let mut p = params(Capacity::Weekly(capacity), policy);
        p.ili_weekly_fraction = 0.035;
        let mut sys = TestingSystem::new(pop, p, 7, 7);
        for (day, arrivals) in days.iter().enumerate() {
            let day = day as u32;
            for &(a, c) in arrivals {
                let cause = [TestCause::Symptoms, TestCause::CtaNotice, TestCause::Classmate, TestCause::RelativeNotice][c as usize];
                sys.enqueue(a, cause, day, &world);
            }
            sys.begin_day(day, &world);
            let report = sys.process_testing_day(day, pop, &world);
            prop_assert!(sys.stock >= 0.0);
            prop_assert!(report.tests_used <= report.tests_available);
            if priority {
                prop_assert_eq!(report.starved_symptomatic, 0);
            }
            sys.deliver_results(day + 1, pop, &world);
        }
    }
}
