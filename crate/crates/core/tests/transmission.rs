mod common;

use ctasim::contacts::{ContactLayer, ContactPolicy};
use ctasim::disease::{DiseaseParams, DiseaseState};
use ctasim::mitigation::MitigationParams;
use ctasim::synthpop::AgentId;
use ctasim::transmission::{seed_epidemic, step_day, World};
use proptest::prelude::*;

use common::{household_only, small_pop};

fn world(policy: ContactPolicy, disease: DiseaseParams, mitigation: MitigationParams, seed: u64) -> World<'static> {
    World::new(small_pop(), policy, disease, mitigation, seed, seed)
}

/// Infect `agent` and make it fully infectious today.
fn make_infectious(w: &mut World, agent: AgentId) {
    w.infect(agent, 0, None);
    let c = w.courses[agent as usize].as_mut().unwrap();
    c.infectiousness = 1.0;
}

#[test]
fn household_transmission_is_a_bernoulli_trial() {
    let pop = small_pop();
    // two-adult households: one source, one target per household
    let pairs: Vec<(AgentId, AgentId)> = pop
        .households
        .iter()
        .filter(|h| h.len() == 2 && h.iter().all(|&a| pop.agents[a as usize].age >= 16))
        .map(|h| (h[0], h[1]))
        .collect();
    assert!(pairs.len() > 100);
    let disease = DiseaseParams {
        beta_c: 0.056,
        beta_household: None,
        ..DiseaseParams::default()
    };
    let mut trials = 0usize;
    let mut hits = 0usize;
    let mut seed = 0;
    while trials < 10_000 {
        seed += 1;
        let mut w = world(household_only(), disease.clone(), MitigationParams::default(), seed);
        for &(s, _) in &pairs {
            make_infectious(&mut w, s);
        }
        let ledger = step_day(&mut w, 0);
        assert!(ledger.new_infections.iter().all(|&(_, _, l)| l == ContactLayer::Household));
        trials += pairs.len();
        hits += pairs.iter().filter(|&&(_, t)| w.states[t as usize] != DiseaseState::Susceptible).count();
    }
    let p = 0.056;
    let rate = hits as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((rate - p).abs() < 3.0 * sigma, "rate {rate} over {trials} trials");
}

#[test]
fn children_are_half_as_susceptible() {
    let pop = small_pop();
    let pairs: Vec<(AgentId, AgentId)> = pop
        .households
        .iter()
        .filter_map(|h| {
            let adult = h.iter().copied().find(|&a| pop.agents[a as usize].age >= 16)?;
            let child = h.iter().copied().find(|&a| pop.agents[a as usize].age < 16)?;
            Some((adult, child))
        })
        .collect();
    let disease = DiseaseParams {
        beta_c: 0.2,
        ..DiseaseParams::default()
    };
    let (mut trials, mut hits) = (0usize, 0usize);
    for seed in 0..20 {
        let mut w = world(household_only(), disease.clone(), MitigationParams::default(), seed);
        for &(s, _) in &pairs {
            make_infectious(&mut w, s);
        }
        // other household members may also be hit; only count the chosen child
        step_day(&mut w, 0);
        trials += pairs.len();
        hits += pairs.iter().filter(|&&(_, t)| w.states[t as usize] != DiseaseState::Susceptible).count();
    }
    let p = 0.1;
    let rate = hits as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((rate - p).abs() < 3.0 * sigma, "rate {rate} over {trials} trials");
}

#[test]
fn app_users_log_contacts_without_any_infection() {
    let mitigation = MitigationParams {
        cta_adoption: 1.0,
        ..MitigationParams::default()
    };
    let mut w = world(ContactPolicy::business_as_usual(), DiseaseParams::default(), mitigation, 4);
    let ledger = step_day(&mut w, 0);
    assert!(ledger.new_infections.is_empty());
    assert!(!ledger.cta_pairs_recorded.is_empty());
    for &(a, b) in &ledger.cta_pairs_recorded {
        assert!(w.testing.has_cta[a as usize] && w.testing.has_cta[b as usize]);
        assert!(w.testing.cta_logs.contacts(a).contains(&b));
        assert!(w.testing.cta_logs.contacts(b).contains(&a));
    }

    w.cta_enabled = false;
    assert!(step_day(&mut w, 1).cta_pairs_recorded.is_empty());
}

#[test]
fn zero_beta_never_transmits() {
    let disease = DiseaseParams {
        beta_c: 0.0,
        beta_household: Some(0.0),
        beta_r: Some(0.0),
        ..DiseaseParams::default()
    };
    let mut w = world(ContactPolicy::business_as_usual(), disease, MitigationParams::default(), 5);
    for a in (0..small_pop().len() as AgentId).step_by(10) {
        make_infectious(&mut w, a);
    }
    let ledger = step_day(&mut w, 0);
    assert!(ledger.contacts_evaluated > 0);
    assert!(ledger.new_infections.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn each_target_is_infected_at_most_once_per_day(seed in 0u64..10_000, n in 50usize..400) {
        let disease = DiseaseParams { beta_c: 0.5, ..DiseaseParams::default() };
        let mut w = world(ContactPolicy::business_as_usual(), disease, MitigationParams::default(), seed);
        seed_epidemic(&mut w, n, 0.0, seed).unwrap();
        for &a in &w.active.clone() {
            w.courses[a as usize].as_mut().unwrap().infectiousness = 1.0;
        }
        let before = w.infections.len();
        let ledger = step_day(&mut w, 0);
        let mut targets: Vec<AgentId> = ledger.new_infections.iter().map(|&(_, t, _)| t).collect();
        let k = targets.len();
        targets.sort_unstable();
        targets.dedup();
        prop_assert_eq!(targets.len(), k);
        prop_assert_eq!(w.infections.len(), before + k);
        prop_assert_eq!(ledger.infections_by_layer.iter().sum::<u64>() as usize, k);
        prop_assert!(w.is_conserved());
        for &(s, t, _) in &ledger.new_infections {
            prop_assert!(w.states[s as usize].is_active());
            prop_assert_eq!(w.states[t as usize], DiseaseState::Incubating);
        }
    }
}
