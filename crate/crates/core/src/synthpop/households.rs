use rand::seq::SliceRandom;
use rand::Rng;

use super::{pick_weighted, Agent, AgentId, PopulationSpec};
use crate::rng::{self, Purpose, SimRng};

const ADULT_AGE: u8 = 20;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HouseholdAssignment {
    /// Members per household; index is the household id.
    pub households: Vec<Vec<AgentId>>,
    pub warnings: Vec<String>,
}

/// Adults waiting for a household, bucketed by age.
struct AdultPool {
    by_age: Vec<Vec<AgentId>>,
    ages: Vec<u8>,
}

impl AdultPool {
    fn take_in_range(&mut self, lo: u8, hi: u8, rng: &mut SimRng) -> Option<AgentId> {
        let lo = lo as usize;
        let hi = (hi as usize).min(self.by_age.len() - 1);
        if lo > hi {
            return None;
        }
        let total: usize = self.by_age[lo..=hi].iter().map(Vec::len).sum();
        if total == 0 {
            return None;
        }
        let mut k = rng.random_range(0..total);
        for age in lo..=hi {
            let bucket = &mut self.by_age[age];
            if k < bucket.len() {
                return Some(bucket.swap_remove(k));
            }
            k -= bucket.len();
        }
        unreachable!()
    }

    fn drain_sorted(&mut self) -> Vec<AgentId> {
        let mut out = Vec::new();
        for bucket in &mut self.by_age {
            bucket.sort_unstable();
            out.append(bucket);
        }
        out
    }

    fn age(&self, id: AgentId) -> u8 {
        self.ages[id as usize]
    }
}

/// Group agents into households zone by zone.
///
/// Agents under 20 are grouped into sibling sets (sizes drawn from the zone's
/// `children_per_family` weights) and placed with one or two adults whose age
/// exceeds the oldest child's by the parent age gap. Remaining adults live
/// alone, except a `cohabitation_fraction_over20` share paired by age.
/// A zone whose minors cannot find any adult keeps the minors together and
/// records a warning.
pub fn build_households(agents: &mut [Agent], spec: &PopulationSpec, seed: u64) -> HouseholdAssignment {
    let mut out = HouseholdAssignment::default();
    let ages: Vec<u8> = agents.iter().map(|a| a.age).collect();
    let mut by_zone: Vec<Vec<AgentId>> = vec![Vec::new(); spec.zones.len()];
    for a in agents.iter() {
        by_zone[a.zone as usize].push(a.id);
    }

    for (zi, members) in by_zone.iter().enumerate() {
        let mix = &spec.zones[zi].households;
        let mut rng = rng::stream(seed, Purpose::Households, zi as u64, 0);
        let mut minors: Vec<AgentId> = members.iter().copied().filter(|&id| ages[id as usize] < ADULT_AGE).collect();
        minors.shuffle(&mut rng);
        let mut pool = AdultPool {
            by_age: vec![Vec::new(); 121],
            ages: ages.clone(),
        };
        for &id in members.iter().filter(|&&id| ages[id as usize] >= ADULT_AGE) {
            pool.by_age[ages[id as usize] as usize].push(id);
        }

        let mut orphaned = 0usize;
        let mut rest = minors.as_slice();
        while !rest.is_empty() {
            let k = (pick_weighted(&mix.children_per_family, &mut rng) + 1).min(rest.len());
            let (children, tail) = rest.split_at(k);
            rest = tail;
            let oldest = children.iter().map(|&c| ages[c as usize]).max().unwrap();
            let lo = oldest.saturating_add(spec.parent_age_gap_min).max(ADULT_AGE);
            let hi = oldest.saturating_add(spec.parent_age_gap_max);
            let parent = pool
                .take_in_range(lo, hi, &mut rng)
                .or_else(|| pool.take_in_range(oldest.saturating_add(16).max(ADULT_AGE), 120, &mut rng))
                .or_else(|| pool.take_in_range(ADULT_AGE, 120, &mut rng));
            let mut household = children.to_vec();
            match parent {
                Some(p) => {
                    household.push(p);
                    if !rng.random_bool(mix.lone_parent_share) {
                        let pa = pool.age(p);
                        if let Some(q) = pool.take_in_range(pa.saturating_sub(5).max(ADULT_AGE), pa.saturating_add(5), &mut rng) {
                            household.push(q);
                        }
                    }
                }
                None => orphaned += children.len(),
            }
            out.households.push(household);
        }
        if orphaned > 0 {
            let msg = format!(
                "zone {}: {orphaned} minors had no adult to live with and were housed together",
                spec.zones[zi].id
            );
            log::warn!("{msg}");
            out.warnings.push(msg);
        }

        let adults = pool.drain_sorted();
        let mut cohabiting = Vec::new();
        for id in adults {
            if rng.random_bool(spec.cohabitation_fraction_over20) {
                cohabiting.push(id);
            } else {
                out.households.push(vec![id]);
            }
        }
        // drain_sorted is age-ordered, so consecutive pairs have similar ages
        for pair in cohabiting.chunks(2) {
            out.households.push(pair.to_vec());
        }
    }

    for (h, members) in out.households.iter_mut().enumerate() {
        members.sort_unstable();
        for &m in members.iter() {
            agents[m as usize].household = h as u32;
        }
    }
    out
}
