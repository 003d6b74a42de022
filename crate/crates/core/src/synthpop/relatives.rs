use rand::Rng;

use super::{Agent, AgentId, Layer, PopulationSpec};
use crate::rng::{self, Purpose};

/// Link each household to at most one household of the parents' generation.
///
/// A household whose eldest member is aged `a` is matched with a random
/// household whose eldest member is aged within
/// `[a + relative_generation_gap_min, a + relative_generation_gap_max]`.
/// Every member of one household is linked to every member of the other;
/// links never join members of the same household.
pub fn link_relatives(agents: &[Agent], spec: &PopulationSpec, seed: u64) -> Layer {
    let n_households = agents.iter().map(|a| a.household as usize + 1).max().unwrap_or(0);
    let mut members: Vec<Vec<AgentId>> = vec![Vec::new(); n_households];
    for a in agents {
        members[a.household as usize].push(a.id);
    }
    let head_age: Vec<u8> = members
        .iter()
        .map(|m| m.iter().map(|&i| agents[i as usize].age).max().unwrap_or(0))
        .collect();
    let mut by_head_age: Vec<Vec<u32>> = vec![Vec::new(); 256];
    for (h, m) in members.iter().enumerate() {
        if !m.is_empty() {
            by_head_age[head_age[h] as usize].push(h as u32);
        }
    }

    let mut rng = rng::stream(seed, Purpose::Relatives, 0, 0);
    let mut edges = Vec::new();
    for (h, m) in members.iter().enumerate() {
        if m.is_empty() || head_age[h] < 20 {
            continue;
        }
        let lo = head_age[h] as usize + spec.relative_generation_gap_min as usize;
        let hi = (head_age[h] as usize + spec.relative_generation_gap_max as usize).min(255);
        if lo > hi {
            continue;
        }
        let total: usize = by_head_age[lo..=hi].iter().map(Vec::len).sum();
        if total == 0 {
            continue;
        }
        let mut k = rng.random_range(0..total);
        let mut target = None;
        for bucket in &by_head_age[lo..=hi] {
            if k < bucket.len() {
                target = Some(bucket[k]);
                break;
            }
            k -= bucket.len();
        }
        let g = target.expect("index within total") as usize;
        for &a in m {
            for &b in &members[g] {
                edges.push((a, b));
            }
        }
    }
    Layer::from_edges(agents.len(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthpop::Sex;

    fn agent(id: AgentId, age: u8, household: u32) -> Agent {
        let mut a = Agent::new(id, age, Sex::Female, 0);
        a.household = household;
        a
    }

    #[test]
    fn family_links_to_grandparents() {
        let spec = PopulationSpec::scaled(2000);
        let agents = vec![
            agent(0, 35, 0),
            agent(1, 37, 0),
            agent(2, 6, 0),
            agent(3, 66, 1),
            agent(4, 30, 2),
        ];
        let l = link_relatives(&agents, &spec, 1);
        for m in [0, 1, 2] {
            assert_eq!(l.neighbors(m), &[3]);
        }
        assert!(l.is_symmetric());
    }

    #[test]
    fn single_household_has_no_relatives() {
        let spec = PopulationSpec::scaled(2000);
        let agents = vec![agent(0, 35, 0), agent(1, 70, 0)];
        assert!(link_relatives(&agents, &spec, 1).is_empty());
    }
}
