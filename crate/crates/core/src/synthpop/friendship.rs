use rand::seq::SliceRandom;
use rand::Rng;

use super::{Agent, AgentId, Layer, PopulationSpec};
use crate::rng::{self, Purpose};

const MAX_AGE: usize = 121;

/// Edges added per arriving node. A preferential-attachment graph with `m`
/// edges per node has degree survival `m(m+1) / (k(k+1))`, so the median
/// degree is about `m * sqrt(2)`.
pub fn attachment_edges_for_median(median: usize) -> usize {
    ((median as f64 / std::f64::consts::SQRT_2).round() as usize).max(1)
}

/// Age-assortative preferential attachment over agents at or above
/// `friendship_min_age`.
///
/// Agents arrive in random order. The first `m` connect to everyone already
/// present; later arrivals pick `m` distinct partners with probability
/// proportional to `degree * exp(-(age difference)^2 / (2 sigma^2))`.
/// Sampling is exact: partners are grouped by age, an age is chosen by its
/// kernel-weighted degree mass, then a degree token within that age.
pub fn build_friendship_graph(agents: &[Agent], spec: &PopulationSpec, seed: u64) -> Layer {
    let n = agents.len();
    let mut rng = rng::stream(seed, Purpose::Friendship, 0, 0);
    let mut eligible: Vec<AgentId> = agents
        .iter()
        .filter(|a| a.age >= spec.friendship_min_age)
        .map(|a| a.id)
        .collect();
    if eligible.len() < 2 {
        return Layer::empty(n);
    }
    eligible.shuffle(&mut rng);
    let m = attachment_edges_for_median(spec.friendship_median_degree);
    let sigma = spec.friendship_age_sigma;
    let kernel: Vec<f64> = (0..MAX_AGE)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();

    // tokens[age] holds one entry per edge endpoint of agents of that age
    let mut tokens: Vec<Vec<AgentId>> = vec![Vec::new(); MAX_AGE];
    let mut edges: Vec<(AgentId, AgentId)> = Vec::with_capacity(eligible.len() * m);
    let mut weights = vec![0.0f64; MAX_AGE];
    let mut chosen: Vec<AgentId> = Vec::with_capacity(m);

    for (t, &u) in eligible.iter().enumerate() {
        chosen.clear();
        if t <= m {
            chosen.extend_from_slice(&eligible[..t]);
        } else {
            let age_u = agents[u as usize].age as usize;
            let mut total = 0.0;
            for (age, w) in weights.iter_mut().enumerate() {
                *w = kernel[age.abs_diff(age_u)] * tokens[age].len() as f64;
                total += *w;
            }
            let mut attempts = 0;
            while chosen.len() < m && attempts < 50 * m {
                attempts += 1;
                let mut x = rng.random::<f64>() * total;
                let mut age = 0;
                for (a, w) in weights.iter().enumerate() {
                    if x < *w {
                        age = a;
                        break;
                    }
                    x -= w;
                    age = a;
                }
                let bucket = &tokens[age];
                if bucket.is_empty() {
                    continue;
                }
                let v = bucket[rng.random_range(0..bucket.len())];
                if !chosen.contains(&v) {
                    chosen.push(v);
                }
            }
        }
        for &v in &chosen {
            edges.push((u, v));
            tokens[agents[u as usize].age as usize].push(u);
            tokens[agents[v as usize].age as usize].push(v);
        }
    }
    Layer::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthpop::Sex;

    #[test]
    fn two_eligible_agents_get_one_link() {
        let spec = PopulationSpec::scaled(2000);
        let agents = vec![
            Agent::new(0, 30, Sex::Male, 0),
            Agent::new(1, 8, Sex::Male, 0),
            Agent::new(2, 50, Sex::Female, 0),
        ];
        let l = build_friendship_graph(&agents, &spec, 3);
        assert_eq!(l.edges().collect::<Vec<_>>(), vec![(0, 2)]);
    }

    #[test]
    fn under_age_agents_have_no_friends() {
        let spec = PopulationSpec::scaled(2000);
        let agents: Vec<Agent> = (0..50).map(|i| Agent::new(i, 14, Sex::Male, 0)).collect();
        assert!(build_friendship_graph(&agents, &spec, 3).is_empty());
    }

    #[test]
    fn median_formula() {
        assert_eq!(attachment_edges_for_median(14), 10);
        assert_eq!(attachment_edges_for_median(1), 1);
    }
}
