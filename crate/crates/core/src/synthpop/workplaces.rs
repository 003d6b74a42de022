use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{pick_weighted, Agent, AgentId, Employment, PopulationSpec};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkplaceAssignment {
    pub sites: Vec<Vec<AgentId>>,
    /// Cliques of close colleagues, each inside one site.
    pub close_groups: Vec<Vec<AgentId>>,
}

/// Employ working-age agents, flag the public-facing share and partition the
/// workforce into sites whose sizes follow the spec's size histogram.
pub fn assign_workplaces(agents: &mut [Agent], spec: &PopulationSpec, seed: u64) -> WorkplaceAssignment {
    let mut rng = rng::stream(seed, Purpose::Workplaces, 0, 0);
    let mut employed: Vec<AgentId> = Vec::new();
    for a in agents.iter() {
        if (spec.working_age_min..=spec.working_age_max).contains(&a.age)
            && !(spec.school_age_min..=spec.school_age_max).contains(&a.age)
            && rng.random_bool(spec.employment_rate)
        {
            employed.push(a.id);
        }
    }
    employed.shuffle(&mut rng);
    let n_public = (spec.public_facing_fraction * employed.len() as f64).round() as usize;
    for (i, &id) in employed.iter().enumerate() {
        agents[id as usize].employment = if i < n_public {
            Employment::PublicFacing
        } else {
            Employment::Office
        };
    }
    // public-facing workers are not clustered at the front of any site
    employed.shuffle(&mut rng);

    let weights: Vec<f64> = spec.workplace_size_distribution.iter().map(|b| b.weight).collect();
    let mut out = WorkplaceAssignment::default();
    let mut rest = employed.as_slice();
    while !rest.is_empty() {
        let band = spec.workplace_size_distribution[pick_weighted(&weights, &mut rng)];
        let size = rng.random_range(band.min..=band.max).min(rest.len());
        let (site, tail) = rest.split_at(size);
        rest = tail;
        let site_id = out.sites.len() as u32;
        for &m in site {
            agents[m as usize].workplace_or_class = Some(site_id);
        }
        let g = spec.close_colleague_group_size;
        let mut groups: Vec<Vec<AgentId>> = site.chunks(g).map(<[AgentId]>::to_vec).collect();
        if groups.len() > 1 && groups.last().is_some_and(|l| l.len() == 1) {
            let last = groups.pop().unwrap();
            groups.last_mut().unwrap().extend(last);
        }
        out.close_groups.extend(groups.into_iter().filter(|g| g.len() > 1));
        out.sites.push(site.to_vec());
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassAssignment {
    pub classes: Vec<Vec<AgentId>>,
}

/// Place every school-age agent in a class of same-age pupils from the same
/// zone, splitting each cohort into the fewest classes within the size cap.
pub fn assign_classes(agents: &mut [Agent], spec: &PopulationSpec, seed: u64) -> ClassAssignment {
    let mut rng = rng::stream(seed, Purpose::Schools, 0, 0);
    let mut cohorts: BTreeMap<(u32, u8), Vec<AgentId>> = BTreeMap::new();
    for a in agents.iter() {
        if (spec.school_age_min..=spec.school_age_max).contains(&a.age) {
            cohorts.entry((a.zone, a.age)).or_default().push(a.id);
        }
    }
    let mut out = ClassAssignment::default();
    for (_, mut pupils) in cohorts {
        pupils.shuffle(&mut rng);
        let n_classes = pupils.len().div_ceil(spec.class_max_size);
        let base = pupils.len() / n_classes;
        let extra = pupils.len() % n_classes;
        let mut rest = pupils.as_slice();
        for c in 0..n_classes {
            let (class, tail) = rest.split_at(base + usize::from(c < extra));
            rest = tail;
            let class_id = out.classes.len() as u32;
            for &p in class {
                let a = &mut agents[p as usize];
                a.employment = Employment::Pupil;
                a.workplace_or_class = Some(class_id);
            }
            let mut class = class.to_vec();
            class.sort_unstable();
            out.classes.push(class);
        }
    }
    out
}
