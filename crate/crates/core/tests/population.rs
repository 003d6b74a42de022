mod common;

use std::collections::BTreeMap;

use ctasim::synthpop::{generate_population, AgeBand, Employment, PopulationSpec, ZoneSpec};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::full_pop;

/// Upper-tail p-value of Pearson's statistic for `observed` against
/// probabilities `expected_p`.
fn chi_square_p(observed: &[f64], expected_p: &[f64]) -> f64 {
    let n: f64 = observed.iter().sum();
    let total_p: f64 = expected_p.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(expected_p)
        .map(|(o, p)| {
            let e = n * p / total_p;
            (o - e) * (o - e) / e
        })
        .sum();
    let df = (observed.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

#[test]
fn default_population_shape() {
    let pop = full_pop();
    assert_eq!(pop.len(), 103_000);
    assert_eq!(pop.zone_residents.len(), 93);
    assert!(pop.warnings.is_empty(), "{:?}", pop.warnings);

    let workers = pop.agents.iter().filter(|a| a.employment.is_worker()).count();
    let public = pop.agents.iter().filter(|a| a.employment == Employment::PublicFacing).count();
    let share = public as f64 / workers as f64;
    assert!((share - 0.13).abs() < 0.002, "public-facing share {share}");
    assert!(pop.agents.iter().all(|a| !a.has_cta));
}

#[test]
fn every_layer_is_symmetric_and_loop_free() {
    let pop = full_pop();
    let net = &pop.network;
    for (name, layer) in [
        ("household", &net.household),
        ("relatives", &net.relatives),
        ("close_colleagues", &net.close_colleagues),
        ("classmates", &net.classmates),
        ("friendship", &net.friendship),
    ] {
        for a in 0..pop.len() as u32 {
            for &b in layer.neighbors(a) {
                assert_ne!(a, b, "{name} self loop at {a}");
                assert!(layer.neighbors(b).contains(&a), "{name}: {a}->{b} not mirrored");
            }
        }
    }
}

#[test]
fn pupils_and_classes() {
    let pop = full_pop();
    for a in &pop.agents {
        if (6..=17).contains(&a.age) {
            assert_eq!(a.employment, Employment::Pupil, "agent {}", a.id);
            assert!(a.workplace_or_class.is_some());
        }
    }
    for class in &pop.classes {
        assert!(class.len() <= 30);
        let first = &pop.agents[class[0] as usize];
        for &m in class {
            let a = &pop.agents[m as usize];
            assert_eq!((a.zone, a.age), (first.zone, first.age));
        }
    }
}

#[test]
fn relatives_live_elsewhere_and_a_generation_apart() {
    let pop = full_pop();
    let mut gaps = Vec::new();
    for a in &pop.agents {
        for &r in pop.network.relatives.neighbors(a.id) {
            assert_ne!(a.household, pop.agents[r as usize].household);
        }
    }
    // families with children against the oldest member of their linked household
    for h in &pop.households {
        if !h.iter().any(|&m| pop.agents[m as usize].age < 18) {
            continue;
        }
        let oldest_here = h.iter().map(|&m| pop.agents[m as usize].age).max().unwrap();
        let linked = h.iter().flat_map(|&m| pop.network.relatives.neighbors(m)).map(|&r| pop.agents[r as usize].age).max();
        if let Some(oldest_there) = linked {
            gaps.push(oldest_there as f64 - oldest_here as f64);
        }
    }
    assert!(gaps.len() > 1000);
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(mean > 15.0, "mean generation gap {mean}");
}

#[test]
fn friendship_degree_and_age_assortativity() {
    let pop = full_pop();
    let eligible: Vec<u32> = pop.agents.iter().filter(|a| a.age >= 15).map(|a| a.id).collect();
    let mut degrees: Vec<usize> = eligible.iter().map(|&a| pop.network.friendship.neighbors(a).len()).collect();
    assert!(pop.agents.iter().filter(|a| a.age < 15).all(|a| pop.network.friendship.neighbors(a.id).is_empty()));
    degrees.sort_unstable();
    let median = degrees[degrees.len() / 2];
    assert!((12..=16).contains(&median), "median degree {median}");
    // heavy tail: the top 1% hold far more ties than the median agent
    let p99 = degrees[degrees.len() * 99 / 100];
    assert!(p99 >= 4 * median, "p99 {p99} vs median {median}");

    let age = |i: u32| pop.agents[i as usize].age as f64;
    let (mut sum, mut n) = (0.0, 0usize);
    for &a in &eligible {
        for &b in pop.network.friendship.neighbors(a) {
            sum += (age(a) - age(b)).abs();
            n += 1;
        }
    }
    let friends_gap = sum / n as f64;
    let mut rng = ctasim::rng::stream(5, ctasim::rng::Purpose::Report, 0, 0);
    let random_gap = (0..200_000)
        .map(|_| {
            let a = eligible[rng.random_range(0..eligible.len())];
            let b = eligible[rng.random_range(0..eligible.len())];
            (age(a) - age(b)).abs()
        })
        .sum::<f64>()
        / 200_000.0;
    assert!(friends_gap < random_gap - 3.0, "friends {friends_gap:.1} vs random {random_gap:.1}");
}

#[test]
fn family_sizes_follow_the_children_per_family_weights() {
    let pop = full_pop();
    let spec = PopulationSpec::default_city();
    let weights = &spec.zones[0].households.children_per_family;
    let mut observed = vec![0.0; weights.len()];
    for h in &pop.households {
        let kids = h.iter().filter(|&&m| pop.agents[m as usize].age < 20).count();
        if kids > 0 {
            observed[kids - 1] += 1.0;
        }
    }
    let p = chi_square_p(&observed, weights);
    assert!(p > 0.01, "children-per-family chi-square p = {p}, observed {observed:?}");
}

#[test]
fn workplace_sizes_follow_the_size_histogram() {
    let pop = full_pop();
    let spec = PopulationSpec::default_city();
    let bands = &spec.workplace_size_distribution;
    let mut observed = vec![0.0; bands.len()];
    // the last site absorbs the remainder and may be truncated
    for site in &pop.network.sites[..pop.network.sites.len() - 1] {
        let b = bands.iter().position(|b| (b.min..=b.max).contains(&site.len())).unwrap();
        observed[b] += 1.0;
    }
    let weights: Vec<f64> = bands.iter().map(|b| b.weight).collect();
    let p = chi_square_p(&observed, &weights);
    assert!(p > 0.01, "workplace chi-square p = {p}, observed {observed:?}");
    let employed = pop.agents.iter().filter(|a| a.employment.is_worker()).count();
    let placed: usize = pop.network.sites.iter().map(Vec::len).sum();
    assert_eq!(employed, placed);
}

#[test]
fn generation_is_deterministic() {
    let spec = PopulationSpec::scaled(3000);
    let export = |seed| {
        let pop = generate_population(&spec, seed).unwrap();
        let mut buf = Vec::new();
        pop.network.write_edge_list(&mut buf).unwrap();
        ctasim::output::write_agents_csv(&pop, &mut buf).unwrap();
        buf
    };
    assert_eq!(export(9), export(9));
    assert_ne!(export(9), export(10));
}

#[test]
fn zone_of_five_year_olds() {
    let mut spec = PopulationSpec::with_zone_sizes(vec![200]);
    spec.zones = vec![ZoneSpec {
        residents: 200,
        age_distribution: vec![AgeBand { min: 5, max: 5, weight: 1.0 }],
        ..ZoneSpec::default()
    }];
    let pop = generate_population(&spec, 1).unwrap();
    assert_eq!(pop.network.friendship.edges().count(), 0);
    assert!(pop.network.sites.is_empty());
    assert!(pop.classes.iter().all(|c| c.len() <= 30));
    // no adults at all: the minors are housed together with a warning
    assert!(!pop.warnings.is_empty());
}

#[test]
fn invalid_spec_names_the_field() {
    let mut spec = PopulationSpec::scaled(2000);
    spec.public_facing_fraction = 1.5;
    let err = generate_population(&spec, 1).unwrap_err().to_string();
    assert!(err.contains("public_facing_fraction"), "{err}");
}

#[test]
fn household_size_histogram_is_plausible() {
    let pop = full_pop();
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for h in &pop.households {
        *sizes.entry(h.len()).or_default() += 1;
    }
    let mean = pop.len() as f64 / pop.households.len() as f64;
    assert!((1.9..2.3).contains(&mean), "mean household size {mean}");
    let single = sizes[&1] as f64 / pop.households.len() as f64;
    assert!((0.25..0.45).contains(&single), "single-person share {single}");
}
