use ctasim::disease::{sample_course, DiseaseParams, DiseaseState, Outcome};
use ctasim::rng::{self, Purpose};
use ctasim::synthpop::{Agent, Sex};
use proptest::prelude::*;

fn within_3_sigma(hits: usize, n: usize, p: f64) -> bool {
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (hits as f64 / n as f64 - p).abs() <= 3.0 * sigma + 1e-12
}

#[test]
fn branch_frequencies_match_the_tables() {
    let params = DiseaseParams::default();
    let n = 20_000;
    for (age, sex) in [(5u8, Sex::Male), (30, Sex::Female), (45, Sex::Male), (75, Sex::Male), (75, Sex::Female)] {
        let agent = Agent::new(0, age, sex, 0);
        let mut r = rng::stream(21, Purpose::Course, age as u64, sex as u64);
        let outcomes: Vec<Outcome> = (0..n).map(|_| sample_course(&agent, 0, &params, &mut r).will_be).collect();
        let symptomatic = outcomes.iter().filter(|&&o| o != Outcome::Asymptomatic).count();
        let severe = outcomes.iter().filter(|&&o| matches!(o, Outcome::Severe | Outcome::Fatal)).count();
        let fatal = outcomes.iter().filter(|&&o| o == Outcome::Fatal).count();

        let alpha = params.symptomatic_by_age.lookup(age);
        let delta = params.severe_by_age.lookup(age);
        let gamma = params.death_probability(age, sex);
        assert!(within_3_sigma(symptomatic, n, alpha), "age {age}: symptomatic {symptomatic}/{n} vs {alpha}");
        assert!(within_3_sigma(severe, symptomatic, delta), "age {age}: severe {severe}/{symptomatic} vs {delta}");
        if severe > 200 {
            assert!(within_3_sigma(fatal, severe, gamma), "age {age}: fatal {fatal}/{severe} vs {gamma}");
        }
    }
    assert_eq!(params.symptomatic_by_age.lookup(30), 0.55);
    assert_eq!(params.symptomatic_by_age.lookup(5), 0.02);
    assert_eq!(params.death_probability(75, Sex::Male), 0.25);
    assert!((params.death_probability(75, Sex::Female) - 0.20).abs() < 1e-12);
}

#[test]
fn incubation_moments() {
    let params = DiseaseParams::default();
    let agent = Agent::new(0, 40, Sex::Male, 0);
    let mut r = rng::stream(4, Purpose::Course, 0, 0);
    let xs: Vec<f64> = (0..10_000)
        .map(|_| sample_course(&agent, 0, &params, &mut r).incubation_days as f64)
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    // whole days: rounding adds about 1/12 to the variance
    assert!((mean - 5.1).abs() < 0.1, "mean {mean}");
    assert!((var - 5.18).abs() < 0.4, "variance {var}");
}

fn arb_agent() -> impl Strategy<Value = Agent> {
    (0u8..100, any::<bool>()).prop_map(|(age, male)| Agent::new(0, age, if male { Sex::Male } else { Sex::Female }, 0))
}

proptest! {
    // 1,000 cases x 100 courses = 10^5 courses
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn courses_follow_the_progression_diagram(agent in arb_agent(), seed in any::<u64>(), start in 0u32..200) {
        let params = DiseaseParams::default();
        let mut r = rng::stream(seed, Purpose::Course, 0, 0);
        for _ in 0..100 {
            let mut c = sample_course(&agent, start, &params, &mut r);
            prop_assert!(c.infectious_from_day >= start);
            prop_assert!(c.infectious_from_day <= c.onset_day());
            let mut last_asym = f64::INFINITY;
            let mut day = start;
            while !c.state.is_absorbing() {
                day += 1;
                prop_assert!(day < start + 400, "course never ended");
                let before = c.state;
                if let Some(t) = c.advance_day(day) {
                    prop_assert_eq!(t.from, before);
                    prop_assert!(t.from.can_transition_to(t.to), "{:?} -> {:?}", t.from, t.to);
                }
                let inf = c.infectiousness;
                prop_assert!((0.0..=1.0).contains(&inf));
                if day < c.infectious_from_day || matches!(c.state, DiseaseState::Hospitalized | DiseaseState::Recovered | DiseaseState::Dead) {
                    prop_assert_eq!(inf, 0.0);
                }
                if c.will_be == Outcome::Asymptomatic && day >= c.infectious_from_day && !c.state.is_absorbing() {
                    prop_assert!(inf <= last_asym);
                    last_asym = inf;
                }
            }
            let expected = if c.will_be == Outcome::Fatal { DiseaseState::Dead } else { DiseaseState::Recovered };
            prop_assert_eq!(c.state, expected);
            // absorbing states stay put
            prop_assert!(c.advance_day(day + 1).is_none());
            prop_assert_eq!(c.state, expected);
        }
    }
}
