//! Sample disease courses by age and show branch frequencies and one
//! course day by day.
//!
//! cargo run --release --example disease_course

use ctasim::disease::{sample_course, DiseaseParams, Outcome};
use ctasim::rng::{self, Purpose};
use ctasim::synthpop::{Agent, Sex};

fn main() {
    let params = DiseaseParams::default();
    let n = 50_000;
    println!("age  asymptomatic  mild  severe  fatal  mean onset");
    for age in [10u8, 30, 50, 70, 85] {
        let agent = Agent::new(0, age, Sex::Male, 0);
        let mut r = rng::stream(7, Purpose::Course, age as u64, 0);
        let mut counts = [0usize; 4];
        let mut onset = 0.0;
        for _ in 0..n {
            let c = sample_course(&agent, 0, &params, &mut r);
            counts[c.will_be as usize] += 1;
            onset += c.onset_day() as f64;
        }
        let pct = |o: Outcome| 100.0 * counts[o as usize] as f64 / n as f64;
        println!(
            "{age:>3}  {:11.1}%  {:4.1}%  {:5.1}%  {:4.1}%  {:9.1}",
            pct(Outcome::Asymptomatic),
            pct(Outcome::Mild),
            pct(Outcome::Severe),
            pct(Outcome::Fatal),
            onset / n as f64
        );
    }

    let agent = Agent::new(0, 72, Sex::Female, 0);
    let mut r = rng::stream(11, Purpose::Course, 0, 0);
    let mut course = sample_course(&agent, 0, &params, &mut r);
    println!("\none course for a 72-year-old ({:?}):", course.will_be);
    for day in 1..80 {
        if let Some(t) = course.advance_day(day) {
            println!("  day {day:>2}: {:?} -> {:?} (infectiousness {:.2})", t.from, t.to, course.infectiousness_on(day));
        }
        if course.state.is_absorbing() {
            break;
        }
    }
}
