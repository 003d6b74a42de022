//! Agent-based simulation of COVID-19 spread over a multi-layer synthetic
//! social network, with testing capacity, testing-queue policy, isolation
//! compliance and contact-tracing-app (CTA) adoption as scenario levers.
//!
//! The crate is organised bottom-up:
//!
//! * [`synthpop`] builds a seeded population (households, workplaces, school
//!   classes, relatives, friendship graph) and its [`SocialNetwork`].
//! * [`contacts`] turns the network into daily contact events.
//! * [`disease`] samples and advances per-agent disease courses.
//! * [`transmission`] runs one simulated day of contacts and infections.
//! * [`mitigation`] handles the testing stock, isolation decisions and CTA
//!   notification cascades.
//! * [`engine`] orchestrates whole runs, metrics, R0 estimation and sweeps.
//! * [`experiments`] holds the calibration, experiment-grid and sensitivity
//!   drivers used by the `ctasim` binary.

pub mod config;
pub mod contacts;
pub mod disease;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod mitigation;
pub mod output;
pub mod rng;
pub mod stats;
pub mod synthpop;
pub mod transmission;

pub use contacts::{ContactEvent, ContactLayer, ContactPolicy};
pub use disease::{DiseaseCourse, DiseaseParams, DiseaseState};
pub use engine::{RunResult, ScenarioConfig};
pub use error::{Error, Result};
pub use synthpop::{Agent, AgentId, Population, PopulationSpec, SocialNetwork};
