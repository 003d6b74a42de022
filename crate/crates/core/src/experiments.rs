//! Calibration of the network transmission probability, the full
//! mitigation experiment grid and the transmission sensitivity sweeps.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Metadata, RunConfig};
use crate::engine::{sweep, ScenarioConfig, ScenarioSummary};
use crate::error::{Error, Result};
use crate::mitigation::{Capacity, TestingPolicy};
use crate::output;
use crate::rng;
use crate::stats;
use crate::synthpop::Population;

pub const CTA_LEVELS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];
pub const CAPACITIES: [Capacity; 7] = [
    Capacity::Weekly(0.0),
    Capacity::Weekly(0.005),
    Capacity::Weekly(0.01),
    Capacity::Weekly(0.015),
    Capacity::Weekly(0.03),
    Capacity::Weekly(0.06),
    Capacity::Unlimited,
];
pub const COMPLIANCE_LEVELS: [f64; 2] = [0.5, 0.9];
pub const POLICIES: [TestingPolicy; 2] = [TestingPolicy::PrioritySymptomatic, TestingPolicy::FirstCome];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub beta_c: f64,
    pub mean_r0: f64,
    pub sd_r0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub target_r0: f64,
    pub rows: Vec<CalibrationRow>,
    pub best_beta_c: f64,
    pub warning: Option<String>,
}

impl CalibrationReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["beta_c", "mean_r0", "sd_r0"])?;
        for r in &self.rows {
            w.write_record([r.beta_c.to_string(), r.mean_r0.to_string(), r.sd_r0.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<calibration>", e))?;
        Ok(())
    }
}

/// Estimate R0 for every `beta_c` in `grid` and pick the closest to `target`.
pub fn calibrate(
    pop: &Population,
    template: &ScenarioConfig,
    target_r0: f64,
    grid: &[f64],
    replicates: u64,
    seed: u64,
    workers: usize,
) -> Result<CalibrationReport> {
    if grid.is_empty() {
        return Err(Error::config("beta_grid", "empty grid"));
    }
    let scenarios: Vec<ScenarioConfig> = grid
        .iter()
        .map(|&b| {
            let mut c = template.clone();
            c.disease.beta_c = b;
            c.name = format!("beta_c={b}");
            c
        })
        .collect();
    let rows: Vec<CalibrationRow> = sweep(pop, &scenarios, replicates, seed, workers)?
        .iter()
        .zip(grid)
        .map(|(s, &beta_c)| {
            let r0 = s.r0();
            CalibrationRow {
                beta_c,
                mean_r0: if r0.is_empty() { f64::NAN } else { stats::mean(&r0) },
                sd_r0: if r0.len() < 2 { 0.0 } else { stats::std_dev(&r0) },
            }
        })
        .collect();
    let best = rows
        .iter()
        .filter(|r| r.mean_r0.is_finite())
        .min_by(|a, b| (a.mean_r0 - target_r0).abs().total_cmp(&(b.mean_r0 - target_r0).abs()))
        .ok_or_else(|| Error::Undefined("R0", "no grid point produced an estimate".into()))?;
    let lo = rows.iter().map(|r| r.mean_r0).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.mean_r0).fold(f64::NEG_INFINITY, f64::max);
    let warning = (target_r0 < lo || target_r0 > hi).then(|| {
        let w = format!("target R0 {target_r0} outside the grid's range [{lo:.2}, {hi:.2}]");
        log::warn!("{w}");
        w
    });
    Ok(CalibrationReport {
        target_r0,
        best_beta_c: best.beta_c,
        rows,
        warning,
    })
}

/// Restrict the grid to some CTA levels or capacities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridFilter {
    pub cta: Option<Vec<f64>>,
    pub capacity: Option<Vec<Capacity>>,
    pub compliance: Option<Vec<f64>>,
    pub policy: Option<Vec<TestingPolicy>>,
}

fn keep<T: PartialEq>(filter: &Option<Vec<T>>, x: &T) -> bool {
    filter.as_ref().is_none_or(|v| v.contains(x))
}

pub fn scenario_name(cta: f64, capacity: Capacity, compliance: f64, policy: TestingPolicy) -> String {
    format!("cta{cta}_cap{capacity}_omega{compliance}_{policy}")
}

/// A single cell of the mitigation grid built on `template`.
pub fn grid_cell(
    template: &ScenarioConfig,
    cta: f64,
    capacity: Capacity,
    compliance: f64,
    policy: TestingPolicy,
) -> ScenarioConfig {
    let mut c = template.clone();
    c.mitigation.cta_adoption = cta;
    c.mitigation.capacity = capacity;
    c.mitigation.compliance = compliance;
    c.mitigation.policy = policy;
    c.name = scenario_name(cta, capacity, compliance, policy);
    c
}

/// The 5 × 7 × 2 × 2 mitigation grid, minus whatever `filter` excludes.
pub fn mitigation_grid(template: &ScenarioConfig, filter: &GridFilter) -> Vec<ScenarioConfig> {
    let mut out = Vec::new();
    for cta in CTA_LEVELS {
        for cap in CAPACITIES {
            for omega in COMPLIANCE_LEVELS {
                for policy in POLICIES {
                    if keep(&filter.cta, &cta)
                        && keep(&filter.capacity, &cap)
                        && keep(&filter.compliance, &omega)
                        && keep(&filter.policy, &policy)
                    {
                        out.push(grid_cell(template, cta, cap, omega, policy));
                    }
                }
            }
        }
    }
    out
}

/// The distancing scenario without tests or app, against which peak
/// reductions are measured.
pub fn reference_scenario(template: &ScenarioConfig) -> ScenarioConfig {
    let mut c = template.clone();
    c.mitigation.cta_adoption = 0.0;
    c.mitigation.capacity = Capacity::Weekly(0.0);
    c.name = "reference".into();
    c
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub reference: ScenarioSummary,
    pub rows: Vec<ScenarioSummary>,
}

impl SweepOutput {
    pub fn reference_peak(&self) -> Option<f64> {
        (!self.reference.replicates.is_empty()).then(|| self.reference.peak_quartiles().median)
    }

    /// `summary.csv`, `replicates.csv`, `timeseries/<scenario>.csv` and a
    /// metadata sidecar under `dir`.
    pub fn write(&self, dir: &Path, command: &str, config: &RunConfig) -> Result<()> {
        let seeds = (0..config.replicates).map(|i| rng::replicate_seed(config.seed, i)).collect();
        let meta = Metadata::new(command, config, seeds);
        let mut all = vec![self.reference.clone()];
        all.extend(self.rows.iter().cloned());
        let summary = dir.join("summary.csv");
        output::write_summary_csv(&all, self.reference_peak(), output::create(&summary)?)?;
        meta.write_for(&summary)?;
        let replicates = dir.join("replicates.csv");
        output::write_replicates_csv(&all, output::create(&replicates)?)?;
        meta.write_for(&replicates)?;
        for row in &all {
            let path = dir.join("timeseries").join(format!("{}.csv", row.config.name));
            output::write_prevalence_csv(row, output::create(&path)?)?;
            meta.write_for(&path)?;
        }
        Ok(())
    }
}

/// Run the (filtered) grid plus the reference scenario.
pub fn sweep_grid(
    pop: &Population,
    config: &RunConfig,
    filter: &GridFilter,
    workers: usize,
) -> Result<SweepOutput> {
    let mut grid = vec![reference_scenario(&config.scenario)];
    grid.extend(mitigation_grid(&config.scenario, filter));
    let mut rows = sweep(pop, &grid, config.replicates, config.seed, workers)?;
    let reference = rows.remove(0);
    Ok(SweepOutput { reference, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityParam {
    BetaC,
    /// Share of the zone met at random per day.
    P,
    BetaR,
    /// Upper bound on friends met per encounter, as a fraction of ties.
    FriendsFraction,
}

impl SensitivityParam {
    pub const ALL: [SensitivityParam; 4] = [
        SensitivityParam::BetaC,
        SensitivityParam::P,
        SensitivityParam::BetaR,
        SensitivityParam::FriendsFraction,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "beta_c" => Ok(SensitivityParam::BetaC),
            "p" => Ok(SensitivityParam::P),
            "beta_r" => Ok(SensitivityParam::BetaR),
            "friends_fraction" | "f" => Ok(SensitivityParam::FriendsFraction),
            _ => Err(Error::config("parameter", format!("unknown sensitivity parameter `{s}`"))),
        }
    }

    /// Tested range around the distancing defaults (0.056, 0.7%, 0.0056, 10%).
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SensitivityParam::BetaC => vec![0.028, 0.042, 0.056, 0.070, 0.084],
            SensitivityParam::P => vec![0.0035, 0.007, 0.0105, 0.014],
            SensitivityParam::BetaR => vec![0.0028, 0.0056, 0.0084, 0.0112],
            SensitivityParam::FriendsFraction => vec![0.05, 0.10, 0.15, 0.20],
        }
    }

    pub fn apply(self, config: &mut ScenarioConfig, value: f64) -> Result<()> {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::config(self.to_string(), format!("{value} not in (0, 1)")));
        }
        match self {
            SensitivityParam::BetaC => config.disease.beta_c = value,
            SensitivityParam::P => config.contacts.random_fraction = value,
            SensitivityParam::BetaR => config.disease.beta_r = Some(value),
            SensitivityParam::FriendsFraction => config.contacts.friend_fraction_cap = value,
        }
        Ok(())
    }
}

impl fmt::Display for SensitivityParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensitivityParam::BetaC => "beta_c",
            SensitivityParam::P => "p",
            SensitivityParam::BetaR => "beta_r",
            SensitivityParam::FriendsFraction => "friends_fraction",
        })
    }
}

pub const SENSITIVITY_CAPACITIES: [Capacity; 2] = [Capacity::Weekly(0.015), Capacity::Unlimited];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub parameter: SensitivityParam,
    pub value: f64,
    pub capacity: Capacity,
    pub cta_adoption: f64,
    pub total_infected: Vec<f64>,
}

impl SensitivityRow {
    pub fn median(&self) -> f64 {
        stats::median(&self.total_infected)
    }
}

/// Total infected for every value × capacity × adoption level under the
/// priority policy.
pub fn sensitivity_sweep(
    pop: &Population,
    template: &ScenarioConfig,
    parameter: SensitivityParam,
    values: &[f64],
    replicates: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<SensitivityRow>> {
    let mut grid = Vec::new();
    let mut keys = Vec::new();
    for &v in values {
        let mut base = template.clone();
        parameter.apply(&mut base, v)?;
        for cap in SENSITIVITY_CAPACITIES {
            for cta in CTA_LEVELS {
                let mut c = grid_cell(&base, cta, cap, base.mitigation.compliance, TestingPolicy::PrioritySymptomatic);
                c.name = format!("{parameter}={v}_{}", c.name);
                grid.push(c);
                keys.push((v, cap, cta));
            }
        }
    }
    let rows = sweep(pop, &grid, replicates, seed, workers)?;
    rows.into_iter()
        .zip(keys)
        .map(|(s, (value, capacity, cta_adoption))| {
            if let Some(e) = s.error {
                return Err(Error::config("sensitivity", e));
            }
            Ok(SensitivityRow {
                parameter,
                value,
                capacity,
                cta_adoption,
                total_infected: s.total_infected(),
            })
        })
        .collect()
}

pub fn write_sensitivity_csv<W: std::io::Write>(rows: &[SensitivityRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "parameter",
        "value",
        "capacity",
        "cta_adoption",
        "total_infected_median",
        "total_infected_q1",
        "total_infected_q3",
    ])?;
    for r in rows {
        let (q1, m, q3) = stats::quartiles(&r.total_infected);
        w.write_record([
            r.parameter.to_string(),
            r.value.to_string(),
            r.capacity.to_string(),
            r.cta_adoption.to_string(),
            m.to_string(),
            q1.to_string(),
            q3.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<sensitivity>", e))?;
    Ok(())
}
