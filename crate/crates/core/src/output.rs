//! CSV writers for run time series, sweep summaries and infection ledgers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::contacts::ContactLayer;
use crate::engine::{peak_reduction, RunResult, ScenarioSummary};
use crate::error::{Error, Result};
use crate::mitigation::Capacity;
use crate::stats;
use crate::synthpop::Population;
use crate::transmission::InfectionRecord;

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    let mut inner = w.into_inner().map_err(|e| Error::io("<csv>", e.into_error()))?;
    inner.flush().map_err(|e| Error::io("<csv>", e))
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per agent with demographics and group memberships.
pub fn write_agents_csv<W: Write>(pop: &Population, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for a in &pop.agents {
        w.serialize(a)?;
    }
    finish(w)
}

/// One row per simulated day.
pub fn write_daily_csv<W: Write>(run: &RunResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "day",
        "susceptible",
        "active",
        "new_infections",
        "cumulative_infections",
        "recovered",
        "dead",
        "hospitalized",
        "isolating",
        "tests_available",
        "tests_used",
        "positives",
        "queue_depth",
        "prevalence",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(ContactLayer::ALL.iter().map(|l| format!("infections_{}", l.name())));
    w.write_record(&header)?;
    for d in &run.days {
        let mut row = vec![
            d.day.to_string(),
            d.susceptible.to_string(),
            d.active.to_string(),
            d.new_infections.to_string(),
            d.cumulative_infections.to_string(),
            d.recovered.to_string(),
            d.dead.to_string(),
            d.hospitalized.to_string(),
            d.isolating.to_string(),
            d.tests_available.to_string(),
            d.tests_used.to_string(),
            d.positives.to_string(),
            d.queue_depth.to_string(),
            (d.active as f64 / run.population as f64).to_string(),
        ];
        row.extend(d.infections_by_layer.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    finish(w)
}

/// Transmission audit log: `day,source,target,layer`; seeds have empty
/// source and layer.
pub fn write_infection_log<W: Write>(log: &[InfectionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "source", "target", "layer"])?;
    for r in log {
        w.write_record([
            r.day.to_string(),
            opt(r.source),
            r.target.to_string(),
            r.layer.map(|l| l.name().to_string()).unwrap_or_default(),
        ])?;
    }
    finish(w)
}

fn capacity_label(c: Capacity) -> String {
    c.to_string()
}

/// One row per scenario with medians and interquartile ranges. Peak
/// reduction is relative to `baseline_peak` when given.
pub fn write_summary_csv<W: Write>(rows: &[ScenarioSummary], baseline_peak: Option<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "cta_adoption",
        "capacity",
        "compliance",
        "policy",
        "beta_c",
        "beta_r",
        "random_fraction",
        "friend_fraction_cap",
        "replicates",
        "total_infected_median",
        "total_infected_q1",
        "total_infected_q3",
        "peak_prevalence_median",
        "peak_prevalence_q1",
        "peak_prevalence_q3",
        "peak_day_median",
        "r0_median",
        "positive_share_median",
        "peak_reduction_pct",
        "error",
    ])?;
    for row in rows {
        let c = &row.config;
        let betas = c.disease.betas();
        let mut rec = vec![
            c.name.clone(),
            c.mitigation.cta_adoption.to_string(),
            capacity_label(c.mitigation.capacity),
            c.mitigation.compliance.to_string(),
            c.mitigation.policy.to_string(),
            betas.network.to_string(),
            betas.random.to_string(),
            c.contacts.random_fraction.to_string(),
            c.contacts.friend_fraction_cap.to_string(),
            row.replicates.len().to_string(),
        ];
        if row.error.is_some() || row.replicates.is_empty() {
            rec.extend(std::iter::repeat_n(String::new(), 10));
        } else {
            let t = row.total_infected_quartiles();
            let p = row.peak_quartiles();
            let days: Vec<f64> = row.replicates.iter().map(|r| r.peak_day as f64).collect();
            let r0 = row.r0();
            let reduction = baseline_peak.and_then(|b| peak_reduction(p.median, b).ok());
            rec.extend([
                t.median.to_string(),
                t.q1.to_string(),
                t.q3.to_string(),
                p.median.to_string(),
                p.q1.to_string(),
                p.q3.to_string(),
                stats::median(&days).to_string(),
                if r0.is_empty() {
                    String::new()
                } else {
                    stats::median(&r0).to_string()
                },
                stats::median(&row.positive_share()).to_string(),
                opt(reduction),
            ]);
        }
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    finish(w)
}

/// Every replicate of every scenario: `scenario,replicate,seed,...`.
pub fn write_replicates_csv<W: Write>(rows: &[ScenarioSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "replicate",
        "seed",
        "total_infected",
        "peak_prevalence",
        "peak_day",
        "r0",
        "positive_share",
        "tests_used",
    ])?;
    for row in rows {
        for r in &row.replicates {
            w.write_record([
                row.config.name.clone(),
                r.index.to_string(),
                r.seed.to_string(),
                r.total_infected_fraction.to_string(),
                r.peak_prevalence_fraction.to_string(),
                r.peak_day.to_string(),
                opt(r.estimated_r0),
                r.positive_share.to_string(),
                r.tests_used.to_string(),
            ])?;
        }
    }
    finish(w)
}

/// Median prevalence per day across replicates: `day,prevalence_median`.
pub fn write_prevalence_csv<W: Write>(row: &ScenarioSummary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "prevalence_median"])?;
    for (d, p) in row.median_prevalence().iter().enumerate() {
        w.write_record([d.to_string(), p.to_string()])?;
    }
    finish(w)
}
