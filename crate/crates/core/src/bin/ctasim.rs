//! Command-line front end: population generation, single runs, the
//! experiment grid, sensitivity sweeps, R0 calibration and contact reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use ctasim::config::{Metadata, RunConfig};
use ctasim::contacts::contact_distribution_report;
use ctasim::engine::{run_replicate, PolicyPreset, ScenarioConfig};
use ctasim::experiments::{self, GridFilter, SensitivityParam};
use ctasim::mitigation::{Capacity, TestingPolicy};
use ctasim::output;
use ctasim::rng;
use ctasim::synthpop::{generate_population, PopulationSpec};

#[derive(Parser)]
#[command(name = "ctasim", version, about = "Agent-based COVID-19 contact-tracing-app simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run config, or a metadata sidecar from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<u64>,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Dotted override, e.g. `disease.beta_c=0.028`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Use a scaled-down population of this many agents.
    #[arg(long)]
    agents: Option<usize>,
    /// Start from a policy preset instead of the baseline scenario.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<PolicyPreset>,
}

#[derive(Subcommand)]
enum Command {
    /// Write agents and the edge list of every network layer.
    GeneratePopulation(Common),
    /// One scenario, one CSV of daily metrics per replicate.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write the per-infection transmission ledger.
        #[arg(long)]
        verbose: bool,
    },
    /// The mitigation grid, or a sensitivity sweep with `--sensitivity`.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Restrict CTA adoption levels (comma separated).
        #[arg(long, value_delimiter = ',')]
        cta: Option<Vec<f64>>,
        /// Restrict weekly capacities, e.g. `0.03,inf`.
        #[arg(long, value_delimiter = ',', value_parser = parse_capacity)]
        capacity: Option<Vec<Capacity>>,
        #[arg(long, value_delimiter = ',')]
        compliance: Option<Vec<f64>>,
        /// `priority` or `first_come`.
        #[arg(long, value_delimiter = ',', value_parser = parse_policy)]
        policy: Option<Vec<TestingPolicy>>,
        /// beta_c, p, beta_r or friends_fraction.
        #[arg(long)]
        sensitivity: Option<String>,
        /// Values for the sensitivity parameter; defaults to its tested range.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Pick the network transmission probability that best matches a target R0.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.8)]
        target_r0: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.06,0.07,0.08,0.09")]
        grid: Vec<f64>,
    },
    /// Histogram of daily contacts per agent.
    ContactsReport {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        days: u32,
    },
}

fn parse_capacity(s: &str) -> Result<Capacity, String> {
    Capacity::parse(s).map_err(|e| e.to_string())
}

fn parse_policy(s: &str) -> Result<TestingPolicy, String> {
    match s {
        "priority" | "priority_symptomatic" => Ok(TestingPolicy::PrioritySymptomatic),
        "first_come" => Ok(TestingPolicy::FirstCome),
        _ => Err(format!("unknown policy `{s}`")),
    }
}

fn parse_preset(s: &str) -> Result<PolicyPreset, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

impl Common {
    /// Config file, then preset and flags, then `--set` overrides.
    fn resolve(&self, default_preset: Option<PolicyPreset>) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.preset.or(default_preset) {
            cfg.scenario = ScenarioConfig::from_preset(p);
        }
        if let Some(n) = self.agents {
            cfg.population = PopulationSpec::scaled(n);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        let cfg = cfg.with_overrides(&self.set)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn seeds(cfg: &RunConfig) -> Vec<u64> {
    (0..cfg.replicates).map(|i| rng::replicate_seed(cfg.seed, i)).collect()
}

fn write_csv(path: &Path, meta: &Metadata, body: impl FnOnce(&mut dyn std::io::Write) -> ctasim::Result<()>) -> Result<()> {
    let mut f = output::create(path)?;
    body(&mut f)?;
    meta.write_for(path)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GeneratePopulation(c) => {
            let cfg = c.resolve(None)?;
            let pop = generate_population(&cfg.population, cfg.seed)?;
            for w in &pop.warnings {
                log::warn!("{w}");
            }
            let meta = Metadata::new("generate-population", &cfg, vec![cfg.seed]);
            write_csv(&c.out.join("agents.csv"), &meta, |w| output::write_agents_csv(&pop, w))?;
            write_csv(&c.out.join("edges.csv"), &meta, |w| pop.network.write_edge_list(w))?;
        }
        Command::Run { common: c, verbose } => {
            let cfg = c.resolve(None)?;
            let pop = generate_population(&cfg.population, cfg.seed)?;
            let meta = Metadata::new("run", &cfg, seeds(&cfg));
            for i in 0..cfg.replicates {
                let result = run_replicate(&pop, &cfg.scenario, cfg.seed, i)?;
                log::info!(
                    "replicate {i}: total {:.3} peak {:.4} on day {}",
                    result.total_infected_fraction,
                    result.peak_prevalence_fraction,
                    result.peak_day
                );
                write_csv(&c.out.join(format!("daily_{i}.csv")), &meta, |w| output::write_daily_csv(&result, w))?;
                if verbose {
                    write_csv(&c.out.join(format!("infections_{i}.csv")), &meta, |w| {
                        output::write_infection_log(&result.infection_log, w)
                    })?;
                }
            }
        }
        Command::Sweep {
            common: c,
            cta,
            capacity,
            compliance,
            policy,
            sensitivity,
            values,
        } => {
            let cfg = c.resolve(None)?;
            let pop = generate_population(&cfg.population, cfg.seed)?;
            match sensitivity {
                Some(name) => {
                    let param = SensitivityParam::parse(&name)?;
                    let values = values.unwrap_or_else(|| param.default_values());
                    let rows = experiments::sensitivity_sweep(
                        &pop,
                        &cfg.scenario,
                        param,
                        &values,
                        cfg.replicates,
                        cfg.seed,
                        c.workers,
                    )?;
                    let meta = Metadata::new("sweep", &cfg, seeds(&cfg));
                    let path = c.out.join(format!("sensitivity_{param}.csv"));
                    write_csv(&path, &meta, |w| experiments::write_sensitivity_csv(&rows, w))?;
                }
                None => {
                    let filter = GridFilter {
                        cta,
                        capacity,
                        compliance,
                        policy,
                    };
                    let out = experiments::sweep_grid(&pop, &cfg, &filter, c.workers)?;
                    for row in out.rows.iter().filter(|r| r.error.is_some()) {
                        log::error!("{}: {}", row.config.name, row.error.as_deref().unwrap_or_default());
                    }
                    out.write(&c.out, "sweep", &cfg)?;
                    log::info!("wrote {} scenario rows to {}", out.rows.len(), c.out.display());
                }
            }
        }
        Command::Calibrate {
            common: c,
            target_r0,
            grid,
        } => {
            let cfg = c.resolve(Some(PolicyPreset::BusinessAsUsual))?;
            let pop = generate_population(&cfg.population, cfg.seed)?;
            let report =
                experiments::calibrate(&pop, &cfg.scenario, target_r0, &grid, cfg.replicates, cfg.seed, c.workers)?;
            let meta = Metadata::new("calibrate", &cfg, seeds(&cfg));
            write_csv(&c.out.join("calibration.csv"), &meta, |w| report.write_csv(w))?;
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::ContactsReport { common: c, days } => {
            let cfg = c.resolve(None)?;
            let pop = generate_population(&cfg.population, cfg.seed)?;
            let report = contact_distribution_report(&pop, &cfg.scenario.contacts, days, cfg.seed);
            let meta = Metadata::new("contacts-report", &cfg, vec![cfg.seed]);
            write_csv(&c.out.join("contacts.csv"), &meta, |w| report.write_csv(w))?;
            println!(
                "{}",
                serde_json::json!({ "mean": report.mean, "sd": report.sd, "agent_days": report.agent_days })
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli).context("ctasim failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let chain: Vec<String> = e.chain().map(ToString::to_string).collect();
            eprintln!("{}", serde_json::json!({ "error": chain.last(), "context": chain }));
            ExitCode::from(2)
        }
    }
}
