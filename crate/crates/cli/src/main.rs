//! Command-line front end for the multi-link EDCA QoS model.
//!
//! Exit codes: 0 success, 1 infeasible outcome or validation failure,
//! 2 configuration error.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mledca_cli::manifest::RunManifest;
use mledca_cli::{commands, config};
use mledca::optimizer::Problem;
use mledca::scenario::{has_fatal, Severity};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mledca", version, about = "Multi-link EDCA QoS analysis and optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a config field, e.g. --set acs.1.aifsn=4. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed override for randomized commands.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario and report per-AC QoS figures plus CCDF curves.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one or more config fields over ranges and tabulate the grid.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        /// Swept field, e.g. --sweep acs.1.aifsn=2:15:1. Repeatable;
        /// multiple sweeps form a cartesian grid.
        #[arg(long = "sweep", value_name = "PATH=START:END:STEP")]
        sweeps: Vec<String>,
    },
    /// Run the GA and emit history, best configs, and a comparison table.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Which searches to run: single, mlo, or single,mlo.
        #[arg(long)]
        modes: Option<String>,
    },
    /// Compare the analytic model against the Monte Carlo simulator.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Packets per AC per seed.
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        /// Number of independent seeds.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Also dump every delay sample.
        #[arg(long)]
        dump_delays: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Load + validate the scenario; fatal violations abort with the full list
/// on stderr, range violations are warnings.
fn load_checked(common: &Common) -> Result<config::RunConfig> {
    let cfg = config::load(&common.config, &common.overrides)?;
    let violations = cfg.scenario.validate();
    for v in &violations {
        match v.severity {
            Severity::Error => eprintln!("invalid: {v}"),
            Severity::Range => eprintln!("warning: {v}"),
        }
    }
    if has_fatal(&violations) {
        anyhow::bail!("configuration has {} fatal violation(s)", violations.len());
    }
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { common } => {
            let cfg = load_checked(&common)?;
            let analysis = commands::analyze::analyze(&cfg.scenario, &cfg.solver)?;
            for (link, err) in &analysis.failures {
                eprintln!("link {link}: {err}");
            }
            commands::analyze::write_analysis_csv(
                &analysis.rows,
                &common.out.join("analysis.csv"),
            )?;
            commands::analyze::write_ccdf_curves(&analysis, &common.out)?;
            RunManifest::new("analyze", &common.config, &common.out, None, &common.overrides)
                .write(&common.out)?;
            print_table(&analysis.rows);
            Ok(if analysis.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Sensitivity { common, sweeps } => {
            let cfg = load_checked(&common)?;
            let sweeps = sweeps
                .iter()
                .map(|s| config::Sweep::parse(s))
                .collect::<Result<Vec<_>>>()?;
            // the grid overrides ride on top of --set, so re-serialize
            let base = serde_json::to_value(serde_json::from_str::<serde_json::Value>(
                &std::fs::read_to_string(&common.config)?,
            )?)?;
            let mut base = base;
            for entry in &common.overrides {
                let (key, raw) = entry.split_once('=').context("override format")?;
                config::set_path(&mut base, key, config::parse_scalar(raw))?;
            }
            let rows = commands::sensitivity::run_grid(&base, &sweeps)?;
            let unsolved = rows.iter().filter(|r| !r.solved).count();
            if unsolved > 0 {
                eprintln!("warning: {unsolved} grid point(s) did not solve");
            }
            commands::sensitivity::write_sensitivity_csv(
                &sweeps,
                &rows,
                cfg.scenario.acs.len(),
                &common.out.join("sensitivity.csv"),
            )?;
            RunManifest::new(
                "sensitivity",
                &common.config,
                &common.out,
                None,
                &common.overrides,
            )
            .write(&common.out)?;
            println!("{} grid points -> {}", rows.len(), common.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimize { common, modes } => {
            let cfg = load_checked(&common)?;
            let mut ga = cfg.ga.clone();
            if let Some(seed) = common.seed {
                ga.seed = seed;
            }
            let selection = match &modes {
                Some(spec) => commands::optimize::ModeSelection::parse(spec)?,
                None => {
                    if cfg.scenario.links > 1 {
                        commands::optimize::ModeSelection::Both
                    } else {
                        commands::optimize::ModeSelection::Single
                    }
                }
            };
            let problem = Problem::from_scenario(&cfg.scenario, cfg.solver.clone());
            let artifacts =
                commands::optimize::run(&cfg.scenario, &problem, &ga, selection)?;
            for outcome in &artifacts.outcomes {
                let suffix = match outcome.mode {
                    mledca::optimizer::Mode::SingleLink => "single",
                    mledca::optimizer::Mode::MultiLink => "mlo",
                };
                commands::optimize::write_history_csv(
                    outcome,
                    &common.out.join(format!("history_{suffix}.csv")),
                )?;
                commands::optimize::write_best_config(
                    &problem,
                    outcome,
                    &common.out.join(format!("best_config_{suffix}.json")),
                )?;
                println!(
                    "{suffix}: fitness {:.4} feasible {} ({} generations)",
                    outcome.record.fitness,
                    outcome.record.feasible,
                    outcome.history.len()
                );
            }
            commands::optimize::write_comparison_csv(
                &artifacts.comparison,
                &common.out.join("comparison.csv"),
            )?;
            RunManifest::new(
                "optimize",
                &common.config,
                &common.out,
                Some(ga.seed),
                &common.overrides,
            )
            .write(&common.out)?;
            Ok(if artifacts.best_feasible { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Validate { common, horizon, seeds, dump_delays } => {
            let cfg = load_checked(&common)?;
            let base_seed = common.seed.unwrap_or(cfg.ga.seed);
            let validation = commands::validate::run(
                &cfg.scenario,
                &cfg.solver,
                horizon,
                seeds,
                base_seed,
            )?;
            commands::validate::write_validation_csv(
                &validation.rows,
                &common.out.join("validation.csv"),
            )?;
            if dump_delays {
                commands::validate::write_delay_dump(
                    &validation.reports,
                    &common.out.join("delays.csv"),
                )?;
            }
            RunManifest::new(
                "validate",
                &common.config,
                &common.out,
                Some(base_seed),
                &common.overrides,
            )
            .write(&common.out)?;
            for r in &validation.rows {
                println!(
                    "{} ac{}: analytic {:.6e} mc {:.6e} [{:.6e}, {:.6e}] {}",
                    r.metric,
                    r.ac + 1,
                    r.analytic,
                    r.mc_value,
                    r.lower,
                    r.upper,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            Ok(if validation.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn print_table(rows: &[commands::analyze::AcReport]) {
    println!(
        "{:<6} {:<4} {:<10} {:>10} {:>10} {:>12} {:>14} {:>8}",
        "link", "ac", "name", "p", "c", "p_loss", "pr_violation", "theta"
    );
    for r in rows {
        println!(
            "{:<6} {:<4} {:<10} {:>10.6} {:>10.6} {:>12.4e} {:>14.4e} {:>8.3}",
            r.link,
            r.ac + 1,
            r.name,
            r.p,
            r.c,
            r.p_loss,
            r.pr_violation,
            r.theta
        );
    }
}
