//! `validate`: analytic model vs Monte Carlo on a single-link config.
//!
//! Transmission and collision probabilities are checked against replicated
//! simulator runs at three standard errors; packet loss (a rare event)
//! against a pooled Wilson interval at z = 3; delay-tail anchors at 10%,
//! 50%, and 100% of each AC's bound against pooled 95% Wilson intervals.

use anyhow::{bail, Result};
use mledca::ccdf::delay_violation;
use mledca::delay_gf::build_all;
use mledca::fixed_point::{solve, SolverOptions};
use mledca::scenario::MloScenario;
use mledca::sim::{empirical_ccdf, simulate, wilson_interval, Horizon, SimReport};
use rayon::prelude::*;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct MetricRow {
    pub metric: String,
    pub ac: usize,
    pub analytic: f64,
    pub mc_value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

pub struct Validation {
    pub rows: Vec<MetricRow>,
    /// All p/c/P_loss checks passed and every AC kept >= 2 of 3 anchors.
    pub pass: bool,
    pub reports: Vec<SimReport>,
}

fn mean_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mu = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0);
    (mu, (var / n).sqrt())
}

pub fn run(
    scenario: &MloScenario,
    solver: &SolverOptions,
    packets_per_seed: u64,
    num_seeds: u64,
    base_seed: u64,
) -> Result<Validation> {
    let links = scenario.split_links()?;
    let active: Vec<_> = links.iter().filter(|l| !l.acs.is_empty()).collect();
    if active.len() != 1 {
        bail!("validation needs a single-link configuration (all ACs on one link)");
    }
    let link = active[0];
    let sol = solve(link, solver)?;
    let ctxs = build_all(link, &sol)?;

    let seeds: Vec<u64> = (0..num_seeds).map(|i| base_seed + i).collect();
    let reports: Vec<SimReport> = seeds
        .par_iter()
        .map(|&s| simulate(link, Horizon::Packets(packets_per_seed), s))
        .collect();

    let mut rows = Vec::new();
    let mut anchors_ok = true;
    for ac in 0..link.acs.len() {
        // replication intervals for the per-slot probabilities
        let p_hat: Vec<f64> = reports.iter().map(|r| r.per_ac[ac].tx_prob()).collect();
        let c_hat: Vec<f64> =
            reports.iter().map(|r| r.per_ac[ac].collision_prob()).collect();
        for (metric, analytic, samples) in [
            ("p", sol.tx_prob[ac], &p_hat),
            ("c", sol.collision_prob[ac], &c_hat),
        ] {
            let (mu, se) = mean_se(samples);
            let lower = mu - 3.0 * se;
            let upper = mu + 3.0 * se;
            rows.push(MetricRow {
                metric: metric.to_string(),
                ac,
                analytic,
                mc_value: mu,
                lower,
                upper,
                pass: analytic >= lower && analytic <= upper,
            });
        }

        // pooled Wilson (z = 3) for the rare loss events
        let drops: u64 = reports.iter().map(|r| r.per_ac[ac].drops).sum();
        let serviced: u64 =
            reports.iter().map(|r| r.per_ac[ac].bursts + r.per_ac[ac].drops).sum();
        let (lo, hi) = wilson_interval(drops, serviced, 3.0);
        rows.push(MetricRow {
            metric: "p_loss".to_string(),
            ac,
            analytic: sol.loss_prob[ac],
            mc_value: drops as f64 / serviced.max(1) as f64,
            lower: lo,
            upper: hi,
            pass: sol.loss_prob[ac] >= lo && sol.loss_prob[ac] <= hi,
        });

        // delay anchors at fractions of the AC's own bound
        let pooled: Vec<f64> = reports
            .iter()
            .flat_map(|r| r.per_ac[ac].delay_samples_us.iter().copied())
            .collect();
        let dmax = link.acs[ac].dmax_ms;
        let mut inside = 0;
        for frac in [0.1, 0.5, 1.0] {
            let x_ms = dmax * frac;
            let analytic = delay_violation(&ctxs[ac], &link.phy, x_ms)?.probability;
            let est = empirical_ccdf(&pooled, x_ms * 1000.0);
            let pass = analytic >= est.lower && analytic <= est.upper;
            inside += pass as u32;
            rows.push(MetricRow {
                metric: format!("ccdf@{x_ms}ms"),
                ac,
                analytic,
                mc_value: est.probability,
                lower: est.lower,
                upper: est.upper,
                pass,
            });
        }
        anchors_ok &= inside >= 2;
    }

    let hard_ok = rows
        .iter()
        .filter(|r| !r.metric.starts_with("ccdf"))
        .all(|r| r.pass);
    Ok(Validation { pass: hard_ok && anchors_ok, rows, reports })
}

pub fn write_validation_csv(rows: &[MetricRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["metric", "ac", "analytic", "mc_value", "lower", "upper", "pass"])?;
    for r in rows {
        w.write_record([
            r.metric.clone(),
            (r.ac + 1).to_string(),
            r.analytic.to_string(),
            r.mc_value.to_string(),
            r.lower.to_string(),
            r.upper.to_string(),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_delay_dump(reports: &[SimReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["seed", "ac", "delay_us"])?;
    for r in reports {
        for (ac, stats) in r.per_ac.iter().enumerate() {
            for &d in &stats.delay_samples_us {
                w.write_record([r.seed.to_string(), (ac + 1).to_string(), d.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
