//! `analyze`: per-AC operating point, delay-violation probability, and CCDF
//! curves for one configuration.

use anyhow::{Context, Result};
use mledca::ccdf::{delay_violation, invert_ccdf, reliability_index, threshold_slots};
use mledca::delay_gf::build_all;
use mledca::fixed_point::{solve, FixedPointSolution, SolverOptions};
use mledca::scenario::{LinkScenario, MloScenario};
use std::path::Path;

/// Analysis of one AC on one link.
#[derive(Debug, Clone)]
pub struct AcReport {
    /// 1-based link id and the AC's index in the scenario.
    pub link: u32,
    pub ac: usize,
    pub name: String,
    pub p: f64,
    pub c: f64,
    pub p_loss: f64,
    pub pr_violation: f64,
    pub theta: f64,
    pub dmax_ms: f64,
    pub epsilon: f64,
}

/// Full scenario analysis: per-AC rows, in scenario AC order.
pub struct Analysis {
    pub rows: Vec<AcReport>,
    /// Links that failed to converge, with the error text.
    pub failures: Vec<(u32, String)>,
    /// Converged per-link state for follow-up CCDF sampling.
    pub links: Vec<(u32, LinkScenario, FixedPointSolution, Vec<usize>)>,
}

pub fn analyze(scenario: &MloScenario, solver: &SolverOptions) -> Result<Analysis> {
    let link_scenarios = scenario.split_links().context("splitting links")?;
    let members = scenario.link_members();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut links = Vec::new();
    for (idx, (link, members)) in link_scenarios.into_iter().zip(members).enumerate() {
        let link_id = idx as u32 + 1;
        if link.acs.is_empty() {
            continue;
        }
        let sol = match solve(&link, solver) {
            Ok(sol) => sol,
            Err(e) => {
                failures.push((link_id, e.to_string()));
                continue;
            }
        };
        let ctxs = build_all(&link, &sol)?;
        for (pos, &orig) in members.iter().enumerate() {
            let ac = &link.acs[pos];
            let tail = delay_violation(&ctxs[pos], &link.phy, ac.dmax_ms)?;
            rows.push(AcReport {
                link: link_id,
                ac: orig,
                name: if ac.name.is_empty() {
                    format!("AC{}", orig + 1)
                } else {
                    ac.name.clone()
                },
                p: sol.tx_prob[pos],
                c: sol.collision_prob[pos],
                p_loss: sol.loss_prob[pos],
                pr_violation: tail.probability,
                theta: tail.theta,
                dmax_ms: ac.dmax_ms,
                epsilon: ac.epsilon,
            });
        }
        links.push((link_id, link, sol, members));
    }
    rows.sort_by_key(|r| r.ac);
    Ok(Analysis { rows, failures, links })
}

pub fn write_analysis_csv(rows: &[AcReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "link",
        "ac",
        "name",
        "p",
        "c",
        "p_loss",
        "pr_violation",
        "theta",
        "dmax_ms",
        "epsilon",
    ])?;
    for r in rows {
        w.write_record([
            r.link.to_string(),
            (r.ac + 1).to_string(),
            r.name.clone(),
            r.p.to_string(),
            r.c.to_string(),
            r.p_loss.to_string(),
            r.pr_violation.to_string(),
            r.theta.to_string(),
            r.dmax_ms.to_string(),
            r.epsilon.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Sample each AC's delay CCDF on a log-spaced grid up to 3x its bound and
/// write one file per (link, AC).
pub fn write_ccdf_curves(analysis: &Analysis, out_dir: &Path) -> Result<()> {
    for (link_id, link, sol, members) in &analysis.links {
        let ctxs = build_all(link, sol)?;
        for (pos, &orig) in members.iter().enumerate() {
            let ac = &link.acs[pos];
            let delta = link.phy.delta_us;
            let lo = (50.0 * delta).max(500.0); // from ~0.5 ms
            let hi = (ac.dmax_ms * 3.0) * 1000.0;
            let points = 25usize;
            let mut xs: Vec<u64> = (0..points)
                .map(|i| {
                    let f = i as f64 / (points - 1) as f64;
                    let us = lo * (hi / lo).powf(f);
                    threshold_slots(us / 1000.0, delta)
                })
                .collect();
            xs.dedup();
            let path = out_dir.join(format!("ccdf_link{}_ac{}.csv", link_id, orig + 1));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["x_us", "x_slots", "prob", "theta"])?;
            for &x in &xs {
                let r = invert_ccdf(|z| ctxs[pos].total_delay_gf(z), x, 1, None)?;
                w.write_record([
                    (x as f64 * delta).to_string(),
                    x.to_string(),
                    r.probability.to_string(),
                    reliability_index(r.probability).to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

