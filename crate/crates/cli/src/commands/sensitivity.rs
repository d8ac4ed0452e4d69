//! `sensitivity`: grid sweep over one or more AC fields, one CSV row per
//! grid point with every AC's loss and reliability figures.

use crate::config::{parse_scalar, set_path, RunConfig, Sweep};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use std::path::Path;

use super::analyze::analyze;

pub struct SensitivityRow {
    pub values: Vec<f64>,
    pub solved: bool,
    /// Per AC: (p_loss, pr_violation, theta), NaN when unsolved.
    pub per_ac: Vec<(f64, f64, f64)>,
}

/// Cartesian sweep. The base config is re-parsed per grid point with the
/// swept values overriding the named fields.
pub fn run_grid(base_json: &serde_json::Value, sweeps: &[Sweep]) -> Result<Vec<SensitivityRow>> {
    if sweeps.is_empty() {
        bail!("sensitivity needs at least one --sweep");
    }
    // validate sweep paths against the base config up front
    {
        let mut probe = base_json.clone();
        for s in sweeps {
            set_path(&mut probe, &s.path, parse_scalar(&format!("{}", s.values[0])))
                .with_context(|| format!("sweep path `{}`", s.path))?;
        }
        let _: RunConfig =
            serde_json::from_value(probe).context("config with sweep overrides")?;
    }

    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for s in sweeps {
        let mut next = Vec::with_capacity(grid.len() * s.values.len());
        for prefix in &grid {
            for &v in &s.values {
                let mut row = prefix.clone();
                row.push(v);
                next.push(row);
            }
        }
        grid = next;
    }

    let rows: Result<Vec<SensitivityRow>> = grid
        .par_iter()
        .map(|point| {
            let mut value = base_json.clone();
            for (s, &v) in sweeps.iter().zip(point) {
                // integers stay integers for integer-typed fields
                let scalar = if v.fract() == 0.0 {
                    serde_json::json!(v as i64)
                } else {
                    serde_json::json!(v)
                };
                set_path(&mut value, &s.path, scalar)?;
            }
            let config: RunConfig = serde_json::from_value(value)?;
            let n_acs = config.scenario.acs.len();
            match analyze(&config.scenario, &config.solver) {
                Ok(a) if a.failures.is_empty() && a.rows.len() == n_acs => {
                    Ok(SensitivityRow {
                        values: point.clone(),
                        solved: true,
                        per_ac: a
                            .rows
                            .iter()
                            .map(|r| (r.p_loss, r.pr_violation, r.theta))
                            .collect(),
                    })
                }
                _ => Ok(SensitivityRow {
                    values: point.clone(),
                    solved: false,
                    per_ac: vec![(f64::NAN, f64::NAN, f64::NAN); n_acs],
                }),
            }
        })
        .collect();
    rows
}

pub fn write_sensitivity_csv(
    sweeps: &[Sweep],
    rows: &[SensitivityRow],
    n_acs: usize,
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = sweeps.iter().map(|s| s.path.clone()).collect();
    header.push("solved".into());
    for i in 0..n_acs {
        header.push(format!("p_loss_ac{}", i + 1));
        header.push(format!("pr_violation_ac{}", i + 1));
        header.push(format!("theta_ac{}", i + 1));
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
        rec.push(row.solved.to_string());
        for &(loss, pr, theta) in &row.per_ac {
            rec.push(loss.to_string());
            rec.push(pr.to_string());
            rec.push(theta.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
