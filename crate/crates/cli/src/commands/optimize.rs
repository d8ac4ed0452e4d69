//! `optimize`: GA search emitting history, best-config, and a comparison of
//! the config's own (default) parameters against the optimized ones.

use anyhow::{bail, Result};
use mledca::optimizer::{
    compare_modes, ga_optimize, EvalCache, GaConfig, GaOutcome, GeneSpec, Mode, Problem,
};
use mledca::scenario::MloScenario;
use std::path::Path;

use super::analyze::{analyze, AcReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Single,
    Mlo,
    Both,
}

impl ModeSelection {
    pub fn parse(spec: &str) -> Result<ModeSelection> {
        let mut single = false;
        let mut mlo = false;
        for part in spec.split(',') {
            match part.trim() {
                "single" => single = true,
                "mlo" | "multi" => mlo = true,
                other => bail!("unknown mode `{other}` (expected single, mlo)"),
            }
        }
        Ok(match (single, mlo) {
            (true, true) => ModeSelection::Both,
            (true, false) => ModeSelection::Single,
            (false, true) => ModeSelection::Mlo,
            (false, false) => bail!("--modes selected nothing"),
        })
    }
}

pub struct OptimizeArtifacts {
    pub outcomes: Vec<GaOutcome>,
    /// (variant label, per-AC rows, feasible, fitness)
    pub comparison: Vec<(String, Vec<AcReport>, bool, f64)>,
    pub best_feasible: bool,
}

pub fn run(
    scenario: &MloScenario,
    problem: &Problem,
    ga: &GaConfig,
    selection: ModeSelection,
) -> Result<OptimizeArtifacts> {
    let mut cache = EvalCache::new();
    let outcomes: Vec<GaOutcome> = match selection {
        ModeSelection::Single => {
            vec![ga_optimize(problem, Mode::SingleLink, ga, &mut cache, &[])]
        }
        ModeSelection::Mlo => {
            vec![ga_optimize(problem, Mode::MultiLink, ga, &mut cache, &[])]
        }
        ModeSelection::Both => {
            let cmp = compare_modes(problem, ga, &mut cache);
            vec![cmp.single, cmp.multi]
        }
    };

    // Comparison table: the config's own parameters on one link first.
    let mut comparison = Vec::new();
    let mut default_single = scenario.clone();
    default_single.links = 1;
    default_single.assignment = vec![1; scenario.acs.len()];
    let default_rows = analyze(&default_single, &problem.solver)?;
    let feasible = |rows: &[AcReport]| {
        rows.iter().all(|r| r.epsilon >= 1.0 || r.pr_violation < r.epsilon)
    };
    let fitness = |rows: &[AcReport]| {
        rows.iter()
            .map(|r| -(r.p_loss.max(mledca::optimizer::LOSS_FLOOR)).log10())
            .sum::<f64>()
    };
    comparison.push((
        "default".to_string(),
        default_rows.rows.clone(),
        feasible(&default_rows.rows),
        fitness(&default_rows.rows),
    ));
    for outcome in &outcomes {
        let spec = GeneSpec::new(problem, outcome.mode);
        let decoded = outcome.best.decode(problem, &spec);
        let rows = analyze(&decoded, &problem.solver)?;
        let label = match outcome.mode {
            Mode::SingleLink => "optimized_single",
            Mode::MultiLink => "optimized_mlo",
        };
        comparison.push((
            label.to_string(),
            rows.rows.clone(),
            outcome.record.feasible,
            outcome.record.fitness,
        ));
    }

    let best_feasible = outcomes.iter().all(|o| o.feasible_found);
    Ok(OptimizeArtifacts { outcomes, comparison, best_feasible })
}

pub fn write_history_csv(outcome: &GaOutcome, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "generation",
        "best_fitness",
        "mean_fitness",
        "feasible_fraction",
        "best_so_far",
    ])?;
    for s in &outcome.history {
        w.write_record([
            s.generation.to_string(),
            s.best_fitness.to_string(),
            s.mean_fitness.to_string(),
            s.feasible_fraction.to_string(),
            s.best_so_far.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_best_config(
    problem: &Problem,
    outcome: &GaOutcome,
    path: &Path,
) -> Result<()> {
    let spec = GeneSpec::new(problem, outcome.mode);
    let decoded = outcome.best.decode(problem, &spec);
    std::fs::write(path, serde_json::to_string_pretty(&decoded)?)?;
    Ok(())
}

pub fn write_comparison_csv(
    comparison: &[(String, Vec<AcReport>, bool, f64)],
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant",
        "ac",
        "name",
        "link",
        "p_loss",
        "pr_violation",
        "theta",
        "epsilon",
        "feasible",
        "fitness",
    ])?;
    for (variant, rows, feasible, fitness) in comparison {
        for r in rows {
            w.write_record([
                variant.clone(),
                (r.ac + 1).to_string(),
                r.name.clone(),
                r.link.to_string(),
                r.p_loss.to_string(),
                r.pr_violation.to_string(),
                r.theta.to_string(),
                r.epsilon.to_string(),
                feasible.to_string(),
                fitness.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
