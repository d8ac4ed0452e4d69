//! Joint optimization of per-AC EDCA parameters and AC-to-link assignment.
//!
//! The objective is the summed reliability of packet delivery,
//! sum_i -log10(P_loss,i), under per-AC delay-violation constraints
//! Pr(D_i >= D_max,i) < epsilon_i. The search space is the standard EDCA
//! parameter grid (contention-window exponents, AIFSN, TXOP steps, retry
//! limit), plus a link id per AC in multi-link mode. A genetic algorithm
//! with feasibility-dominance selection explores it: any feasible candidate
//! outranks any infeasible one, infeasible candidates compete on total
//! constraint violation, feasible ones on fitness.

use crate::ccdf::{delay_violation, CcdfResult};
use crate::delay_gf::build_all;
use crate::fixed_point::{solve, SolverOptions};
use crate::scenario::{AcEdcaConfig, MloScenario, PhyProfile};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Fitness contribution cap: P_loss is floored at 10^-16 so a collision-free
/// AC contributes at most 16.
pub const LOSS_FLOOR: f64 = 1e-16;

/// Per-AC fixed workload and QoS target; everything the GA may not touch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcWorkload {
    #[serde(default)]
    pub name: String,
    pub n_stations: u32,
    pub payload_bits: u64,
    pub dmax_ms: f64,
    pub epsilon: f64,
}

/// Optimization problem: workload, PHY, link budget, solver controls.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub phy: PhyProfile,
    pub num_links: u32,
    pub workload: Vec<AcWorkload>,
    pub solver: SolverOptions,
    /// Optional per-gene bound overrides (testing and pinning); defaults to
    /// the standard EDCA grid.
    pub bounds_override: Option<Vec<(u16, u16)>>,
}

impl Problem {
    /// Extract the workload of an existing scenario; its EDCA parameters
    /// become the search's concern rather than data.
    pub fn from_scenario(mlo: &MloScenario, solver: SolverOptions) -> Problem {
        Problem {
            phy: mlo.phy.clone(),
            num_links: mlo.links,
            workload: mlo
                .acs
                .iter()
                .map(|ac| AcWorkload {
                    name: ac.name.clone(),
                    n_stations: ac.n_stations,
                    payload_bits: ac.payload_bits,
                    dmax_ms: ac.dmax_ms,
                    epsilon: ac.epsilon,
                })
                .collect(),
            solver,
            bounds_override: None,
        }
    }
}

/// Whether the assignment genes are searched or everything shares link 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    SingleLink,
    MultiLink,
}

/// GA controls. Defaults follow the reference experiment configuration;
/// scale population and generations down for interactive runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: u32,
    pub crossover_rate: f64,
    pub elite_count: usize,
    /// Early stop after this many generations without improvement.
    pub stagnation_window: u32,
    /// Per-gene mutation probability; `None` means 1/num_genes.
    pub mutation_rate: Option<f64>,
    pub tournament_size: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 2000,
            generations: 500,
            crossover_rate: 0.8,
            elite_count: 80,
            stagnation_window: 50,
            mutation_rate: None,
            tournament_size: 3,
            seed: 42,
        }
    }
}

/// Genes per AC: CW_min exponent, CW ratio exponent, AIFSN, TXOP steps,
/// retry limit, and (multi-link only) the link id.
pub const GENES_PER_AC_SINGLE: usize = 5;
pub const GENES_PER_AC_MULTI: usize = 6;

/// Integer genotype. Layout is per-AC blocks in workload order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    pub genes: Vec<u16>,
}

/// Inclusive per-gene bounds for a problem/mode pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneSpec {
    pub bounds: Vec<(u16, u16)>,
    pub genes_per_ac: usize,
}

impl GeneSpec {
    pub fn new(problem: &Problem, mode: Mode) -> GeneSpec {
        let multi = mode == Mode::MultiLink && problem.num_links > 1;
        let genes_per_ac = if multi { GENES_PER_AC_MULTI } else { GENES_PER_AC_SINGLE };
        let mut bounds = Vec::with_capacity(problem.workload.len() * genes_per_ac);
        for _ in 0..problem.workload.len() {
            bounds.push((1, 10)); // cw_min = 2^e
            bounds.push((0, 9)); // cw_max = cw_min * 2^e, repaired to cap at 2^10
            bounds.push((2, 15)); // aifsn
            bounds.push((0, 256)); // txop = 32 us * steps
            bounds.push((4, 7)); // retry limit
            if multi {
                bounds.push((1, problem.num_links as u16));
            }
        }
        if let Some(over) = &problem.bounds_override {
            assert_eq!(over.len(), bounds.len(), "bounds override length");
            bounds = over.clone();
        }
        GeneSpec { bounds, genes_per_ac }
    }

    pub fn num_genes(&self) -> usize {
        self.bounds.len()
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Chromosome {
        let genes = self
            .bounds
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..=hi))
            .collect();
        let mut chrom = Chromosome { genes };
        self.repair(&mut chrom);
        chrom
    }

    /// Clamp the CW ratio exponent so CW_max never exceeds 2^10.
    fn repair(&self, chrom: &mut Chromosome) {
        for ac in 0..(chrom.genes.len() / self.genes_per_ac) {
            let base = ac * self.genes_per_ac;
            let cap = 10u16.saturating_sub(chrom.genes[base]);
            if chrom.genes[base + 1] > cap {
                chrom.genes[base + 1] = cap;
            }
        }
    }
}

impl Chromosome {
    /// Decode into a concrete scenario for evaluation or export.
    pub fn decode(&self, problem: &Problem, spec: &GeneSpec) -> MloScenario {
        let per = spec.genes_per_ac;
        let multi = per == GENES_PER_AC_MULTI;
        let mut acs = Vec::with_capacity(problem.workload.len());
        let mut assignment = Vec::with_capacity(problem.workload.len());
        for (i, w) in problem.workload.iter().enumerate() {
            let g = &self.genes[i * per..(i + 1) * per];
            let cw_min = 1u32 << g[0];
            acs.push(AcEdcaConfig {
                name: w.name.clone(),
                cw_min,
                cw_max: cw_min << g[1],
                aifsn: g[2] as u8,
                txop_us: 32.0 * g[3] as f64,
                retry_limit: g[4] as u8,
                n_stations: w.n_stations,
                payload_bits: w.payload_bits,
                dmax_ms: w.dmax_ms,
                epsilon: w.epsilon,
            });
            assignment.push(if multi { g[5] as u32 } else { 1 });
        }
        MloScenario {
            phy: problem.phy.clone(),
            links: if multi { problem.num_links } else { 1 },
            assignment,
            acs,
        }
    }
}

/// Expensive per-genotype results, independent of the epsilon targets.
#[derive(Debug, Clone)]
struct CachedEval {
    loss: Vec<f64>,
    violation: Vec<f64>,
    converged: bool,
}

/// Memo of decoded-genotype evaluations. Populations repeat genotypes
/// heavily and the epsilon sweep reuses everything.
#[derive(Default)]
pub struct EvalCache {
    map: HashMap<Vec<u16>, CachedEval>,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Outcome of evaluating one chromosome against the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    /// sum_i -log10(max(P_loss_i, floor)); -inf when a link solve failed.
    pub fitness: f64,
    pub loss: Vec<f64>,
    /// Pr(D_i >= D_max_i) per AC.
    pub violation_prob: Vec<f64>,
    /// Pr(D_i >= D_max_i) - epsilon_i per AC.
    pub margins: Vec<f64>,
    pub feasible: bool,
    pub converged: bool,
    /// Sum of positive margins (0 when feasible, +inf when not converged).
    pub total_violation: f64,
}

fn eval_raw(problem: &Problem, spec: &GeneSpec, chrom: &Chromosome) -> CachedEval {
    let scenario = chrom.decode(problem, spec);
    let i_total = scenario.acs.len();
    let mut loss = vec![f64::NAN; i_total];
    let mut violation = vec![f64::NAN; i_total];
    let links = match scenario.split_links() {
        Ok(links) => links,
        Err(_) => return CachedEval { loss, violation, converged: false },
    };
    let members = scenario.link_members();
    for (link, members) in links.iter().zip(&members) {
        if link.acs.is_empty() {
            continue;
        }
        let sol = match solve(link, &problem.solver) {
            Ok(sol) => sol,
            Err(_) => return CachedEval { loss, violation, converged: false },
        };
        let ctxs = match build_all(link, &sol) {
            Ok(ctxs) => ctxs,
            Err(_) => return CachedEval { loss, violation, converged: false },
        };
        for (pos, &orig) in members.iter().enumerate() {
            loss[orig] = sol.loss_prob[pos];
            let tail: Result<CcdfResult, _> =
                delay_violation(&ctxs[pos], &link.phy, link.acs[pos].dmax_ms);
            match tail {
                Ok(t) => violation[orig] = t.probability,
                Err(_) => return CachedEval { loss, violation, converged: false },
            }
        }
    }
    CachedEval { loss, violation, converged: true }
}

fn record_from(problem: &Problem, cached: &CachedEval) -> EvalRecord {
    if !cached.converged {
        return EvalRecord {
            fitness: f64::NEG_INFINITY,
            loss: cached.loss.clone(),
            violation_prob: cached.violation.clone(),
            margins: vec![f64::INFINITY; problem.workload.len()],
            feasible: false,
            converged: false,
            total_violation: f64::INFINITY,
        };
    }
    let fitness: f64 =
        cached.loss.iter().map(|&l| -(l.max(LOSS_FLOOR)).log10()).sum();
    let margins: Vec<f64> = cached
        .violation
        .iter()
        .zip(&problem.workload)
        .map(|(&v, w)| v - w.epsilon)
        .collect();
    let satisfied = |i: usize| problem.workload[i].epsilon >= 1.0 || margins[i] < 0.0;
    let feasible = (0..margins.len()).all(satisfied);
    let total_violation = (0..margins.len())
        .map(|i| {
            if satisfied(i) {
                0.0
            } else if margins[i].is_nan() {
                // a broken tail evaluation must not look like zero violation
                f64::INFINITY
            } else {
                margins[i].max(0.0)
            }
        })
        .sum();
    EvalRecord {
        fitness,
        loss: cached.loss.clone(),
        violation_prob: cached.violation.clone(),
        margins,
        feasible,
        converged: true,
        total_violation,
    }
}

/// Evaluate one chromosome (uncached).
pub fn evaluate(problem: &Problem, spec: &GeneSpec, chrom: &Chromosome) -> EvalRecord {
    record_from(problem, &eval_raw(problem, spec, chrom))
}

/// Feasibility-dominance order: `a` strictly better than `b`.
fn better(a: &EvalRecord, b: &EvalRecord) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => a.fitness > b.fitness,
        (false, false) => a.total_violation < b.total_violation,
    }
}

/// Per-generation statistics of a GA run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenStat {
    pub generation: u32,
    /// Fitness of the generation's dominance-best individual.
    pub best_fitness: f64,
    /// Mean fitness over converged individuals.
    pub mean_fitness: f64,
    pub feasible_fraction: f64,
    /// Running best feasible fitness; -inf until the first feasible
    /// individual appears.
    pub best_so_far: f64,
}

/// Result of a GA run.
#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Chromosome,
    pub record: EvalRecord,
    pub history: Vec<GenStat>,
    /// False when no feasible individual was ever seen; `best` is then the
    /// least-violating one.
    pub feasible_found: bool,
    pub mode: Mode,
}

/// Run the GA. `inject` seeds known-good genotypes into the initial
/// population (padded or truncated to the spec's gene count). Identical
/// inputs (problem, config, injections) produce identical outcomes.
pub fn ga_optimize(
    problem: &Problem,
    mode: Mode,
    ga: &GaConfig,
    cache: &mut EvalCache,
    inject: &[Chromosome],
) -> GaOutcome {
    let spec = GeneSpec::new(problem, mode);
    let num_genes = spec.num_genes();
    let mutation_rate = ga.mutation_rate.unwrap_or(1.0 / num_genes as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(ga.seed);

    let mut population: Vec<Chromosome> = Vec::with_capacity(ga.population);
    for src in inject.iter().take(ga.population) {
        let mut genes = src.genes.clone();
        genes.resize(num_genes, 0);
        // pad missing per-AC genes (e.g. link ids) with the lower bound
        for (g, &(lo, hi)) in genes.iter_mut().zip(&spec.bounds) {
            *g = (*g).clamp(lo, hi);
        }
        let mut chrom = Chromosome { genes };
        spec.repair(&mut chrom);
        population.push(chrom);
    }
    while population.len() < ga.population {
        population.push(spec.random(&mut rng));
    }

    let mut history = Vec::new();
    let mut best: Option<(Chromosome, EvalRecord)> = None;
    let mut best_feasible_fitness = f64::NEG_INFINITY;
    let mut stagnant = 0u32;

    for generation in 0..ga.generations {
        let records = eval_population(problem, &spec, &population, cache);

        let mut gen_best = 0;
        for i in 1..records.len() {
            if better(&records[i], &records[gen_best]) {
                gen_best = i;
            }
        }
        let improved = match &best {
            Some((_, record)) => better(&records[gen_best], record),
            None => true,
        };
        if improved {
            best = Some((population[gen_best].clone(), records[gen_best].clone()));
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        for r in &records {
            if r.feasible && r.fitness > best_feasible_fitness {
                best_feasible_fitness = r.fitness;
            }
        }

        let converged: Vec<f64> =
            records.iter().filter(|r| r.converged).map(|r| r.fitness).collect();
        let mean_fitness = if converged.is_empty() {
            f64::NEG_INFINITY
        } else {
            converged.iter().sum::<f64>() / converged.len() as f64
        };
        history.push(GenStat {
            generation,
            best_fitness: records[gen_best].fitness,
            mean_fitness,
            feasible_fraction: records.iter().filter(|r| r.feasible).count() as f64
                / records.len() as f64,
            best_so_far: best_feasible_fitness,
        });

        if stagnant >= ga.stagnation_window || generation + 1 == ga.generations {
            break;
        }

        // rank by dominance for elitism (stable: ties keep lower index)
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| {
            if better(&records[a], &records[b]) {
                std::cmp::Ordering::Less
            } else if better(&records[b], &records[a]) {
                std::cmp::Ordering::Greater
            } else {
                a.cmp(&b)
            }
        });
        let mut next: Vec<Chromosome> = order
            .iter()
            .take(ga.elite_count.min(population.len()))
            .map(|&i| population[i].clone())
            .collect();

        while next.len() < ga.population {
            let a = tournament(&records, ga.tournament_size, &mut rng);
            let b = tournament(&records, ga.tournament_size, &mut rng);
            let (mut child_a, mut child_b) =
                (population[a].clone(), population[b].clone());
            if rng.gen_bool(ga.crossover_rate) {
                for g in 0..num_genes {
                    if rng.gen_bool(0.5) {
                        std::mem::swap(&mut child_a.genes[g], &mut child_b.genes[g]);
                    }
                }
            }
            for child in [&mut child_a, &mut child_b] {
                for g in 0..num_genes {
                    if rng.gen_bool(mutation_rate) {
                        let (lo, hi) = spec.bounds[g];
                        child.genes[g] = rng.gen_range(lo..=hi);
                    }
                }
                spec.repair(child);
            }
            next.push(child_a);
            if next.len() < ga.population {
                next.push(child_b);
            }
        }
        population = next;
    }

    let (best, record) = best.expect("at least one generation ran");
    GaOutcome { feasible_found: record.feasible, best, record, history, mode }
}

fn tournament(records: &[EvalRecord], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.gen_range(0..records.len());
    for _ in 1..size.max(1) {
        let challenger = rng.gen_range(0..records.len());
        if better(&records[challenger], &records[winner]) {
            winner = challenger;
        }
    }
    winner
}

/// Evaluate a population against the cache; only unseen genotypes are
/// computed, in parallel. Results are deterministic regardless of thread
/// scheduling.
fn eval_population(
    problem: &Problem,
    spec: &GeneSpec,
    population: &[Chromosome],
    cache: &mut EvalCache,
) -> Vec<EvalRecord> {
    let mut missing: Vec<&Chromosome> = population
        .iter()
        .filter(|c| !cache.map.contains_key(&c.genes))
        .collect();
    missing.sort_by(|a, b| a.genes.cmp(&b.genes));
    missing.dedup_by(|a, b| a.genes == b.genes);
    let fresh: Vec<(Vec<u16>, CachedEval)> = missing
        .par_iter()
        .map(|c| (c.genes.clone(), eval_raw(problem, spec, c)))
        .collect();
    cache.map.extend(fresh);
    population
        .iter()
        .map(|c| record_from(problem, &cache.map[&c.genes]))
        .collect()
}

/// Side-by-side single-link vs multi-link optimization with identical
/// budgets and seeds. The single-link winner is injected into the
/// multi-link initial population (its assignment genes pinned to link 1),
/// so the multi-link outcome can never fall below it: the single-link space
/// is a subspace of the multi-link space.
pub struct ModeComparison {
    pub single: GaOutcome,
    pub multi: GaOutcome,
}

pub fn compare_modes(problem: &Problem, ga: &GaConfig, cache: &mut EvalCache) -> ModeComparison {
    let single = ga_optimize(problem, Mode::SingleLink, ga, cache, &[]);
    let mut seed_multi = single.best.clone();
    if problem.num_links > 1 {
        // extend each AC block with an explicit link-1 gene
        let per = GENES_PER_AC_SINGLE;
        let mut genes = Vec::with_capacity(seed_multi.genes.len() / per * (per + 1));
        for block in seed_multi.genes.chunks(per) {
            genes.extend_from_slice(block);
            genes.push(1);
        }
        seed_multi = Chromosome { genes };
    }
    let multi = ga_optimize(problem, Mode::MultiLink, ga, cache, &[seed_multi]);
    ModeComparison { single, multi }
}
