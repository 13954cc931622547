//! NSGA-II baseline on integer genomes (one gene per design variable) and the
//! repeated-run protocol that keeps the best runs of a seed schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{classify_optima, performance_difference};
use crate::objective::{CountMode, EvaluationLedger, LedgerCounts, Objective, ObjectiveVector};
use crate::pareto::{extract_nondominated, nondominated_sort_with_crowding, ParetoSet};
use crate::space::{DesignSpace, DesignVector, StartingBound};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub tournament_size: usize,
    /// Per-gene swap probability of uniform crossover.
    pub crossover_prob: f64,
    /// Per-gene probability of resampling to a different option.
    pub mutation_prob: f64,
    /// Evaluation budget; the loop stops at the first generation boundary
    /// where the counter reaches it.
    pub budget: u64,
    pub count_mode: CountMode,
    pub seed: u64,
    /// Individual placed in the initial population.
    pub starting_bound: StartingBound,
    /// Stop after this many consecutive generations without a new unique
    /// evaluation (the budget may be unreachable once the space is exhausted).
    pub stall_generations: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 30,
            tournament_size: 2,
            crossover_prob: 0.5,
            mutation_prob: 0.1,
            budget: 3000,
            count_mode: CountMode::Unique,
            seed: 0,
            starting_bound: StartingBound::low(),
            stall_generations: 200,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.population_size < 2 {
            v.push("population_size must be at least 2".to_string());
        }
        if self.tournament_size < 1 {
            v.push("tournament_size must be at least 1".to_string());
        }
        for (name, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                v.push(format!("{name} must lie in [0, 1]"));
            }
        }
        if !v.is_empty() {
            return Err(Error::Config(v));
        }
        if self.budget < self.population_size as u64 {
            return Err(Error::BudgetTooSmall {
                budget: self.budget,
                needed: self.population_size as u64,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub genome: DesignVector,
    pub objectives: ObjectiveVector,
    pub rank: usize,
    pub crowding: f64,
}

/// Each gene independently, with probability `rate`, moves to a uniformly
/// chosen *other* option. Single-option genes never change.
pub fn mutate<R: Rng + ?Sized>(
    space: &DesignSpace,
    genome: &DesignVector,
    rate: f64,
    rng: &mut R,
) -> DesignVector {
    let genes = genome
        .indices()
        .iter()
        .zip(space.variables())
        .map(|(&g, var)| {
            let m = var.len() as u16;
            if m < 2 || !rng.gen_bool(rate) {
                return g;
            }
            let r = rng.gen_range(0..m - 1);
            if r >= g {
                r + 1
            } else {
                r
            }
        })
        .collect::<Vec<u16>>();
    DesignVector::new(genes)
}

/// Uniform crossover: per gene, with probability `p`, the children swap
/// which parent they inherit from.
pub fn crossover_uniform<R: Rng + ?Sized>(
    a: &DesignVector,
    b: &DesignVector,
    p: f64,
    rng: &mut R,
) -> (DesignVector, DesignVector) {
    let mut c1 = a.indices().to_vec();
    let mut c2 = b.indices().to_vec();
    for i in 0..c1.len() {
        if rng.gen_bool(p) {
            std::mem::swap(&mut c1[i], &mut c2[i]);
        }
    }
    (DesignVector::new(c1), DesignVector::new(c2))
}

fn ranked(genomes: Vec<DesignVector>, objectives: Vec<ObjectiveVector>) -> Vec<Individual> {
    let r = nondominated_sort_with_crowding(&objectives);
    genomes
        .into_iter()
        .zip(objectives)
        .enumerate()
        .map(|(i, (genome, objectives))| Individual {
            genome,
            objectives,
            rank: r.rank[i],
            crowding: r.crowding[i],
        })
        .collect()
}

/// (μ+λ) survival: whole fronts while they fit, then the most crowded-apart
/// members of the splitting front. Survivors carry ranks and crowding
/// recomputed over the pooled population.
pub fn environmental_selection(pool: Vec<Individual>, size: usize) -> Vec<Individual> {
    let objectives: Vec<ObjectiveVector> = pool.iter().map(|i| i.objectives.clone()).collect();
    let r = nondominated_sort_with_crowding(&objectives);
    let mut chosen: Vec<usize> = Vec::with_capacity(size);
    for front in &r.fronts {
        if chosen.len() + front.len() <= size {
            chosen.extend(front);
        } else {
            let mut rest = front.clone();
            rest.sort_by(|&a, &b| r.crowding[b].total_cmp(&r.crowding[a]).then(a.cmp(&b)));
            chosen.extend(rest.into_iter().take(size - chosen.len()));
        }
        if chosen.len() >= size {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    chosen
        .into_iter()
        .map(|i| {
            let mut ind = slots[i].take().expect("each index chosen once");
            ind.rank = r.rank[i];
            ind.crowding = r.crowding[i];
            ind
        })
        .collect()
}

/// Lower rank wins, then larger crowding, then a coin flip.
fn tournament<'a, R: Rng + ?Sized>(
    population: &'a [Individual],
    size: usize,
    rng: &mut R,
) -> &'a Individual {
    let mut best = &population[rng.gen_range(0..population.len())];
    for _ in 1..size {
        let other = &population[rng.gen_range(0..population.len())];
        let better = match other.rank.cmp(&best.rank) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => match other.crowding.total_cmp(&best.crowding) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => rng.gen_bool(0.5),
            },
        };
        if better {
            best = other;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaRun {
    pub seed: u64,
    pub generations: usize,
    pub counts: LedgerCounts,
    /// First front of the final population.
    pub final_set: ParetoSet,
}

/// Runs NSGA-II with a fresh ledger.
pub fn run_nsga2<B: Objective + ?Sized>(space: &DesignSpace, backend: &B, ga: &GaConfig) -> Result<GaRun> {
    ga.validate()?;
    let ledger = EvaluationLedger::new();
    let mut rng = ChaCha8Rng::seed_from_u64(ga.seed);
    let n = ga.population_size;
    let space_size = space.combination_count();

    let mut genomes = Vec::with_capacity(n);
    genomes.push(space.resolve_bound(&ga.starting_bound)?);
    let cards = space.cardinalities();
    while genomes.len() < n {
        let g: Vec<u16> = cards.iter().map(|&m| rng.gen_range(0..m) as u16).collect();
        genomes.push(DesignVector::new(g));
    }
    let objectives = ledger.evaluate_batch(backend, &genomes)?;
    let mut population = ranked(genomes, objectives);

    let mut generations = 0;
    let mut stall = 0;
    let mut last_unique = ledger.unique_evaluations();
    while ledger.counts().get(ga.count_mode) < ga.budget {
        if last_unique as u128 >= space_size || stall >= ga.stall_generations {
            break;
        }
        let mut children = Vec::with_capacity(n + 1);
        while children.len() < n {
            let p1 = tournament(&population, ga.tournament_size, &mut rng).genome.clone();
            let p2 = tournament(&population, ga.tournament_size, &mut rng).genome.clone();
            let (c1, c2) = crossover_uniform(&p1, &p2, ga.crossover_prob, &mut rng);
            children.push(mutate(space, &c1, ga.mutation_prob, &mut rng));
            children.push(mutate(space, &c2, ga.mutation_prob, &mut rng));
        }
        children.truncate(n);
        let child_obj = ledger.evaluate_batch(backend, &children)?;
        let mut pool = population;
        pool.extend(children.into_iter().zip(child_obj).map(|(genome, objectives)| Individual {
            genome,
            objectives,
            rank: 0,
            crowding: 0.0,
        }));
        population = environmental_selection(pool, n);
        generations += 1;

        let unique = ledger.unique_evaluations();
        stall = if unique > last_unique { 0 } else { stall + 1 };
        last_unique = unique;
    }

    let final_set = extract_nondominated(
        population
            .iter()
            .filter(|i| i.rank == 0)
            .map(|i| (i.genome.clone(), i.objectives.clone())),
    );
    Ok(GaRun {
        seed: ga.seed,
        generations,
        counts: ledger.counts(),
        final_set,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRun {
    pub run_index: usize,
    /// `None` without a global set.
    pub n_global_found: Option<usize>,
    /// `None` without a global set or when either set is empty; ranks last.
    pub mean_abs_percentage_difference: Option<f64>,
    pub run: GaRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    /// Every run, in run-index order.
    pub runs: Vec<RankedRun>,
    /// Indices of the kept runs, best first.
    pub kept: Vec<usize>,
}

impl ProtocolResult {
    pub fn kept_runs(&self) -> impl Iterator<Item = &RankedRun> {
        self.kept.iter().map(|&i| &self.runs[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub runs: usize,
    pub keep: usize,
    /// Run `i` uses seed `ga.seed + i * seed_stride`.
    pub seed_stride: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            runs: 20,
            keep: 4,
            seed_stride: 1,
        }
    }
}

/// Executes `runs` seeded runs (in parallel on the current rayon pool) and
/// keeps the best `keep`, ranked by global optima found, then by mean
/// absolute percentage difference, then by run index. Without a global set
/// the ranking falls back to run index.
pub fn repeated_run_protocol<B: Objective + ?Sized>(
    space: &DesignSpace,
    backend: &B,
    ga: &GaConfig,
    protocol: ProtocolConfig,
    global: Option<&ParetoSet>,
) -> Result<ProtocolResult> {
    if protocol.runs < protocol.keep {
        return Err(Error::Config(vec![format!(
            "protocol keeps {} of {} runs",
            protocol.keep, protocol.runs
        )]));
    }
    ga.validate()?;
    let runs: Vec<RankedRun> = (0..protocol.runs)
        .into_par_iter()
        .map(|i| {
            let cfg = GaConfig {
                seed: ga.seed.wrapping_add(protocol.seed_stride.wrapping_mul(i as u64)),
                ..ga.clone()
            };
            let run = run_nsga2(space, backend, &cfg)?;
            let (found, diff) = match global {
                Some(g) => {
                    let found = classify_optima(&run.final_set, g)?.global_found.len();
                    let diff = if run.final_set.is_empty() || g.is_empty() {
                        None
                    } else {
                        Some(performance_difference(&run.final_set, g, space)?.mean_abs_percentage())
                    };
                    (Some(found), diff)
                }
                None => (None, None),
            };
            Ok(RankedRun {
                run_index: i,
                n_global_found: found,
                mean_abs_percentage_difference: diff,
                run,
            })
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| {
        let (a, b) = (&runs[a], &runs[b]);
        let diff = |r: &RankedRun| r.mean_abs_percentage_difference.unwrap_or(f64::INFINITY);
        b.n_global_found
            .unwrap_or(0)
            .cmp(&a.n_global_found.unwrap_or(0))
            .then_with(|| diff(a).total_cmp(&diff(b)))
            .then(a.run_index.cmp(&b.run_index))
    });
    order.truncate(protocol.keep);
    Ok(ProtocolResult { runs, kept: order })
}
