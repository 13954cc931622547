//! Sequential design optimization: staged full-factorial searches where
//! each stage carries only its Pareto set forward, with not-yet-optimized
//! variables held at the baseline. Includes the iterative run and the
//! full-factorial oracle.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::{EvaluationLedger, LedgerCounts, Objective};
use crate::pareto::{extract_nondominated, ParetoSet};
use crate::space::{DesignSpace, DesignVector, GroupingScheme, PartialAssignment, StartingBound};

/// Default refusal threshold for [`run_full_factorial`].
pub const DEFAULT_BUDGET_CAP: u128 = 20_000_000;

const FULL_FACTORIAL_CHUNK: usize = 1 << 16;

#[derive(Debug, Clone)]
pub struct SequentialConfig {
    pub grouping: GroupingScheme,
    pub bound: StartingBound,
    /// 0 runs the initial pass only.
    pub iterative_depth: usize,
}

impl SequentialConfig {
    pub fn new(grouping: GroupingScheme, bound: StartingBound) -> Self {
        SequentialConfig {
            grouping,
            bound,
            iterative_depth: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    /// 1-based stage index.
    pub stage: usize,
    pub generated_count: u64,
    pub pareto: ParetoSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Initial,
    Iterative { depth: usize },
}

/// One sequential pass through every stage from a single starting point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassTrace {
    pub provenance: Provenance,
    pub start: DesignVector,
    pub stages: Vec<StageResult>,
    pub final_set: ParetoSet,
}

impl PassTrace {
    pub fn generated_total(&self) -> u64 {
        self.stages.iter().map(|s| s.generated_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub passes: Vec<PassTrace>,
    /// Ledger counters when the run finished (cumulative over the ledger).
    pub counts: LedgerCounts,
    pub final_set: ParetoSet,
}

impl RunTrace {
    pub fn generated_total(&self) -> u64 {
        self.passes.iter().map(PassTrace::generated_total).sum()
    }
}

/// Error of a run that stopped part-way; `partial` holds the completed work.
#[derive(Debug)]
pub struct AbortedRun {
    pub partial: RunTrace,
    pub source: Error,
}

impl std::fmt::Display for AbortedRun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "run aborted after {} pass(es): {}",
            self.partial.passes.len(),
            self.source
        )
    }
}

impl std::error::Error for AbortedRun {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl From<AbortedRun> for Error {
    fn from(a: AbortedRun) -> Self {
        a.source
    }
}

/// Runs one stage: every carried solution combined with every option
/// combination of `group`, evaluated through the ledger, then reduced to its
/// non-dominated subset.
pub fn run_stage<B: Objective + ?Sized>(
    space: &DesignSpace,
    stage: usize,
    carried: &[DesignVector],
    group: &[usize],
    ledger: &EvaluationLedger,
    backend: &B,
) -> Result<StageResult> {
    if carried.is_empty() {
        return Err(Error::Contract(format!(
            "stage {stage} received an empty set of carried solutions"
        )));
    }
    let per_solution = space.group_count(group);
    let mut candidates = Vec::with_capacity((carried.len() as u128 * per_solution) as usize);
    for c in carried {
        let fixed = PartialAssignment::from_vector_except(c, group);
        candidates.extend(space.enumerate_stage(group, &fixed)?);
    }
    let objectives = ledger.evaluate_batch(backend, &candidates)?;
    let generated_count = candidates.len() as u64;
    let pareto = extract_nondominated(candidates.into_iter().zip(objectives));
    Ok(StageResult {
        stage,
        generated_count,
        pareto,
    })
}

/// Runs every stage of `grouping` starting from `start`. On failure returns
/// the completed stages with the error.
pub fn sequential_pass<B: Objective + ?Sized>(
    space: &DesignSpace,
    grouping: &GroupingScheme,
    start: &DesignVector,
    provenance: Provenance,
    ledger: &EvaluationLedger,
    backend: &B,
) -> std::result::Result<PassTrace, (Vec<StageResult>, Error)> {
    if let Err(e) = space.check_vector(start) {
        return Err((Vec::new(), e));
    }
    let mut stages: Vec<StageResult> = Vec::with_capacity(grouping.stage_count());
    let mut carried = vec![start.clone()];
    for (z, group) in grouping.stages().iter().enumerate() {
        match run_stage(space, z + 1, &carried, group, ledger, backend) {
            Ok(result) => {
                carried = result.pareto.vectors().cloned().collect();
                stages.push(result);
            }
            Err(e) => return Err((stages, e)),
        }
    }
    let final_set = stages
        .last()
        .map(|s| s.pareto.clone())
        .unwrap_or_default();
    Ok(PassTrace {
        provenance,
        start: start.clone(),
        stages,
        final_set,
    })
}

/// Initial run: one pass from the resolved starting bound.
pub fn run_initial<B: Objective + ?Sized>(
    space: &DesignSpace,
    config: &SequentialConfig,
    ledger: &EvaluationLedger,
    backend: &B,
) -> std::result::Result<RunTrace, AbortedRun> {
    let abort = |passes, source| AbortedRun {
        partial: RunTrace {
            passes,
            counts: ledger.counts(),
            final_set: ParetoSet::default(),
        },
        source,
    };
    let start = space
        .resolve_bound(&config.bound)
        .map_err(|e| abort(Vec::new(), e))?;
    match sequential_pass(space, &config.grouping, &start, Provenance::Initial, ledger, backend) {
        Ok(pass) => Ok(RunTrace {
            final_set: pass.final_set.clone(),
            passes: vec![pass],
            counts: ledger.counts(),
        }),
        Err((stages, e)) => Err(abort(
            vec![PassTrace {
                provenance: Provenance::Initial,
                start,
                stages,
                final_set: ParetoSet::default(),
            }],
            e,
        )),
    }
}

/// Iterative run: one full pass from every solution of the initial final
/// set, pooled with the initial optima and reduced to the non-dominated set.
/// With `iterative_depth > 1` the pooled front seeds further rounds; starting
/// points already used are not re-run.
pub fn run_iterative<B: Objective + ?Sized>(
    space: &DesignSpace,
    initial: &RunTrace,
    config: &SequentialConfig,
    ledger: &EvaluationLedger,
    backend: &B,
) -> std::result::Result<RunTrace, AbortedRun> {
    let mut pool: Vec<_> = initial.final_set.entries().to_vec();
    let mut final_set = initial.final_set.clone();
    let mut used: HashSet<DesignVector> = HashSet::new();
    let mut passes = Vec::new();
    for depth in 1..=config.iterative_depth {
        let starts: Vec<DesignVector> = final_set
            .vectors()
            .filter(|v| !used.contains(*v))
            .cloned()
            .collect();
        if starts.is_empty() {
            break;
        }
        for start in starts {
            let provenance = Provenance::Iterative { depth };
            match sequential_pass(space, &config.grouping, &start, provenance.clone(), ledger, backend) {
                Ok(pass) => {
                    pool.extend(pass.final_set.entries().iter().cloned());
                    passes.push(pass);
                }
                Err((stages, source)) => {
                    passes.push(PassTrace {
                        provenance,
                        start,
                        stages,
                        final_set: ParetoSet::default(),
                    });
                    return Err(AbortedRun {
                        partial: RunTrace {
                            passes,
                            counts: ledger.counts(),
                            final_set,
                        },
                        source,
                    });
                }
            }
            used.insert(start);
        }
        final_set = extract_nondominated(pool.iter().cloned());
        pool = final_set.entries().to_vec();
    }
    Ok(RunTrace {
        passes,
        counts: ledger.counts(),
        final_set,
    })
}

/// Evaluates every vector of the space and returns the global Pareto set.
pub fn run_full_factorial<B: Objective + ?Sized>(
    space: &DesignSpace,
    ledger: &EvaluationLedger,
    backend: &B,
    budget_cap: u128,
) -> Result<ParetoSet> {
    let required = space.combination_count();
    if required > budget_cap {
        return Err(Error::BudgetExceeded {
            required,
            cap: budget_cap,
        });
    }
    let mut front = ParetoSet::default();
    let mut iter = space.enumerate_all();
    loop {
        let chunk: Vec<DesignVector> = iter.by_ref().take(FULL_FACTORIAL_CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let objectives = ledger.evaluate_batch(backend, &chunk)?;
        front = extract_nondominated(
            front
                .into_entries()
                .into_iter()
                .chain(chunk.into_iter().zip(objectives)),
        );
    }
    Ok(front)
}
