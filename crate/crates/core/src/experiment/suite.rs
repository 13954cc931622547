//! The experiment suite: oracle, grouping × bound sequential runs, the
//! NSGA-II protocol and Morris screening, collected into one report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Experiment;
use crate::error::{Error, Result};
use crate::metrics::{metrics_report, MetricsReport};
use crate::morris::{elementary_effects, generate_trajectories, MorrisResult};
use crate::nsga2::{repeated_run_protocol, GaConfig};
use crate::objective::{CountMode, EvaluationLedger, Objective};
use crate::pareto::ParetoSet;
use crate::sequential::{run_full_factorial, run_initial, run_iterative, RunTrace, SequentialConfig};
use crate::space::{DesignSpace, DesignVector, GroupingScheme, StartingBound, VariableSpec};

/// Which parts of the suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteParts {
    pub oracle: bool,
    pub sequential: bool,
    pub nsga2: bool,
    pub morris: bool,
}

impl SuiteParts {
    pub const ALL: SuiteParts = SuiteParts {
        oracle: true,
        sequential: true,
        nsga2: true,
        morris: true,
    };

    pub const NONE: SuiteParts = SuiteParts {
        oracle: false,
        sequential: false,
        nsga2: false,
        morris: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Initial,
    Iterative,
}

impl RunKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RunKind::Initial => "initial",
            RunKind::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleStatus {
    Evaluated,
    Disabled,
    /// The space exceeds the configured budget cap.
    Refused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub status: OracleStatus,
    pub evaluations: Option<u64>,
    pub pareto: Option<ParetoSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    /// 0 for the initial pass, then one per iterative pass in run order.
    pub pass: usize,
    pub stage: usize,
    pub variables: Vec<String>,
    /// Solutions carried into the stage.
    pub carried: usize,
    pub generated_count: u64,
    pub pareto_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialRow {
    pub grouping: String,
    pub bound: String,
    pub run: RunKind,
    pub start: DesignVector,
    pub stages: Vec<StageSummary>,
    /// Vectors generated by this run's own passes.
    pub generated_total: u64,
    pub final_set: ParetoSet,
    /// Counts are cumulative over the configuration's ledger, so the
    /// iterative row includes the initial run.
    pub metrics: MetricsReport,
}

impl SequentialRow {
    pub fn key(&self) -> String {
        format!("{}_{}_{}", self.grouping, self.bound, self.run.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsgaRunRow {
    pub run_index: usize,
    pub seed: u64,
    pub generations: usize,
    pub final_set: ParetoSet,
    pub metrics: MetricsReport,
    /// Position among the kept runs (0 = best).
    pub kept_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsgaOutcome {
    pub budget: u64,
    /// Where the budget came from: `config` or the sequential row it mirrors.
    pub budget_source: String,
    pub starting_bound: DesignVector,
    pub runs: Vec<NsgaRunRow>,
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub version: String,
    pub seed: u64,
    pub count_mode: CountMode,
    pub variables: Vec<VariableSpec>,
    pub combination_count: u64,
    pub objective_names: Vec<String>,
    pub oracle: OracleOutcome,
    pub sequential: Vec<SequentialRow>,
    pub nsga2: Option<NsgaOutcome>,
    pub morris: Option<MorrisResult>,
}

impl SuiteReport {
    pub fn space(&self) -> Result<DesignSpace> {
        DesignSpace::new(self.variables.clone())
    }

    pub fn global(&self) -> Option<&ParetoSet> {
        self.oracle.pareto.as_ref()
    }

    pub fn row(&self, grouping: &str, bound: &str, run: RunKind) -> Option<&SequentialRow> {
        self.sequential
            .iter()
            .find(|r| r.grouping == grouping && r.bound == bound && r.run == run)
    }
}

/// Runs the requested parts on a pool of `experiment.jobs` threads. Output
/// does not depend on the thread count.
pub fn run_suite(experiment: &Experiment, parts: SuiteParts) -> Result<SuiteReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(experiment.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Contract(format!("thread pool: {e}")))?;
    pool.install(|| run_suite_inner(experiment, parts))
}

fn run_suite_inner(exp: &Experiment, parts: SuiteParts) -> Result<SuiteReport> {
    let space = &exp.space;
    let combos = u64::try_from(space.combination_count())
        .map_err(|_| Error::Contract("design space too large".into()))?;

    let oracle = match exp.full_factorial {
        Some(cap) if parts.oracle => {
            if space.combination_count() > cap {
                log::warn!("full factorial of {combos} exceeds the cap of {cap}; metrics run without an oracle");
                OracleOutcome {
                    status: OracleStatus::Refused,
                    evaluations: None,
                    pareto: None,
                }
            } else {
                log::info!("full factorial: {combos} evaluations");
                let ledger = EvaluationLedger::new();
                let front = run_full_factorial(space, &ledger, &exp.backend, cap)?;
                OracleOutcome {
                    status: OracleStatus::Evaluated,
                    evaluations: Some(ledger.unique_evaluations()),
                    pareto: Some(front),
                }
            }
        }
        _ => OracleOutcome {
            status: OracleStatus::Disabled,
            evaluations: None,
            pareto: None,
        },
    };
    let global = oracle.pareto.as_ref();

    let sequential = if parts.sequential || (parts.nsga2 && exp.nsga2_budget.is_none()) {
        let jobs: Vec<(&GroupingScheme, &(String, StartingBound))> = exp
            .groupings
            .iter()
            .flat_map(|g| exp.bounds.iter().map(move |b| (g, b)))
            .collect();
        let rows: Vec<Vec<SequentialRow>> = jobs
            .par_iter()
            .map(|(g, (label, bound))| sequential_rows(exp, g, label, bound, global))
            .collect::<Result<_>>()?;
        rows.into_iter().flatten().collect()
    } else {
        Vec::new()
    };

    let nsga2 = match &exp.nsga2 {
        Some((ga, protocol)) if parts.nsga2 => {
            let (budget, source) = nsga_budget(exp, &sequential)?;
            log::info!("nsga2: {} runs with budget {budget} ({source})", protocol.runs);
            let ga = GaConfig { budget, ..ga.clone() };
            let result = repeated_run_protocol(space, &exp.backend, &ga, *protocol, global)?;
            let runs = result
                .runs
                .iter()
                .map(|r| {
                    Ok(NsgaRunRow {
                        run_index: r.run_index,
                        seed: r.run.seed,
                        generations: r.run.generations,
                        final_set: r.run.final_set.clone(),
                        metrics: metrics_report(space, &r.run.final_set, global, r.run.counts, exp.count_mode)?,
                        kept_rank: result.kept.iter().position(|&k| k == r.run_index),
                    })
                })
                .collect::<Result<_>>()?;
            Some(NsgaOutcome {
                budget,
                budget_source: source,
                starting_bound: space.resolve_bound(&ga.starting_bound)?,
                runs,
                kept: result.kept,
            })
        }
        _ => None,
    };

    let morris = match &exp.morris {
        Some(plan) if parts.morris => {
            let trajectories = generate_trajectories(space, plan)?;
            Some(elementary_effects(space, &trajectories, &exp.backend, &EvaluationLedger::new())?)
        }
        _ => None,
    };

    Ok(SuiteReport {
        name: exp.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: exp.seed,
        count_mode: exp.count_mode,
        variables: space.variables().to_vec(),
        combination_count: combos,
        objective_names: exp.backend.objective_names(),
        oracle,
        sequential: if parts.sequential { sequential } else { Vec::new() },
        nsga2,
        morris,
    })
}

fn stage_summaries(space: &DesignSpace, grouping: &GroupingScheme, trace: &RunTrace, first_pass: usize) -> Vec<StageSummary> {
    let mut out = Vec::new();
    for (p, pass) in trace.passes.iter().enumerate() {
        let mut carried = 1;
        for (s, group) in pass.stages.iter().zip(grouping.stages()) {
            out.push(StageSummary {
                pass: first_pass + p,
                stage: s.stage,
                variables: group.iter().map(|&i| space.variable(i).name.clone()).collect(),
                carried,
                generated_count: s.generated_count,
                pareto_size: s.pareto.len(),
            });
            carried = s.pareto.len();
        }
    }
    out
}

fn sequential_rows(
    exp: &Experiment,
    grouping: &GroupingScheme,
    label: &str,
    bound: &StartingBound,
    global: Option<&ParetoSet>,
) -> Result<Vec<SequentialRow>> {
    let space = &exp.space;
    let cfg = SequentialConfig {
        grouping: grouping.clone(),
        bound: bound.clone(),
        iterative_depth: exp.iterative_depth,
    };
    let ledger = EvaluationLedger::new();
    let initial = run_initial(space, &cfg, &ledger, &exp.backend)?;
    let start = initial.passes[0].start.clone();
    let row = |run: RunKind, trace: &RunTrace, first_pass: usize| -> Result<SequentialRow> {
        Ok(SequentialRow {
            grouping: grouping.name.clone(),
            bound: label.to_string(),
            run,
            start: start.clone(),
            stages: stage_summaries(space, grouping, trace, first_pass),
            generated_total: trace.generated_total(),
            final_set: trace.final_set.clone(),
            metrics: metrics_report(space, &trace.final_set, global, trace.counts, exp.count_mode)?,
        })
    };
    let mut rows = vec![row(RunKind::Initial, &initial, 0)?];
    if exp.iterative_depth > 0 {
        let iterative = run_iterative(space, &initial, &cfg, &ledger, &exp.backend)?;
        rows.push(row(RunKind::Iterative, &iterative, 1)?);
    }
    Ok(rows)
}

/// The configured budget, else the largest field-grouped iterative count
/// (falling back to any iterative, then any sequential row).
fn nsga_budget(exp: &Experiment, rows: &[SequentialRow]) -> Result<(u64, String)> {
    if let Some(b) = exp.nsga2_budget {
        return Ok((b, "config".into()));
    }
    let pick = |filter: &dyn Fn(&SequentialRow) -> bool| {
        rows.iter()
            .rev()
            .filter(|r| filter(r))
            .max_by_key(|r| r.metrics_count(exp.count_mode))
            .map(|r| (r.metrics_count(exp.count_mode), r.key()))
    };
    pick(&|r| r.grouping == "field" && r.run == RunKind::Iterative)
        .or_else(|| pick(&|r| r.run == RunKind::Iterative))
        .or_else(|| pick(&|_| true))
        .ok_or_else(|| Error::Config(vec!["nsga2.budget is required when no sequential runs are made".into()]))
}

impl SequentialRow {
    fn metrics_count(&self, mode: CountMode) -> u64 {
        match mode {
            CountMode::Unique => self.metrics.unique_evaluations,
            CountMode::Raw => self.metrics.raw_requests,
        }
    }
}
