mod common;

use proptest::prelude::*;
use seqopt::metrics::classify_optima;
use seqopt::objective::{Benchmark, BenchmarkFamily};
use seqopt::sequential::{run_full_factorial, run_initial, run_iterative, SequentialConfig, DEFAULT_BUDGET_CAP};
use seqopt::{DesignSpace, EvaluationLedger, GroupingScheme, StartingBound};

fn groupings(space: &DesignSpace) -> Vec<GroupingScheme> {
    vec![
        GroupingScheme::ungrouped(space),
        GroupingScheme::element_grouped(space),
        GroupingScheme::field_grouped(space),
    ]
}

fn bounds(seed: u64) -> Vec<StartingBound> {
    vec![
        StartingBound::low(),
        StartingBound::middle(),
        StartingBound::upper(),
        StartingBound::random(seed),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Each pass requests |P_{z-1}| * prod(m_i) vectors per stage, and every
    /// stage front member keeps the non-stage values of a carried solution.
    #[test]
    fn stage_accounting_and_carry_forward(seed in any::<u64>()) {
        let space = common::random_space(seed, 5000);
        let b = Benchmark::new(BenchmarkFamily::RandomTable { seed, objectives: 2 }, &space).unwrap();
        for g in groupings(&space) {
            let cfg = SequentialConfig::new(g.clone(), StartingBound::random(seed));
            let ledger = EvaluationLedger::new();
            let initial = run_initial(&space, &cfg, &ledger, &b).unwrap();
            let iterative = run_iterative(&space, &initial, &cfg, &ledger, &b).unwrap();
            let mut expected = 0u128;
            for pass in initial.passes.iter().chain(&iterative.passes) {
                let mut carried = vec![pass.start.clone()];
                for (stage, group) in pass.stages.iter().zip(g.stages()) {
                    let count = carried.len() as u128 * space.group_count(group);
                    prop_assert_eq!(stage.generated_count as u128, count);
                    expected += count;
                    for v in stage.pareto.vectors() {
                        let ok = carried.iter().any(|c| {
                            (0..space.len()).all(|i| group.contains(&i) || c.get(i) == v.get(i))
                        });
                        prop_assert!(ok);
                    }
                    carried = stage.pareto.vectors().cloned().collect();
                }
            }
            prop_assert_eq!(ledger.raw_requests() as u128, expected);
        }
    }
}

#[test]
fn single_group_equals_full_factorial() {
    for seed in 0..40 {
        let space = common::random_space(seed, 4000);
        let b = Benchmark::new(BenchmarkFamily::RandomTable { seed, objectives: 2 + (seed % 2) as usize }, &space).unwrap();
        let global = run_full_factorial(&space, &EvaluationLedger::new(), &b, DEFAULT_BUDGET_CAP).unwrap();
        let cfg = SequentialConfig::new(GroupingScheme::single_group(&space), StartingBound::middle());
        let run = run_initial(&space, &cfg, &EvaluationLedger::new(), &b).unwrap();
        assert_eq!(run.final_set, global, "seed {seed}");
    }
}

#[test]
fn ungrouped_search_is_exact_on_separable_objectives() {
    for seed in 0..40 {
        let space = common::random_space(seed, 4000);
        let family = BenchmarkFamily::Separable { seed, objectives: 2, interaction_weight: 0.0 };
        let b = Benchmark::new(family, &space).unwrap();
        let global = run_full_factorial(&space, &EvaluationLedger::new(), &b, DEFAULT_BUDGET_CAP).unwrap();
        for bound in bounds(seed) {
            let cfg = SequentialConfig::new(GroupingScheme::ungrouped(&space), bound);
            let run = run_initial(&space, &cfg, &EvaluationLedger::new(), &b).unwrap();
            let found = classify_optima(&run.final_set, &global).unwrap().global_found.len();
            assert_eq!(found, global.len(), "seed {seed}");
        }
    }
}

#[test]
fn iterative_run_keeps_initial_global_optima() {
    for seed in 0..25 {
        let space = common::random_space(seed, 4000);
        let b = Benchmark::new(BenchmarkFamily::RandomTable { seed, objectives: 2 }, &space).unwrap();
        let global = run_full_factorial(&space, &EvaluationLedger::new(), &b, DEFAULT_BUDGET_CAP).unwrap();
        for g in groupings(&space) {
            for bound in bounds(seed) {
                let cfg = SequentialConfig::new(g.clone(), bound);
                let ledger = EvaluationLedger::new();
                let initial = run_initial(&space, &cfg, &ledger, &b).unwrap();
                let iterative = run_iterative(&space, &initial, &cfg, &ledger, &b).unwrap();
                let before = classify_optima(&initial.final_set, &global).unwrap().global_found;
                let after = classify_optima(&iterative.final_set, &global).unwrap().global_found;
                assert!(before.iter().all(|v| after.contains(v)), "seed {seed} {}", g.name);
            }
        }
    }
}

#[test]
fn deeper_iteration_never_loses_optima() {
    for seed in 0..15 {
        let space = common::random_space(seed, 3000);
        let b = Benchmark::new(BenchmarkFamily::RandomTable { seed, objectives: 2 }, &space).unwrap();
        let global = run_full_factorial(&space, &EvaluationLedger::new(), &b, DEFAULT_BUDGET_CAP).unwrap();
        let mut last = 0;
        for depth in 0..4 {
            let cfg = SequentialConfig {
                iterative_depth: depth,
                ..SequentialConfig::new(GroupingScheme::ungrouped(&space), StartingBound::low())
            };
            let ledger = EvaluationLedger::new();
            let initial = run_initial(&space, &cfg, &ledger, &b).unwrap();
            let set = if depth == 0 {
                initial.final_set
            } else {
                run_iterative(&space, &initial, &cfg, &ledger, &b).unwrap().final_set
            };
            let found = classify_optima(&set, &global).unwrap().global_found.len();
            assert!(found >= last, "seed {seed} depth {depth}");
            last = found;
        }
    }
}
