//! Evaluation of a search result against the full-factorial global set:
//! optima classification, effectiveness, computational load, and the
//! per-solution performance difference to the nearest global optimum in the
//! normalized variable domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{CountMode, LedgerCounts};
use crate::pareto::ParetoSet;
use crate::space::{DesignSpace, DesignVector};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Classification {
    /// Search solutions whose design vector is a global optimum.
    pub global_found: Vec<DesignVector>,
    /// Search solutions absent from the global set.
    pub search_only: Vec<DesignVector>,
}

fn check_compatible(search: &ParetoSet, global: &ParetoSet) -> Result<()> {
    let arity = |s: &ParetoSet| s.entries().first().map(|(v, f)| (v.len(), f.len()));
    if let (Some((sv, sf)), Some((gv, gf))) = (arity(search), arity(global)) {
        if sv != gv {
            return Err(Error::Contract(format!(
                "search vectors have {sv} variables, global vectors have {gv}"
            )));
        }
        if sf != gf {
            return Err(Error::ArityMismatch { left: sf, right: gf });
        }
    }
    Ok(())
}

/// Splits search solutions by design-vector membership in the global set.
pub fn classify_optima(search: &ParetoSet, global: &ParetoSet) -> Result<Classification> {
    check_compatible(search, global)?;
    let (global_found, search_only) = search
        .vectors()
        .cloned()
        .partition(|v| global.contains(v));
    Ok(Classification {
        global_found,
        search_only,
    })
}

/// Fraction of the global optima recovered by the search.
pub fn effectiveness(n_found: usize, n_total: usize) -> Result<f64> {
    if n_total == 0 {
        return Err(Error::Contract("effectiveness needs at least one global optimum".into()));
    }
    if n_found > n_total {
        return Err(Error::Contract(format!(
            "found {n_found} global optima out of {n_total}"
        )));
    }
    Ok(n_found as f64 / n_total as f64)
}

/// Function evaluations of the search relative to the full factorial.
pub fn computational_load(n_eval_search: u64, n_eval_full: u64) -> Result<f64> {
    if n_eval_full == 0 || n_eval_search == 0 {
        return Err(Error::Contract("computational load needs non-zero counts".into()));
    }
    Ok(n_eval_search as f64 / n_eval_full as f64)
}

pub fn computational_savings(n_eval_search: u64, n_eval_full: u64) -> Result<f64> {
    Ok(1.0 - computational_load(n_eval_search, n_eval_full)?)
}

/// Rounds half away from zero toward +∞ at the given number of decimals.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    // nudge by one ulp-scale epsilon so 9.65 (stored as 9.6499...) rounds up
    ((x * scale) + 0.5 + 1e-9).floor() / scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDifference {
    pub search: DesignVector,
    pub matched: DesignVector,
    pub distance: f64,
    /// `f(x_s) - f(x_g)` per objective.
    pub absolute: Vec<f64>,
    /// `100 (f(x_s) - f(x_g)) / f(x_g)`; `None` where `f(x_g) = 0`.
    pub percentage: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerformanceDifference {
    pub per_solution: Vec<SolutionDifference>,
    pub mean_absolute: Vec<f64>,
    /// Mean over entries where the percentage is defined.
    pub mean_percentage: Vec<Option<f64>>,
}

impl PerformanceDifference {
    /// Mean of |percentage| over defined entries, averaged over objectives.
    /// Lower is better; used to break ties between repeated runs.
    pub fn mean_abs_percentage(&self) -> f64 {
        let m = self.mean_absolute.len();
        if m == 0 {
            return 0.0;
        }
        let per_obj: Vec<f64> = (0..m)
            .filter_map(|k| {
                let vals: Vec<f64> = self
                    .per_solution
                    .iter()
                    .filter_map(|s| s.percentage[k].map(f64::abs))
                    .collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect();
        if per_obj.is_empty() {
            0.0
        } else {
            per_obj.iter().sum::<f64>() / per_obj.len() as f64
        }
    }
}

/// Squared distances closer than this count as equal.
const DISTANCE_TIE: f64 = 1e-12;

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Matches each search solution to its nearest global optimum in the
/// normalized variable domain (ties to the lexicographically smallest
/// vector) and reports objective differences.
pub fn performance_difference(
    search: &ParetoSet,
    global: &ParetoSet,
    space: &DesignSpace,
) -> Result<PerformanceDifference> {
    if search.is_empty() || global.is_empty() {
        return Err(Error::Contract("performance difference needs non-empty sets".into()));
    }
    check_compatible(search, global)?;
    let encoded_global: Vec<Vec<f64>> = global
        .vectors()
        .map(|v| space.encode_normalized(v))
        .collect();
    let per_solution: Vec<SolutionDifference> = search
        .iter()
        .map(|(xs, fs)| {
            let e = space.encode_normalized(xs);
            // global entries are in lexicographic order; only a clearly
            // smaller distance replaces the current match, so roundoff
            // between equidistant candidates keeps the smallest vector
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, g) in encoded_global.iter().enumerate() {
                let d = squared_distance(&e, g);
                if d < best_d - DISTANCE_TIE {
                    best = i;
                    best_d = d;
                }
            }
            let (xg, fg) = &global.entries()[best];
            let absolute: Vec<f64> = fs
                .values()
                .iter()
                .zip(fg.values())
                .map(|(a, b)| a - b)
                .collect();
            let percentage = absolute
                .iter()
                .zip(fg.values())
                .map(|(d, g)| (*g != 0.0).then(|| 100.0 * d / g))
                .collect();
            SolutionDifference {
                search: xs.clone(),
                matched: xg.clone(),
                distance: best_d.sqrt(),
                absolute,
                percentage,
            }
        })
        .collect();
    let m = per_solution[0].absolute.len();
    let n = per_solution.len() as f64;
    let mean_absolute = (0..m)
        .map(|k| per_solution.iter().map(|s| s.absolute[k]).sum::<f64>() / n)
        .collect();
    let mean_percentage = (0..m)
        .map(|k| {
            let vals: Vec<f64> = per_solution.iter().filter_map(|s| s.percentage[k]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    Ok(PerformanceDifference {
        per_solution,
        mean_absolute,
        mean_percentage,
    })
}

/// All evaluation metrics of one search result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_solutions: usize,
    pub n_global_found: Option<usize>,
    pub n_search_only: Option<usize>,
    pub n_global_total: Option<usize>,
    pub effectiveness: Option<f64>,
    /// `n_global_found / n_solutions`, reported next to effectiveness.
    pub precision: Option<f64>,
    pub raw_requests: u64,
    pub unique_evaluations: u64,
    pub count_mode: CountMode,
    pub full_factorial_count: u64,
    pub computational_load: f64,
    pub computational_savings: f64,
    pub performance: Option<PerformanceDifference>,
}

/// Computes every metric; global-dependent fields are `None` without an oracle.
pub fn metrics_report(
    space: &DesignSpace,
    search: &ParetoSet,
    global: Option<&ParetoSet>,
    counts: LedgerCounts,
    count_mode: CountMode,
) -> Result<MetricsReport> {
    let full = u64::try_from(space.combination_count())
        .map_err(|_| Error::Contract("design space too large".into()))?;
    let load = computational_load(counts.get(count_mode).max(1), full)?;
    let mut report = MetricsReport {
        n_solutions: search.len(),
        n_global_found: None,
        n_search_only: None,
        n_global_total: None,
        effectiveness: None,
        precision: None,
        raw_requests: counts.raw_requests,
        unique_evaluations: counts.unique_evaluations,
        count_mode,
        full_factorial_count: full,
        computational_load: load,
        computational_savings: 1.0 - load,
        performance: None,
    };
    if let Some(global) = global {
        let c = classify_optima(search, global)?;
        report.n_global_found = Some(c.global_found.len());
        report.n_search_only = Some(c.search_only.len());
        report.n_global_total = Some(global.len());
        report.effectiveness = Some(effectiveness(c.global_found.len(), global.len())?);
        if !search.is_empty() {
            report.precision = Some(c.global_found.len() as f64 / search.len() as f64);
            report.performance = Some(performance_difference(search, global, space)?);
        }
    }
    Ok(report)
}
