//! Multi-objective optimization over discrete design spaces: staged
//! exhaustive (sequential) search, a full-factorial oracle, an NSGA-II
//! baseline, comparison metrics and Morris screening.

pub mod case_study;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod morris;
pub mod nsga2;
pub mod objective;
pub mod pareto;
pub mod seed;
pub mod sequential;
pub mod space;

pub use error::{Error, Result};
pub use objective::{
    Backend, CountMode, EvaluationLedger, LedgerCounts, Objective, ObjectiveVector,
};
pub use pareto::{dominates, extract_nondominated, ParetoSet};
pub use space::{
    BoundPolicy, DesignSpace, DesignVector, ElementTag, FieldTag, GroupingScheme, StartingBound,
    VariableSpec,
};
