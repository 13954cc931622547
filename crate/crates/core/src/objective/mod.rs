//! Objective evaluation: backends and the memoizing evaluation ledger.

mod benchmark;
mod surrogate;
mod table;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::DesignVector;

pub use benchmark::{Benchmark, BenchmarkFamily};
pub use surrogate::{
    ClimateConstants, ComfortConstants, DistributionCoefficients, MassCoefficients,
    PlantCoefficients, Surrogate, SurrogateCoefficients, WindowCoefficients,
};
pub use table::{write_table_csv, TableBackend};

/// Objective values, all minimized.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Self {
        ObjectiveVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<f64>> for ObjectiveVector {
    fn from(v: Vec<f64>) -> Self {
        ObjectiveVector(v)
    }
}

/// A pure, deterministic black-box objective function.
pub trait Objective: Sync {
    fn n_objectives(&self) -> usize;

    fn objective_names(&self) -> Vec<String> {
        (1..=self.n_objectives()).map(|k| format!("f{k}")).collect()
    }

    fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn n_objectives(&self) -> usize {
        (**self).n_objectives()
    }

    fn objective_names(&self) -> Vec<String> {
        (**self).objective_names()
    }

    fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector> {
        (**self).evaluate(v)
    }
}

/// Any of the shipped backends.
#[derive(Debug, Clone)]
pub enum Backend {
    Surrogate(Surrogate),
    Table(TableBackend),
    Benchmark(Benchmark),
}

impl Objective for Backend {
    fn n_objectives(&self) -> usize {
        match self {
            Backend::Surrogate(s) => s.n_objectives(),
            Backend::Table(t) => t.n_objectives(),
            Backend::Benchmark(b) => b.n_objectives(),
        }
    }

    fn objective_names(&self) -> Vec<String> {
        match self {
            Backend::Surrogate(s) => s.objective_names(),
            Backend::Table(t) => t.objective_names(),
            Backend::Benchmark(b) => b.objective_names(),
        }
    }

    fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector> {
        match self {
            Backend::Surrogate(s) => s.evaluate(v),
            Backend::Table(t) => t.evaluate(v),
            Backend::Benchmark(b) => b.evaluate(v),
        }
    }
}

/// Which evaluation counter feeds budgets and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    #[default]
    Unique,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LedgerCounts {
    pub raw_requests: u64,
    pub unique_evaluations: u64,
}

impl LedgerCounts {
    pub fn get(&self, mode: CountMode) -> u64 {
        match mode {
            CountMode::Unique => self.unique_evaluations,
            CountMode::Raw => self.raw_requests,
        }
    }
}

const PARALLEL_THRESHOLD: usize = 512;

/// Memoizing evaluation counter. Every request bumps `raw_requests`; the
/// backend only runs for vectors not yet in the memo.
#[derive(Default)]
pub struct EvaluationLedger {
    memo: Mutex<HashMap<DesignVector, ObjectiveVector>>,
    raw: AtomicU64,
}

impl fmt::Debug for EvaluationLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluationLedger")
            .field("counts", &self.counts())
            .finish()
    }
}

impl EvaluationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw_requests(&self) -> u64 {
        self.raw.load(Ordering::SeqCst)
    }

    pub fn unique_evaluations(&self) -> u64 {
        self.memo.lock().expect("ledger poisoned").len() as u64
    }

    pub fn counts(&self) -> LedgerCounts {
        LedgerCounts {
            raw_requests: self.raw_requests(),
            unique_evaluations: self.unique_evaluations(),
        }
    }

    pub fn contains(&self, v: &DesignVector) -> bool {
        self.memo.lock().expect("ledger poisoned").contains_key(v)
    }

    pub fn evaluate<B: Objective + ?Sized>(
        &self,
        backend: &B,
        v: &DesignVector,
    ) -> Result<ObjectiveVector> {
        self.raw.fetch_add(1, Ordering::SeqCst);
        if let Some(hit) = self.memo.lock().expect("ledger poisoned").get(v) {
            return Ok(hit.clone());
        }
        let value = checked_eval(backend, v)?;
        let mut memo = self.memo.lock().expect("ledger poisoned");
        Ok(memo.entry(v.clone()).or_insert(value).clone())
    }

    /// Evaluates a batch, running backend misses in parallel on the current
    /// rayon pool. Output order follows input order.
    pub fn evaluate_batch<B: Objective + ?Sized>(
        &self,
        backend: &B,
        vectors: &[DesignVector],
    ) -> Result<Vec<ObjectiveVector>> {
        self.raw.fetch_add(vectors.len() as u64, Ordering::SeqCst);
        let misses: Vec<&DesignVector> = {
            let memo = self.memo.lock().expect("ledger poisoned");
            let mut seen = HashSet::new();
            vectors
                .iter()
                .filter(|v| !memo.contains_key(*v) && seen.insert(*v))
                .collect()
        };
        let computed: Vec<ObjectiveVector> = if misses.len() >= PARALLEL_THRESHOLD {
            misses
                .par_iter()
                .map(|v| checked_eval(backend, v))
                .collect::<Result<_>>()?
        } else {
            misses
                .iter()
                .map(|v| checked_eval(backend, v))
                .collect::<Result<_>>()?
        };
        let mut memo = self.memo.lock().expect("ledger poisoned");
        for (v, value) in misses.into_iter().zip(computed) {
            memo.entry(v.clone()).or_insert(value);
        }
        Ok(vectors
            .iter()
            .map(|v| memo.get(v).expect("evaluated above").clone())
            .collect())
    }

    /// Snapshot of every memoized evaluation, sorted by vector.
    pub fn entries(&self) -> Vec<(DesignVector, ObjectiveVector)> {
        let memo = self.memo.lock().expect("ledger poisoned");
        let mut out: Vec<_> = memo.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

fn checked_eval<B: Objective + ?Sized>(backend: &B, v: &DesignVector) -> Result<ObjectiveVector> {
    let value = backend.evaluate(v)?;
    if value.len() != backend.n_objectives() {
        return Err(Error::Backend {
            vector: v.to_string(),
            message: format!(
                "backend returned {} objectives, expected {}",
                value.len(),
                backend.n_objectives()
            ),
        });
    }
    if !value.is_finite() {
        return Err(Error::Backend {
            vector: v.to_string(),
            message: format!("non-finite objective {:?}", value),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicUsize;

    struct Counting {
        calls: AtomicUsize,
    }

    impl Objective for Counting {
        fn n_objectives(&self) -> usize {
            2
        }

        fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            let s: f64 = v.indices().iter().map(|&i| i as f64).sum();
            Ok(ObjectiveVector::new(vec![s, -s]))
        }
    }

    #[test]
    fn memoizes_repeats() {
        let b = Counting {
            calls: AtomicUsize::new(0),
        };
        let ledger = EvaluationLedger::new();
        let v = DesignVector::new(vec![1, 2]);
        let a = ledger.evaluate(&b, &v).unwrap();
        let c = ledger.evaluate(&b, &v).unwrap();
        assert_eq!(a, c);
        assert_eq!(ledger.raw_requests(), 2);
        assert_eq!(ledger.unique_evaluations(), 1);
        assert_eq!(b.calls.load(Ordering::SeqCst), 1);
        ledger.evaluate(&b, &DesignVector::new(vec![0, 0])).unwrap();
        assert_eq!(ledger.unique_evaluations(), 2);
    }

    #[test]
    fn batch_dedupes_within_and_across_calls() {
        let b = Counting {
            calls: AtomicUsize::new(0),
        };
        let ledger = EvaluationLedger::new();
        let vs: Vec<DesignVector> = (0..2000u16)
            .map(|i| DesignVector::new(vec![i % 700, 0]))
            .collect();
        let out = ledger.evaluate_batch(&b, &vs).unwrap();
        assert_eq!(out.len(), 2000);
        assert_eq!(out[701], out[1]);
        assert_eq!(ledger.counts(), LedgerCounts { raw_requests: 2000, unique_evaluations: 700 });
        ledger.evaluate_batch(&b, &vs[..10]).unwrap();
        assert_eq!(b.calls.load(Ordering::SeqCst), 700);
        assert_eq!(ledger.raw_requests(), 2010);
    }

    struct Failing;

    impl Objective for Failing {
        fn n_objectives(&self) -> usize {
            1
        }

        fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector> {
            Err(Error::Unevaluated(v.to_string()))
        }
    }

    #[test]
    fn backend_errors_name_the_vector() {
        let ledger = EvaluationLedger::new();
        let err = ledger
            .evaluate(&Failing, &DesignVector::new(vec![3, 1]))
            .unwrap_err();
        assert!(err.to_string().contains("3 1"));
        assert_eq!(ledger.unique_evaluations(), 0);
    }
}
