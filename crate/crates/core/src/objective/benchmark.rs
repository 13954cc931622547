//! Synthetic objective families for property tests and oracle comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Objective, ObjectiveVector};
use crate::error::{Error, Result};
use crate::seed::{splitmix64, unit_f64};
use crate::space::{normalized_level, DesignSpace, DesignVector};

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchmarkFamily {
    /// Bi-objective sphere on the normalized grid: distance² to the all-zero
    /// corner and to the all-one corner.
    Sphere,
    /// Independent uniform values per (vector, objective), keyed by seed.
    RandomTable {
        seed: u64,
        #[serde(default = "two")]
        objectives: usize,
    },
    /// Per-variable random terms plus weighted random pairwise terms over
    /// all variable pairs. Weight 0 makes the objectives separable.
    Separable {
        seed: u64,
        #[serde(default = "two")]
        objectives: usize,
        #[serde(default)]
        interaction_weight: f64,
    },
}

#[derive(Debug, Clone)]
struct PairTerm {
    i: usize,
    j: usize,
    /// `[objective][a * m_j + b]`
    values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    family: BenchmarkFamily,
    cardinalities: Vec<usize>,
    /// `[objective][variable][option]`
    main: Vec<Vec<Vec<f64>>>,
    pairs: Vec<PairTerm>,
}

impl Benchmark {
    pub fn new(family: BenchmarkFamily, space: &DesignSpace) -> Result<Self> {
        let cardinalities = space.cardinalities();
        let mut main = Vec::new();
        let mut pairs = Vec::new();
        match &family {
            BenchmarkFamily::Sphere => {}
            BenchmarkFamily::RandomTable { objectives, .. } => {
                if *objectives == 0 {
                    return Err(Error::Config(vec!["benchmark needs at least one objective".into()]));
                }
            }
            BenchmarkFamily::Separable {
                seed,
                objectives,
                interaction_weight,
            } => {
                if *objectives == 0 {
                    return Err(Error::Config(vec!["benchmark needs at least one objective".into()]));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                main = (0..*objectives)
                    .map(|_| {
                        cardinalities
                            .iter()
                            .map(|&m| (0..m).map(|_| rng.gen::<f64>()).collect())
                            .collect()
                    })
                    .collect();
                if *interaction_weight != 0.0 {
                    let n = cardinalities.len();
                    for i in 0..n {
                        for j in i + 1..n {
                            let cells = cardinalities[i] * cardinalities[j];
                            let values = (0..*objectives)
                                .map(|_| {
                                    (0..cells)
                                        .map(|_| interaction_weight * rng.gen::<f64>())
                                        .collect()
                                })
                                .collect();
                            pairs.push(PairTerm { i, j, values });
                        }
                    }
                }
            }
        }
        Ok(Benchmark {
            family,
            cardinalities,
            main,
            pairs,
        })
    }

    pub fn family(&self) -> &BenchmarkFamily {
        &self.family
    }

    fn linear_index(&self, v: &DesignVector) -> u64 {
        v.indices()
            .iter()
            .zip(&self.cardinalities)
            .fold(0u64, |acc, (&i, &m)| acc.wrapping_mul(m as u64).wrapping_add(i as u64))
    }
}

impl Objective for Benchmark {
    fn n_objectives(&self) -> usize {
        match &self.family {
            BenchmarkFamily::Sphere => 2,
            BenchmarkFamily::RandomTable { objectives, .. }
            | BenchmarkFamily::Separable { objectives, .. } => *objectives,
        }
    }

    fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector> {
        if v.len() != self.cardinalities.len() {
            return Err(Error::Backend {
                vector: v.to_string(),
                message: "vector arity does not match benchmark space".into(),
            });
        }
        let values = match &self.family {
            BenchmarkFamily::Sphere => {
                let x: Vec<f64> = v
                    .indices()
                    .iter()
                    .zip(&self.cardinalities)
                    .map(|(&i, &m)| normalized_level(i as usize, m))
                    .collect();
                vec![
                    x.iter().map(|a| a * a).sum(),
                    x.iter().map(|a| (1.0 - a) * (1.0 - a)).sum(),
                ]
            }
            BenchmarkFamily::RandomTable { seed, objectives } => {
                let idx = self.linear_index(v);
                (0..*objectives as u64)
                    .map(|k| {
                        let key = splitmix64(idx.wrapping_mul(0x1000_0000_01B3) ^ k);
                        unit_f64(splitmix64(seed ^ key))
                    })
                    .collect()
            }
            BenchmarkFamily::Separable { .. } => {
                let mut out: Vec<f64> = self
                    .main
                    .iter()
                    .map(|per_var| {
                        per_var
                            .iter()
                            .zip(v.indices())
                            .map(|(opts, &i)| opts[i as usize])
                            .sum()
                    })
                    .collect();
                for p in &self.pairs {
                    let cell = v.get(p.i) * self.cardinalities[p.j] + v.get(p.j);
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += p.values[k][cell];
                    }
                }
                out
            }
        };
        Ok(ObjectiveVector::new(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::extract_nondominated;
    use crate::space::{ElementTag, FieldTag, VariableSpec};

    fn space() -> DesignSpace {
        DesignSpace::new(
            (0..4)
                .map(|i| {
                    VariableSpec::new(
                        format!("x{i}"),
                        ["0", "1", "2"],
                        ElementTag::Other,
                        FieldTag::Other,
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn random_table_is_seeded() {
        let s = space();
        let a = Benchmark::new(BenchmarkFamily::RandomTable { seed: 9, objectives: 2 }, &s).unwrap();
        let b = Benchmark::new(BenchmarkFamily::RandomTable { seed: 9, objectives: 2 }, &s).unwrap();
        let c = Benchmark::new(BenchmarkFamily::RandomTable { seed: 10, objectives: 2 }, &s).unwrap();
        let mut differs = false;
        for v in s.enumerate_all() {
            assert_eq!(a.evaluate(&v).unwrap(), b.evaluate(&v).unwrap());
            differs |= a.evaluate(&v).unwrap() != c.evaluate(&v).unwrap();
        }
        assert!(differs);
    }

    #[test]
    fn sphere_front_has_several_points() {
        let s = space();
        let b = Benchmark::new(BenchmarkFamily::Sphere, &s).unwrap();
        let all = s.enumerate_all().map(|v| {
            let f = b.evaluate(&v).unwrap();
            (v, f)
        });
        assert!(extract_nondominated(all).len() > 1);
    }

    #[test]
    fn unknown_family_fails_to_parse() {
        let r: std::result::Result<BenchmarkFamily, _> =
            serde_json::from_str(r#"{"family":"rosenbrock"}"#);
        assert!(r.is_err());
    }

    #[test]
    fn zero_weight_has_no_pair_terms() {
        let s = space();
        let b = Benchmark::new(
            BenchmarkFamily::Separable { seed: 1, objectives: 2, interaction_weight: 0.0 },
            &s,
        )
        .unwrap();
        assert!(b.pairs.is_empty());
        let b = Benchmark::new(
            BenchmarkFamily::Separable { seed: 1, objectives: 2, interaction_weight: 0.5 },
            &s,
        )
        .unwrap();
        assert_eq!(b.pairs.len(), 6);
    }
}
