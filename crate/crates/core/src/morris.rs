//! Morris elementary-effects screening on the normalized option grid, with
//! greedy dispersion-maximizing trajectory selection.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{EvaluationLedger, Objective};
use crate::space::{DesignSpace, DesignVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorrisPlan {
    /// Number of trajectories kept (r).
    pub trajectories: usize,
    /// Number of random candidates the r trajectories are picked from (M).
    pub candidate_pool: usize,
    pub seed: u64,
}

impl Default for MorrisPlan {
    fn default() -> Self {
        MorrisPlan {
            trajectories: 20,
            candidate_pool: 100,
            seed: 0,
        }
    }
}

impl MorrisPlan {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.trajectories < 2 {
            v.push("morris trajectories must be at least 2".to_string());
        }
        if self.candidate_pool < self.trajectories {
            v.push(format!(
                "morris candidate_pool ({}) is smaller than trajectories ({})",
                self.candidate_pool, self.trajectories
            ));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// Step in option-index units: half the levels, rounded down. On the
/// normalized axis this is `k / (m - 1)`, which equals `m / (2(m - 1))` when
/// `m` is even. Zero marks a single-option (unscreened) variable.
pub fn index_steps(space: &DesignSpace) -> Vec<usize> {
    space
        .variables()
        .iter()
        .map(|v| if v.len() < 2 { 0 } else { v.len() / 2 })
        .collect()
}

/// Normalized step per variable (0 for unscreened variables).
pub fn deltas(space: &DesignSpace) -> Vec<f64> {
    index_steps(space)
        .iter()
        .zip(space.variables())
        .map(|(&k, v)| if k == 0 { 0.0 } else { k as f64 / (v.len() - 1) as f64 })
        .collect()
}

/// One-at-a-time path: `points[s + 1]` differs from `points[s]` only in
/// variable `moved[s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<DesignVector>,
    pub moved: Vec<usize>,
}

fn random_trajectory<R: Rng>(space: &DesignSpace, steps: &[usize], rng: &mut R) -> Trajectory {
    let cards = space.cardinalities();
    let start: Vec<u16> = cards.iter().map(|&m| rng.gen_range(0..m) as u16).collect();
    let mut order: Vec<usize> = (0..steps.len()).filter(|&i| steps[i] > 0).collect();
    order.shuffle(rng);

    let mut current = DesignVector::new(start);
    let mut points = vec![current.clone()];
    for &i in &order {
        let (x, k, m) = (current.get(i), steps[i], cards[i]);
        let up = x + k < m;
        let down = x >= k;
        let next = match (up, down) {
            (true, true) => {
                if rng.gen_bool(0.5) {
                    x + k
                } else {
                    x - k
                }
            }
            (true, false) => x + k,
            (false, true) => x - k,
            (false, false) => unreachable!("step never exceeds the option range"),
        };
        current = current.with_index(i, next);
        points.push(current.clone());
    }
    Trajectory { points, moved: order }
}

fn trajectory_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for p in a {
        for q in b {
            total += p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        }
    }
    total
}

/// Draws `candidate_pool` seeded trajectories and greedily keeps the
/// `trajectories` most spread out: the farthest pair first, then repeatedly
/// the candidate with the largest summed distance to those already chosen.
pub fn generate_trajectories(space: &DesignSpace, plan: &MorrisPlan) -> Result<Vec<Trajectory>> {
    plan.validate()?;
    let steps = index_steps(space);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let candidates: Vec<Trajectory> = (0..plan.candidate_pool)
        .map(|_| random_trajectory(space, &steps, &mut rng))
        .collect();
    let encoded: Vec<Vec<Vec<f64>>> = candidates
        .iter()
        .map(|t| t.points.iter().map(|p| space.encode_normalized(p)).collect())
        .collect();

    let n = candidates.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = trajectory_distance(&encoded[i], &encoded[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    let (mut a, mut b, mut best) = (0, 1, f64::NEG_INFINITY);
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i][j] > best {
                (a, b, best) = (i, j, dist[i][j]);
            }
        }
    }
    let mut chosen = vec![a, b];
    let mut score: Vec<f64> = (0..n).map(|c| dist[c][a] + dist[c][b]).collect();
    while chosen.len() < plan.trajectories {
        let next = (0..n)
            .filter(|c| !chosen.contains(c))
            .fold(None, |acc: Option<usize>, c| match acc {
                Some(p) if score[p] >= score[c] => Some(p),
                _ => Some(c),
            })
            .expect("pool is at least as large as the selection");
        chosen.push(next);
        for c in 0..n {
            score[c] += dist[c][next];
        }
    }

    let mut slots: Vec<Option<Trajectory>> = candidates.into_iter().map(Some).collect();
    Ok(chosen
        .into_iter()
        .map(|i| slots[i].take().expect("chosen once"))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableEffects {
    pub variable: String,
    pub objective: String,
    /// False for single-option variables, which are reported with zero effects.
    pub screened: bool,
    pub delta: f64,
    pub elementary_effects: Vec<f64>,
    pub mu_star: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorrisResult {
    pub trajectories: usize,
    pub evaluations: u64,
    /// Ordered by objective, then by variable position.
    pub effects: Vec<VariableEffects>,
}

impl MorrisResult {
    pub fn get(&self, variable: &str, objective: &str) -> Option<&VariableEffects> {
        self.effects
            .iter()
            .find(|e| e.variable == variable && e.objective == objective)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Evaluates every trajectory point through the ledger and aggregates the
/// elementary effects per variable and objective.
pub fn elementary_effects<B: Objective + ?Sized>(
    space: &DesignSpace,
    trajectories: &[Trajectory],
    backend: &B,
    ledger: &EvaluationLedger,
) -> Result<MorrisResult> {
    let n = space.len();
    let names = backend.objective_names();
    let k = backend.n_objectives();
    let before = ledger.raw_requests();
    // effects[obj][var] accumulates one value per trajectory
    let mut effects = vec![vec![Vec::with_capacity(trajectories.len()); n]; k];

    for t in trajectories {
        let ys = ledger.evaluate_batch(backend, &t.points)?;
        for (s, &i) in t.moved.iter().enumerate() {
            let m = space.variable(i).len();
            let step = (t.points[s + 1].get(i) as f64 - t.points[s].get(i) as f64) / (m - 1) as f64;
            if step == 0.0 {
                return Err(Error::Contract(format!(
                    "zero Morris step for variable `{}`",
                    space.variable(i).name
                )));
            }
            for o in 0..k {
                effects[o][i].push((ys[s + 1].values()[o] - ys[s].values()[o]) / step);
            }
        }
    }

    let deltas = deltas(space);
    let mut out = Vec::with_capacity(n * k);
    for (o, per_var) in effects.into_iter().enumerate() {
        for (i, ee) in per_var.into_iter().enumerate() {
            let screened = deltas[i] > 0.0;
            let ee = if screened { ee } else { vec![0.0; trajectories.len()] };
            let abs: Vec<f64> = ee.iter().map(|x| x.abs()).collect();
            out.push(VariableEffects {
                variable: space.variable(i).name.clone(),
                objective: names[o].clone(),
                screened,
                delta: deltas[i],
                mu_star: if ee.is_empty() { 0.0 } else { mean(&abs) },
                sigma: sample_std(&ee),
                elementary_effects: ee,
            });
        }
    }
    Ok(MorrisResult {
        trajectories: trajectories.len(),
        evaluations: ledger.raw_requests() - before,
        effects: out,
    })
}

/// Writes `variable,objective,mu_star,sigma`; a missing result gives the header only.
pub fn write_morris_csv<W: Write>(result: Option<&MorrisResult>, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(["variable", "objective", "mu_star", "sigma"])?;
    for e in result.map(|r| r.effects.as_slice()).unwrap_or_default() {
        w.write_record([
            e.variable.as_str(),
            e.objective.as_str(),
            &e.mu_star.to_string(),
            &e.sigma.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("morris.csv", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::ObjectiveVector;
    use crate::space::{ElementTag, FieldTag, VariableSpec};

    fn space(cards: &[usize]) -> DesignSpace {
        DesignSpace::new(
            cards
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    VariableSpec::new(
                        format!("x{i}"),
                        (0..m).map(|o| o.to_string()),
                        ElementTag::Other,
                        FieldTag::Other,
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    struct Fun<'a, F>(&'a DesignSpace, F);

    impl<F: Fn(&[f64]) -> f64 + Sync> Objective for Fun<'_, F> {
        fn n_objectives(&self) -> usize {
            1
        }
        fn evaluate(&self, v: &DesignVector) -> Result<ObjectiveVector> {
            Ok(ObjectiveVector::new(vec![(self.1)(&self.0.encode_normalized(v))]))
        }
    }

    #[test]
    fn steps_follow_level_count() {
        let s = space(&[2, 3, 4, 5, 6, 1]);
        assert_eq!(index_steps(&s), vec![1, 1, 2, 2, 3, 0]);
        let d = deltas(&s);
        assert_eq!(d[0], 1.0);
        assert_eq!(d[2], 4.0 / 6.0);
        assert_eq!(d[4], 6.0 / 10.0);
        assert_eq!(d[5], 0.0);
    }

    #[test]
    fn trajectories_are_one_at_a_time() {
        let s = space(&[3, 4, 1, 5]);
        let plan = MorrisPlan {
            trajectories: 5,
            candidate_pool: 12,
            seed: 9,
        };
        let ts = generate_trajectories(&s, &plan).unwrap();
        assert_eq!(ts.len(), 5);
        for t in &ts {
            assert_eq!(t.points.len(), 4);
            let mut moved = t.moved.clone();
            moved.sort_unstable();
            assert_eq!(moved, vec![0, 1, 3]);
            for (w, &i) in t.points.windows(2).zip(&t.moved) {
                let diff: Vec<usize> = (0..4).filter(|&j| w[0].get(j) != w[1].get(j)).collect();
                assert_eq!(diff, vec![i]);
            }
        }
        assert_eq!(generate_trajectories(&s, &plan).unwrap(), ts);
    }

    #[test]
    fn pool_smaller_than_selection_is_rejected() {
        let s = space(&[3, 3]);
        let plan = MorrisPlan {
            trajectories: 5,
            candidate_pool: 4,
            seed: 0,
        };
        assert!(generate_trajectories(&s, &plan).is_err());
    }

    #[test]
    fn constant_objective_has_no_effects() {
        let s = space(&[3, 4, 2]);
        let f = Fun(&s, |_: &[f64]| 7.0);
        let ts = generate_trajectories(&s, &MorrisPlan::default()).unwrap();
        let r = elementary_effects(&s, &ts, &f, &EvaluationLedger::new()).unwrap();
        assert_eq!(r.evaluations, 20 * 4);
        assert!(r.effects.iter().all(|e| e.mu_star == 0.0 && e.sigma == 0.0));
    }

    #[test]
    fn csv_header_only_without_result() {
        let mut buf = Vec::new();
        write_morris_csv(None, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "variable,objective,mu_star,sigma\n");
    }
}
