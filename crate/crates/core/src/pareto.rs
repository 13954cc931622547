//! Pareto dominance, non-dominated extraction, and the ranking / crowding
//! machinery shared by the staged search and NSGA-II.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;
use crate::space::DesignVector;

/// `a` dominates `b` (minimization): no worse everywhere, strictly better somewhere.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::ArityMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(dominates_slice(a.values(), b.values()))
}

pub(crate) fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Mutually non-dominated solutions, unique by design vector, ordered by vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParetoSet {
    entries: Vec<(DesignVector, ObjectiveVector)>,
}

impl ParetoSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(DesignVector, ObjectiveVector)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(DesignVector, ObjectiveVector)> {
        self.entries.iter()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &DesignVector> {
        self.entries.iter().map(|(v, _)| v)
    }

    pub fn contains(&self, v: &DesignVector) -> bool {
        self.get(v).is_some()
    }

    pub fn get(&self, v: &DesignVector) -> Option<&ObjectiveVector> {
        self.entries
            .binary_search_by(|(x, _)| x.cmp(v))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    pub fn into_entries(self) -> Vec<(DesignVector, ObjectiveVector)> {
        self.entries
    }

    /// True when both sets hold the same design vectors.
    pub fn same_vectors(&self, other: &ParetoSet) -> bool {
        self.len() == other.len() && self.vectors().eq(other.vectors())
    }
}

impl<'a> IntoIterator for &'a ParetoSet {
    type Item = &'a (DesignVector, ObjectiveVector);
    type IntoIter = std::slice::Iter<'a, (DesignVector, ObjectiveVector)>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Returns the maximal subset under [`dominates`]. Distinct vectors with equal
/// objectives are all kept; repeated vectors are collapsed.
pub fn extract_nondominated(
    candidates: impl IntoIterator<Item = (DesignVector, ObjectiveVector)>,
) -> ParetoSet {
    let mut seen = HashSet::new();
    let mut items: Vec<(DesignVector, ObjectiveVector)> = candidates
        .into_iter()
        .filter(|(v, _)| seen.insert(v.clone()))
        .collect();
    drop(seen);
    // Any dominator sorts strictly before the point it dominates.
    items.sort_by(|a, b| lex_cmp(a.1.values(), b.1.values()).then_with(|| a.0.cmp(&b.0)));

    let mut keep: Vec<(DesignVector, ObjectiveVector)> = Vec::new();
    if items.first().map(|(_, f)| f.len()) == Some(2) {
        // Sweep: `prev_min` is the lowest f2 among points with a smaller f1,
        // `group_min` the lowest f2 among points sharing the current f1.
        let mut prev_min = f64::INFINITY;
        let mut group_f1 = f64::NAN;
        let mut group_min = f64::INFINITY;
        for (v, f) in items {
            let (a, b) = (f.values()[0], f.values()[1]);
            if a != group_f1 {
                prev_min = prev_min.min(group_min);
                group_f1 = a;
                group_min = b;
            }
            if b >= prev_min || b > group_min {
                continue;
            }
            keep.push((v, f));
        }
    } else {
        for (v, f) in items {
            if !keep.iter().any(|(_, k)| dominates_slice(k.values(), f.values())) {
                keep.push((v, f));
            }
        }
    }
    keep.sort_by(|a, b| a.0.cmp(&b.0));
    ParetoSet { entries: keep }
}

/// Non-dominated fronts (indices into the input) with per-individual rank
/// (0 = first front) and crowding distance within its front.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPopulation {
    pub fronts: Vec<Vec<usize>>,
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
}

/// Fast non-dominated sort followed by crowding distances per front.
pub fn nondominated_sort_with_crowding(objectives: &[ObjectiveVector]) -> RankedPopulation {
    let n = objectives.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            let (fp, fq) = (objectives[p].values(), objectives[q].values());
            if dominates_slice(fp, fq) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates_slice(fq, fp) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            rank[p] = fronts.len();
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    let mut crowding = vec![0.0; n];
    for front in &fronts {
        for (&i, d) in front.iter().zip(crowding_distance(objectives, front)) {
            crowding[i] = d;
        }
    }
    RankedPopulation {
        fronts,
        rank,
        crowding,
    }
}

/// Crowding distance of each member of `front`, in `front` order. Boundary
/// points of every objective get infinity.
pub fn crowding_distance(objectives: &[ObjectiveVector], front: &[usize]) -> Vec<f64> {
    let len = front.len();
    let mut dist = vec![0.0; len];
    if len <= 2 {
        return vec![f64::INFINITY; len];
    }
    let m = objectives[front[0]].len();
    let mut order: Vec<usize> = (0..len).collect();
    for k in 0..m {
        let value = |slot: usize| objectives[front[slot]].values()[k];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let lo = value(order[0]);
        let hi = value(order[len - 1]);
        dist[order[0]] = f64::INFINITY;
        dist[order[len - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in 1..len - 1 {
            let slot = order[w];
            if dist[slot].is_finite() {
                dist[slot] += (value(order[w + 1]) - value(order[w - 1])) / span;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(x: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(x.to_vec())
    }

    fn dv(i: u16) -> DesignVector {
        DesignVector::new(vec![i])
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&ov(&[1.0, 2.0]), &ov(&[2.0, 2.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 2.0]), &ov(&[2.0, 1.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 1.0]), &ov(&[1.0, 1.0])).unwrap());
        assert!(dominates(&ov(&[1.0]), &ov(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn extraction_example() {
        let pts = [[1.0, 3.0], [2.0, 2.0], [3.0, 1.0], [2.0, 3.0]];
        let set = extract_nondominated(
            pts.iter()
                .enumerate()
                .map(|(i, p)| (dv(i as u16), ov(p))),
        );
        let kept: Vec<u16> = set.vectors().map(|v| v.indices()[0]).collect();
        assert_eq!(kept, vec![0, 1, 2]);
    }

    #[test]
    fn ties_kept_duplicates_collapsed() {
        let set = extract_nondominated((0..5).map(|i| (dv(i), ov(&[1.0, 1.0]))));
        assert_eq!(set.len(), 5);
        let set = extract_nondominated((0..5).map(|_| (dv(7), ov(&[1.0, 1.0]))));
        assert_eq!(set.len(), 1);
        let single = extract_nondominated([(dv(3), ov(&[4.0, 2.0, 1.0]))]);
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn two_objective_sweep_handles_equal_first_objective() {
        let pts = [[1.0, 5.0], [1.0, 3.0], [1.0, 3.0], [2.0, 3.0], [2.0, 1.0], [0.5, 9.0]];
        let set = extract_nondominated(
            pts.iter()
                .enumerate()
                .map(|(i, p)| (dv(i as u16), ov(p))),
        );
        let kept: Vec<u16> = set.vectors().map(|v| v.indices()[0]).collect();
        assert_eq!(kept, vec![1, 2, 4, 5]);
    }

    #[test]
    fn chain_gives_three_fronts() {
        let objs = vec![ov(&[3.0, 3.0]), ov(&[1.0, 1.0]), ov(&[2.0, 2.0])];
        let r = nondominated_sort_with_crowding(&objs);
        assert_eq!(r.fronts, vec![vec![1], vec![2], vec![0]]);
        assert_eq!(r.rank, vec![2, 0, 1]);
    }

    #[test]
    fn crowding_boundaries_infinite() {
        let objs = vec![
            ov(&[0.0, 4.0]),
            ov(&[1.0, 3.0]),
            ov(&[2.0, 1.0]),
            ov(&[4.0, 0.0]),
        ];
        let r = nondominated_sort_with_crowding(&objs);
        assert_eq!(r.fronts.len(), 1);
        assert!(r.crowding[0].is_infinite() && r.crowding[3].is_infinite());
        assert!((r.crowding[1] - (2.0 / 4.0 + 3.0 / 4.0)).abs() < 1e-12);
        assert!((r.crowding[2] - (3.0 / 4.0 + 3.0 / 4.0)).abs() < 1e-12);
    }
}
