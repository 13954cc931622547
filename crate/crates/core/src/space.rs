//! Discrete design spaces: variables, design vectors, grouping schemes,
//! starting bounds and per-stage Cartesian enumeration.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Building element a variable belongs to. Declaration order is the stage
/// order of the element grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementTag {
    Geometry,
    Fabric,
    Hvac,
    Controls,
    Other,
}

/// Discipline a variable belongs to. Declaration order is the stage order of
/// the field grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Architecture,
    Engineering,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub options: Vec<String>,
    pub element: ElementTag,
    pub field: FieldTag,
}

impl VariableSpec {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        options: impl IntoIterator<Item = S>,
        element: ElementTag,
        field: FieldTag,
    ) -> Self {
        VariableSpec {
            name: name.into(),
            options: options.into_iter().map(Into::into).collect(),
            element,
            field,
        }
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn option_index(&self, label: &str) -> Option<usize> {
        self.options.iter().position(|o| o == label)
    }
}

/// Outcome of [`validate_variables`]: the list of violations and, when the
/// space is well formed, its total number of combinations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub combinations: u128,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a variable list against the design space invariants.
pub fn validate_variables(variables: &[VariableSpec]) -> ValidationReport {
    let mut violations = Vec::new();
    if variables.is_empty() {
        violations.push("design space has no variables".to_string());
    }
    let mut names = HashSet::new();
    for var in variables {
        if var.name.trim().is_empty() {
            violations.push("variable with empty name".to_string());
        }
        if !names.insert(var.name.as_str()) {
            violations.push(format!("duplicate variable name `{}`", var.name));
        }
        if var.options.is_empty() {
            violations.push(format!("variable `{}` has no options", var.name));
        }
        if var.options.len() > u16::MAX as usize {
            violations.push(format!("variable `{}` has too many options", var.name));
        }
        let mut labels = HashSet::new();
        for opt in &var.options {
            if !labels.insert(opt.as_str()) {
                violations.push(format!(
                    "duplicate option label `{}` in variable `{}`",
                    opt, var.name
                ));
            }
        }
    }
    let combinations = variables
        .iter()
        .map(|v| v.options.len() as u128)
        .fold(1u128, |acc, m| acc.saturating_mul(m));
    ValidationReport {
        violations,
        combinations,
    }
}

/// Ordered set of discrete design variables.
#[derive(Debug, Clone)]
pub struct DesignSpace {
    variables: Vec<VariableSpec>,
    by_name: HashMap<String, usize>,
}

impl PartialEq for DesignSpace {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
    }
}

impl DesignSpace {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        let report = validate_variables(&variables);
        if !report.is_ok() {
            return Err(Error::InvalidSpace(report.violations));
        }
        let by_name = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        Ok(DesignSpace { variables, by_name })
    }

    pub fn validate(&self) -> ValidationReport {
        validate_variables(&self.variables)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &VariableSpec {
        &self.variables[i]
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn require_position(&self, name: &str) -> Result<usize> {
        self.position(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(VariableSpec::len).collect()
    }

    /// Total number of design vectors, Π m_i.
    pub fn combination_count(&self) -> u128 {
        self.variables.iter().map(|v| v.len() as u128).product()
    }

    /// Number of option combinations of a subset of variables.
    pub fn group_count(&self, group: &[usize]) -> u128 {
        group.iter().map(|&i| self.variables[i].len() as u128).product()
    }

    pub fn check_vector(&self, v: &DesignVector) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::Contract(format!(
                "design vector has {} components, space has {} variables",
                v.len(),
                self.len()
            )));
        }
        for (var, &idx) in self.variables.iter().zip(v.indices()) {
            if idx as usize >= var.len() {
                return Err(Error::IndexOutOfRange {
                    variable: var.name.clone(),
                    index: idx as usize,
                    options: var.len(),
                });
            }
        }
        Ok(())
    }

    pub fn labels<'a>(&'a self, v: &DesignVector) -> Vec<&'a str> {
        self.variables
            .iter()
            .zip(v.indices())
            .map(|(var, &i)| var.options[i as usize].as_str())
            .collect()
    }

    pub fn describe(&self, v: &DesignVector) -> String {
        self.labels(v).join(", ")
    }

    pub fn vector_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<DesignVector> {
        if labels.len() != self.len() {
            return Err(Error::Contract(format!(
                "expected {} option labels, got {}",
                self.len(),
                labels.len()
            )));
        }
        let indices = self
            .variables
            .iter()
            .zip(labels)
            .map(|(var, label)| {
                let label = label.as_ref();
                var.option_index(label)
                    .map(|i| i as u16)
                    .ok_or_else(|| Error::UnknownOption {
                        variable: var.name.clone(),
                        label: label.to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DesignVector::new(indices))
    }

    /// Maps a vector to `[0,1]^n`: coordinate i is `index_i / (m_i - 1)`, or 0
    /// for single-option variables. Categorical options are treated as ordinal.
    pub fn encode_normalized(&self, v: &DesignVector) -> Vec<f64> {
        self.variables
            .iter()
            .zip(v.indices())
            .map(|(var, &i)| normalized_level(i as usize, var.len()))
            .collect()
    }

    /// Lazily enumerates every vector of the space in lexicographic order.
    pub fn enumerate_all(&self) -> StageEnumerator {
        let group: Vec<usize> = (0..self.len()).collect();
        let fixed = PartialAssignment::empty(self.len());
        self.enumerate_stage(&group, &fixed)
            .expect("full enumeration covers every variable")
    }

    /// Enumerates every combination of `group`'s options with all remaining
    /// variables taken from `fixed`. Output is lexicographic by option index.
    pub fn enumerate_stage(
        &self,
        group: &[usize],
        fixed: &PartialAssignment,
    ) -> Result<StageEnumerator> {
        if fixed.len() != self.len() {
            return Err(Error::Contract(format!(
                "partial assignment has {} slots, space has {} variables",
                fixed.len(),
                self.len()
            )));
        }
        let mut in_group = vec![false; self.len()];
        for &g in group {
            if g >= self.len() {
                return Err(Error::Contract(format!("stage variable {g} out of range")));
            }
            if in_group[g] {
                return Err(Error::Contract(format!(
                    "variable `{}` listed twice in stage",
                    self.variables[g].name
                )));
            }
            in_group[g] = true;
        }
        let mut base = Vec::with_capacity(self.len());
        for (i, slot) in fixed.slots().iter().enumerate() {
            match (in_group[i], slot) {
                (true, Some(_)) => {
                    return Err(Error::Contract(format!(
                        "variable `{}` is both in the stage and fixed",
                        self.variables[i].name
                    )))
                }
                (false, None) => {
                    return Err(Error::Contract(format!(
                        "variable `{}` is neither in the stage nor fixed",
                        self.variables[i].name
                    )))
                }
                (true, None) => base.push(0),
                (false, Some(idx)) => {
                    if *idx as usize >= self.variables[i].len() {
                        return Err(Error::IndexOutOfRange {
                            variable: self.variables[i].name.clone(),
                            index: *idx as usize,
                            options: self.variables[i].len(),
                        });
                    }
                    base.push(*idx)
                }
            }
        }
        let mut positions: Vec<usize> = group.to_vec();
        positions.sort_unstable();
        let radices = positions
            .iter()
            .map(|&p| self.variables[p].len() as u16)
            .collect();
        Ok(StageEnumerator {
            current: Some(base),
            positions,
            radices,
        })
    }

    /// Resolves a starting bound to a concrete design vector.
    pub fn resolve_bound(&self, bound: &StartingBound) -> Result<DesignVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(bound.seed);
        let mut indices: Vec<u16> = self
            .variables
            .iter()
            .map(|var| {
                let m = var.len();
                (match bound.policy {
                    BoundPolicy::Low | BoundPolicy::Explicit => 0,
                    BoundPolicy::Middle => (m - 1) / 2,
                    BoundPolicy::Upper => m - 1,
                    BoundPolicy::Random => rng.gen_range(0..m),
                }) as u16
            })
            .collect();
        if bound.policy == BoundPolicy::Explicit {
            let missing: Vec<&str> = self
                .variables
                .iter()
                .filter(|v| !bound.overrides.contains_key(&v.name))
                .map(|v| v.name.as_str())
                .collect();
            if !missing.is_empty() {
                return Err(Error::Contract(format!(
                    "explicit bound leaves variables unset: {}",
                    missing.join(", ")
                )));
            }
        }
        for (name, &idx) in &bound.overrides {
            let pos = self.require_position(name)?;
            let m = self.variables[pos].len();
            if idx >= m {
                return Err(Error::IndexOutOfRange {
                    variable: name.clone(),
                    index: idx,
                    options: m,
                });
            }
            indices[pos] = idx as u16;
        }
        Ok(DesignVector::new(indices))
    }
}

pub(crate) fn normalized_level(index: usize, options: usize) -> f64 {
    if options <= 1 {
        0.0
    } else {
        index as f64 / (options - 1) as f64
    }
}

/// One option index per variable, in space order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DesignVector(Box<[u16]>);

impl DesignVector {
    pub fn new(indices: impl Into<Box<[u16]>>) -> Self {
        DesignVector(indices.into())
    }

    pub fn indices(&self) -> &[u16] {
        &self.0
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with the listed variables taken from `source`.
    pub fn with_from(&self, source: &DesignVector, positions: &[usize]) -> DesignVector {
        let mut out = self.0.to_vec();
        for &p in positions {
            out[p] = source.0[p];
        }
        DesignVector::new(out)
    }

    pub fn with_index(&self, position: usize, index: usize) -> DesignVector {
        let mut out = self.0.to_vec();
        out[position] = index as u16;
        DesignVector::new(out)
    }
}

impl fmt::Debug for DesignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for DesignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u16::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl From<Vec<u16>> for DesignVector {
    fn from(v: Vec<u16>) -> Self {
        DesignVector::new(v)
    }
}

/// Option indices for a subset of variables; `None` marks free slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment(Vec<Option<u16>>);

impl PartialAssignment {
    pub fn empty(n: usize) -> Self {
        PartialAssignment(vec![None; n])
    }

    /// Takes every variable from `v` except those in `free`.
    pub fn from_vector_except(v: &DesignVector, free: &[usize]) -> Self {
        let mut slots: Vec<Option<u16>> = v.indices().iter().map(|&i| Some(i)).collect();
        for &f in free {
            slots[f] = None;
        }
        PartialAssignment(slots)
    }

    pub fn set(&mut self, position: usize, index: Option<u16>) {
        self.0[position] = index;
    }

    pub fn slots(&self) -> &[Option<u16>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Odometer over the option indices of one stage.
#[derive(Debug, Clone)]
pub struct StageEnumerator {
    current: Option<Vec<u16>>,
    positions: Vec<usize>,
    radices: Vec<u16>,
}

impl Iterator for StageEnumerator {
    type Item = DesignVector;

    fn next(&mut self) -> Option<DesignVector> {
        let cur = self.current.as_mut()?;
        let out = DesignVector::new(cur.clone());
        let mut k = self.positions.len();
        loop {
            if k == 0 {
                self.current = None;
                break;
            }
            k -= 1;
            let p = self.positions[k];
            cur[p] += 1;
            if cur[p] < self.radices[k] {
                break;
            }
            cur[p] = 0;
        }
        Some(out)
    }
}

/// Ordered partition of the variables into optimization stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupingScheme {
    pub name: String,
    stages: Vec<Vec<usize>>,
}

impl GroupingScheme {
    /// Builds a scheme from stage position lists, checking it partitions the space.
    pub fn new(space: &DesignSpace, name: impl Into<String>, stages: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![0usize; space.len()];
        let mut violations = Vec::new();
        for (z, stage) in stages.iter().enumerate() {
            if stage.is_empty() {
                violations.push(format!("stage {} is empty", z + 1));
            }
            for &p in stage {
                if p >= space.len() {
                    violations.push(format!("stage {} references variable {p} out of range", z + 1));
                } else {
                    seen[p] += 1;
                }
            }
        }
        for (i, &count) in seen.iter().enumerate() {
            let name = &space.variable(i).name;
            match count {
                0 => violations.push(format!("grouping omits variable `{name}`")),
                1 => {}
                _ => violations.push(format!("variable `{name}` appears in {count} stages")),
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidSpace(violations));
        }
        let stages = stages
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        Ok(GroupingScheme {
            name: name.into(),
            stages,
        })
    }

    pub fn from_names<S: AsRef<str>>(
        space: &DesignSpace,
        name: impl Into<String>,
        stages: &[Vec<S>],
    ) -> Result<Self> {
        let mut unknown = Vec::new();
        let positions = stages
            .iter()
            .map(|stage| {
                stage
                    .iter()
                    .filter_map(|n| {
                        let found = space.position(n.as_ref());
                        if found.is_none() {
                            unknown.push(format!("unknown variable `{}` in grouping", n.as_ref()));
                        }
                        found
                    })
                    .collect()
            })
            .collect();
        if !unknown.is_empty() {
            return Err(Error::InvalidSpace(unknown));
        }
        GroupingScheme::new(space, name, positions)
    }

    /// One variable per stage, in declared order.
    pub fn ungrouped(space: &DesignSpace) -> Self {
        GroupingScheme {
            name: "ungrouped".into(),
            stages: (0..space.len()).map(|i| vec![i]).collect(),
        }
    }

    /// Geometry, fabric, HVAC, controls (then untagged), skipping empty groups.
    pub fn element_grouped(space: &DesignSpace) -> Self {
        let mut buckets: BTreeMap<ElementTag, Vec<usize>> = BTreeMap::new();
        for (i, v) in space.variables().iter().enumerate() {
            buckets.entry(v.element).or_default().push(i);
        }
        GroupingScheme {
            name: "element".into(),
            stages: buckets.into_values().collect(),
        }
    }

    /// Architecture then engineering (then untagged), skipping empty groups.
    pub fn field_grouped(space: &DesignSpace) -> Self {
        let mut buckets: BTreeMap<FieldTag, Vec<usize>> = BTreeMap::new();
        for (i, v) in space.variables().iter().enumerate() {
            buckets.entry(v.field).or_default().push(i);
        }
        GroupingScheme {
            name: "field".into(),
            stages: buckets.into_values().collect(),
        }
    }

    /// A single stage holding every variable; equivalent to a full factorial.
    pub fn single_group(space: &DesignSpace) -> Self {
        GroupingScheme {
            name: "single".into(),
            stages: vec![(0..space.len()).collect()],
        }
    }

    pub fn builtin(space: &DesignSpace, name: &str) -> Option<Self> {
        match name {
            "ungrouped" => Some(Self::ungrouped(space)),
            "element" | "element-grouped" => Some(Self::element_grouped(space)),
            "field" | "field-grouped" => Some(Self::field_grouped(space)),
            "single" => Some(Self::single_group(space)),
            _ => None,
        }
    }

    pub fn stages(&self) -> &[Vec<usize>] {
        &self.stages
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundPolicy {
    Low,
    Middle,
    Upper,
    Random,
    Explicit,
}

impl BoundPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundPolicy::Low => "low",
            BoundPolicy::Middle => "middle",
            BoundPolicy::Upper => "upper",
            BoundPolicy::Random => "random",
            BoundPolicy::Explicit => "explicit",
        }
    }
}

/// Policy that fixes the baseline vector a sequential search starts from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartingBound {
    pub policy: BoundPolicy,
    pub seed: u64,
    /// Per-variable option indices that win over the policy.
    pub overrides: BTreeMap<String, usize>,
}

impl StartingBound {
    pub fn new(policy: BoundPolicy) -> Self {
        StartingBound {
            policy,
            seed: 0,
            overrides: BTreeMap::new(),
        }
    }

    pub fn low() -> Self {
        Self::new(BoundPolicy::Low)
    }

    pub fn middle() -> Self {
        Self::new(BoundPolicy::Middle)
    }

    pub fn upper() -> Self {
        Self::new(BoundPolicy::Upper)
    }

    pub fn random(seed: u64) -> Self {
        StartingBound {
            seed,
            ..Self::new(BoundPolicy::Random)
        }
    }

    pub fn with_override(mut self, variable: impl Into<String>, index: usize) -> Self {
        self.overrides.insert(variable.into(), index);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> DesignSpace {
        DesignSpace::new(vec![
            VariableSpec::new("a", ["0", "1"], ElementTag::Geometry, FieldTag::Architecture),
            VariableSpec::new("b", ["x", "y", "z"], ElementTag::Fabric, FieldTag::Architecture),
            VariableSpec::new("c", ["p", "q", "r", "s"], ElementTag::Hvac, FieldTag::Engineering),
            VariableSpec::new("d", ["only"], ElementTag::Controls, FieldTag::Engineering),
        ])
        .unwrap()
    }

    #[test]
    fn singleton_space_counts_one() {
        let s = DesignSpace::new(vec![VariableSpec::new(
            "v",
            ["a"],
            ElementTag::Other,
            FieldTag::Other,
        )])
        .unwrap();
        assert!(s.validate().is_ok());
        assert_eq!(s.combination_count(), 1);
        assert_eq!(s.enumerate_all().count(), 1);
    }

    #[test]
    fn duplicate_names_are_reported() {
        let vars = vec![
            VariableSpec::new("v", ["a"], ElementTag::Other, FieldTag::Other),
            VariableSpec::new("v", ["a", "b"], ElementTag::Other, FieldTag::Other),
        ];
        let report = validate_variables(&vars);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("duplicate variable name")));
        assert!(DesignSpace::new(vars).is_err());
    }

    #[test]
    fn empty_options_and_duplicate_labels_are_reported() {
        let vars = vec![
            VariableSpec::new("a", Vec::<String>::new(), ElementTag::Other, FieldTag::Other),
            VariableSpec::new("b", ["x", "x"], ElementTag::Other, FieldTag::Other),
        ];
        let report = validate_variables(&vars);
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn stage_enumeration_is_lexicographic() {
        let s = toy();
        let base = DesignVector::new(vec![1, 2, 0, 0]);
        let fixed = PartialAssignment::from_vector_except(&base, &[0, 2]);
        let out: Vec<DesignVector> = s.enumerate_stage(&[2, 0], &fixed).unwrap().collect();
        assert_eq!(out.len(), 8);
        assert!(out.windows(2).all(|w| w[0] < w[1]));
        assert!(out.iter().all(|v| v.get(1) == 2 && v.get(3) == 0));
        assert_eq!(out[0].indices(), &[0, 2, 0, 0]);
        assert_eq!(out[7].indices(), &[1, 2, 3, 0]);
    }

    #[test]
    fn stage_enumeration_rejects_overlap_and_gap() {
        let s = toy();
        let base = DesignVector::new(vec![0, 0, 0, 0]);
        let overlap = PartialAssignment::from_vector_except(&base, &[]);
        assert!(s.enumerate_stage(&[1], &overlap).is_err());
        let gap = PartialAssignment::from_vector_except(&base, &[1, 2]);
        assert!(s.enumerate_stage(&[1], &gap).is_err());
    }

    #[test]
    fn single_option_group_yields_the_fixed_vector() {
        let s = toy();
        let base = DesignVector::new(vec![1, 1, 1, 0]);
        let fixed = PartialAssignment::from_vector_except(&base, &[3]);
        let out: Vec<_> = s.enumerate_stage(&[3], &fixed).unwrap().collect();
        assert_eq!(out, vec![base]);
    }

    #[test]
    fn bounds_resolve() {
        let s = toy();
        assert_eq!(s.resolve_bound(&StartingBound::low()).unwrap().indices(), &[0, 0, 0, 0]);
        assert_eq!(s.resolve_bound(&StartingBound::upper()).unwrap().indices(), &[1, 2, 3, 0]);
        assert_eq!(s.resolve_bound(&StartingBound::middle()).unwrap().indices(), &[0, 1, 1, 0]);
        let o = StartingBound::middle().with_override("c", 2);
        assert_eq!(s.resolve_bound(&o).unwrap().indices(), &[0, 1, 2, 0]);
        let bad = StartingBound::low().with_override("c", 4);
        assert!(matches!(s.resolve_bound(&bad), Err(Error::IndexOutOfRange { .. })));
        let unknown = StartingBound::low().with_override("zz", 0);
        assert!(s.resolve_bound(&unknown).is_err());
    }

    #[test]
    fn middle_of_five_is_two() {
        let s = DesignSpace::new(vec![VariableSpec::new(
            "v",
            ["1", "2", "3", "4", "5"],
            ElementTag::Other,
            FieldTag::Other,
        )])
        .unwrap();
        assert_eq!(s.resolve_bound(&StartingBound::middle()).unwrap().get(0), 2);
    }

    #[test]
    fn explicit_bound_requires_every_variable() {
        let s = toy();
        let partial = StartingBound::new(BoundPolicy::Explicit).with_override("a", 1);
        assert!(s.resolve_bound(&partial).is_err());
        let full = StartingBound::new(BoundPolicy::Explicit)
            .with_override("a", 1)
            .with_override("b", 1)
            .with_override("c", 3)
            .with_override("d", 0);
        assert_eq!(s.resolve_bound(&full).unwrap().indices(), &[1, 1, 3, 0]);
    }

    #[test]
    fn random_bound_is_seeded() {
        let s = toy();
        let a = s.resolve_bound(&StartingBound::random(7)).unwrap();
        let b = s.resolve_bound(&StartingBound::random(7)).unwrap();
        assert_eq!(a, b);
        let distinct = (0..64u64)
            .map(|seed| s.resolve_bound(&StartingBound::random(seed)).unwrap())
            .collect::<HashSet<_>>();
        assert!(distinct.len() > 10);
    }

    #[test]
    fn normalized_encoding() {
        let s = DesignSpace::new(vec![
            VariableSpec::new("a", ["0", "1", "2", "3", "4"], ElementTag::Other, FieldTag::Other),
            VariableSpec::new("b", ["0", "1"], ElementTag::Other, FieldTag::Other),
            VariableSpec::new("c", ["0", "1", "2", "3"], ElementTag::Other, FieldTag::Other),
            VariableSpec::new("d", ["0"], ElementTag::Other, FieldTag::Other),
        ])
        .unwrap();
        assert_eq!(
            s.encode_normalized(&DesignVector::new(vec![2, 1, 3, 0])),
            vec![0.5, 1.0, 1.0, 0.0]
        );
        assert_eq!(
            s.encode_normalized(&DesignVector::new(vec![0, 0, 0, 0])),
            vec![0.0; 4]
        );
    }

    #[test]
    fn builtin_groupings_partition_in_tag_order() {
        let s = toy();
        assert_eq!(GroupingScheme::ungrouped(&s).stage_count(), 4);
        assert_eq!(
            GroupingScheme::element_grouped(&s).stages(),
            &[vec![0], vec![1], vec![2], vec![3]]
        );
        assert_eq!(GroupingScheme::field_grouped(&s).stages(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn grouping_omitting_a_variable_names_it() {
        let s = toy();
        let err = GroupingScheme::from_names(&s, "g", &[vec!["a", "b"], vec!["c"]]).unwrap_err();
        assert!(err.to_string().contains("`d`"));
    }

    #[test]
    fn labels_round_trip() {
        let s = toy();
        let v = DesignVector::new(vec![1, 0, 3, 0]);
        let labels = s.labels(&v);
        assert_eq!(labels, vec!["1", "x", "s", "only"]);
        assert_eq!(s.vector_from_labels(&labels).unwrap(), v);
        assert!(s.vector_from_labels(&["1", "x", "nope", "only"]).is_err());
    }
}
