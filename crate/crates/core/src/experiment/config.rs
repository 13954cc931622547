//! Experiment configuration: JSON schema, loading and resolution into the
//! library's runtime types.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::case_study::{case_study_bound, make_case_study_space, Scale};
use crate::error::{Error, Result};
use crate::morris::MorrisPlan;
use crate::nsga2::{GaConfig, ProtocolConfig};
use crate::objective::{
    Backend, Benchmark, BenchmarkFamily, CountMode, Surrogate, SurrogateCoefficients, TableBackend,
};
use crate::seed::derive_seed;
use crate::sequential::DEFAULT_BUDGET_CAP;
use crate::space::{
    validate_variables, BoundPolicy, DesignSpace, GroupingScheme, StartingBound, VariableSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub space: SpaceSpec,
    pub backend: BackendSpec,
    #[serde(default = "default_groupings")]
    pub groupings: Vec<GroupingSpec>,
    #[serde(default = "default_bounds")]
    pub bounds: Vec<BoundSpec>,
    #[serde(default = "one")]
    pub iterative_depth: usize,
    #[serde(default)]
    pub nsga2: Nsga2Spec,
    #[serde(default)]
    pub full_factorial: FullFactorialSpec,
    #[serde(default)]
    pub morris: MorrisSpec,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub count_mode: CountMode,
    /// Worker threads; defaults to the number of CPUs.
    #[serde(default)]
    pub jobs: Option<usize>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Exactly one of the two fields must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_study: Option<Scale>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<VariableSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSpec {
    Surrogate {
        /// Coefficient table; the shipped table when absent.
        #[serde(default)]
        coefficients: Option<PathBuf>,
    },
    Csv {
        path: PathBuf,
        /// Objective columns; every non-variable column when absent.
        #[serde(default)]
        objectives: Option<Vec<String>>,
    },
    Benchmark { benchmark: BenchmarkFamily },
}

/// A built-in grouping name or an explicit list of stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupingSpec {
    Builtin(String),
    Custom { name: String, stages: Vec<Vec<String>> },
}

impl GroupingSpec {
    pub fn name(&self) -> &str {
        match self {
            GroupingSpec::Builtin(n) => n,
            GroupingSpec::Custom { name, .. } => name,
        }
    }
}

/// An option given by index (JSON number) or by label (JSON string).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptionRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    /// Defaults to the policy name.
    #[serde(default)]
    pub name: Option<String>,
    pub policy: BoundPolicy,
    /// Seed of the `random` policy; derived from the root seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub overrides: BTreeMap<String, OptionRef>,
}

impl BoundSpec {
    pub fn policy(policy: BoundPolicy) -> Self {
        BoundSpec {
            name: None,
            policy,
            seed: None,
            overrides: BTreeMap::new(),
        }
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(self.policy.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Nsga2Spec {
    pub enabled: bool,
    pub population_size: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Evaluation budget; tied to the sequential runs when absent.
    pub budget: Option<u64>,
    pub runs: usize,
    pub keep: usize,
    pub seed_stride: u64,
    pub stall_generations: usize,
    /// Name of the configured bound seeding the initial population; the
    /// first bound when absent.
    pub bound: Option<String>,
}

impl Default for Nsga2Spec {
    fn default() -> Self {
        let ga = GaConfig::default();
        let p = ProtocolConfig::default();
        Nsga2Spec {
            enabled: true,
            population_size: ga.population_size,
            tournament_size: ga.tournament_size,
            crossover_prob: ga.crossover_prob,
            mutation_prob: ga.mutation_prob,
            budget: None,
            runs: p.runs,
            keep: p.keep,
            seed_stride: p.seed_stride,
            stall_generations: ga.stall_generations,
            bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FullFactorialSpec {
    pub enabled: bool,
    pub budget_cap: u128,
}

impl Default for FullFactorialSpec {
    fn default() -> Self {
        FullFactorialSpec {
            enabled: true,
            budget_cap: DEFAULT_BUDGET_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MorrisSpec {
    pub enabled: bool,
    pub trajectories: usize,
    pub candidate_pool: usize,
}

impl Default for MorrisSpec {
    fn default() -> Self {
        let p = MorrisPlan::default();
        MorrisSpec {
            enabled: true,
            trajectories: p.trajectories,
            candidate_pool: p.candidate_pool,
        }
    }
}

fn one() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_groupings() -> Vec<GroupingSpec> {
    ["ungrouped", "element", "field"]
        .into_iter()
        .map(|n| GroupingSpec::Builtin(n.into()))
        .collect()
}

fn default_bounds() -> Vec<BoundSpec> {
    [BoundPolicy::Low, BoundPolicy::Middle, BoundPolicy::Upper, BoundPolicy::Random]
        .into_iter()
        .map(BoundSpec::policy)
        .collect()
}

/// Parses and validates a config file. Relative paths inside it resolve
/// against the file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut config = parse_config(&text)?;
    config.base_dir = base;
    config.resolve()?;
    Ok(config)
}

/// Parses a config without validating it. Type errors report the JSON path
/// of the offending value.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => {
                Error::Config(vec![format!("at `{path}`: {inner}")])
            }
            _ => Error::Json(inner),
        }
    })
}

/// Everything a run needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub space: DesignSpace,
    pub case_study: Option<Scale>,
    pub backend: Backend,
    pub groupings: Vec<GroupingScheme>,
    /// `(label, bound)` in configured order.
    pub bounds: Vec<(String, StartingBound)>,
    pub iterative_depth: usize,
    pub nsga2: Option<(GaConfig, ProtocolConfig)>,
    pub nsga2_budget: Option<u64>,
    pub full_factorial: Option<u128>,
    pub morris: Option<MorrisPlan>,
    pub seed: u64,
    pub count_mode: CountMode,
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve_path(&self.output_dir)
    }

    /// Validates the whole config, reporting every violation with its path.
    pub fn resolve(&self) -> Result<Experiment> {
        let mut v: Vec<String> = Vec::new();

        let space = match (&self.space.case_study, &self.space.variables) {
            (Some(scale), None) => Some(make_case_study_space(*scale)),
            (None, Some(vars)) => {
                let report = validate_variables(vars);
                v.extend(report.violations.iter().map(|m| format!("space.variables: {m}")));
                report.is_ok().then(|| DesignSpace::new(vars.clone()).ok()).flatten()
            }
            _ => {
                v.push("space: give exactly one of `case_study` or `variables`".into());
                None
            }
        };

        let backend = space.as_ref().and_then(|space| match self.build_backend(space) {
            Ok(b) => Some(b),
            Err(e) => {
                v.push(format!("backend: {e}"));
                None
            }
        });

        let mut groupings = Vec::new();
        let mut names = HashSet::new();
        if self.groupings.is_empty() {
            v.push("groupings: at least one grouping is required".into());
        }
        for (i, g) in self.groupings.iter().enumerate() {
            if !names.insert(g.name().to_string()) {
                v.push(format!("groupings[{i}]: duplicate name `{}`", g.name()));
            }
            let Some(space) = &space else { continue };
            let built = match g {
                GroupingSpec::Builtin(n) => GroupingScheme::builtin(space, n)
                    .ok_or_else(|| Error::Config(vec![format!("unknown built-in grouping `{n}`")])),
                GroupingSpec::Custom { name, stages } => GroupingScheme::from_names(space, name.clone(), stages),
            };
            match built {
                Ok(s) => groupings.push(s),
                Err(e) => v.push(format!("groupings[{i}]: {}", strip_kind(&e))),
            }
        }

        let mut bounds = Vec::new();
        let mut names = HashSet::new();
        if self.bounds.is_empty() {
            v.push("bounds: at least one bound is required".into());
        }
        for (i, b) in self.bounds.iter().enumerate() {
            if !names.insert(b.label().to_string()) {
                v.push(format!("bounds[{i}]: duplicate name `{}`", b.label()));
            }
            let Some(space) = &space else { continue };
            match self.build_bound(space, b) {
                Ok(sb) => bounds.push((b.label().to_string(), sb)),
                Err(e) => v.push(format!("bounds[{i}]: {}", strip_kind(&e))),
            }
        }

        let n = &self.nsga2;
        let nsga2 = if n.enabled {
            let start = match &n.bound {
                Some(name) => match bounds.iter().find(|(l, _)| l == name) {
                    Some((_, b)) => Some(b.clone()),
                    None => {
                        v.push(format!("nsga2.bound: no configured bound named `{name}`"));
                        None
                    }
                },
                None => bounds.first().map(|(_, b)| b.clone()),
            };
            let ga = GaConfig {
                population_size: n.population_size,
                tournament_size: n.tournament_size,
                crossover_prob: n.crossover_prob,
                mutation_prob: n.mutation_prob,
                budget: n.budget.unwrap_or(u64::MAX),
                count_mode: self.count_mode,
                seed: derive_seed(self.seed, "nsga2"),
                starting_bound: start.unwrap_or_else(StartingBound::low),
                stall_generations: n.stall_generations,
            };
            match ga.validate() {
                Ok(()) => {}
                Err(Error::Config(msgs)) => v.extend(msgs.into_iter().map(|m| format!("nsga2: {m}"))),
                Err(e) => v.push(format!("nsga2: {e}")),
            }
            if n.runs == 0 || n.keep == 0 || n.keep > n.runs {
                v.push(format!("nsga2: keep ({}) must lie in 1..=runs ({})", n.keep, n.runs));
            }
            let protocol = ProtocolConfig {
                runs: n.runs,
                keep: n.keep,
                seed_stride: n.seed_stride,
            };
            Some((ga, protocol))
        } else {
            None
        };

        let morris = if self.morris.enabled {
            let plan = MorrisPlan {
                trajectories: self.morris.trajectories,
                candidate_pool: self.morris.candidate_pool,
                seed: derive_seed(self.seed, "morris"),
            };
            if let Err(Error::Config(msgs)) = plan.validate() {
                v.extend(msgs.into_iter().map(|m| format!("morris: {m}")));
            }
            Some(plan)
        } else {
            None
        };

        if self.jobs == Some(0) {
            v.push("jobs: must be at least 1".into());
        }

        if !v.is_empty() {
            return Err(Error::Config(v));
        }
        Ok(Experiment {
            name: self.name.clone().unwrap_or_else(|| "experiment".into()),
            space: space.expect("checked above"),
            case_study: self.space.case_study,
            backend: backend.expect("checked above"),
            groupings,
            bounds,
            iterative_depth: self.iterative_depth,
            nsga2,
            nsga2_budget: self.nsga2.budget,
            full_factorial: self.full_factorial.enabled.then_some(self.full_factorial.budget_cap),
            morris,
            seed: self.seed,
            count_mode: self.count_mode,
            jobs: self.jobs,
        })
    }

    fn build_backend(&self, space: &DesignSpace) -> Result<Backend> {
        match &self.backend {
            BackendSpec::Surrogate { coefficients } => {
                let coeffs = match coefficients {
                    Some(p) => SurrogateCoefficients::from_path(&self.resolve_path(p))?,
                    None => SurrogateCoefficients::default(),
                };
                Ok(Backend::Surrogate(Surrogate::new(coeffs, space)?))
            }
            BackendSpec::Csv { path, objectives } => Ok(Backend::Table(TableBackend::from_path(
                space,
                &self.resolve_path(path),
                objectives.as_deref(),
            )?)),
            BackendSpec::Benchmark { benchmark } => {
                Ok(Backend::Benchmark(Benchmark::new(benchmark.clone(), space)?))
            }
        }
    }

    fn build_bound(&self, space: &DesignSpace, spec: &BoundSpec) -> Result<StartingBound> {
        let seed = spec
            .seed
            .unwrap_or_else(|| derive_seed(self.seed, &format!("bound/{}", spec.label())));
        let mut bound = match self.space.case_study {
            Some(_) if spec.policy != BoundPolicy::Explicit || spec.overrides.is_empty() => {
                case_study_bound(space, spec.policy, seed)?
            }
            _ if spec.policy == BoundPolicy::Random => StartingBound::random(seed),
            _ => StartingBound::new(spec.policy),
        };
        for (var, opt) in &spec.overrides {
            let pos = space.require_position(var)?;
            let spec_var = space.variable(pos);
            let idx = match opt {
                OptionRef::Index(i) => *i,
                OptionRef::Label(l) => spec_var.option_index(l).ok_or_else(|| Error::UnknownOption {
                    variable: var.clone(),
                    label: l.clone(),
                })?,
            };
            bound = bound.with_override(var.clone(), idx);
        }
        space.resolve_bound(&bound)?;
        Ok(bound)
    }
}

fn strip_kind(e: &Error) -> String {
    match e {
        Error::InvalidSpace(m) | Error::Config(m) => m.join("; "),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(extra: &str) -> String {
        format!(
            r#"{{
                "space": {{ "variables": [
                    {{ "name": "a", "options": ["0", "1"], "element": "geometry", "field": "architecture" }},
                    {{ "name": "b", "options": ["x", "y", "z"], "element": "hvac", "field": "engineering" }}
                ] }},
                "backend": {{ "kind": "benchmark", "benchmark": {{ "family": "sphere" }} }}
                {extra}
            }}"#
        )
    }

    #[test]
    fn defaults_fill_the_suite() {
        let exp = parse_config(&small_config("")).unwrap().resolve().unwrap();
        assert_eq!(exp.groupings.len(), 3);
        assert_eq!(exp.bounds.len(), 4);
        assert_eq!(exp.iterative_depth, 1);
        assert!(exp.nsga2.is_some() && exp.morris.is_some());
    }

    #[test]
    fn empty_text_is_a_parse_error() {
        assert!(matches!(parse_config(""), Err(Error::Json(_))));
    }

    #[test]
    fn unknown_field_reports_path() {
        let err = parse_config(&small_config(r#", "nsga2": { "populaton": 3 }"#)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nsga2") && msg.contains("populaton"), "{msg}");
    }

    #[test]
    fn grouping_omitting_a_variable_names_it() {
        let cfg = small_config(r#", "groupings": [{ "name": "g", "stages": [["a"]] }]"#);
        let err = parse_config(&cfg).unwrap().resolve().unwrap_err().to_string();
        assert!(err.contains("groupings[0]") && err.contains("`b`"), "{err}");
    }

    #[test]
    fn overrides_accept_labels_and_indices() {
        let cfg = small_config(
            r#", "bounds": [{ "name": "p", "policy": "low", "overrides": { "b": "z", "a": 1 } }]"#,
        );
        let exp = parse_config(&cfg).unwrap().resolve().unwrap();
        let v = exp.space.resolve_bound(&exp.bounds[0].1).unwrap();
        assert_eq!(v.indices(), &[1, 2]);

        let bad = small_config(r#", "bounds": [{ "policy": "low", "overrides": { "b": "w" } }]"#);
        let err = parse_config(&bad).unwrap().resolve().unwrap_err().to_string();
        assert!(err.contains("bounds[0]") && err.contains("`w`"), "{err}");
    }

    #[test]
    fn violations_are_collected() {
        let cfg = small_config(
            r#", "groupings": ["nope"], "morris": { "trajectories": 5, "candidate_pool": 2 }, "jobs": 0"#,
        );
        match parse_config(&cfg).unwrap().resolve() {
            Err(Error::Config(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dangling_csv_reference_is_reported() {
        let cfg = r#"{ "space": { "case_study": "very_small" },
                       "backend": { "kind": "csv", "path": "missing.csv" } }"#;
        let err = parse_config(cfg).unwrap().resolve().unwrap_err().to_string();
        assert!(err.contains("backend") && err.contains("missing.csv"), "{err}");
    }
}
