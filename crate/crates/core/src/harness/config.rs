use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{AdversaryMode, BiasParams, Rule};
use crate::error::{Error, Result};
use crate::graph::{read_edge_list, Graph};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    RandomRegular,
    Complete,
    Cycle,
    Petersen,
    /// edge-list file at `GraphSpec::path`
    File,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::RandomRegular => "random-regular",
            GraphKind::Complete => "complete",
            GraphKind::Cycle => "cycle",
            GraphKind::Petersen => "petersen",
            GraphKind::File => "file",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-regular" | "random_regular" | "rr" => Ok(GraphKind::RandomRegular),
            "complete" => Ok(GraphKind::Complete),
            "cycle" => Ok(GraphKind::Cycle),
            "petersen" => Ok(GraphKind::Petersen),
            "file" => Ok(GraphKind::File),
            other => Err(Error::Parameter(format!("unknown graph kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub kind: GraphKind,
    #[serde(default)]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Generator seed; derived from the root seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl GraphSpec {
    pub fn random_regular(n: usize, d: usize) -> Self {
        GraphSpec { kind: GraphKind::RandomRegular, n, d: Some(d), seed: None, path: None }
    }

    pub fn complete(n: usize) -> Self {
        GraphSpec { kind: GraphKind::Complete, n, d: None, seed: None, path: None }
    }

    pub fn cycle(n: usize) -> Self {
        GraphSpec { kind: GraphKind::Cycle, n, d: None, seed: None, path: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Vertex count, reading the header of an edge-list file if needed.
    pub fn vertex_count(&self) -> usize {
        match self.kind {
            GraphKind::Petersen => 10,
            _ => self.n,
        }
    }

    /// Generator parameter checks, all issues at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        self.issues(&mut issues);
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    fn issues(&self, out: &mut Vec<String>) {
        match self.kind {
            GraphKind::RandomRegular => match self.d {
                None => out.push("graph.d: required for random-regular graphs".into()),
                Some(d) => {
                    if d == 0 || d >= self.n {
                        out.push(format!("graph.d: need 1 <= d < n, got d = {d}, n = {}", self.n));
                    } else if !(self.n * d).is_multiple_of(2) {
                        out.push(format!("graph.n: n*d must be even, got n = {}, d = {d}", self.n));
                    }
                }
            },
            GraphKind::Complete if self.n < 2 => out.push(format!("graph.n: complete graph needs n >= 2, got {}", self.n)),
            GraphKind::Cycle if self.n < 3 => out.push(format!("graph.n: cycle needs n >= 3, got {}", self.n)),
            GraphKind::File if self.path.is_none() => out.push("graph.path: required for file graphs".into()),
            _ => {}
        }
    }

    /// Fills in the derived generator seed so the echoed config pins the graph.
    pub fn resolved(&self, root_seed: u64) -> Self {
        let mut spec = self.clone();
        if spec.kind == GraphKind::RandomRegular && spec.seed.is_none() {
            spec.seed = Some(rng::derive_labeled(root_seed, "graph"));
        }
        if spec.kind == GraphKind::Petersen {
            spec.n = 10;
        }
        spec
    }

    pub fn build(&self, root_seed: u64) -> Result<Graph> {
        let spec = self.resolved(root_seed);
        let g = match spec.kind {
            GraphKind::RandomRegular => {
                Graph::random_regular(spec.n, spec.d.unwrap_or(0), spec.seed.expect("resolved"))?
            }
            GraphKind::Complete => Graph::complete(spec.n)?,
            GraphKind::Cycle => Graph::cycle(spec.n)?,
            GraphKind::Petersen => Graph::petersen(),
            GraphKind::File => {
                let path = spec
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Parameter("file graph needs a path".into()))?;
                let g = read_edge_list(std::io::BufReader::new(std::fs::File::open(path)?))?;
                if spec.n != 0 && g.n() != spec.n {
                    return Err(Error::Structure(format!("file has n = {}, config says {}", g.n(), spec.n)));
                }
                g
            }
        };
        Ok(g)
    }
}

/// How many agents start with opinion 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialCondition {
    Count(usize),
    /// `round(fraction * n)`
    Fraction(f64),
    /// `ceil(kappa * ln n)`
    Clog(f64),
}

impl InitialCondition {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            InitialCondition::Count(a) => a,
            InitialCondition::Fraction(f) => (f * n as f64).round() as usize,
            InitialCondition::Clog(kappa) => ((kappa * (n as f64).ln()).ceil() as usize).min(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// uniformly random subset of size `A0`
    #[default]
    Uniform,
    /// vertices `0..A0`
    Prefix,
}

/// Optional overrides for the free constants of the 2-choices predictions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TheoryParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub rule: Rule,
    pub bias: BiasParams,
    pub initial: InitialCondition,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub adversary: AdversaryMode,
    pub trials: usize,
    /// `None`: 50 (T1 + T2) from the matching prediction, else 10^4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    pub root_seed: u64,
    #[serde(default)]
    pub record_trajectory: bool,
    #[serde(default = "default_stride")]
    pub trajectory_stride: usize,
    #[serde(default)]
    pub theory: TheoryParams,
}

impl ExperimentConfig {
    pub fn new(graph: GraphSpec, rule: Rule, bias: BiasParams, initial: InitialCondition, trials: usize, root_seed: u64) -> Self {
        ExperimentConfig {
            graph,
            rule,
            bias,
            initial,
            placement: Placement::Uniform,
            adversary: AdversaryMode::None,
            trials,
            max_steps: None,
            root_seed,
            record_trajectory: false,
            trajectory_stride: 1,
            theory: TheoryParams::default(),
        }
    }

    /// Collects every violated field.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        self.graph.issues(&mut issues);
        if self.trials < 1 {
            issues.push("trials: must be at least 1".into());
        }
        if self.max_steps == Some(0) {
            issues.push("max_steps: must be at least 1".into());
        }
        if let Err(e) = self.bias.validate() {
            issues.push(format!("bias: {e}"));
        }
        if self.trajectory_stride < 1 {
            issues.push("trajectory_stride: must be at least 1".into());
        }
        let n = self.graph.vertex_count();
        match self.initial {
            InitialCondition::Count(a) if self.graph.kind != GraphKind::File && a > n => {
                issues.push(format!("initial: count {a} exceeds n = {n}"))
            }
            InitialCondition::Fraction(f) if !(0.0..=1.0).contains(&f) => {
                issues.push(format!("initial: fraction {f} outside [0, 1]"))
            }
            InitialCondition::Clog(k) if !(k >= 0.0 && k.is_finite()) => {
                issues.push(format!("initial: clog factor {k} must be non-negative"))
            }
            _ => {}
        }
        if let Some(c) = self.theory.c {
            if !(c > 0.0) {
                issues.push(format!("theory.c: must be positive, got {c}"));
            }
        }
        if let Some(g) = self.theory.gamma {
            if !(g > 0.0) {
                issues.push(format!("theory.gamma: must be positive, got {g}"));
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::new(
            GraphSpec::random_regular(100, 4),
            Rule::Voter,
            BiasParams::new(0.8, 0.2).unwrap(),
            InitialCondition::Count(10),
            10,
            1,
        )
    }

    #[test]
    fn valid_config_passes() {
        base().validate().unwrap();
    }

    #[test]
    fn every_violation_is_listed() {
        let mut c = base();
        c.trials = 0;
        c.max_steps = Some(0);
        c.graph.d = Some(3);
        c.graph.n = 101;
        c.initial = InitialCondition::Fraction(1.5);
        match c.validate() {
            Err(Error::Config(issues)) => {
                let joined = issues.join("\n");
                for field in ["trials", "max_steps", "graph.n", "initial"] {
                    assert!(joined.contains(field), "missing {field} in {joined}");
                }
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn initial_conditions_resolve() {
        assert_eq!(InitialCondition::Count(7).resolve(100), 7);
        assert_eq!(InitialCondition::Fraction(0.3).resolve(2000), 600);
        assert_eq!(InitialCondition::Clog(12.0).resolve(4096), 100);
    }

    #[test]
    fn json_shape() {
        let text = serde_json::to_string(&base()).unwrap();
        assert!(text.contains(r#""initial":{"count":10}"#), "{text}");
        assert!(text.contains(r#""rule":"voter""#));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, base());
        let minimal = r#"{"graph":{"kind":"complete","n":5},"rule":"two-choices",
            "bias":{"q0":0.8,"q1":0.2},"initial":{"fraction":0.4},"trials":3,"root_seed":9}"#;
        let c: ExperimentConfig = serde_json::from_str(minimal).unwrap();
        assert_eq!(c.trajectory_stride, 1);
        assert_eq!(c.adversary, AdversaryMode::None);
    }

    #[test]
    fn resolved_seed_is_pinned() {
        let s = GraphSpec::random_regular(50, 4).resolved(3);
        assert!(s.seed.is_some());
        assert_eq!(s.build(99).unwrap(), GraphSpec::random_regular(50, 4).build(3).unwrap());
    }
}
