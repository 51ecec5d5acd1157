//! Effective configs: a JSON document from `--config` patched by flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use opinion_lab::dynamics::{BiasParams, Rule};
use opinion_lab::harness::{DriftCheckConfig, ExperimentConfig, GraphKind, GraphSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::{BiasArgs, ExperimentArgs, GraphArgs};

/// The `config` object of a file, unwrapping output envelopes.
pub fn load(path: Option<&Path>) -> Result<Value> {
    let Some(path) = path else { return Ok(Value::Object(Map::new())) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let v = match v {
        Value::Object(mut m) if m.contains_key("schema_version") && m.contains_key("config") => m.remove("config").unwrap(),
        other => other,
    };
    if !v.is_object() {
        bail!("{}: config must be a JSON object", path.display());
    }
    Ok(v)
}

fn set(root: &mut Value, path: &[&str], value: Value) {
    let mut cur = root;
    for key in &path[..path.len() - 1] {
        let obj = cur.as_object_mut().expect("objects all the way down");
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
        if !cur.is_object() {
            *cur = Value::Object(Map::new());
        }
    }
    cur.as_object_mut().expect("object").insert(path[path.len() - 1].to_string(), value);
}

fn set_opt<T: Serialize>(root: &mut Value, path: &[&str], value: &Option<T>) {
    if let Some(v) = value {
        set(root, path, json!(v));
    }
}

fn apply_graph(v: &mut Value, g: &GraphArgs) {
    if g.graph_file.is_some() {
        set(v, &["graph", "kind"], json!(GraphKind::File));
    }
    set_opt(v, &["graph", "kind"], &g.kind);
    set_opt(v, &["graph", "n"], &g.n);
    set_opt(v, &["graph", "d"], &g.d);
    set_opt(v, &["graph", "seed"], &g.graph_seed);
    set_opt(v, &["graph", "path"], &g.graph_file);
}

fn apply_bias(v: &mut Value, b: &BiasArgs) {
    set_opt(v, &["bias", "q0"], &b.q0);
    set_opt(v, &["bias", "q1"], &b.q1);
}

fn decode<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| anyhow::anyhow!("invalid {what} config: {e}"))
}

/// Config document plus flag overrides, before typed decoding.
pub fn experiment_value(args: &ExperimentArgs) -> Result<Value> {
    let mut v = load(args.config.as_deref())?;
    apply_graph(&mut v, &args.graph);
    apply_bias(&mut v, &args.bias);
    set_opt(&mut v, &["root_seed"], &args.seed);
    set_opt(&mut v, &["rule"], &args.rule);
    if let Some(a) = args.a0 {
        set(&mut v, &["initial"], json!({ "count": a }));
    }
    if let Some(f) = args.fraction {
        set(&mut v, &["initial"], json!({ "fraction": f }));
    }
    if let Some(k) = args.clog {
        set(&mut v, &["initial"], json!({ "clog": k }));
    }
    set_opt(&mut v, &["placement"], &args.placement);
    set_opt(&mut v, &["adversary"], &args.adversary);
    set_opt(&mut v, &["trials"], &args.trials);
    set_opt(&mut v, &["max_steps"], &args.max_steps);
    if args.trajectory {
        set(&mut v, &["record_trajectory"], json!(true));
    }
    set_opt(&mut v, &["trajectory_stride"], &args.stride);
    set_opt(&mut v, &["theory", "c"], &args.c);
    set_opt(&mut v, &["theory", "gamma"], &args.gamma);
    if v.pointer("/graph/kind").is_none() {
        set(&mut v, &["graph", "kind"], json!(GraphKind::RandomRegular));
    }
    if v.get("root_seed").is_none() {
        bail!("--seed is required (or a config with root_seed)");
    }
    Ok(v)
}

/// Typed and validated experiment config with the graph seed pinned.
pub fn experiment(v: &Value) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = decode(v.clone(), "experiment")?;
    cfg.validate()?;
    cfg.graph = cfg.graph.resolved(cfg.root_seed);
    Ok(cfg)
}

/// Echoed config of a drift check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftRun {
    pub graph: GraphSpec,
    pub bias: BiasParams,
    pub check: DriftCheckConfig,
}

pub fn drift(cmd: &crate::DriftCmd) -> Result<DriftRun> {
    let mut v = load(cmd.config.as_deref())?;
    apply_graph(&mut v, &cmd.graph);
    apply_bias(&mut v, &cmd.bias);
    set_opt(&mut v, &["check", "seed"], &cmd.seed);
    set_opt(&mut v, &["check", "rules"], &cmd.rules);
    set_opt(&mut v, &["check", "states"], &cmd.states);
    set_opt(&mut v, &["check", "replays"], &cmd.replays);
    set_opt(&mut v, &["check", "sigma"], &cmd.sigma);
    set_opt(&mut v, &["check", "c"], &cmd.c);
    let Some(seed) = v.pointer("/check/seed").and_then(Value::as_u64) else {
        bail!("--seed is required (or a config with check.seed)");
    };
    let defaults = DriftCheckConfig::new(200, 10_000, seed);
    for (key, val) in [
        ("states", json!(defaults.states)),
        ("replays", json!(defaults.replays)),
        ("sigma", json!(defaults.sigma)),
        ("rules", json!(defaults.rules)),
    ] {
        if v.pointer(&format!("/check/{key}")).is_none() {
            set(&mut v, &["check", key], val);
        }
    }
    let mut run: DriftRun = decode(v, "drift-check")?;
    run.graph = run.graph.resolved(seed);
    Ok(run)
}

/// `complete4`, `cycle7`, `petersen`.
pub fn graph_shorthand(s: &str) -> Result<GraphSpec> {
    let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
    let (name, digits) = s.split_at(split);
    let n = || digits.parse::<usize>().with_context(|| format!("graph '{s}': expected a size after '{name}'"));
    Ok(match name {
        "complete" | "K" => GraphSpec::complete(n()?),
        "cycle" | "C" => GraphSpec::cycle(n()?),
        "petersen" if digits.is_empty() => GraphSpec { kind: GraphKind::Petersen, n: 10, d: None, seed: None, path: None },
        _ => bail!("unknown graph shorthand '{s}' (try complete4, cycle7, petersen)"),
    })
}

/// Echoed config of an oracle run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleRun {
    pub graph: GraphSpec,
    pub rule: Rule,
    pub bias: BiasParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_mc: Option<CompareMc>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CompareMc {
    pub trials: usize,
    pub seed: u64,
}

pub fn oracle(cmd: &crate::OracleCmd) -> Result<OracleRun> {
    let mut graph = match &cmd.graph {
        Some(s) => graph_shorthand(s)?,
        None => GraphSpec::complete(0),
    };
    let g = &cmd.graph_args;
    if g.graph_file.is_some() {
        graph.kind = GraphKind::File;
    }
    graph.kind = g.kind.unwrap_or(graph.kind);
    graph.n = g.n.unwrap_or(graph.n);
    graph.d = g.d.or(graph.d);
    graph.seed = g.graph_seed.or(graph.seed);
    graph.path = g.graph_file.clone().or(graph.path);
    if cmd.graph.is_none() && g.n.is_none() && graph.kind != GraphKind::File && graph.kind != GraphKind::Petersen {
        bail!("oracle needs --graph or --n");
    }
    if graph.kind == GraphKind::RandomRegular && graph.seed.is_none() {
        match cmd.seed {
            Some(s) => graph = graph.resolved(s),
            None => bail!("random-regular graphs need --graph-seed or --seed"),
        }
    }
    let compare_mc = if cmd.compare_mc {
        let Some(seed) = cmd.seed else { bail!("--compare-mc needs --seed") };
        if cmd.trials < 2 {
            bail!("--trials must be at least 2");
        }
        Some(CompareMc { trials: cmd.trials, seed })
    } else {
        None
    };
    let bias = BiasParams::new(cmd.bias.q0.unwrap_or(0.5), cmd.bias.q1.unwrap_or(0.5))?;
    Ok(OracleRun { graph, rule: cmd.rule.unwrap_or(Rule::Voter), bias, compare_mc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthands() {
        assert_eq!(graph_shorthand("complete4").unwrap(), GraphSpec::complete(4));
        assert_eq!(graph_shorthand("cycle7").unwrap(), GraphSpec::cycle(7));
        assert_eq!(graph_shorthand("petersen").unwrap().n, 10);
        assert!(graph_shorthand("star5").is_err());
        assert!(graph_shorthand("complete").is_err());
    }

    #[test]
    fn nested_set_creates_objects() {
        let mut v = json!({});
        set(&mut v, &["graph", "n"], json!(5));
        set(&mut v, &["graph", "d"], json!(2));
        set(&mut v, &["trials"], json!(3));
        assert_eq!(v, json!({"graph": {"n": 5, "d": 2}, "trials": 3}));
    }
}
