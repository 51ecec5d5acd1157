//! CSV and JSON writers for harness results.
//!
//! Every file carries the schema version and the effective config. JSON
//! outputs are an envelope `{schema_version, kind, config, result}`; CSV
//! outputs open with `#` comment lines holding the same information, so
//! `csv` readers with a comment character (pandas `comment="#"`) skip them.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::drift::DriftReport;
use super::sweep::{ScalingResult, SweepResult};
use super::trial::RunRecord;
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub schema_version: u32,
    pub kind: String,
    pub config: C,
    pub result: R,
}

pub fn to_json<C: Serialize, R: Serialize>(kind: &str, config: &C, result: &R) -> Result<String> {
    let env = Envelope { schema_version: SCHEMA_VERSION, kind: kind.to_string(), config, result };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<W: Write, C: Serialize, R: Serialize>(mut out: W, kind: &str, config: &C, result: &R) -> Result<()> {
    out.write_all(to_json(kind, config, result)?.as_bytes())?;
    Ok(())
}

/// The `#` header shared by all CSV outputs.
pub fn write_preamble<W: Write, C: Serialize>(mut out: W, kind: &str, config: &C) -> Result<()> {
    writeln!(out, "# schema_version: {SCHEMA_VERSION}")?;
    writeln!(out, "# kind: {kind}")?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    Ok(())
}

/// Reads a config back from either a bare config document or any JSON
/// output of this crate (whose `config` field is used).
pub fn config_from_json<C: serde::de::DeserializeOwned>(text: &str) -> Result<C> {
    let v: Value = serde_json::from_str(text)?;
    let inner = match v {
        Value::Object(ref m) if m.contains_key("schema_version") && m.contains_key("config") => m["config"].clone(),
        other => other,
    };
    Ok(serde_json::from_value(inner)?)
}

/// Recovers the config line of a CSV preamble.
pub fn config_from_csv<C: serde::de::DeserializeOwned>(text: &str) -> Result<C> {
    let line = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# config: "))
        .ok_or_else(|| Error::Parse { line: 0, msg: "no '# config:' line in CSV preamble".into() })?;
    Ok(serde_json::from_str(line)?)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(())
}

/// One row per trial: `trial_index,seed,winner,consensus_step,final_count_one`.
/// `consensus_step` is empty on timeout.
pub fn write_trials_csv<W: Write, C: Serialize>(mut out: W, config: &C, records: &[RunRecord]) -> Result<()> {
    write_preamble(&mut out, "trials", config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial_index", "seed", "winner", "consensus_step", "final_count_one"])?;
    for r in records {
        w.write_record([
            r.trial_index.to_string(),
            r.trial_seed.to_string(),
            r.winner.to_string(),
            opt(r.consensus_step),
            r.final_count_one.to_string(),
        ])?;
    }
    finish(w)
}

/// Long format: `trial_index,t,count_one,count_zero`.
pub fn write_trajectories_csv<W: Write, C: Serialize>(
    mut out: W,
    config: &C,
    n: usize,
    records: &[RunRecord],
) -> Result<()> {
    write_preamble(&mut out, "trajectories", config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial_index", "t", "count_one", "count_zero"])?;
    for r in records {
        for &(t, a) in &r.trajectory {
            w.write_record([r.trial_index.to_string(), t.to_string(), a.to_string(), (n - a).to_string()])?;
        }
    }
    finish(w)
}

pub fn write_sweep_csv<W: Write, C: Serialize>(mut out: W, config: &C, sweep: &SweepResult) -> Result<()> {
    write_preamble(&mut out, "sweep", config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "fraction",
        "a0",
        "trials",
        "win1_frequency",
        "win1_ci_half_width",
        "mean_step",
        "median_step",
        "timeouts",
        "max_steps",
        "threshold",
        "lambda",
    ])?;
    for p in &sweep.points {
        w.write_record([
            p.fraction.to_string(),
            p.a0.to_string(),
            p.trials.to_string(),
            p.win1_frequency.to_string(),
            p.win1_ci_half_width.to_string(),
            opt(p.mean_step),
            opt(p.median_step),
            p.timeouts.to_string(),
            p.max_steps.to_string(),
            opt(sweep.threshold),
            sweep.spectral.lambda.to_string(),
        ])?;
    }
    finish(w)
}

/// Per-size rows; the fitted slope and intercept go in the preamble.
pub fn write_scaling_csv<W: Write, C: Serialize>(mut out: W, config: &C, scaling: &ScalingResult) -> Result<()> {
    write_preamble(&mut out, "scaling", config)?;
    writeln!(out, "# fit: median_step = {} * ln_n + {}", scaling.slope, scaling.intercept)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "ln_n",
        "a0",
        "graph_seed",
        "lambda",
        "trials",
        "win1_frequency",
        "timeouts",
        "median_step",
        "mean_step",
        "predicted_steps",
    ])?;
    for r in &scaling.rows {
        w.write_record([
            r.n.to_string(),
            r.ln_n.to_string(),
            r.a0.to_string(),
            opt(r.graph_seed),
            r.lambda.to_string(),
            r.trials.to_string(),
            r.win1_frequency.to_string(),
            r.timeouts.to_string(),
            opt(r.median_step),
            opt(r.mean_step),
            opt(r.predicted_steps),
        ])?;
    }
    finish(w)
}

pub fn write_drift_csv<W: Write, C: Serialize>(mut out: W, config: &C, report: &DriftReport) -> Result<()> {
    write_preamble(&mut out, "drift", config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "rule",
        "state_index",
        "placement",
        "a",
        "b",
        "cut",
        "exact",
        "empirical_mean",
        "empirical_se",
        "z",
        "lower_bound",
        "refined_lb",
        "quadratic",
        "quadratic_lb",
        "ok",
    ])?;
    for r in &report.rows {
        let ok = r.empirical_ok
            && r.lower_bound_ok != Some(false)
            && r.refined_ok != Some(false)
            && r.quadratic_ok != Some(false);
        w.write_record([
            r.rule.to_string(),
            r.state_index.to_string(),
            r.placement.clone(),
            r.a.to_string(),
            r.b.to_string(),
            r.cut.to_string(),
            r.exact.to_string(),
            r.empirical_mean.to_string(),
            r.empirical_se.to_string(),
            r.z.to_string(),
            opt(r.lower_bound),
            opt(r.refined_lb),
            opt(r.quadratic),
            opt(r.quadratic_lb),
            ok.to_string(),
        ])?;
    }
    finish(w)
}
