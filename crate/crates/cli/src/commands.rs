use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use opinion_lab::graph::{
    exact_conductance, second_eigenvalue, write_edge_list, Graph, SpectralOptions, SpectralProfile, MAX_CONDUCTANCE_N,
};
use opinion_lab::harness::export::{
    write_drift_csv, write_json, write_preamble, write_scaling_csv, write_sweep_csv, write_trajectories_csv,
    write_trials_csv,
};
use opinion_lab::harness::{
    drift_check as run_drift_check, run_batch, scaling_study, sweep_initial_fraction, Experiment, ExperimentConfig,
    GraphKind, GraphSpec, InitialCondition,
};
use opinion_lab::oracle::solve_absorption;
use opinion_lab::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::assemble::{self, CompareMc};
use crate::{DriftCmd, GraphCmd, OracleCmd, OutputArgs, ScalingCmd, SimulateCmd, SweepCmd};

fn create(out: &OutputArgs, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(&out.out_dir).with_context(|| format!("creating {}", out.out_dir.display()))?;
    let path: PathBuf = out.out_dir.join(name);
    let f = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn report_spectral(sp: &SpectralProfile, verbose: u8) {
    if verbose > 0 {
        eprintln!(
            "lambda = {:.6} (residual {:.1e}, {} iterations{}), Cheeger bracket [{:.4}, {:.4}]",
            sp.lambda,
            sp.residual,
            sp.iterations,
            if sp.degenerate { ", degenerate" } else { "" },
            sp.phi_lower,
            sp.phi_upper
        );
    }
}

/// An explicit `max_iter` is used as given; the default cap gets one retry
/// at 100x, since small random graphs often have a near-degenerate top pair.
fn spectral_with_retry(g: &Graph, tol: f64, max_iter: Option<usize>) -> Result<SpectralProfile> {
    let opts = SpectralOptions { tol, max_iter, ..SpectralOptions::default() };
    match (second_eigenvalue(g, &opts), max_iter) {
        (Err(Error::Spectral { iterations, .. }), None) => {
            eprintln!("note: power iteration unconverged after {iterations} iterations, retrying with {}", 100 * iterations);
            let opts = SpectralOptions { max_iter: Some(100 * iterations), ..opts };
            Ok(second_eigenvalue(g, &opts)?)
        }
        (r, _) => Ok(r?),
    }
}

#[derive(Serialize)]
struct GraphReport {
    n: usize,
    d: usize,
    edges: usize,
    connected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectral: Option<SpectralProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_conductance: Option<f64>,
}

pub fn graph(cmd: GraphCmd, verbose: u8) -> Result<bool> {
    let kind = if cmd.graph_file.is_some() { GraphKind::File } else { cmd.kind };
    let spec = GraphSpec { kind, n: cmd.n.unwrap_or(0), d: cmd.d, seed: cmd.seed, path: cmd.graph_file.clone() };
    spec.validate()?;
    match kind {
        GraphKind::RandomRegular if cmd.seed.is_none() => bail!("random-regular graphs need --seed"),
        GraphKind::RandomRegular | GraphKind::Complete | GraphKind::Cycle if cmd.n.is_none() => bail!("--n is required"),
        GraphKind::File if cmd.graph_file.is_none() => bail!("--kind file needs --graph-file"),
        _ => {}
    }
    let spec = spec.resolved(cmd.seed.unwrap_or(0));
    let g = spec.build(0)?;
    let spectral = if g.is_connected() { Some(spectral_with_retry(&g, cmd.tol, cmd.max_iter)?) } else { None };
    let phi = if g.is_connected() && g.n() <= MAX_CONDUCTANCE_N { Some(exact_conductance(&g)?) } else { None };
    let report = GraphReport { n: g.n(), d: g.d(), edges: g.edge_count(), connected: g.is_connected(), spectral, exact_conductance: phi };

    let mut w = create(&cmd.out, "graph.edges")?;
    write_preamble(&mut w, "graph", &spec)?;
    write_edge_list(&g, &mut w)?;
    finish(w)?;
    if cmd.out.format.json() {
        let w = create(&cmd.out, "graph.json")?;
        write_json(w, "graph", &spec, &report)?;
    }
    if let Some(sp) = &spectral {
        report_spectral(sp, verbose);
    }
    println!(
        "graph: n={} d={} connected={} lambda={} phi_bracket=[{}, {}] exact_conductance={}",
        g.n(),
        g.d(),
        g.is_connected(),
        fmt_opt(spectral.map(|s| s.lambda)),
        fmt_opt(spectral.map(|s| s.phi_lower)),
        fmt_opt(spectral.map(|s| s.phi_upper)),
        fmt_opt(phi)
    );
    Ok(true)
}

pub fn simulate(cmd: SimulateCmd, verbose: u8) -> Result<bool> {
    let v = assemble::experiment_value(&cmd.exp)?;
    let cfg = assemble::experiment(&v)?;
    let exp = Experiment::prepare(&cfg)?;
    report_spectral(&exp.spectral, verbose);
    for note in &exp.predictions.notes {
        eprintln!("note: {note}");
    }
    let batch = run_batch(&exp, cmd.out.workers)?;
    let s = &batch.summary;
    if cmd.out.format.csv() {
        let mut w = create(&cmd.out, "trials.csv")?;
        write_trials_csv(&mut w, &exp.config, &batch.records)?;
        finish(w)?;
        if exp.config.record_trajectory {
            let mut w = create(&cmd.out, "trajectories.csv")?;
            write_trajectories_csv(&mut w, &exp.config, s.n, &batch.records)?;
            finish(w)?;
        }
    }
    if cmd.out.format.json() {
        write_json(create(&cmd.out, "summary.json")?, "simulate", &exp.config, s)?;
    }
    println!(
        "simulate: n={} A0={} trials={} win1={:.4} ({}/{}) timeouts={} median_step={} theory_T1+T2={} max_steps={}",
        s.n,
        s.a0,
        s.trials,
        s.win1_frequency,
        s.wins_one,
        s.trials,
        s.timeouts,
        fmt_opt(s.consensus_step.map(|c| c.median)),
        fmt_opt(s.predictions.total_steps(exp.config.rule)),
        s.max_steps
    );
    Ok(true)
}

/// A list flag, else the same key in the config document.
fn list_from<T: serde::de::DeserializeOwned>(flag: Option<Vec<T>>, v: &Value, key: &str) -> Result<Vec<T>> {
    match flag {
        Some(l) => Ok(l),
        None => match v.get(key) {
            Some(x) => serde_json::from_value(x.clone()).with_context(|| format!("config field '{key}'")),
            None => bail!("--{key} is required (or a config with '{key}')"),
        },
    }
}

#[derive(Serialize)]
struct WithList<'a, T: Serialize> {
    #[serde(flatten)]
    experiment: &'a ExperimentConfig,
    #[serde(flatten)]
    list: T,
}

pub fn sweep(cmd: SweepCmd, verbose: u8) -> Result<bool> {
    let mut v = assemble::experiment_value(&cmd.exp)?;
    let fractions: Vec<f64> = list_from(cmd.fractions, &v, "fractions")?;
    if fractions.is_empty() {
        bail!("fractions: need at least one value");
    }
    if v.get("initial").is_none() {
        v["initial"] = json!({ "fraction": fractions[0] });
    }
    let cfg = assemble::experiment(&v)?;
    let res = sweep_initial_fraction(&cfg, &fractions, cmd.out.workers)?;
    report_spectral(&res.spectral, verbose);
    let echo = WithList { experiment: &cfg, list: json!({ "fractions": fractions }) };
    if cmd.out.format.csv() {
        let mut w = create(&cmd.out, "sweep.csv")?;
        write_sweep_csv(&mut w, &echo, &res)?;
        finish(w)?;
    }
    if cmd.out.format.json() {
        write_json(create(&cmd.out, "sweep.json")?, "sweep", &echo, &res)?;
    }
    println!("sweep: n={} lambda={:.6} threshold={}", res.n, res.spectral.lambda, fmt_opt(res.threshold));
    for p in &res.points {
        println!(
            "  fraction={} A0={} win1={:.4} +/- {:.4} median_step={} timeouts={} theory_T1+T2={}",
            p.fraction,
            p.a0,
            p.win1_frequency,
            p.win1_ci_half_width,
            fmt_opt(p.median_step),
            p.timeouts,
            fmt_opt(p.predictions.total_steps(cfg.rule))
        );
    }
    Ok(true)
}

pub fn scaling(cmd: ScalingCmd, _verbose: u8) -> Result<bool> {
    let mut v = assemble::experiment_value(&cmd.exp)?;
    let sizes: Vec<usize> = list_from(cmd.sizes, &v, "sizes")?;
    let Some(&first) = sizes.first() else { bail!("sizes: need at least one value") };
    // the template is validated at the first size
    v["graph"]["n"] = json!(first);
    let cfg = assemble::experiment(&v)?;
    let res = scaling_study(&cfg, &sizes, cmd.out.workers)?;
    let echo = WithList { experiment: &cfg, list: json!({ "sizes": sizes }) };
    if cmd.out.format.csv() {
        let mut w = create(&cmd.out, "scaling.csv")?;
        write_scaling_csv(&mut w, &echo, &res)?;
        finish(w)?;
    }
    if cmd.out.format.json() {
        write_json(create(&cmd.out, "scaling.json")?, "scaling", &echo, &res)?;
    }
    for r in &res.rows {
        println!(
            "scaling: n={} ln_n={:.3} A0={} lambda={:.4} win1={:.4} median_step={} timeouts={} theory_T1+T2={}",
            r.n,
            r.ln_n,
            r.a0,
            r.lambda,
            r.win1_frequency,
            fmt_opt(r.median_step),
            r.timeouts,
            fmt_opt(r.predicted_steps)
        );
    }
    println!(
        "fit: median_step = {:.4} * ln n + {:.4}; median ratio last/first = {}",
        res.slope,
        res.intercept,
        fmt_opt(res.median_ratio.map(|r| format!("{r:.4}")))
    );
    Ok(true)
}

pub fn drift_check(cmd: DriftCmd, verbose: u8) -> Result<bool> {
    let run = assemble::drift(&cmd)?;
    let g = run.graph.build(run.check.seed)?;
    g.require_connected()?;
    let sp = spectral_with_retry(&g, SpectralOptions::default().tol, None)?;
    report_spectral(&sp, verbose);
    let rep = run_drift_check(&g, &sp, &run.bias, &run.check, cmd.out.workers)?;
    if cmd.out.format.csv() {
        let mut w = create(&cmd.out, "drift.csv")?;
        write_drift_csv(&mut w, &run, &rep)?;
        finish(w)?;
    }
    if cmd.out.format.json() {
        write_json(create(&cmd.out, "drift.json")?, "drift-check", &run, &rep)?;
    }
    println!("{:<12} {:>5} {:>6} {:>12} {:>12} {:>12} {:>10} {:>7}  ok", "rule", "state", "A", "exact", "lower_bound", "empirical", "se", "z");
    for r in &rep.rows {
        let ok = r.empirical_ok
            && r.lower_bound_ok != Some(false)
            && r.refined_ok != Some(false)
            && r.quadratic_ok != Some(false);
        println!(
            "{:<12} {:>5} {:>6} {:>12.4} {:>12} {:>12.4} {:>10.4} {:>7.2}  {}",
            r.rule.to_string(),
            r.state_index,
            r.a,
            r.exact,
            fmt_opt(r.lower_bound.map(|b| format!("{b:.4}"))),
            r.empirical_mean,
            r.empirical_se,
            r.z,
            if ok { "yes" } else { "NO" }
        );
    }
    let t = rep.tally;
    println!(
        "drift-check: lambda={:.6} rows={} outliers={} lower_bound_violations={} refined_checked={} refined_skipped={} refined_violations={} quadratic_violations={} max_abs_z={:.3} => {}",
        sp.lambda,
        t.rows,
        t.empirical_outliers,
        t.lower_bound_violations,
        t.refined_checked,
        t.refined_skipped,
        t.refined_violations,
        t.quadratic_violations,
        t.max_abs_z,
        if rep.passed() { "PASS" } else { "FAIL" }
    );
    Ok(rep.passed())
}

#[derive(Serialize)]
struct StartRow {
    a0: usize,
    absorb_prob_one: f64,
    expected_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_win1_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_mean_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z_time: Option<f64>,
}

#[derive(Serialize)]
struct OracleReport {
    n: usize,
    sweeps: usize,
    by_start_count: Vec<StartRow>,
}

pub fn oracle(cmd: OracleCmd, _verbose: u8) -> Result<bool> {
    let run = assemble::oracle(&cmd)?;
    let g = Arc::new(run.graph.build(0)?);
    let sol = solve_absorption(&g, &run.bias, run.rule)?;
    let mut rows = Vec::new();
    let mut all_ok = true;
    for a in 0..=g.n() {
        let (p, t) = sol.uniform_start(a);
        let mut row = StartRow {
            a0: a,
            absorb_prob_one: p,
            expected_time: t,
            mc_win1_frequency: None,
            z_prob: None,
            mc_mean_time: None,
            z_time: None,
        };
        if let (Some(CompareMc { trials, seed }), true) = (run.compare_mc, a > 0 && a < g.n()) {
            let mut cfg =
                ExperimentConfig::new(run.graph.clone(), run.rule, run.bias, InitialCondition::Count(a), trials, seed);
            cfg.max_steps = Some(10_000_000);
            let s = run_batch(&Experiment::on_graph(&cfg, g.clone())?, cmd.out.workers)?.summary;
            let se_p = (p * (1.0 - p) / trials as f64).sqrt();
            let z_p = if se_p > 0.0 { (s.win1_frequency - p) / se_p } else { 0.0 };
            let steps = s.consensus_step.context("every Monte Carlo trial timed out")?;
            let z_t = if steps.std_error > 0.0 { (steps.mean - t) / steps.std_error } else { 0.0 };
            all_ok &= z_p.abs() <= 3.0 && z_t.abs() <= 3.0 && s.timeouts == 0;
            row.mc_win1_frequency = Some(s.win1_frequency);
            row.z_prob = Some(z_p);
            row.mc_mean_time = Some(steps.mean);
            row.z_time = Some(z_t);
        }
        rows.push(row);
    }
    if cmd.out.format.csv() {
        let mut w = create(&cmd.out, "oracle.csv")?;
        write_preamble(&mut w, "oracle", &run)?;
        sol.write_csv(&mut w)?;
        finish(w)?;
    }
    let report = OracleReport { n: g.n(), sweeps: sol.sweeps, by_start_count: rows };
    for r in &report.by_start_count {
        print!("oracle: A0={} absorb_prob_one={:.10} expected_time={:.6}", r.a0, r.absorb_prob_one, r.expected_time);
        if let (Some(zp), Some(zt)) = (r.z_prob, r.z_time) {
            print!(" mc_win1={:.4} z_prob={zp:.2} z_time={zt:.2}", r.mc_win1_frequency.unwrap_or(f64::NAN));
        }
        println!();
    }
    if cmd.out.format.json() {
        write_json(create(&cmd.out, "oracle.json")?, "oracle", &run, &report)?;
    }
    Ok(all_ok)
}
