//! Command implementations behind the `h2net` binary. Each command returns a
//! JSON report; the binary only parses arguments and prints.
//!
//! Exit codes: `0` success, `1` numeric failure (or failed invariants for
//! `verify`), `2` invalid input.

use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{covariance_h2_bounds, gramian_trace_bounds};
use crate::design::{p1_solve, p1_solve_reference, p2_solve, DesignSolution, P1Config, P2Config};
use crate::error::Error;
use crate::graph::Edge;
use crate::h2::analyze;
use crate::operators::{edge_system, OutputMode, ScaleWeightPair};
use crate::sim::{simulate_edge_system, simulate_node_system, write_trajectory_csv, SimConfig};
use crate::spec_file::{LoadedNetwork, NetworkSpecFile};
use crate::verify::{run_random_suite, Battery, RandomSuite, VerifyReport};

pub const TOOL_NAME: &str = "h2net";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_validation() { 2 } else { 1 };
        let message = match &e {
            Error::InfeasibleMu { max, .. } => format!("{e}; feasible range is 0 <= mu <= {max}"),
            Error::UnstableStep { max_dt, .. } => format!("{e}; maximal stable dt is {max_dt}"),
            _ => e.to_string(),
        };
        CliError { code, message }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A command's output: the JSON report and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, exit_code: 0 }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }
}

fn header(command: &str, spec: Option<&NetworkSpecFile>) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("tool".into(), json!(TOOL_NAME));
    map.insert("version".into(), json!(TOOL_VERSION));
    map.insert("format_version".into(), json!(FORMAT_VERSION));
    map.insert("command".into(), json!(command));
    if let Some(s) = spec {
        map.insert("input".into(), serde_json::to_value(s).expect("spec serializes"));
    }
    map
}

fn finish(mut map: serde_json::Map<String, Value>, body: Value) -> CliResult<Outcome> {
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    let report = Value::Object(map);
    if let Some(path) = first_non_finite(&report, "") {
        return Err(CliError {
            code: 1,
            message: format!("non-finite value in report at {path}"),
        });
    }
    Ok(Outcome::ok(report))
}

/// serde_json writes NaN and infinities as `null`; every `null` in a numeric
/// position is therefore suspect. Optional fields are omitted, never null.
fn first_non_finite(v: &Value, path: &str) -> Option<String> {
    match v {
        Value::Null => Some(path.to_string()),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, x)| first_non_finite(x, &format!("{path}[{i}]"))),
        Value::Object(fields) => fields
            .iter()
            .find_map(|(k, x)| first_non_finite(x, &format!("{path}.{k}"))),
        _ => None,
    }
}

pub fn load_spec(path: &Path) -> CliResult<NetworkSpecFile> {
    Ok(NetworkSpecFile::read(path)?)
}

fn tree_json(loaded: &LoadedNetwork) -> Value {
    json!({
        "tree_edges": loaded.net.ordering.tree_edges(),
        "cycle_edges": loaded.net.ordering.cycle_edges(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeSelection {
    #[default]
    Sigma,
    SigmaHat,
}

impl From<ModeSelection> for OutputMode {
    fn from(m: ModeSelection) -> Self {
        match m {
            ModeSelection::Sigma => OutputMode::Sigma,
            ModeSelection::SigmaHat => OutputMode::SigmaHat,
        }
    }
}

pub fn cmd_analyze(
    spec: &NetworkSpecFile,
    mode: ModeSelection,
    tree: Option<&[Edge]>,
) -> CliResult<Outcome> {
    let loaded = spec.load(tree)?;
    let report = analyze(&loaded.net, &loaded.params, &loaded.noise)?;
    let headline = match mode {
        ModeSelection::Sigma => report.h2_sigma,
        ModeSelection::SigmaHat => report.h2_sigma_hat,
    };
    let mut body = json!({
        "spanning_tree": tree_json(&loaded),
        "mode": OutputMode::from(mode).name(),
        "h2_squared": headline.squared,
        "h2": headline.norm,
        "h2_sigma": report.h2_sigma,
        "h2_sigma_hat": report.h2_sigma_hat,
    });
    if let Some(sep) = report.separable {
        body["separated"] = json!({
            "sigma": sep.sigma,
            "sigma_hat": sep.sigma_hat,
            "cycle_w": sep.cycle.cycle_w,
            "cycle_e": sep.cycle.cycle_e,
            "k_ratio": sep.k_ratio,
        });
    }
    finish(header("analyze", Some(spec)), body)
}

pub fn cmd_bounds(spec: &NetworkSpecFile, tree: Option<&[Edge]>) -> CliResult<Outcome> {
    let loaded = spec.load(tree)?;
    let (inc, cb) = (&loaded.net.incidence, &loaded.net.cut);
    let mut per_mode = serde_json::Map::new();
    for mode in [OutputMode::Sigma, OutputMode::SigmaHat] {
        let sys = edge_system(inc, cb, &loaded.params, &loaded.noise, mode)?;
        let trace_bounds = gramian_trace_bounds(&sys)?;
        let cov = covariance_h2_bounds(inc, cb, &loaded.params, &loaded.noise, mode)?;
        per_mode.insert(
            mode.name().into(),
            json!({ "gramian_trace": trace_bounds, "covariance": cov }),
        );
    }
    let body = json!({
        "spanning_tree": tree_json(&loaded),
        "separable_noise": loaded.noise.is_separable(),
        "bounds": per_mode,
    });
    finish(header("bounds", Some(spec)), body)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignProblem {
    P1(P1Config),
    P2(P2Config),
}

#[derive(Serialize)]
struct AssignmentRow {
    node: usize,
    degree: usize,
    epsilon: f64,
    constraint: crate::design::ActiveConstraint,
}

fn assignment_table(loaded: &LoadedNetwork, sol: &DesignSolution) -> Vec<AssignmentRow> {
    loaded
        .net
        .graph
        .degrees()
        .into_iter()
        .zip(&sol.epsilon)
        .zip(&sol.active_constraints)
        .enumerate()
        .map(|(i, ((degree, &epsilon), &constraint))| AssignmentRow {
            node: i + 1,
            degree,
            epsilon,
            constraint,
        })
        .collect()
}

pub fn cmd_design(spec: &NetworkSpecFile, problem: DesignProblem) -> CliResult<Outcome> {
    let loaded = spec.load(None)?;
    let body = match problem {
        DesignProblem::P1(cfg) => {
            let weights = loaded.params.weights();
            let sol = p1_solve(&loaded.net, weights, &cfg)?;
            let reference = p1_solve_reference(&loaded.net, weights, &cfg)?;
            let designed = ScaleWeightPair::new(DVector::from_vec(sol.epsilon.clone()), weights.clone())?;
            let before = analyze(&loaded.net, &loaded.params, &loaded.noise)?;
            let after = analyze(&loaded.net, &designed, &loaded.noise)?;
            json!({
                "problem": "p1",
                "config": cfg,
                "feasible_mu_max": cfg.max_mu(loaded.net.graph.node_count()),
                "assignment": assignment_table(&loaded, &sol),
                "objective": sol.objective,
                "reference_objective": reference.objective,
                "inverse_sum": sol.inverse_sum(),
                "h2_sigma_squared_before": before.h2_sigma.squared,
                "h2_sigma_squared_after": after.h2_sigma.squared,
            })
        }
        DesignProblem::P2(cfg) => {
            let sol = p2_solve(&loaded.net.graph, &cfg)?;
            json!({
                "problem": "p2",
                "config": cfg,
                "assignment": assignment_table(&loaded, &sol),
                "objective": sol.objective,
            })
        }
    };
    finish(header("design", Some(spec)), body)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulateOptions {
    pub config: SimConfig,
    pub node_level: bool,
    pub mode: ModeSelection,
    pub dump_csv: Option<std::path::PathBuf>,
}

pub fn cmd_simulate(spec: &NetworkSpecFile, opts: &SimulateOptions) -> CliResult<Outcome> {
    let loaded = spec.load(None)?;
    let mode = OutputMode::from(opts.mode);
    let mut cfg = opts.config;
    if opts.dump_csv.is_some() && cfg.trajectory_stride.is_none() {
        cfg.trajectory_stride = Some(((0.01 / cfg.dt).round() as usize).max(1));
    }
    let sys = edge_system(&loaded.net.incidence, &loaded.net.cut, &loaded.params, &loaded.noise, mode)?;
    let analytic = crate::h2::h2_norm(&sys)?.squared;

    let (result, node_extra) = if opts.node_level {
        let r = simulate_node_system(&loaded.net, &loaded.params, &loaded.noise, mode, &cfg)?;
        let extra = json!({
            "cycle_residual_max": r.cycle_residual_max,
            "consensus_final": r.consensus_final,
        });
        (r.result, Some(extra))
    } else {
        (simulate_edge_system(&sys, &cfg)?, None)
    };

    if let Some(path) = &opts.dump_csv {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        write_trajectory_csv(
            std::io::BufWriter::new(file),
            result.trajectory_sample.as_deref().unwrap_or(&[]),
        )
        .map_err(|e| CliError {
            code: 1,
            message: format!("writing {}: {e}", path.display()),
        })?;
    }

    let diff = result.h2_squared_estimate - analytic;
    let z_score = if result.standard_error > 0.0 {
        diff / result.standard_error
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::MAX
    };
    let mut body = json!({
        "mode": mode.name(),
        "config": cfg,
        "node_level": opts.node_level,
        "seed": cfg.seed,
        "h2_squared_empirical": result.h2_squared_estimate,
        "standard_error": result.standard_error,
        "per_trial": result.per_trial,
        "h2_squared_analytic": analytic,
        "z_score": z_score,
    });
    if let Some(extra) = node_extra {
        body["node_level_checks"] = extra;
    }
    finish(header("simulate", Some(spec)), body)
}

fn verify_outcome(report: VerifyReport, mut map: serde_json::Map<String, Value>) -> CliResult<Outcome> {
    let exit_code = if report.all_passed { 0 } else { 1 };
    map.insert("verify".into(), serde_json::to_value(&report).expect("serializes"));
    // violations may legitimately be NaN here; report them as strings
    let mut out = Value::Object(map);
    if let Some(list) = out["verify"]["invariants"].as_array_mut() {
        for item in list {
            if item["max_violation"].is_null() {
                item["max_violation"] = json!("NaN");
            }
        }
    }
    Ok(Outcome {
        report: out,
        exit_code,
    })
}

pub fn cmd_verify_spec(spec: &NetworkSpecFile) -> CliResult<Outcome> {
    let loaded = spec.load(None)?;
    let mut rng = crate::random::rng(0);
    let g = &loaded.net.graph;
    let alt = (0..2)
        .map(|_| crate::graph::Network::with_tree(g.clone(), &crate::random::random_spanning_tree(&mut rng, g)))
        .collect::<crate::error::Result<Vec<_>>>()?;
    let mut battery = Battery::default();
    battery.check_instance(&loaded.net, &loaded.params, &loaded.noise, &alt)?;
    verify_outcome(battery.finish(), header("verify", Some(spec)))
}

pub fn cmd_verify_random(suite: &RandomSuite) -> CliResult<Outcome> {
    if suite.nodes < 2 || suite.count == 0 || !(suite.edge_probability > 0.0 && suite.edge_probability <= 1.0) {
        return Err(CliError::validation(
            "random suite needs nodes >= 2, count >= 1 and 0 < p <= 1",
        ));
    }
    let report = run_random_suite(suite)?;
    let mut map = header("verify", None);
    map.insert("suite".into(), serde_json::to_value(suite).expect("serializes"));
    map.insert("seed".into(), json!(suite.seed));
    verify_outcome(report, map)
}

/// Per-invariant summary lines for terminal output.
pub fn verify_lines(outcome: &Outcome) -> Vec<String> {
    outcome.report["verify"]["invariants"]
        .as_array()
        .map(|items| {
            items
                .iter()
                .map(|r| {
                    format!(
                        "{} {:<32} max violation {} (tol {})",
                        if r["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                        r["name"].as_str().unwrap_or("?"),
                        r["max_violation"],
                        r["tolerance"],
                    )
                })
                .collect()
        })
        .unwrap_or_default()
}
