//! Strict JSON scenario files.
//!
//! ```json
//! {
//!   "label": "example",
//!   "alpha": 0.2, "sigma": 0.29, "beta1": 0.67, "beta2": 0.56, "mu1": 0.8, "mu2": 0.41,
//!   "s0": 10000.0, "i0": 1865.0, "t0": 0.0, "t1": 10.0,
//!   "solver": { "method": "rk4-fixed", "step": 0.001, "rel_tol": 1e-8,
//!               "max_steps": 10000000, "blowup_threshold": 1e12 }
//! }
//! ```
//!
//! `label`, `assumed`, `solver` and every solver field are optional. Unknown
//! keys are rejected wherever they appear.

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::integrator::{Method, SolverConfig};
use crate::model::{ModelError, ModelParams, RatePolicy, RawParams, State};
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioFileError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("schema error at {path}: {expected}")]
    Schema { path: String, expected: String },
    #[error("validation error: {0}")]
    Validation(#[from] ModelError),
    #[error("validation error: {0}")]
    Scenario(#[from] ScenarioError),
}

const PARAM_KEYS: [&str; 6] = ["alpha", "sigma", "beta1", "beta2", "mu1", "mu2"];
const TOP_KEYS: [&str; 13] = [
    "label", "assumed", "alpha", "sigma", "beta1", "beta2", "mu1", "mu2", "s0", "i0", "t0", "t1", "solver",
];
const SOLVER_KEYS: [&str; 5] = ["method", "step", "rel_tol", "max_steps", "blowup_threshold"];

fn schema(path: impl Into<String>, expected: impl Into<String>) -> ScenarioFileError {
    ScenarioFileError::Schema {
        path: path.into(),
        expected: expected.into(),
    }
}

/// Byte offset of a serde_json line/column position.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split(|&b| b == b'\n')
        .take(line - 1)
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<(), ScenarioFileError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{prefix}.{k}"), "no such key")),
        None => Ok(()),
    }
}

fn number(obj: &Map<String, Value>, key: &str, prefix: &str) -> Result<Option<f64>, ScenarioFileError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| schema(format!("{prefix}.{key}"), "a number")),
    }
}

fn required(obj: &Map<String, Value>, key: &str) -> Result<f64, ScenarioFileError> {
    number(obj, key, "$")?.ok_or_else(|| schema(format!("$.{key}"), "a required number"))
}

fn parse_solver(v: &Value) -> Result<SolverConfig, ScenarioFileError> {
    let obj = v.as_object().ok_or_else(|| schema("$.solver", "an object"))?;
    check_keys(obj, &SOLVER_KEYS, "$.solver")?;
    let mut cfg = SolverConfig::default();
    if let Some(m) = obj.get("method") {
        cfg.method = m
            .as_str()
            .and_then(Method::parse)
            .ok_or_else(|| schema("$.solver.method", "\"rk4-fixed\" or \"rk4-adaptive\""))?;
    }
    if let Some(step) = number(obj, "step", "$.solver")? {
        cfg.step = step;
    }
    if let Some(tol) = number(obj, "rel_tol", "$.solver")? {
        cfg.rel_tol = tol;
    }
    if let Some(th) = number(obj, "blowup_threshold", "$.solver")? {
        cfg.blowup_threshold = th;
    }
    if let Some(v) = obj.get("max_steps") {
        let n = v
            .as_u64()
            .or_else(|| v.as_f64().filter(|f| f.fract() == 0.0 && *f >= 1.0 && *f <= 9.0e15).map(|f| f as u64))
            .ok_or_else(|| schema("$.solver.max_steps", "a positive integer"))?;
        cfg.max_step_count = n;
    }
    Ok(cfg)
}

/// Parses and validates a scenario file.
pub fn parse_scenario(bytes: &[u8], policy: RatePolicy) -> Result<Scenario, ScenarioFileError> {
    let root: Value = serde_json::from_slice(bytes).map_err(|e| ScenarioFileError::Syntax {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| schema("$", "an object"))?;
    check_keys(obj, &TOP_KEYS, "$")?;

    let mut values = [0.0; 6];
    for (slot, key) in values.iter_mut().zip(PARAM_KEYS) {
        *slot = required(obj, key)?;
    }
    let [alpha, sigma, beta1, beta2, mu1, mu2] = values;
    let x0 = State::new(required(obj, "s0")?, required(obj, "i0")?);
    let t0 = required(obj, "t0")?;
    let t1 = required(obj, "t1")?;
    let label = match obj.get("label") {
        None => String::new(),
        Some(v) => v.as_str().ok_or_else(|| schema("$.label", "a string"))?.to_owned(),
    };
    let assumed = match obj.get("assumed") {
        None => false,
        Some(v) => v.as_bool().ok_or_else(|| schema("$.assumed", "a boolean"))?,
    };
    let solver = match obj.get("solver") {
        None => SolverConfig::default(),
        Some(v) => parse_solver(v)?,
    };

    let params = ModelParams::with_policy(RawParams::new(alpha, sigma, beta1, beta2, mu1, mu2), policy)?;
    let scenario = Scenario {
        params,
        x0,
        t0,
        t1,
        solver,
        label,
        assumed,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize)]
struct SolverDoc {
    method: Method,
    step: f64,
    rel_tol: f64,
    max_steps: u64,
    blowup_threshold: f64,
}

#[derive(Serialize)]
struct ScenarioDoc<'a> {
    label: &'a str,
    #[serde(skip_serializing_if = "is_false")]
    assumed: bool,
    alpha: f64,
    sigma: f64,
    beta1: f64,
    beta2: f64,
    mu1: f64,
    mu2: f64,
    s0: f64,
    i0: f64,
    t0: f64,
    t1: f64,
    solver: SolverDoc,
}

/// Pretty-printed JSON accepted by [`parse_scenario`].
pub fn serialize_scenario(sc: &Scenario) -> String {
    let raw = sc.params.raw();
    let doc = ScenarioDoc {
        label: &sc.label,
        assumed: sc.assumed,
        alpha: raw.alpha,
        sigma: raw.sigma,
        beta1: raw.beta1,
        beta2: raw.beta2,
        mu1: raw.mu1,
        mu2: raw.mu2,
        s0: sc.x0.s,
        i0: sc.x0.i,
        t0: sc.t0,
        t1: sc.t1,
        solver: SolverDoc {
            method: sc.solver.method,
            step: sc.solver.step,
            rel_tol: sc.solver.rel_tol,
            max_steps: sc.solver.max_step_count,
            blowup_threshold: sc.solver.blowup_threshold,
        },
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("scenario documents always serialize");
    out.push('\n');
    out
}
