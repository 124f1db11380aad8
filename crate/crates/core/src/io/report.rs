//! Human- and machine-readable reports: equilibria, fits and the consistency check.

use std::fmt::Write;

use serde_json::{json, Value};

use super::fmt_num;
use super::presets::Preset;
use crate::analysis::{classify_spectrum, sweep, Equilibrium, OutcomeTag};
use crate::calibration::FitResult;
use crate::integrator::{integrate_with, Status};
use crate::model::{ParamName, State};
use crate::scenario::Scenario;

/// Largest `h·|λ|` for which classical RK4 is stable on a real negative eigenvalue.
pub const RK4_REAL_STABILITY: f64 = 2.785;

fn params_json(sc: &Scenario) -> Value {
    let raw = sc.params.raw();
    json!({
        "alpha": raw.alpha,
        "sigma": raw.sigma,
        "beta1": raw.beta1,
        "beta2": raw.beta2,
        "mu1": raw.mu1,
        "mu2": raw.mu2,
    })
}

fn pretty(v: &Value) -> String {
    let mut out = serde_json::to_string_pretty(v).expect("report values serialize");
    out.push('\n');
    out
}

fn equilibrium_json(e: &Equilibrium) -> Value {
    let j = e.jacobian.0;
    json!({
        "s": e.point.s,
        "i": e.point.i,
        "residual": e.residual_norm,
        "trace": e.jacobian.trace(),
        "det": e.jacobian.det(),
        "jacobian": [[j[0][0], j[0][1]], [j[1][0], j[1][1]]],
        "eigenvalues": e.eigenvalues.iter().map(|z| json!({"re": z.re, "im": z.im})).collect::<Vec<_>>(),
        "classification": e.classification.as_str(),
    })
}

pub fn equilibria_json(sc: &Scenario, eqs: &[Equilibrium]) -> String {
    pretty(&json!({
        "label": sc.label,
        "assumed": sc.assumed,
        "params": params_json(sc),
        "equilibria": eqs.iter().map(equilibrium_json).collect::<Vec<_>>(),
    }))
}

pub fn equilibria_text(sc: &Scenario, eqs: &[Equilibrium]) -> String {
    let mut out = String::new();
    if !sc.label.is_empty() {
        let _ = writeln!(out, "{}", sc.label);
    }
    if sc.assumed {
        let _ = writeln!(out, "note: initial state is assumed");
    }
    let _ = writeln!(out, "{} equilibri{} found", eqs.len(), if eqs.len() == 1 { "um" } else { "a" });
    for e in eqs {
        let [l1, l2] = e.eigenvalues;
        let _ = writeln!(
            out,
            "  ({}, {})  {}  trace={} det={}  eigenvalues {}{:+}i, {}{:+}i  residual={}",
            fmt_num(e.point.s),
            fmt_num(e.point.i),
            e.classification,
            fmt_num(e.jacobian.trace()),
            fmt_num(e.jacobian.det()),
            fmt_num(l1.re),
            l1.im,
            fmt_num(l2.re),
            l2.im,
            fmt_num(e.residual_norm),
        );
    }
    out
}

pub fn fit_json(sc: &Scenario, free: &[ParamName], result: &FitResult) -> String {
    let raw = result.params.raw();
    let mut fitted = serde_json::Map::new();
    for name in free {
        fitted.insert(name.as_str().to_owned(), json!(raw.get(*name)));
    }
    pretty(&json!({
        "label": sc.label,
        "assumed": sc.assumed,
        "fitted": fitted,
        "params": {
            "alpha": raw.alpha,
            "sigma": raw.sigma,
            "beta1": raw.beta1,
            "beta2": raw.beta2,
            "mu1": raw.mu1,
            "mu2": raw.mu2,
        },
        "x0": {"s": result.x0.s, "i": result.x0.i},
        "residual": result.residual,
        "initial_residual": result.initial_residual,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "stop": result.stop,
        "trace": result.trace.iter().map(|(n, v)| json!([n, v])).collect::<Vec<_>>(),
    }))
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

/// Spectral radius of the Jacobian at `x`.
fn spectral_radius(sc: &Scenario, x: State) -> f64 {
    let j = sc.params.jacobian(x);
    let (ev, _) = classify_spectrum(j.trace(), j.det());
    ev.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn preset_header(out: &mut String, preset: Preset, sc: &Scenario) {
    let raw = sc.params.raw();
    let _ = writeln!(out, "[{preset}] {}", sc.label.split_once(": ").map_or(sc.label.as_str(), |(_, l)| l));
    let _ = writeln!(
        out,
        "    alpha={} sigma={} beta1={} beta2={} mu1={} mu2={}  x0=({}, {})  k={}",
        raw.alpha,
        raw.sigma,
        raw.beta1,
        raw.beta2,
        raw.mu1,
        raw.mu2,
        sc.x0.s,
        sc.x0.i,
        fixed(sc.params.k())
    );
}

fn line(out: &mut String, key: &str, value: impl AsRef<str>) {
    let _ = writeln!(out, "    {key:<22}{}", value.as_ref());
}

fn default_run(out: &mut String, sc: &Scenario) {
    let h = sc.solver.step;
    let mut first_stiff: Option<f64> = None;
    let summary = integrate_with(&sc.params, sc.x0, sc.t0, sc.t1, &sc.solver, |t, x| {
        if first_stiff.is_none() && h * spectral_radius(sc, x) > RK4_REAL_STABILITY {
            first_stiff = Some(t);
        }
    })
    .expect("preset scenarios are valid");
    let text = match summary.status {
        Status::Completed => format!(
            "completed at t={}, end state ({}, {})",
            fixed(summary.last.t),
            sci(summary.last.state.s),
            sci(summary.last.state.i)
        ),
        status => format!("{} at t={} after {} steps", status.as_str(), fixed(summary.last.t), summary.steps),
    };
    line(out, "default run", text);
    line(
        out,
        "step vs spectrum",
        format!("h*max|lambda| = {} at x0", fixed(h * spectral_radius(sc, sc.x0))),
    );
    let stiff = match first_stiff {
        Some(t) => format!("first above the RK4 real-axis limit {RK4_REAL_STABILITY} at t={}", fixed(t)),
        None => format!("stays below the RK4 real-axis limit {RK4_REAL_STABILITY}"),
    };
    line(out, "", stiff);
}

/// Stable text comparing model behaviour with the expected shape of each preset.
pub fn check_report() -> String {
    let mut out = String::new();
    out.push_str("consistency check: model behaviour against the expected preset outcomes\n\n");

    out.push_str("general\n");
    line(
        &mut out,
        "total growth",
        "d(S+I)/dt = k(S+I) - mu1*S - mu2*I; contact terms cancel, so beta1 and beta2 never change the total",
    );
    line(
        &mut out,
        "positivity",
        "on S=0, dS/dt = sigma*k*I >= 0; on I=0, dI/dt = (1-sigma)*k*S >= 0; the closed positive quadrant is forward invariant",
    );
    line(
        &mut out,
        "zero crossings",
        "any sign change seen from a nonnegative start is a discretisation artifact",
    );
    out.push('\n');

    // A
    let sc = Preset::A.scenario();
    preset_header(&mut out, Preset::A, &sc);
    let total0 = sc.x0.total();
    let k = sc.params.k();
    line(&mut out, "growth identity", format!("mu1 = mu2 = 0, so S+I(t) = {} e^({}t)", total0, fixed(k)));
    line(&mut out, "S+I at t=1", sci(total0 * k.exp()));
    line(&mut out, "S+I at t=10", sci(total0 * (10.0 * k).exp()));
    line(
        &mut out,
        "1e12 reached at",
        format!("t = {}", fixed((1e12f64 / total0).ln() / k)),
    );
    default_run(&mut out, &sc);
    line(&mut out, "expected", "S levels off near 8000 and I falls close to 0");
    line(&mut out, "discrepancy", "the total grows exponentially without bound; no level state exists");
    out.push('\n');

    // B
    let sc = Preset::B.scenario();
    preset_header(&mut out, Preset::B, &sc);
    line(&mut out, "initial state", "assumed, not given with the parameter set");
    let f = sc.params.rhs(sc.x0);
    line(&mut out, "dS/dt at x0", sci(f.ds));
    line(&mut out, "dI/dt at x0", sci(f.di));
    line(
        &mut out,
        "contact direction",
        format!(
            "beta2 - beta1 = {}: contacts move borrowers from S to I",
            fixed(sc.params.beta2() - sc.params.beta1())
        ),
    );
    default_run(&mut out, &sc);
    line(&mut out, "expected", "S grows strongly while I drops to 0 early; beta1 > beta2 presented as favourable");
    line(
        &mut out,
        "discrepancy",
        "beta1 > beta2 drains S into I; at x0 S falls and I rises",
    );
    out.push('\n');

    // C
    let sc = Preset::C.scenario();
    preset_header(&mut out, Preset::C, &sc);
    let f = sc.params.rhs(sc.x0);
    line(&mut out, "dS/dt at x0", sci(f.ds));
    line(&mut out, "dI/dt at x0", sci(f.di));
    line(&mut out, "PAR at x0", fixed(sc.x0.i / sc.x0.total()));
    default_run(&mut out, &sc);
    line(&mut out, "expected", "S shrinks to a small value; I stays near 0 early and grows from mid-span");
    line(&mut out, "discrepancy", "I increases from t=0 at more than 2e6 per unit time");
    out.push('\n');

    // D
    let sc = Preset::D.scenario();
    preset_header(&mut out, Preset::D, &sc);
    let (a1, a2) = Preset::D.sweep_axes().expect("preset D is a sweep");
    let f = sc.params.rhs(sc.x0);
    line(&mut out, "d(S+I)/dt at x0", sci(f.ds + f.di));
    let map = sweep(&sc, &a1, &a2).expect("preset sweep axes are valid");
    let counts: Vec<String> = OutcomeTag::ALL
        .iter()
        .map(|&t| (t, map.count(t)))
        .filter(|&(_, n)| n > 0)
        .map(|(t, n)| format!("{t}={n}"))
        .collect();
    line(
        &mut out,
        "sweep outcomes",
        format!("{}x{} grid over beta1, beta2: {}", a1.count, a2.count, counts.join(" ")),
    );
    let linear = &map.cells[0][0];
    if let Some(x) = linear.endpoint {
        line(
            &mut out,
            "beta1 = beta2 = 0",
            format!("{} with end state ({}, {})", linear.tag, sci(x.s), sci(x.i)),
        );
    }
    line(&mut out, "expected", "sharp early fall of both S and I, both tending to 0");
    line(
        &mut out,
        "discrepancy",
        "the total does fall at x0, but outcomes depend on beta1, beta2 and fixed-step runs diverge where contacts are unbalanced",
    );
    out
}
