//! Classical fourth-order Runge–Kutta integration of the borrower model.
//!
//! Two step policies are provided: a fixed step, and step doubling where each
//! step is compared against two half steps (Richardson estimate) to control
//! the local error. Integration stops early when the state leaves the finite
//! range allowed by `blowup_threshold`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelParams, State};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid span: t1 = {t1} must exceed t0 = {t0}")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("initial state ({s}, {i}) is not finite")]
    NonFinite { s: f64, i: f64 },
    #[error("invalid solver setting: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Method {
    #[default]
    #[serde(rename = "rk4-fixed")]
    Rk4Fixed,
    #[serde(rename = "rk4-adaptive")]
    Rk4Adaptive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rk4Fixed => "rk4-fixed",
            Method::Rk4Adaptive => "rk4-adaptive",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "rk4-fixed" => Some(Method::Rk4Fixed),
            "rk4-adaptive" => Some(Method::Rk4Adaptive),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Fixed step, or the first trial step in adaptive mode.
    pub step: f64,
    /// Local error tolerance per unit state magnitude (adaptive only).
    pub rel_tol: f64,
    /// Upper bound on step attempts, rejected adaptive steps included.
    pub max_step_count: u64,
    pub blowup_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Rk4Fixed,
            step: 1e-3,
            rel_tol: 1e-8,
            max_step_count: 10_000_000,
            blowup_threshold: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn fixed(step: f64) -> Self {
        SolverConfig {
            step,
            ..Default::default()
        }
    }

    pub fn adaptive(rel_tol: f64) -> Self {
        SolverConfig {
            method: Method::Rk4Adaptive,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(IntegrateError::InvalidConfig(format!("{name} = {v} must be positive")))
            }
        };
        positive("step", self.step)?;
        positive("rel_tol", self.rel_tol)?;
        positive("blowup_threshold", self.blowup_threshold)?;
        if self.max_step_count == 0 {
            return Err(IntegrateError::InvalidConfig("max_step_count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    Diverged,
    StepLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::Diverged => "diverged",
            Status::StepLimit => "step_limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SZeroCrossing,
    IZeroCrossing,
    Blowup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub status: Status,
}

impl Trajectory {
    pub fn last(&self) -> Sample {
        *self.samples.last().expect("trajectory holds at least the initial sample")
    }
}

/// Outcome of a streamed integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub status: Status,
    pub last: Sample,
    pub steps: u64,
}

/// Integrates from `(t0, x0)` to `t1`, keeping every accepted step.
pub fn integrate(
    p: &ModelParams,
    x0: State,
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory, IntegrateError> {
    let mut samples = Vec::new();
    let summary = integrate_with(p, x0, t0, t1, cfg, |t, state| samples.push(Sample { t, state }))?;
    let mut events = detect_events(&samples);
    if summary.status == Status::Diverged {
        events.push(Event {
            kind: EventKind::Blowup,
            t: summary.last.t,
        });
    }
    Ok(Trajectory {
        samples,
        events,
        status: summary.status,
    })
}

/// Integrates and hands each accepted sample to `observe`, starting with `(t0, x0)`.
///
/// Non-finite states are never emitted: a step that overflows ends the run as
/// diverged with the previous sample as the last one.
pub fn integrate_with<F>(
    p: &ModelParams,
    x0: State,
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
    mut observe: F,
) -> Result<RunSummary, IntegrateError>
where
    F: FnMut(f64, State),
{
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(IntegrateError::InvalidSpan { t0, t1 });
    }
    if !x0.is_finite() {
        return Err(IntegrateError::NonFinite { s: x0.s, i: x0.i });
    }
    cfg.validate()?;

    observe(t0, x0);
    let start = Sample { t: t0, state: x0 };
    if x0.max_abs() >= cfg.blowup_threshold {
        return Ok(RunSummary {
            status: Status::Diverged,
            last: start,
            steps: 0,
        });
    }
    match cfg.method {
        Method::Rk4Fixed => run_fixed(p, start, t1, cfg, &mut observe),
        Method::Rk4Adaptive => run_adaptive(p, start, t1, cfg, &mut observe),
    }
}

/// One classical RK4 step of size `h`.
#[inline]
pub fn rk4_step(p: &ModelParams, x: State, h: f64) -> State {
    let k1 = State::from(p.rhs(x));
    let k2 = State::from(p.rhs(x + k1 * (0.5 * h)));
    let k3 = State::from(p.rhs(x + k2 * (0.5 * h)));
    let k4 = State::from(p.rhs(x + k3 * h));
    x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

enum Accept {
    Continue,
    Stop(Status),
}

fn accept<F: FnMut(f64, State)>(t: f64, x: State, cfg: &SolverConfig, observe: &mut F) -> Accept {
    if !x.is_finite() {
        return Accept::Stop(Status::Diverged);
    }
    observe(t, x);
    if x.max_abs() >= cfg.blowup_threshold {
        Accept::Stop(Status::Diverged)
    } else {
        Accept::Continue
    }
}

fn run_fixed<F: FnMut(f64, State)>(
    p: &ModelParams,
    start: Sample,
    t1: f64,
    cfg: &SolverConfig,
    observe: &mut F,
) -> Result<RunSummary, IntegrateError> {
    let h = cfg.step;
    let mut last = start;
    let mut steps = 0u64;
    while last.t < t1 {
        if steps >= cfg.max_step_count {
            return Ok(RunSummary {
                status: Status::StepLimit,
                last,
                steps,
            });
        }
        // grid times are t0 + n·h so rounding does not accumulate
        let mut t_next = start.t + (steps + 1) as f64 * h;
        if t_next > t1 || t1 - t_next < 1e-9 * h {
            t_next = t1;
        }
        let x = rk4_step(p, last.state, t_next - last.t);
        steps += 1;
        match accept(t_next, x, cfg, observe) {
            Accept::Continue => last = Sample { t: t_next, state: x },
            Accept::Stop(status) => {
                if x.is_finite() {
                    last = Sample { t: t_next, state: x };
                }
                return Ok(RunSummary { status, last, steps });
            }
        }
    }
    Ok(RunSummary {
        status: Status::Completed,
        last,
        steps,
    })
}

/// Richardson denominator for a fourth-order method: 2⁴ − 1.
const RICHARDSON: f64 = 15.0;
/// States are compared in borrowers; errors below one borrower·rel_tol always pass.
const ABS_FLOOR: f64 = 1.0;

fn run_adaptive<F: FnMut(f64, State)>(
    p: &ModelParams,
    start: Sample,
    t1: f64,
    cfg: &SolverConfig,
    observe: &mut F,
) -> Result<RunSummary, IntegrateError> {
    let mut last = start;
    let mut h = cfg.step.min(t1 - start.t);
    let mut attempts = 0u64;
    while last.t < t1 {
        if attempts >= cfg.max_step_count || h <= 1e-14 * last.t.abs().max(1.0) {
            return Ok(RunSummary {
                status: Status::StepLimit,
                last,
                steps: attempts,
            });
        }
        attempts += 1;
        let remaining = t1 - last.t;
        let (dt, t_next) = if h >= remaining * (1.0 - 1e-12) {
            (remaining, t1)
        } else {
            (h, last.t + h)
        };

        let x = last.state;
        let full = rk4_step(p, x, dt);
        let half = rk4_step(p, rk4_step(p, x, 0.5 * dt), 0.5 * dt);
        let err = if full.is_finite() && half.is_finite() {
            let comp = |a: f64, b: f64, x0: f64| {
                (a - b).abs() / RICHARDSON / (cfg.rel_tol * a.abs().max(x0.abs()).max(ABS_FLOOR))
            };
            comp(half.s, full.s, x.s).max(comp(half.i, full.i, x.i))
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            match accept(t_next, half, cfg, observe) {
                Accept::Continue => last = Sample { t: t_next, state: half },
                Accept::Stop(status) => {
                    return Ok(RunSummary {
                        status,
                        last: Sample { t: t_next, state: half },
                        steps: attempts,
                    })
                }
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = dt * grow;
        } else {
            let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.1) } else { 0.1 };
            h = dt * shrink;
        }
    }
    Ok(RunSummary {
        status: Status::Completed,
        last,
        steps: attempts,
    })
}

/// Zero crossings of `s` and `i` between consecutive samples.
///
/// A crossing is a change of strict sign relative to the last nonzero value;
/// its time is linearly interpolated (or taken at the sample that sits
/// exactly on zero).
pub fn detect_events(samples: &[Sample]) -> Vec<Event> {
    let mut events = Vec::new();
    let mut scan = |kind: EventKind, value: fn(&State) -> f64| {
        let mut last_sign = 0.0f64;
        let mut prev: Option<Sample> = None;
        for sample in samples {
            let v = value(&sample.state);
            let sign = if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            };
            if sign != 0.0 {
                if last_sign != 0.0 && sign != last_sign {
                    let p = prev.expect("a sign was seen before");
                    let pv = value(&p.state);
                    let t = if pv == 0.0 {
                        p.t
                    } else {
                        p.t + (sample.t - p.t) * pv / (pv - v)
                    };
                    events.push(Event { kind, t });
                }
                last_sign = sign;
            }
            prev = Some(*sample);
        }
    };
    scan(EventKind::SZeroCrossing, |x| x.s);
    scan(EventKind::IZeroCrossing, |x| x.i);
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    events
}
