//! Two-parameter maps of qualitative long-run outcomes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::integrator::{integrate_with, Status};
use crate::model::{ParamName, State};
use crate::scenario::Scenario;

/// Endpoints closer than this (Euclidean, in borrowers) to the origin count as collapse.
pub const COLLAPSE_RADIUS: f64 = 1.0;
/// A compartment dominates when it exceeds this multiple of the other (floored at 1).
pub const DOMINANCE_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeTag {
    Diverged,
    CollapseToOrigin,
    SDominant,
    IDominant,
    Mixed,
    /// The integration ran out of steps before the end of the span.
    StepLimit,
    /// The cell's parameter values failed validation.
    InvalidParams,
}

impl OutcomeTag {
    pub const ALL: [OutcomeTag; 7] = [
        OutcomeTag::Diverged,
        OutcomeTag::CollapseToOrigin,
        OutcomeTag::SDominant,
        OutcomeTag::IDominant,
        OutcomeTag::Mixed,
        OutcomeTag::StepLimit,
        OutcomeTag::InvalidParams,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeTag::Diverged => "diverged",
            OutcomeTag::CollapseToOrigin => "collapse_to_origin",
            OutcomeTag::SDominant => "s_dominant",
            OutcomeTag::IDominant => "i_dominant",
            OutcomeTag::Mixed => "mixed",
            OutcomeTag::StepLimit => "step_limit",
            OutcomeTag::InvalidParams => "invalid_params",
        }
    }
}

impl fmt::Display for OutcomeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub tag: OutcomeTag,
    pub endpoint: Option<State>,
}

/// Labels the endpoint of a completed integration.
pub fn classify_endpoint(x: State) -> OutcomeTag {
    if x.norm() < COLLAPSE_RADIUS {
        OutcomeTag::CollapseToOrigin
    } else if x.s > DOMINANCE_RATIO * x.i.max(1.0) {
        OutcomeTag::SDominant
    } else if x.i > DOMINANCE_RATIO * x.s.max(1.0) {
        OutcomeTag::IDominant
    } else {
        OutcomeTag::Mixed
    }
}

/// Runs the scenario's own integration and labels the result.
pub fn outcome_of(scenario: &Scenario) -> Outcome {
    let run = integrate_with(
        &scenario.params,
        scenario.x0,
        scenario.t0,
        scenario.t1,
        &scenario.solver,
        |_, _| {},
    );
    match run {
        Err(_) => Outcome {
            tag: OutcomeTag::InvalidParams,
            endpoint: None,
        },
        Ok(summary) => {
            let tag = match summary.status {
                Status::Diverged => OutcomeTag::Diverged,
                Status::StepLimit => OutcomeTag::StepLimit,
                Status::Completed => classify_endpoint(summary.last.state),
            };
            Outcome {
                tag,
                endpoint: Some(summary.last.state),
            }
        }
    }
}

/// Sweep axis `name:lo:hi:count`; values are evenly spaced and include both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: ParamName,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: ParamName, lo: f64, hi: f64, count: usize) -> Result<Self, AnalysisError> {
        if count == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(AnalysisError::InvalidAxis(format!("{}:{lo}:{hi}:{count}", param)));
        }
        Ok(Axis { param, lo, hi, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let n = self.count - 1;
        (0..self.count)
            .map(|j| {
                if j == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * j as f64 / n as f64
                }
            })
            .collect()
    }
}

impl FromStr for Axis {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AnalysisError::InvalidAxis(format!("`{s}` (expected name:lo:hi:count)"));
        let parts: Vec<&str> = s.split(':').collect();
        let [name, lo, hi, count] = parts.as_slice() else {
            return Err(bad());
        };
        let param = name.parse::<ParamName>().map_err(|_| bad())?;
        let lo = lo.parse::<f64>().map_err(|_| bad())?;
        let hi = hi.parse::<f64>().map_err(|_| bad())?;
        let count = count.parse::<usize>().map_err(|_| bad())?;
        Axis::new(param, lo, hi, count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisValues {
    pub param: ParamName,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepMap {
    pub axis1: AxisValues,
    pub axis2: AxisValues,
    /// `cells[a][b]` holds the outcome at `(axis1.values[a], axis2.values[b])`.
    pub cells: Vec<Vec<Outcome>>,
    pub base: Scenario,
}

impl SweepMap {
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, &Outcome)> {
        self.cells.iter().enumerate().flat_map(move |(a, row)| {
            row.iter()
                .enumerate()
                .map(move |(b, cell)| (self.axis1.values[a], self.axis2.values[b], cell))
        })
    }

    pub fn count(&self, tag: OutcomeTag) -> usize {
        self.iter().filter(|(_, _, c)| c.tag == tag).count()
    }
}

fn cell(base: &Scenario, axis1: ParamName, v1: f64, axis2: ParamName, v2: f64) -> Outcome {
    let params = base.params.with(axis1, v1).and_then(|p| p.with(axis2, v2));
    match params {
        Ok(params) => outcome_of(&Scenario { params, ..base.clone() }),
        Err(_) => Outcome {
            tag: OutcomeTag::InvalidParams,
            endpoint: None,
        },
    }
}

fn prepare(axis1: &Axis, axis2: &Axis) -> Result<(AxisValues, AxisValues), AnalysisError> {
    if axis1.param == axis2.param {
        return Err(AnalysisError::SameAxis(axis1.param));
    }
    Ok((
        AxisValues {
            param: axis1.param,
            values: axis1.values(),
        },
        AxisValues {
            param: axis2.param,
            values: axis2.values(),
        },
    ))
}

/// Evaluates every grid cell in parallel. The result does not depend on
/// scheduling: each cell is an independent pure computation stored by index.
pub fn sweep(base: &Scenario, axis1: &Axis, axis2: &Axis) -> Result<SweepMap, AnalysisError> {
    let (a1, a2) = prepare(axis1, axis2)?;
    let n2 = a2.values.len();
    let flat: Vec<Outcome> = (0..a1.values.len() * n2)
        .into_par_iter()
        .map(|idx| cell(base, a1.param, a1.values[idx / n2], a2.param, a2.values[idx % n2]))
        .collect();
    let cells = flat.chunks(n2).map(<[Outcome]>::to_vec).collect();
    Ok(SweepMap {
        axis1: a1,
        axis2: a2,
        cells,
        base: base.clone(),
    })
}

/// Single-threaded reference for [`sweep`].
pub fn sweep_serial(base: &Scenario, axis1: &Axis, axis2: &Axis) -> Result<SweepMap, AnalysisError> {
    let (a1, a2) = prepare(axis1, axis2)?;
    let cells = a1
        .values
        .iter()
        .map(|&v1| a2.values.iter().map(|&v2| cell(base, a1.param, v1, a2.param, v2)).collect())
        .collect();
    Ok(SweepMap {
        axis1: a1,
        axis2: a2,
        cells,
        base: base.clone(),
    })
}
