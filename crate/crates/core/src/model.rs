//! The solvent/insolvent borrower model.
//!
//! Two compartments evolve under
//!
//! ```text
//! dS/dt = σ·k·(S + I) − β1·S·I + β2·S·I − μ1·S
//! dI/dt = (1 − σ)·k·(S + I) + β1·S·I − β2·S·I − μ2·I
//! ```
//!
//! with inflow coefficient `k = (1 − α)/α`. The bilinear contact terms cancel
//! in the sum, so `d(S + I)/dt = k·(S + I) − μ1·S − μ2·I` holds exactly.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("alpha = {0} must lie in (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("{field} = {value} must lie in {bound}")]
    FieldOutOfRange {
        field: ParamName,
        value: f64,
        bound: &'static str,
    },
    #[error("{0} is not a finite number")]
    NonFinite(&'static str),
    #[error("portfolio at risk is undefined when s + i = 0")]
    DegeneratePopulation,
}

/// Names of the six model coefficients, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamName {
    Alpha,
    Sigma,
    Beta1,
    Beta2,
    Mu1,
    Mu2,
}

impl ParamName {
    pub const ALL: [ParamName; 6] = [
        ParamName::Alpha,
        ParamName::Sigma,
        ParamName::Beta1,
        ParamName::Beta2,
        ParamName::Mu1,
        ParamName::Mu2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::Alpha => "alpha",
            ParamName::Sigma => "sigma",
            ParamName::Beta1 => "beta1",
            ParamName::Beta2 => "beta2",
            ParamName::Mu1 => "mu1",
            ParamName::Mu2 => "mu2",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown parameter `{s}` (expected one of alpha, sigma, beta1, beta2, mu1, mu2)"))
    }
}

/// Whether exit rates are held to the proportion range `[0, 1]`.
///
/// Transmission coefficients and `sigma` are always capped at 1; only the exit
/// rates may be relaxed, since a calibrated rate can legitimately exceed 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatePolicy {
    #[default]
    Strict,
    Unchecked,
}

/// The raw six coefficients, before validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub alpha: f64,
    pub sigma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl RawParams {
    pub fn new(alpha: f64, sigma: f64, beta1: f64, beta2: f64, mu1: f64, mu2: f64) -> Self {
        RawParams {
            alpha,
            sigma,
            beta1,
            beta2,
            mu1,
            mu2,
        }
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::Alpha => self.alpha,
            ParamName::Sigma => self.sigma,
            ParamName::Beta1 => self.beta1,
            ParamName::Beta2 => self.beta2,
            ParamName::Mu1 => self.mu1,
            ParamName::Mu2 => self.mu2,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        match name {
            ParamName::Alpha => self.alpha = value,
            ParamName::Sigma => self.sigma = value,
            ParamName::Beta1 => self.beta1 = value,
            ParamName::Beta2 => self.beta2 = value,
            ParamName::Mu1 => self.mu1 = value,
            ParamName::Mu2 => self.mu2 = value,
        }
    }
}

/// A validated parameter set with its derived inflow coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    raw: RawParams,
    policy: RatePolicy,
    /// (1 − α)/α
    k: f64,
    inflow_s: f64,
    inflow_i: f64,
    /// β2 − β1, the net solvent gain per unit S·I contact.
    net_contact: f64,
}

/// Validates six coefficients under the strict rate policy.
pub fn validate_params(
    alpha: f64,
    sigma: f64,
    beta1: f64,
    beta2: f64,
    mu1: f64,
    mu2: f64,
) -> Result<ModelParams, ModelError> {
    ModelParams::new(RawParams::new(alpha, sigma, beta1, beta2, mu1, mu2))
}

impl ModelParams {
    pub fn new(raw: RawParams) -> Result<Self, ModelError> {
        Self::with_policy(raw, RatePolicy::Strict)
    }

    pub fn with_policy(raw: RawParams, policy: RatePolicy) -> Result<Self, ModelError> {
        for name in ParamName::ALL {
            if !raw.get(name).is_finite() {
                return Err(ModelError::NonFinite(name.as_str()));
            }
        }
        if !(raw.alpha > 0.0 && raw.alpha <= 1.0) {
            return Err(ModelError::AlphaOutOfRange(raw.alpha));
        }
        let unit = |field: ParamName| {
            let value = raw.get(field);
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(ModelError::FieldOutOfRange {
                    field,
                    value,
                    bound: "[0, 1]",
                })
            }
        };
        unit(ParamName::Sigma)?;
        unit(ParamName::Beta1)?;
        unit(ParamName::Beta2)?;
        for field in [ParamName::Mu1, ParamName::Mu2] {
            match policy {
                RatePolicy::Strict => unit(field)?,
                RatePolicy::Unchecked => {
                    let value = raw.get(field);
                    if value < 0.0 {
                        return Err(ModelError::FieldOutOfRange {
                            field,
                            value,
                            bound: "[0, +inf)",
                        });
                    }
                }
            }
        }

        let k = (1.0 - raw.alpha) / raw.alpha;
        Ok(ModelParams {
            raw,
            policy,
            k,
            inflow_s: raw.sigma * k,
            inflow_i: (1.0 - raw.sigma) * k,
            net_contact: raw.beta2 - raw.beta1,
        })
    }

    pub fn raw(&self) -> RawParams {
        self.raw
    }

    pub fn policy(&self) -> RatePolicy {
        self.policy
    }

    pub fn get(&self, name: ParamName) -> f64 {
        self.raw.get(name)
    }

    /// Returns a copy with one coefficient replaced, re-validated under the same policy.
    pub fn with(&self, name: ParamName, value: f64) -> Result<Self, ModelError> {
        let mut raw = self.raw;
        raw.set(name, value);
        Self::with_policy(raw, self.policy)
    }

    pub fn alpha(&self) -> f64 {
        self.raw.alpha
    }
    pub fn sigma(&self) -> f64 {
        self.raw.sigma
    }
    pub fn beta1(&self) -> f64 {
        self.raw.beta1
    }
    pub fn beta2(&self) -> f64 {
        self.raw.beta2
    }
    pub fn mu1(&self) -> f64 {
        self.raw.mu1
    }
    pub fn mu2(&self) -> f64 {
        self.raw.mu2
    }

    /// Inflow coefficient `(1 − α)/α`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Mirror image of the model with the compartments exchanged:
    /// `(α, 1 − σ, β2, β1, μ2, μ1)`.
    pub fn swapped(&self) -> Self {
        let raw = RawParams::new(
            self.raw.alpha,
            1.0 - self.raw.sigma,
            self.raw.beta2,
            self.raw.beta1,
            self.raw.mu2,
            self.raw.mu1,
        );
        Self::with_policy(raw, self.policy).expect("swap preserves validity")
    }

    /// Right-hand side of the system at `x`, unchecked.
    #[inline]
    pub fn rhs(&self, x: State) -> VectorFieldValue {
        let total = x.s + x.i;
        let contact = self.net_contact * (x.s * x.i);
        VectorFieldValue {
            ds: self.inflow_s * total + contact - self.raw.mu1 * x.s,
            di: self.inflow_i * total - contact - self.raw.mu2 * x.i,
        }
    }

    /// Right-hand side of the system at `x`; fails only on overflow.
    pub fn vector_field(&self, x: State) -> Result<VectorFieldValue, ModelError> {
        if !x.is_finite() {
            return Err(ModelError::NonFinite("state"));
        }
        let v = self.rhs(x);
        if v.ds.is_finite() && v.di.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonFinite("vector field"))
        }
    }

    /// Analytic Jacobian `∂(ds, di)/∂(s, i)` at `x`.
    pub fn jacobian(&self, x: State) -> Jacobian {
        let d = self.net_contact;
        Jacobian([
            [self.inflow_s + d * x.i - self.raw.mu1, self.inflow_s + d * x.s],
            [self.inflow_i - d * x.i, self.inflow_i - d * x.s - self.raw.mu2],
        ])
    }

    /// Zone population `(S + I)/α` implied by the borrower counts.
    pub fn population(&self, x: State) -> f64 {
        (x.s + x.i) / self.raw.alpha
    }
}

/// Share of insolvent borrowers, `i/(s + i)`.
pub fn portfolio_at_risk(x: State) -> Result<f64, ModelError> {
    let total = x.s + x.i;
    if total == 0.0 {
        return Err(ModelError::DegeneratePopulation);
    }
    Ok(x.i / total)
}

/// A point in (solvent, insolvent) borrower space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub s: f64,
    pub i: f64,
}

impl State {
    pub const ORIGIN: State = State { s: 0.0, i: 0.0 };

    pub fn new(s: f64, i: f64) -> Self {
        State { s, i }
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.i.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.s.abs().max(self.i.abs())
    }

    pub fn norm(&self) -> f64 {
        self.s.hypot(self.i)
    }

    pub fn total(&self) -> f64 {
        self.s + self.i
    }

    pub fn swapped(&self) -> Self {
        State {
            s: self.i,
            i: self.s,
        }
    }

    pub fn distance(&self, other: &State) -> f64 {
        (*self - *other).norm()
    }
}

impl Add for State {
    type Output = State;
    fn add(self, rhs: State) -> State {
        State::new(self.s + rhs.s, self.i + rhs.i)
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, rhs: State) -> State {
        State::new(self.s - rhs.s, self.i - rhs.i)
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(self, c: f64) -> State {
        State::new(self.s * c, self.i * c)
    }
}

impl From<VectorFieldValue> for State {
    fn from(v: VectorFieldValue) -> State {
        State::new(v.ds, v.di)
    }
}

/// Time derivative of a [`State`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VectorFieldValue {
    pub ds: f64,
    pub di: f64,
}

impl VectorFieldValue {
    pub fn max_abs(&self) -> f64 {
        self.ds.abs().max(self.di.abs())
    }
}

/// Row-major 2×2 Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian(pub [[f64; 2]; 2]);

impl Jacobian {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Solves `J·x = b` by Cramer's rule; `None` when `J` is numerically singular.
    pub fn solve(&self, b: State) -> Option<State> {
        let [[a, bb], [c, d]] = self.0;
        let det = self.det();
        let scale = (a * d).abs() + (bb * c).abs();
        if det == 0.0 || !det.is_finite() || det.abs() <= 1e-14 * scale {
            return None;
        }
        Some(State::new((b.s * d - bb * b.i) / det, (a * b.i - c * b.s) / det))
    }
}
