//! The four reference scenarios, keyed A–D.

use std::fmt;
use std::str::FromStr;

use crate::analysis::Axis;
use crate::model::{validate_params, ParamName, State};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    A,
    B,
    C,
    D,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::A, Preset::B, Preset::C, Preset::D];

    pub fn scenario(self) -> Scenario {
        let (raw, x0, label, assumed) = match self {
            Preset::A => (
                (0.1, 0.5, 0.1, 0.4, 0.0, 0.0),
                State::new(10000.0, 2000.0),
                "A: strong inflow, no exits",
                false,
            ),
            Preset::B => (
                (0.34, 0.6, 0.7, 0.2, 0.1, 0.9),
                State::new(10000.0, 2000.0),
                "B: heavy insolvent exits (initial state assumed)",
                true,
            ),
            Preset::C => (
                (0.2, 0.29, 0.67, 0.56, 0.8, 0.41),
                State::new(10000.0, 1865.0),
                "C: high exits, near-balanced contacts",
                false,
            ),
            // contacts are the swept axes; the base values are placeholders
            Preset::D => (
                (0.73, 0.21, 0.0, 0.0, 0.4, 0.9),
                State::new(10000.0, 20000.0),
                "D: contact-rate sweep over [0, 1]^2",
                false,
            ),
        };
        let (alpha, sigma, beta1, beta2, mu1, mu2) = raw;
        let params = validate_params(alpha, sigma, beta1, beta2, mu1, mu2).expect("preset parameters are valid");
        let mut sc = Scenario::new(params, x0, 0.0, 10.0)
            .expect("preset span is valid")
            .with_label(label);
        sc.assumed = assumed;
        sc
    }

    /// Sweep axes for presets that are defined as a parameter range.
    pub fn sweep_axes(self) -> Option<(Axis, Axis)> {
        match self {
            Preset::D => Some((
                Axis::new(ParamName::Beta1, 0.0, 1.0, 11).expect("valid axis"),
                Axis::new(ParamName::Beta2, 0.0, 1.0, 11).expect("valid axis"),
            )),
            _ => None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Preset::A => "A",
            Preset::B => "B",
            Preset::C => "C",
            Preset::D => "D",
        };
        f.write_str(c)
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Preset::A),
            "B" | "b" => Ok(Preset::B),
            "C" | "c" => Ok(Preset::C),
            "D" | "d" => Ok(Preset::D),
            _ => Err(format!("unknown preset `{s}` (expected A, B, C or D)")),
        }
    }
}
