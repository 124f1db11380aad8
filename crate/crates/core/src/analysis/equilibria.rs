//! Equilibria of the vector field and their linear stability.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::AnalysisError;
use crate::model::{Jacobian, ModelParams, State};

/// Newton tolerance per unit of region scale.
pub const NEWTON_TOL_REL: f64 = 1e-9;
pub const NEWTON_MAX_ITER: usize = 50;
pub const DEFAULT_GRID_DENSITY: usize = 21;
pub const DEFAULT_HALF_WIDTH: f64 = 1e5;
const POLISH_STEPS: usize = 5;

/// Axis-aligned search rectangle in (s, i) space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub s_min: f64,
    pub s_max: f64,
    pub i_min: f64,
    pub i_max: f64,
}

impl Default for Region {
    fn default() -> Self {
        Region::square(DEFAULT_HALF_WIDTH)
    }
}

impl Region {
    pub fn new(s_min: f64, s_max: f64, i_min: f64, i_max: f64) -> Result<Self, AnalysisError> {
        let ok = [s_min, s_max, i_min, i_max].iter().all(|v| v.is_finite()) && s_max > s_min && i_max > i_min;
        if !ok {
            return Err(AnalysisError::DegenerateRegion);
        }
        Ok(Region {
            s_min,
            s_max,
            i_min,
            i_max,
        })
    }

    /// `[−h, h]²`
    pub fn square(half_width: f64) -> Self {
        Region {
            s_min: -half_width,
            s_max: half_width,
            i_min: -half_width,
            i_max: half_width,
        }
    }

    /// Largest coordinate magnitude in the region, at least 1.
    pub fn scale(&self) -> f64 {
        [self.s_min, self.s_max, self.i_min, self.i_max]
            .iter()
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }

    pub fn diagonal(&self) -> f64 {
        (self.s_max - self.s_min).hypot(self.i_max - self.i_min)
    }

    pub fn newton_tol(&self) -> f64 {
        NEWTON_TOL_REL * self.scale()
    }

    pub fn dedup_tol(&self) -> f64 {
        1e-6 * self.diagonal()
    }

    fn contains(&self, x: State, slack: f64) -> bool {
        x.s >= self.s_min - slack && x.s <= self.s_max + slack && x.i >= self.i_min - slack && x.i <= self.i_max + slack
    }

    fn swapped(&self) -> Self {
        Region {
            s_min: self.i_min,
            s_max: self.i_max,
            i_min: self.s_min,
            i_max: self.s_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    StableNode,
    UnstableNode,
    Saddle,
    StableSpiral,
    UnstableSpiral,
    CenterDegenerate,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::StableNode => "stable_node",
            Stability::UnstableNode => "unstable_node",
            Stability::Saddle => "saddle",
            Stability::StableSpiral => "stable_spiral",
            Stability::UnstableSpiral => "unstable_spiral",
            Stability::CenterDegenerate => "center_degenerate",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub point: State,
    /// max(|ds|, |di|) at `point`
    pub residual_norm: f64,
    pub jacobian: Jacobian,
    pub eigenvalues: [Complex64; 2],
    pub classification: Stability,
}

/// Eigenvalues of a 2×2 matrix from its trace and determinant.
///
/// Real pairs use the cancellation-free form `q = (tr + sign(tr)·√disc)/2`,
/// `λ = q, det/q`; complex pairs are `tr/2 ± i·√(−disc)/2`.
pub fn eigenvalues(trace: f64, det: f64) -> [Complex64; 2] {
    let disc = trace * trace - 4.0 * det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let q = 0.5 * (trace + root.copysign(trace));
        if q == 0.0 {
            // trace = 0 and det = 0
            return [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        }
        let (a, b) = (q, det / q);
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * trace, im), Complex64::new(0.5 * trace, -im)]
    }
}

/// Sign-rule classification of a 2×2 linearization.
pub fn classify_spectrum(trace: f64, det: f64) -> ([Complex64; 2], Stability) {
    let eig = eigenvalues(trace, det);
    let class_tol = 1e-9 * (1.0 + trace.abs());
    let class = if eig.iter().any(|l| l.re.abs() <= class_tol) {
        Stability::CenterDegenerate
    } else if det < 0.0 {
        Stability::Saddle
    } else if trace * trace - 4.0 * det < 0.0 {
        if trace < 0.0 {
            Stability::StableSpiral
        } else {
            Stability::UnstableSpiral
        }
    } else if eig.iter().all(|l| l.re < 0.0) {
        Stability::StableNode
    } else {
        Stability::UnstableNode
    };
    (eig, class)
}

/// Polishes `point` with up to five Newton steps and classifies it, using the
/// tolerance of the default search region.
pub fn classify(p: &ModelParams, point: State) -> Result<Equilibrium, AnalysisError> {
    classify_with_tol(p, point, Region::default().newton_tol())
}

pub fn classify_with_tol(p: &ModelParams, point: State, tol: f64) -> Result<Equilibrium, AnalysisError> {
    let x = refine(p, point, POLISH_STEPS);
    let residual = p.rhs(x).max_abs();
    if residual.is_nan() || residual >= tol {
        return Err(AnalysisError::NotAnEquilibrium {
            s: point.s,
            i: point.i,
            residual,
        });
    }
    Ok(equilibrium_at(p, x))
}

/// Newton iterations until the step stalls; returns the iterate with the
/// smallest residual seen.
fn refine(p: &ModelParams, start: State, max_iter: usize) -> State {
    let mut x = start;
    let mut best = (p.rhs(x).max_abs(), x);
    for _ in 0..max_iter {
        if best.0 == 0.0 {
            break;
        }
        let Some(next) = newton_step(p, x).filter(State::is_finite) else {
            break;
        };
        let step = (next - x).norm();
        x = next;
        let res = p.rhs(x).max_abs();
        if res < best.0 {
            best = (res, x);
        }
        if step <= 1e-13 * (1.0 + x.norm()) {
            break;
        }
    }
    best.1
}

fn equilibrium_at(p: &ModelParams, x: State) -> Equilibrium {
    let jacobian = p.jacobian(x);
    let (eigenvalues, classification) = classify_spectrum(jacobian.trace(), jacobian.det());
    Equilibrium {
        point: x,
        residual_norm: p.rhs(x).max_abs(),
        jacobian,
        eigenvalues,
        classification,
    }
}

fn newton_step(p: &ModelParams, x: State) -> Option<State> {
    let f = State::from(p.rhs(x));
    let delta = p.jacobian(x).solve(f * -1.0)?;
    Some(x + delta)
}

/// Newton from `seed`; `None` when the iteration hits a singular Jacobian,
/// escapes to non-finite values or ends above `tol`.
fn newton(p: &ModelParams, seed: State, tol: f64) -> Option<State> {
    newton_step(p, seed)?;
    let x = refine(p, seed, NEWTON_MAX_ITER);
    (p.rhs(x).max_abs() < tol).then_some(x)
}

/// Seeds Newton on a `grid_density × grid_density` lattice over `region`,
/// keeps converged roots inside the region and merges duplicates.
///
/// The origin is always present and listed first; remaining equilibria are
/// ordered by `(s, i)`.
pub fn find_equilibria(p: &ModelParams, region: &Region, grid_density: usize) -> Result<Vec<Equilibrium>, AnalysisError> {
    if grid_density < 2 {
        return Err(AnalysisError::GridTooCoarse(grid_density));
    }
    Region::new(region.s_min, region.s_max, region.i_min, region.i_max)?;
    let tol = region.newton_tol();
    let dedup = region.dedup_tol();

    let origin = equilibrium_at(p, State::ORIGIN);
    if origin.residual_norm.is_nan() || origin.residual_norm >= tol {
        return Err(AnalysisError::NonConvergence);
    }

    let n = grid_density - 1;
    let lerp = |lo: f64, hi: f64, j: usize| if j == n { hi } else { lo + (hi - lo) * j as f64 / n as f64 };
    let mut roots: Vec<State> = vec![State::ORIGIN];
    for a in 0..=n {
        for b in 0..=n {
            let seed = State::new(lerp(region.s_min, region.s_max, a), lerp(region.i_min, region.i_max, b));
            let Some(root) = newton(p, seed, tol) else {
                continue;
            };
            if !region.contains(root, dedup) {
                continue;
            }
            if roots.iter().all(|r| r.distance(&root) > dedup) {
                roots.push(root);
            }
        }
    }
    roots[1..].sort_by(|x, y| x.s.total_cmp(&y.s).then(x.i.total_cmp(&y.i)));
    Ok(roots.into_iter().map(|x| equilibrium_at(p, x)).collect())
}

/// Equilibria of the compartment-swapped model, mapped back to this model's
/// coordinates. Useful as a symmetry cross-check.
pub fn find_equilibria_swapped(p: &ModelParams, region: &Region, grid_density: usize) -> Result<Vec<Equilibrium>, AnalysisError> {
    find_equilibria(&p.swapped(), &region.swapped(), grid_density)
}
