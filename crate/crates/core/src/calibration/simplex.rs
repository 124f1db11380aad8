//! Box-constrained Nelder–Mead descent.
//!
//! Reflection 1, expansion 2, contraction 0.5, shrink 0.5. Every trial point is
//! projected onto the box before evaluation. The search is fully deterministic.

use serde::Serialize;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
/// Initial simplex edge as a fraction of each bound's width.
const INITIAL_EDGE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_evaluations: usize,
    /// Stop when every vertex lies within this ∞-norm distance of the best one.
    pub diameter_tol: f64,
    /// Stop when `f_worst − f_best ≤ spread_tol·max(|f_best|, |f_worst|)`.
    pub spread_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_evaluations: 2000,
            diameter_tol: 1e-8,
            spread_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Diameter,
    Spread,
    BudgetExhausted,
}

impl StopReason {
    pub fn converged(self) -> bool {
        !matches!(self, StopReason::BudgetExhausted)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub best: Vec<f64>,
    pub value: f64,
    pub initial_value: f64,
    pub evaluations: usize,
    pub stop: StopReason,
    /// `(iteration, best value)` at the start of each iteration.
    pub trace: Vec<(usize, f64)>,
}

struct Budget<F> {
    f: F,
    used: usize,
    max: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Budget<F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.max {
            return None;
        }
        self.used += 1;
        let mut v = (self.f)(x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        if self.best.as_ref().is_none_or(|(_, b)| v < *b) {
            self.best = Some((x.to_vec(), v));
        }
        Some(v)
    }
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
}

/// `a + c·(b − a)`, projected.
fn towards(a: &[f64], b: &[f64], c: f64, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = a.iter().zip(b).map(|(&a, &b)| a + c * (b - a)).collect();
    project(&mut x, lo, hi);
    x
}

/// Minimizes `f` over the box `[lo, hi]` starting from `x0`.
///
/// Panics if the dimensions disagree, `x0` is empty, or a bound is inverted.
pub fn minimize<F>(f: F, x0: &[f64], lo: &[f64], hi: &[f64], opts: &SimplexOptions) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n > 0 && lo.len() == n && hi.len() == n, "dimension mismatch");
    assert!(lo.iter().zip(hi).all(|(l, h)| l <= h), "inverted bound");

    let mut budget = Budget {
        f,
        used: 0,
        max: opts.max_evaluations.max(1),
        best: None,
    };
    let mut start = x0.to_vec();
    project(&mut start, lo, hi);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let initial_value = budget.eval(&start).expect("budget admits one evaluation");
    simplex.push((start.clone(), initial_value));
    for j in 0..n {
        let edge = INITIAL_EDGE * (hi[j] - lo[j]);
        let mut v = start.clone();
        v[j] = if v[j] + edge <= hi[j] { v[j] + edge } else { v[j] - edge };
        match budget.eval(&v) {
            Some(fv) => simplex.push((v, fv)),
            None => return finish(budget, initial_value, StopReason::BudgetExhausted, Vec::new()),
        }
    }

    let mut trace = Vec::new();
    let mut iteration = 0usize;
    let stop = loop {
        // stable sort keeps tie order deterministic
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (f_best, f_worst) = (simplex[0].1, simplex[n].1);
        trace.push((iteration, f_best));

        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&simplex[0].0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .fold(0.0f64, f64::max);
        if diameter < opts.diameter_tol {
            break StopReason::Diameter;
        }
        if f_worst - f_best <= opts.spread_tol * f_best.abs().max(f_worst.abs()) {
            break StopReason::Spread;
        }
        iteration += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(v, _)| v[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].0.clone();
        let f_second = simplex[n - 1].1;

        let reflected = towards(&centroid, &worst, -REFLECT, lo, hi);
        let Some(f_r) = budget.eval(&reflected) else {
            break StopReason::BudgetExhausted;
        };

        if f_r < f_best {
            let expanded = towards(&centroid, &reflected, EXPAND, lo, hi);
            let Some(f_e) = budget.eval(&expanded) else {
                simplex[n] = (reflected, f_r);
                break StopReason::BudgetExhausted;
            };
            simplex[n] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
            continue;
        }
        if f_r < f_second {
            simplex[n] = (reflected, f_r);
            continue;
        }

        let f_worst = simplex[n].1;
        let outside = f_r < f_worst;
        let contracted = if outside {
            towards(&centroid, &reflected, CONTRACT, lo, hi)
        } else {
            towards(&centroid, &worst, CONTRACT, lo, hi)
        };
        let Some(f_c) = budget.eval(&contracted) else {
            break StopReason::BudgetExhausted;
        };
        if (outside && f_c <= f_r) || (!outside && f_c < f_worst) {
            simplex[n] = (contracted, f_c);
            continue;
        }

        let anchor = simplex[0].0.clone();
        let mut exhausted = false;
        for vertex in simplex.iter_mut().skip(1) {
            let shrunk = towards(&anchor, &vertex.0, SHRINK, lo, hi);
            match budget.eval(&shrunk) {
                Some(fv) => *vertex = (shrunk, fv),
                None => {
                    exhausted = true;
                    break;
                }
            }
        }
        if exhausted {
            break StopReason::BudgetExhausted;
        }
    };
    finish(budget, initial_value, stop, trace)
}

fn finish<F>(budget: Budget<F>, initial_value: f64, stop: StopReason, mut trace: Vec<(usize, f64)>) -> SimplexOutcome {
    let (best, value) = budget.best.expect("at least one evaluation");
    if trace.last().is_none_or(|&(_, v)| v > value) {
        let next = trace.last().map_or(0, |&(k, _)| k + 1);
        trace.push((next, value));
    }
    SimplexOutcome {
        best,
        value,
        initial_value,
        evaluations: budget.used,
        stop,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn solves_rosenbrock() {
        let opts = SimplexOptions {
            max_evaluations: 5000,
            ..Default::default()
        };
        let out = minimize(rosenbrock, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &opts);
        assert!(out.stop.converged(), "{:?}", out.stop);
        assert!((out.best[0] - 1.0).abs() < 1e-6 && (out.best[1] - 1.0).abs() < 1e-6, "{:?}", out.best);
    }

    #[test]
    fn respects_box() {
        // unconstrained minimum at (3, −2) lies outside the box
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 2.0).powi(2);
        let out = minimize(f, &[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0], &SimplexOptions::default());
        assert!(out.best.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!((out.best[0] - 1.0).abs() < 1e-7 && out.best[1].abs() < 1e-7, "{:?}", out.best);
    }

    #[test]
    fn trace_is_monotone_and_budget_is_respected() {
        let opts = SimplexOptions {
            max_evaluations: 17,
            ..Default::default()
        };
        let out = minimize(rosenbrock, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &opts);
        assert_eq!(out.stop, StopReason::BudgetExhausted);
        assert!(out.evaluations <= 17);
        assert!(out.value <= out.initial_value);
        assert!(out.trace.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn starting_at_the_minimum_returns_it() {
        let f = |x: &[f64]| (x[0] - 0.25).powi(2);
        let out = minimize(f, &[0.25], &[0.0], &[1.0], &SimplexOptions::default());
        assert_eq!(out.best, vec![0.25]);
        assert_eq!(out.value, 0.0);
        assert!(out.stop.converged());
    }
}
