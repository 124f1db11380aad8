#![allow(dead_code)]

use borrower_dynamics::model::{ModelParams, State};

/// Field written out term by term, independent of the library's cached form.
#[allow(clippy::too_many_arguments)]
pub fn field_by_hand(alpha: f64, sigma: f64, b1: f64, b2: f64, m1: f64, m2: f64, s: f64, i: f64) -> (f64, f64) {
    let k = (1.0 - alpha) / alpha;
    let ds = sigma * k * (s + i) - b1 * s * i + b2 * s * i - m1 * s;
    let di = (1.0 - sigma) * k * (s + i) + b1 * s * i - b2 * s * i - m2 * i;
    (ds, di)
}

/// Linear part `A` of the field when the contact terms vanish.
pub fn linear_matrix(p: &ModelParams) -> [[f64; 2]; 2] {
    let k = (1.0 - p.alpha()) / p.alpha();
    [
        [p.sigma() * k - p.mu1(), p.sigma() * k],
        [(1.0 - p.sigma()) * k, (1.0 - p.sigma()) * k - p.mu2()],
    ]
}

/// `e^{At} x0` for a 2×2 matrix via `e^{mt}(c(t) I + s(t) N)`, `N = A − mI`,
/// `N² = δI`.
pub fn expm_apply(a: [[f64; 2]; 2], x0: State, t: f64) -> State {
    let m = 0.5 * (a[0][0] + a[1][1]);
    let n = [[a[0][0] - m, a[0][1]], [a[1][0], a[1][1] - m]];
    let delta = n[0][0] * n[0][0] + a[0][1] * a[1][0];
    let (c, s) = if delta > 0.0 {
        let r = delta.sqrt();
        ((r * t).cosh(), (r * t).sinh() / r)
    } else if delta < 0.0 {
        let r = (-delta).sqrt();
        ((r * t).cos(), (r * t).sin() / r)
    } else {
        (1.0, t)
    };
    let g = (m * t).exp();
    State::new(
        g * (c * x0.s + s * (n[0][0] * x0.s + n[0][1] * x0.i)),
        g * (c * x0.i + s * (n[1][0] * x0.s + n[1][1] * x0.i)),
    )
}

/// Forward Euler with `n` equal steps.
pub fn euler(p: &ModelParams, x0: State, t0: f64, t1: f64, n: u64) -> State {
    let h = (t1 - t0) / n as f64;
    let (mut s, mut i) = (x0.s, x0.i);
    for _ in 0..n {
        let f = p.rhs(State::new(s, i));
        s += h * f.ds;
        i += h * f.di;
    }
    State::new(s, i)
}

/// Central differences of the field, step scaled to the coordinate.
pub fn jacobian_fd(p: &ModelParams, x: State) -> [[f64; 2]; 2] {
    let hs = 1e-4 * x.s.abs().max(1.0);
    let hi = 1e-4 * x.i.abs().max(1.0);
    let fsp = p.rhs(State::new(x.s + hs, x.i));
    let fsm = p.rhs(State::new(x.s - hs, x.i));
    let fip = p.rhs(State::new(x.s, x.i + hi));
    let fim = p.rhs(State::new(x.s, x.i - hi));
    [
        [(fsp.ds - fsm.ds) / (2.0 * hs), (fip.ds - fim.ds) / (2.0 * hi)],
        [(fsp.di - fsm.di) / (2.0 * hs), (fip.di - fim.di) / (2.0 * hi)],
    ]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn jacobian_rel_err(p: &ModelParams, x: State) -> f64 {
    let j = p.jacobian(x).0;
    let fd = jacobian_fd(p, x);
    let scale = j.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            worst = worst.max((j[r][c] - fd[r][c]).abs() / scale);
        }
    }
    worst
}

/// Roots of `λ² − tr·λ + det` by the textbook quadratic formula, as (re, im) pairs.
pub fn quadratic_eigs(tr: f64, det: f64) -> [(f64, f64); 2] {
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [((tr + r) / 2.0, 0.0), ((tr - r) / 2.0, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(tr / 2.0, r / 2.0), (tr / 2.0, -r / 2.0)]
    }
}
