//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use borrower_dynamics::analysis::{
    find_equilibria, find_equilibria_swapped, sweep, Axis, OutcomeTag, Region, Stability,
};
use borrower_dynamics::calibration::{fit, FitSpec, FreeParam, Observation, ObservationSet, X0Policy};
use borrower_dynamics::integrator::{integrate, SolverConfig, Status};
use borrower_dynamics::io::{serialize_scenario, Preset};
use borrower_dynamics::model::{validate_params, ModelParams, ParamName, State};
use common::{expm_apply, jacobian_rel_err, linear_matrix, rel_err};
use proptest::prelude::RngExt;
use proptest::test_runner::{RngAlgorithm, TestRng};

type Criterion = (&'static str, Duration, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u8) -> TestRng {
    TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32])
}

fn random_params(r: &mut TestRng, alpha_lo: f64) -> ModelParams {
    validate_params(
        r.random_range(alpha_lo..=1.0),
        r.random_range(0.0..=1.0),
        r.random_range(0.0..=1.0),
        r.random_range(0.0..=1.0),
        r.random_range(0.0..=1.0),
        r.random_range(0.0..=1.0),
    )
    .unwrap()
}

fn cancellation() -> Verdict {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = random_params(&mut r, 0.01);
        let x = State::new(r.random_range(-1e5..1e5), r.random_range(-1e5..1e5));
        let f = p.vector_field(x).unwrap();
        let linear = p.k() * (x.s + x.i) - p.mu1() * x.s - p.mu2() * x.i;
        let scale = 2.0 * (p.beta1() + p.beta2()) * (x.s * x.i).abs()
            + p.k() * (x.s.abs() + x.i.abs())
            + p.mu1() * x.s.abs()
            + p.mu2() * x.i.abs();
        worst = worst.max(((f.ds + f.di) - linear).abs() / scale.max(1.0));
    }
    verdict(worst <= 1e-12, format!("10000 pairs, worst scaled error {worst:.2e} (limit 1e-12)"))
}

fn growth_law() -> Verdict {
    let sc = Preset::A.scenario();
    let expected = 12000.0 * 9f64.exp();
    let run = integrate(&sc.params, sc.x0, 0.0, 10.0, &SolverConfig::default()).unwrap();
    let diverged = run.status == Status::Diverged && run.last().t < 10.0;
    let at_one = run.samples.iter().find(|s| (s.t - 1.0).abs() < 1e-9);
    let growth_ok = at_one.is_some_and(|s| rel_err(s.state.total(), expected) <= 1e-4);
    let growth = match at_one {
        Some(s) => format!("S+I(1) = {:.7e}, rel err {:.2e}", s.state.total(), rel_err(s.state.total(), expected)),
        None => format!(
            "no sample at t=1: default fixed step 1e-3 run {} at t={} (step outside RK4 stability)",
            run.status.as_str(),
            run.last().t
        ),
    };
    let adaptive = integrate(&sc.params, sc.x0, 0.0, 1.0, &SolverConfig::adaptive(1e-10)).unwrap();
    let info = format!(
        "; for reference rk4-adaptive gives S+I(1) rel err {:.2e}",
        rel_err(adaptive.last().state.total(), expected)
    );
    verdict(
        diverged && growth_ok,
        format!("{growth}; diverged before t=10: {diverged}{info}"),
    )
}

fn linear_oracle() -> Verdict {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let b = r.random_range(0.0..=1.0);
        let p = validate_params(
            r.random_range(0.1..=1.0),
            r.random_range(0.0..=1.0),
            b,
            b,
            r.random_range(0.0..=1.0),
            r.random_range(0.0..=1.0),
        )
        .unwrap();
        let x0 = State::new(r.random_range(1.0..1e4), r.random_range(1.0..1e4));
        let got = integrate(&p, x0, 0.0, 1.0, &SolverConfig::default()).unwrap().last().state;
        let exact = expm_apply(linear_matrix(&p), x0, 1.0);
        worst = worst.max(rel_err(got.s, exact.s)).max(rel_err(got.i, exact.i));
    }
    verdict(worst <= 1e-6, format!("100 draws, worst relative error {worst:.2e} (limit 1e-6)"))
}

fn order_of_convergence() -> Verdict {
    let p = validate_params(0.1, 0.5, 0.25, 0.25, 0.0, 0.0).unwrap();
    let x0 = State::new(10000.0, 2000.0);
    let exact = expm_apply(linear_matrix(&p), x0, 1.0);
    let err = |h: f64| (integrate(&p, x0, 0.0, 1.0, &SolverConfig::fixed(h)).unwrap().last().state - exact).norm();
    let ratios: Vec<f64> = [1e-2, 1e-3].iter().map(|&h| err(h) / err(h / 2.0)).collect();
    verdict(
        ratios.iter().all(|q| (12.0..=20.0).contains(q)),
        format!("error ratios {:.2} (h=1e-2), {:.2} (h=1e-3), band [12, 20]", ratios[0], ratios[1]),
    )
}

fn jacobian() -> Verdict {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = random_params(&mut r, 0.01);
        let x = State::new(r.random_range(-1e5..1e5), r.random_range(-1e5..1e5));
        worst = worst.max(jacobian_rel_err(&p, x));
    }
    verdict(worst <= 1e-6, format!("1000 points, worst relative deviation {worst:.2e} (limit 1e-6)"))
}

fn spot_value() -> Verdict {
    let p = Preset::C.scenario().params;
    let f = p.vector_field(State::new(10000.0, 1865.0)).unwrap();
    let (es, ei) = (rel_err(f.ds, -2_045_736.6), rel_err(f.di, 2_084_431.95));
    verdict(
        es <= 1e-9 && ei <= 1e-9,
        format!("ds = {}, di = {}, rel errors {es:.1e}, {ei:.1e}", f.ds, f.di),
    )
}

fn equilibria() -> Verdict {
    let region = Region::default();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut worst_residual = 0.0f64;
    for preset in Preset::ALL {
        let eqs = find_equilibria(&preset.scenario().params, &region, 21).unwrap();
        ok &= eqs[0].point == State::ORIGIN;
        worst_residual = eqs.iter().fold(worst_residual, |m, e| m.max(e.residual_norm));
        notes.push(format!("{preset}: {} ({} found)", eqs[0].classification, eqs.len()));
    }
    let b = find_equilibria(&Preset::B.scenario().params, &region, 21).unwrap();
    let det = b[0].jacobian.det();
    let b_ok = b[0].classification == Stability::Saddle
        && (det - -1.0358823529411763).abs() < 1e-9
        && (det * 1e4).round() / 1e4 == -1.0359;
    ok &= b_ok;

    let mut r = rng(7);
    let mut symmetric = 0;
    for _ in 0..100 {
        let p = random_params(&mut r, 0.05);
        let direct = find_equilibria(&p, &region, 21).unwrap();
        let mirror = find_equilibria_swapped(&p, &region, 21).unwrap();
        worst_residual = direct.iter().fold(worst_residual, |m, e| m.max(e.residual_norm));
        let matched = direct.len() == mirror.len()
            && direct.iter().all(|e| {
                mirror.iter().any(|f| {
                    let mut a = e.eigenvalues.map(|z| (z.re, z.im));
                    let mut b = f.eigenvalues.map(|z| (z.re, z.im));
                    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    let scale = 1e-9 * (1.0 + e.jacobian.max_abs());
                    f.point.distance(&e.point.swapped()) <= region.dedup_tol()
                        && a.iter().zip(&b).all(|(x, y)| (x.0 - y.0).abs() <= scale && (x.1 - y.1).abs() <= scale)
                })
            });
        symmetric += usize::from(matched);
    }
    ok &= symmetric == 100;
    let residual_ok = worst_residual < 1e-9;
    ok &= residual_ok;
    verdict(
        ok,
        format!(
            "{}; B origin det {det:.10} saddle={b_ok}; worst residual {worst_residual:.2e} (limit 1e-9); swap symmetry {symmetric}/100",
            notes.join(", ")
        ),
    )
}

fn beta_independence() -> Verdict {
    let base = Preset::A.scenario();
    let a1 = Axis::new(ParamName::Beta1, 0.0, 1.0, 11).unwrap();
    let a2 = Axis::new(ParamName::Beta2, 0.0, 1.0, 11).unwrap();
    let map = sweep(&base, &a1, &a2).unwrap();
    let n = map.count(OutcomeTag::Diverged);
    verdict(n == 121, format!("{n}/121 cells diverged"))
}

fn calibration() -> Verdict {
    let sc = Preset::C.scenario();
    let solver = SolverConfig::adaptive(1e-8);
    let truth = integrate(&sc.params, sc.x0, 0.0, 1.0, &solver).unwrap();
    let rows: Vec<Observation> = (0..=10)
        .map(|j| {
            let t = j as f64 / 10.0;
            let k = truth.samples.partition_point(|s| s.t < t).min(truth.samples.len() - 1);
            let x = if k == 0 || truth.samples[k].t == t {
                truth.samples[k].state
            } else {
                let (a, b) = (truth.samples[k - 1], truth.samples[k]);
                a.state + (b.state - a.state) * ((t - a.t) / (b.t - a.t))
            };
            Observation::new(t, x.s, x.i)
        })
        .collect();
    let obs = ObservationSet::new(rows).unwrap();
    let template = sc.params.with(ParamName::Beta1, 0.5).unwrap().with(ParamName::Beta2, 0.5).unwrap();
    let spec = FitSpec::new(
        template,
        vec![
            FreeParam::full_range(ParamName::Beta1, 0.5),
            FreeParam::full_range(ParamName::Beta2, 0.5),
        ],
        X0Policy::FirstObservation,
    )
    .unwrap();
    let r = fit(&spec, &obs, &solver, 2000).unwrap();
    let (b1, b2) = (r.params.beta1(), r.params.beta2());
    let ok = (b1 - 0.67).abs() <= 1e-3 && (b2 - 0.56).abs() <= 1e-3;
    // the field sees the contact rates only through beta2 - beta1
    let diff_err = ((b2 - b1) - (0.56 - 0.67)).abs();
    verdict(
        ok,
        format!(
            "recovered beta1 = {b1:.6}, beta2 = {b2:.6} after {} evaluations ({}; 11 points on [0, 1], rk4-adaptive); \
             beta2 - beta1 = {:.6} (error {diff_err:.1e}), the only identifiable combination",
            r.evaluations,
            if r.converged { "converged" } else { "budget exhausted" },
            b2 - b1
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let root = dir.path();
    let linear = root.join("linear.json");
    fs::write(
        &linear,
        r#"{"alpha":0.5,"sigma":0.3,"beta1":0.4,"beta2":0.4,"mu1":0.2,"mu2":0.6,"s0":1000,"i0":300,"t0":0,"t1":1}"#,
    )
    .unwrap();
    let b = root.join("b.json");
    fs::write(&b, serialize_scenario(&Preset::B.scenario())).unwrap();
    let obs = root.join("obs.csv");
    let p = validate_params(0.5, 0.3, 0.4, 0.4, 0.2, 0.6).unwrap();
    let mut text = String::from("t,s,i\n");
    for j in 0..=5 {
        let t = j as f64 * 0.2;
        let x = expm_apply(linear_matrix(&p), State::new(1000.0, 300.0), t);
        text.push_str(&format!("{t},{},{}\n", x.s, x.i));
    }
    fs::write(&obs, text).unwrap();
    let l = linear.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["simulate", "--scenario", l, "--svg"],
        vec!["equilibria", "--scenario", b.to_str().unwrap()],
        vec!["sweep", "--scenario", l, "--axis1", "beta1:0:1:5", "--axis2", "sigma:0:1:4", "--svg"],
        vec!["calibrate", "--scenario", l, "--observations", obs.to_str().unwrap(), "--free", "mu2,sigma", "--budget", "200"],
        vec!["scenario", "A", "--svg"],
        vec!["scenario", "B"],
        vec!["scenario", "C", "--svg"],
        vec!["scenario", "D", "--svg"],
        vec!["check"],
    ];
    let mut differing = Vec::new();
    for (n, args) in commands.iter().enumerate() {
        let mut snapshots = Vec::new();
        for rep in 0..2 {
            let out_dir = root.join(format!("c{n}r{rep}"));
            let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            if args[0] != "check" {
                full.extend(["--out".into(), out_dir.to_str().unwrap().into()]);
            }
            let out = Command::new(env!("CARGO_BIN_EXE_borrower-dynamics")).args(&full).output().unwrap();
            let mut files = Vec::new();
            if let Ok(entries) = fs::read_dir(&out_dir) {
                let mut paths: Vec<_> = entries.map(|e| e.unwrap().path()).collect();
                paths.sort();
                files = paths
                    .into_iter()
                    .map(|f| (f.file_name().unwrap().to_owned(), fs::read(&f).unwrap()))
                    .collect();
            }
            snapshots.push((out.status.code(), out.stdout, out.stderr, files));
        }
        if snapshots[0] != snapshots[1] {
            differing.push(args[0]);
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} invocations over 6 subcommands run twice; differing: {:?}", commands.len(), differing),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("interaction cancellation", Duration::from_secs(1), cancellation),
        ("scenario A growth law", Duration::from_secs(1), growth_law),
        ("linear-case oracle", Duration::from_secs(5), linear_oracle),
        ("order of convergence", Duration::from_secs(5), order_of_convergence),
        ("jacobian check", Duration::from_secs(1), jacobian),
        ("scenario C spot value", Duration::MAX, spot_value),
        ("equilibrium suite", Duration::MAX, equilibria),
        ("sweep beta-independence", Duration::from_secs(30), beta_independence),
        ("calibration recovery", Duration::from_secs(60), calibration),
        ("determinism", Duration::MAX, determinism),
    ];
    let mut failed = 0;
    for (n, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        let budget = if *limit == Duration::MAX {
            String::new()
        } else {
            format!(", limit {}s", limit.as_secs())
        };
        println!(
            "{} [{:>2}] {name}: {} ({:.3}s{budget})",
            if pass { "PASS" } else { "FAIL" },
            n + 1,
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
