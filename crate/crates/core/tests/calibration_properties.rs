use borrower_dynamics::calibration::{
    fit, objective, FitSpec, FreeParam, Observation, ObservationSet, X0Policy, DIVERGENCE_SENTINEL,
};
use borrower_dynamics::integrator::{integrate, SolverConfig};
use borrower_dynamics::io::Preset;
use borrower_dynamics::model::{validate_params, ModelParams, ParamName, State};
use proptest::prelude::*;

/// Observations at `n` equispaced times, read off a run of `p`.
fn synthetic(p: &ModelParams, x0: State, t1: f64, n: usize, solver: &SolverConfig) -> ObservationSet {
    let times: Vec<f64> = (0..n).map(|j| t1 * j as f64 / (n - 1) as f64).collect();
    let run = integrate(p, x0, 0.0, t1, solver).unwrap();
    let rows = times
        .iter()
        .map(|&t| {
            let k = run.samples.partition_point(|s| s.t < t).min(run.samples.len() - 1);
            let x = if k == 0 || run.samples[k].t == t {
                run.samples[k].state
            } else {
                let (a, b) = (run.samples[k - 1], run.samples[k]);
                let w = (t - a.t) / (b.t - a.t);
                a.state + (b.state - a.state) * w
            };
            Observation::new(t, x.s, x.i)
        })
        .collect();
    ObservationSet::new(rows).unwrap()
}

fn scenario_c_data() -> (ModelParams, ObservationSet, SolverConfig) {
    let sc = Preset::C.scenario();
    let solver = SolverConfig::adaptive(1e-8);
    let obs = synthetic(&sc.params, sc.x0, 1.0, 11, &solver);
    (sc.params, obs, solver)
}

#[test]
fn self_consistent_residual_is_tiny_and_identifiable() {
    let (p, obs, solver) = scenario_c_data();
    let own = objective(&p, &obs, &solver).unwrap();
    assert!(own < 1e-6, "{own}");
    let shifted = p.with(ParamName::Beta1, p.beta1() - 0.1).unwrap();
    assert!(objective(&shifted, &obs, &solver).unwrap() > own);
}

#[test]
fn contact_rates_are_identified_only_through_their_difference() {
    let (p, obs, solver) = scenario_c_data();
    let shifted = p.with(ParamName::Beta1, 0.37).unwrap().with(ParamName::Beta2, 0.26).unwrap();
    assert!(objective(&shifted, &obs, &solver).unwrap() < 1e-6);

    let guess = p.with(ParamName::Beta1, 0.5).unwrap().with(ParamName::Beta2, 0.5).unwrap();
    let spec = FitSpec::new(
        guess,
        vec![
            FreeParam::full_range(ParamName::Beta1, 0.5),
            FreeParam::full_range(ParamName::Beta2, 0.5),
        ],
        X0Policy::FirstObservation,
    )
    .unwrap();
    let r = fit(&spec, &obs, &solver, 2000).unwrap();
    let diff = r.params.beta2() - r.params.beta1();
    assert!((diff - -0.11).abs() < 1e-3, "{diff}");
}

#[test]
fn starting_at_the_truth_stays_there() {
    let (p, obs, solver) = scenario_c_data();
    let spec = FitSpec::new(p, vec![FreeParam::full_range(ParamName::Mu2, p.mu2())], X0Policy::FirstObservation)
        .unwrap();
    let r = fit(&spec, &obs, &solver, 200).unwrap();
    assert!(r.converged);
    assert!(r.residual <= r.initial_residual);
    assert!((r.params.mu2() - p.mu2()).abs() < 1e-6);
}

#[test]
fn tiny_budget_never_worsens_the_start() {
    let (p, obs, solver) = scenario_c_data();
    let guess = p.with(ParamName::Beta1, 0.5).unwrap().with(ParamName::Beta2, 0.5).unwrap();
    let spec = FitSpec::new(
        guess,
        vec![
            FreeParam::full_range(ParamName::Beta1, 0.5),
            FreeParam::full_range(ParamName::Beta2, 0.5),
        ],
        X0Policy::FirstObservation,
    )
    .unwrap();
    let r = fit(&spec, &obs, &solver, 10).unwrap();
    assert!(!r.converged);
    assert!(r.evaluations <= 10);
    assert!(r.residual <= r.initial_residual);
}

#[test]
fn diverging_forward_model_hits_the_sentinel() {
    let p = Preset::A.scenario().params;
    let obs = ObservationSet::new(vec![
        Observation::new(0.0, 10000.0, 2000.0),
        Observation::new(1.0, 1.0, 1.0),
        Observation::new(10.0, 1.0, 1.0),
    ])
    .unwrap();
    assert_eq!(objective(&p, &obs, &SolverConfig::default()).unwrap(), DIVERGENCE_SENTINEL);
}

fn small_problem(b1: f64, b2: f64, mu: f64) -> (FitSpec, ObservationSet, SolverConfig) {
    let truth = validate_params(0.6, 0.4, b1, b2, mu, 0.3).unwrap();
    let solver = SolverConfig::fixed(1e-2);
    let obs = synthetic(&truth, State::new(30.0, 10.0), 1.0, 6, &solver);
    let spec = FitSpec::new(
        truth,
        vec![
            FreeParam::full_range(ParamName::Beta1, 0.5),
            FreeParam::full_range(ParamName::Mu1, 0.5),
        ],
        X0Policy::FirstObservation,
    )
    .unwrap();
    (spec, obs, solver)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fits_respect_bounds_and_improve_monotonically(b1 in 0.0f64..=1.0, b2 in 0.0f64..=1.0, mu in 0.0f64..=1.0) {
        let (spec, obs, solver) = small_problem(b1, b2, mu);
        let r = fit(&spec, &obs, &solver, 150).unwrap();
        for fp in spec.free() {
            let v = r.params.get(fp.name);
            prop_assert!(v >= fp.lo && v <= fp.hi);
        }
        prop_assert!(r.trace.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 > w[0].0));
        prop_assert!(r.residual <= r.initial_residual);
        prop_assert!(r.evaluations <= 150);
    }

    #[test]
    fn fits_are_reproducible(b1 in 0.0f64..=1.0, mu in 0.0f64..=1.0) {
        let (spec, obs, solver) = small_problem(b1, 0.5, mu);
        prop_assert_eq!(fit(&spec, &obs, &solver, 120).unwrap(), fit(&spec, &obs, &solver, 120).unwrap());
    }

    #[test]
    fn scaling_weights_scales_the_objective(b1 in 0.0f64..=1.0, mu in 0.0f64..=1.0, c in prop::sample::select(vec![0.5, 2.0, 4.0])) {
        let (spec, obs, solver) = small_problem(b1, 0.5, mu);
        let scaled = obs.with_scaled_weights(c).unwrap();
        let p = spec.initial_params();
        prop_assert_eq!(objective(&p, &scaled, &solver).unwrap(), c * objective(&p, &obs, &solver).unwrap());
        let a = fit(&spec, &obs, &solver, 100).unwrap();
        let b = fit(&spec, &scaled, &solver, 100).unwrap();
        prop_assert_eq!(&a.params, &b.params);
        let ta: Vec<(usize, f64)> = a.trace.iter().map(|&(n, v)| (n, c * v)).collect();
        prop_assert_eq!(ta, b.trace);
    }

    #[test]
    fn free_initial_state_stays_in_its_box(b1 in 0.0f64..=1.0) {
        let (spec, obs, solver) = small_problem(b1, 0.5, 0.5);
        let spec = FitSpec::new(spec.initial_params(), spec.free().to_vec(), X0Policy::Free).unwrap();
        let r = fit(&spec, &obs, &solver, 80).unwrap();
        prop_assert!(r.x0.s.abs() <= 60.0 && r.x0.i.abs() <= 60.0);
    }
}
