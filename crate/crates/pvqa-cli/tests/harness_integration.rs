//! Cross-variant harness behavior on small instances: QAOA layer
//! containment, the hardware-style piecewise family, and shot-mode
//! plumbing end to end.

use pvqa_cli::harness::{
    run_variant, schedule_params, Mode, OptimizerSpec, RunSetup, ScheduleFamily, Variant,
    VariantSpec,
};
use pvqa_core::problems::{gen_gpp, ProblemInstance};
use pvqa_core::schedule::Schedule;

fn setup_6(seed: u64) -> RunSetup {
    let inst = ProblemInstance::Gpp(gen_gpp(6, 0.5, seed).unwrap());
    RunSetup::with_auto_penalty(&inst).unwrap()
}

/// Best variational energy is non-increasing in the layer count: a p-layer
/// solution embeds into p+1 layers by a zero-duration trailing layer, and
/// that embedding evaluates to the same energy.
#[test]
fn qaoa_energy_does_not_degrade_with_extra_layers() {
    let setup = setup_6(3);
    let horizon = 1.0;

    let energy_of = |schedule: &Schedule| -> f64 {
        let psi = setup.evolver.evolve_qaoa_exact(schedule).unwrap();
        psi.measure().expectation(setup.full_costs())
    };

    let mut best = f64::INFINITY;
    let mut prev_params: Vec<f64> = Vec::new();
    for p in 1..=3usize {
        let spec = VariantSpec {
            variant: Variant::Vqa,
            schedule: ScheduleFamily::Qaoa { p },
            horizon,
            optimizer: OptimizerSpec::Powell { max_iter: 10 * p },
            mode: Mode::Exact,
        };
        let outcome = run_variant(&spec, &setup, None).unwrap();
        let achieved = energy_of(&outcome.report.schedule);

        // embed the previous best with a zero-duration trailing layer
        let embedded = if prev_params.is_empty() {
            f64::INFINITY
        } else {
            let mut params = prev_params.clone();
            let tail = *params.last().unwrap();
            params.extend([tail, tail]);
            let e = energy_of(&Schedule::Qaoa {
                breakpoints: params,
                horizon,
            });
            let direct = energy_of(&Schedule::Qaoa {
                breakpoints: prev_params.clone(),
                horizon,
            });
            assert!(
                (e - direct).abs() < 1e-12,
                "zero-duration layer changed the energy"
            );
            e
        };

        let level = achieved.min(embedded);
        assert!(
            level <= best + 1e-9,
            "p = {p}: best energy rose from {best} to {level}"
        );
        best = level;
        prev_params = if achieved <= embedded {
            schedule_params(&outcome.report.schedule)
        } else {
            let mut params = prev_params;
            let tail = *params.last().unwrap();
            params.extend([tail, tail]);
            params
        };
    }
}

/// At a short horizon the optimal linear path runs from s = 1 down to
/// s = 0; Powell finds it from the centered start within ten iterations.
#[test]
fn powell_finds_the_reversed_ramp_at_short_horizon() {
    let inst = ProblemInstance::Gpp(gen_gpp(8, 0.5, 0).unwrap());
    let setup = RunSetup::with_auto_penalty(&inst).unwrap();
    let spec = VariantSpec {
        variant: Variant::Vqa,
        schedule: ScheduleFamily::Linear,
        horizon: 0.1,
        optimizer: OptimizerSpec::Powell { max_iter: 10 },
        mode: Mode::Exact,
    };
    let outcome = run_variant(&spec, &setup, None).unwrap();
    let params = outcome.report.schedule_params();
    assert!((params[0] - 1.0).abs() <= 0.1, "s1 = {}", params[0]);
    assert!(params[1].abs() <= 0.1, "s2 = {}", params[1]);
}

#[test]
fn annealer_piecewise_family_runs_end_to_end() {
    let setup = setup_6(5);
    let spec = VariantSpec {
        variant: Variant::PVqa,
        schedule: ScheduleFamily::AnnealerPiecewise,
        horizon: 1.0,
        optimizer: OptimizerSpec::GridSearch { resolution: 0.5 },
        mode: Mode::Shots {
            count: 100,
            top_k: Some(50),
            seed: 7,
        },
    };
    let outcome = run_variant(&spec, &setup, None).unwrap();
    assert_eq!(outcome.report.p_fs, 1.0);
    assert_eq!(outcome.report.evaluations, 9); // 3 × 3 lattice
    let params = outcome.report.schedule_params();
    assert!(params.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(matches!(
        outcome.report.schedule,
        Schedule::AnnealerPiecewise { .. }
    ));
}

/// The optimized report re-evaluates its own parameters: in exact mode the
/// final distribution must reproduce the optimizer's best value.
#[test]
fn reported_value_matches_reevaluation_at_best_params() {
    let setup = setup_6(8);
    let spec = VariantSpec {
        variant: Variant::PVqa,
        schedule: ScheduleFamily::Linear,
        horizon: 0.5,
        optimizer: OptimizerSpec::Powell { max_iter: 3 },
        mode: Mode::Exact,
    };
    let outcome = run_variant(&spec, &setup, None).unwrap();
    let post = outcome.post.as_ref().unwrap();
    let e_report = post.expectation(setup.objective_costs());

    let psi = setup
        .evolver
        .evolve_rk4(&outcome.report.schedule, 5e-4)
        .unwrap();
    let d = setup.repair.transform_distribution(&psi.measure(), None);
    let e_again = d.expectation(setup.objective_costs());
    assert!((e_report - e_again).abs() < 1e-6, "{e_report} vs {e_again}");
}
