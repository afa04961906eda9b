//! Exhaustive and statistical cross-checks of the model and problem
//! encodings against independently written oracles.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvqa_core::model::{Qubo, SpinConfig};
use pvqa_core::problems::{
    brute_force_optima, constraint_of, gen_gpp, gpp_qubo, qkp_qubo, synthetic_qkp, ProblemInstance,
};

fn random_qubo(n: usize, seed: u64) -> Qubo {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = Qubo::new(n);
    for i in 0..n {
        if rng.gen::<f64>() < 0.8 {
            q.add_linear(i, rng.gen_range(-1.0..1.0));
        }
        for j in (i + 1)..n {
            if rng.gen::<f64>() < 0.5 {
                q.add_quadratic(i, j, rng.gen_range(-1.0..1.0));
            }
        }
    }
    q.set_offset(rng.gen_range(-1.0..1.0));
    q
}

/// Term-by-term double loop over the full coefficient matrix, written
/// independently of `Qubo::eval`.
fn naive_qubo_energy(q: &Qubo, x: &SpinConfig) -> f64 {
    let n = q.n();
    let mut e = q.offset();
    for i in 0..n {
        for j in 0..n {
            if x.bit(i) == 0 || x.bit(j) == 0 {
                continue;
            }
            if i == j {
                e += q.linear_coeff(i);
            } else if i < j {
                e += q.quadratic_coeff(i, j);
            }
        }
    }
    e
}

#[test]
fn qubo_eval_matches_naive_double_loop() {
    for seed in 0..5 {
        let q = random_qubo(6, seed);
        for x in SpinConfig::enumerate(6) {
            let got = q.eval(&x).unwrap();
            let want = naive_qubo_energy(&q, &x);
            assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn ising_energy_equals_qubo_energy_on_all_configs() {
    for seed in 0..5 {
        let q = random_qubo(6, seed);
        let m = q.to_ising();
        for x in SpinConfig::enumerate(6) {
            let eq = q.eval(&x).unwrap();
            let ei = m.eval(&x).unwrap();
            assert!(
                (eq - ei).abs() <= 1e-9 * (1.0 + eq.abs()),
                "seed {seed} config {x}: qubo {eq} vs ising {ei}"
            );
        }
    }
}

#[test]
fn rescaling_preserves_the_ground_state_set() {
    for seed in 0..10 {
        let q = random_qubo(8, 100 + seed);
        let m = q.to_ising();
        let (r, scale) = m.rescaled().unwrap();
        assert!(scale > 0.0);
        assert!((r.max_coefficient() - 1.0).abs() < 1e-12);

        let argmin = |table: &[f64]| -> Vec<usize> {
            let best = table.iter().cloned().fold(f64::INFINITY, f64::min);
            table
                .iter()
                .enumerate()
                .filter(|(_, &e)| (e - best).abs() <= 1e-9 * (1.0 + best.abs()))
                .map(|(b, _)| b)
                .collect()
        };
        assert_eq!(
            argmin(&m.energy_table()),
            argmin(&r.energy_table()),
            "seed {seed}"
        );
    }
}

#[test]
fn gpp_objective_equals_counted_cut_on_balanced_configs() {
    for seed in 0..6 {
        let g = gen_gpp(8, 0.5, seed).unwrap();
        let pair = gpp_qubo(&g, 1.0);
        for x in SpinConfig::enumerate(8) {
            if x.count_ones() != 4 {
                continue;
            }
            let cut = g.cut_size(&x) as f64;
            assert_eq!(
                pair.objective().eval(&x).unwrap(),
                cut,
                "seed {seed} config {x}"
            );
        }
    }
}

#[test]
fn qkp_objective_equals_negated_profit_sum() {
    for seed in 0..6 {
        let q = synthetic_qkp(8, seed).unwrap();
        let pair = qkp_qubo(&q, 1.0);
        for x in SpinConfig::enumerate(8) {
            let want = -(q.total_profit(&x) as f64);
            assert_eq!(
                pair.objective().eval(&x).unwrap(),
                want,
                "seed {seed} config {x}"
            );
        }
    }
}

#[test]
fn feasibility_agrees_with_direct_constraint_evaluation() {
    for seed in 0..4 {
        let g = gen_gpp(8, 0.5, seed).unwrap();
        let inst = ProblemInstance::Gpp(g.clone());
        let c = constraint_of(&inst).unwrap();
        for x in SpinConfig::enumerate(8) {
            let direct = x.count_ones() == g.n_nodes() / 2;
            assert_eq!(c.is_feasible(&x), direct);
        }

        let q = synthetic_qkp(8, seed).unwrap();
        let inst = ProblemInstance::Qkp(q.clone());
        let c = constraint_of(&inst).unwrap();
        for x in SpinConfig::enumerate(8) {
            let direct = q.total_weight(&x) <= q.capacity();
            assert_eq!(c.is_feasible(&x), direct);
        }
    }
}

#[test]
fn brute_force_result_survives_a_full_rescan() {
    for seed in 0..4 {
        let inst = ProblemInstance::Gpp(gen_gpp(8, 0.5, seed).unwrap());
        let pair = inst.qubo_pair(1.0);
        let c = inst.constraint().unwrap();
        let optima = brute_force_optima(&pair, &c).unwrap();
        for x in &optima.configs {
            assert!(c.is_feasible(x));
            assert_eq!(pair.objective().eval(x).unwrap(), optima.c_opt);
        }
        for x in SpinConfig::enumerate(8) {
            if c.is_feasible(&x) {
                let e = pair.objective().eval(&x).unwrap();
                assert!(e >= optima.c_opt);
                if e == optima.c_opt {
                    assert!(optima.contains(&x));
                }
            }
        }
    }
}

#[test]
fn edge_counts_follow_binomial_statistics() {
    // 1000 seeds at density 0.5 on 32 nodes: the sample mean of |E| must
    // fall within 3 standard errors of 0.5 · C(32,2)
    let possible = 32.0 * 31.0 / 2.0;
    let mut total = 0usize;
    let samples = 1000;
    for seed in 0..samples {
        total += gen_gpp(32, 0.5, seed).unwrap().edges().len();
    }
    let mean = total as f64 / samples as f64;
    let expected = 0.5 * possible;
    let sigma_mean = (possible * 0.25_f64).sqrt() / (samples as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 3.0 * sigma_mean,
        "mean {mean} vs expected {expected} ± {}",
        3.0 * sigma_mean
    );
}

#[test]
fn khot_counts_enumerated_feasible_sets() {
    // uniform over 2^4 configs of a 4-node GPP: |F| = C(4,2) = 6
    let g = gen_gpp(4, 0.5, 0).unwrap();
    let c = ProblemInstance::Gpp(g).constraint().unwrap();
    let feasible = SpinConfig::enumerate(4)
        .filter(|x| c.is_feasible(x))
        .count();
    assert_eq!(feasible, 6);
}

proptest! {
    #[test]
    fn eval_is_linear_in_coefficients(seed_a in 0u64..500, seed_b in 500u64..1000, idx in 0usize..256) {
        let a = random_qubo(8, seed_a);
        let b = random_qubo(8, seed_b);
        let mut sum = a.clone();
        sum.axpy(1.0, &b);
        let x = SpinConfig::from_index(idx, 8);
        let lhs = sum.eval(&x).unwrap();
        let rhs = a.eval(&x).unwrap() + b.eval(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn qubo_ising_equivalence(seed in 0u64..200, n in 2usize..=8, idx in 0usize..256) {
        let q = random_qubo(n, seed);
        let m = q.to_ising();
        let x = SpinConfig::from_index(idx % (1 << n), n);
        let eq = q.eval(&x).unwrap();
        let ei = m.eval(&x).unwrap();
        prop_assert!((eq - ei).abs() <= 1e-9 * (1.0 + eq.abs()));
    }
}
