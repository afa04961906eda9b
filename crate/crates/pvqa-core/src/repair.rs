//! Greedy feasibility repair.
//!
//! The repair Hamiltonian replaces the quadratic penalty with a piecewise
//! linear one:
//!
//! ```text
//! Q' = Q_obj + A'·penalty(x)
//! penalty = max{0, Σ a_i x_i - b_max, b_min - Σ a_i x_i}   (inequality)
//! penalty = |Σ_{i∈V'} x_i - k|                             (k-hot)
//! ```
//!
//! When A' exceeds the largest single-flip change of Q_obj and the
//! constraint's side conditions hold, every local minimum of Q' is
//! feasible. Steepest-descent bit flips therefore terminate at a feasible
//! configuration, strictly lowering Q' at every step.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dynamics::Distribution;
use crate::model::{Qubo, SpinConfig};
use crate::problems::{ConstraintKind, ConstraintSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum RepairError {
    /// Condition 1 of the feasibility guarantee: A' must exceed the upper
    /// bound on the single-flip objective change.
    PenaltyTooSmall {
        a_prime: f64,
        bound: f64,
    },
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for RepairError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepairError::PenaltyTooSmall { a_prime, bound } => {
                write!(f, "A' = {a_prime} does not exceed the flip bound {bound}")
            }
            RepairError::DimensionMismatch { expected, got } => {
                write!(
                    f,
                    "dimension mismatch: repair model has {expected} variables, got {got}"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RepairError {}

/// Upper bound on the single-flip energy change of a QUBO:
/// max_i (|q_ii| + Σ_{j:(i,j)∈E} |q_ij|).
pub fn delta_q_bound(q: &Qubo) -> f64 {
    let n = q.n();
    let mut per_var = vec![0.0f64; n];
    for (&i, &v) in q.linear() {
        per_var[i] += v.abs();
    }
    for (&(i, j), &v) in q.quadratic() {
        per_var[i] += v.abs();
        per_var[j] += v.abs();
    }
    per_var.into_iter().fold(0.0, f64::max)
}

/// Smallest penalty weight used by default: strictly above the flip bound
/// even when the bound is zero.
pub fn default_a_prime(q: &Qubo) -> f64 {
    const EPS: f64 = 1e-6;
    delta_q_bound(q) * (1.0 + EPS) + EPS
}

/// Piecewise-linear constraint violation; zero exactly on the feasible set.
pub fn linear_penalty(c: &ConstraintSpec, x: &SpinConfig) -> f64 {
    assert_eq!(x.n(), c.n(), "configuration size must match constraint");
    match c.kind() {
        ConstraintKind::KHot { k, subset } => {
            let count = subset.iter().filter(|&&i| x.bit(i) == 1).count() as i64;
            (count - *k as i64).abs() as f64
        }
        ConstraintKind::Inequality {
            coeffs,
            b_min,
            b_max,
        } => {
            let s: i64 = (0..x.n())
                .filter(|&i| x.bit(i) == 1)
                .map(|i| coeffs[i])
                .sum();
            0f64.max((s - b_max) as f64).max((b_min - s) as f64)
        }
    }
}

/// Objective plus validated repair penalty, with cached per-variable
/// neighborhoods for O(degree) flip evaluations.
#[derive(Debug, Clone)]
pub struct RepairModel {
    objective: Qubo,
    constraint: ConstraintSpec,
    a_prime: f64,
    /// Integer constraint coefficient of each variable (1/0 for k-hot).
    activity: Vec<i64>,
    bounds: (i64, i64),
    diag: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl RepairModel {
    /// Validates condition 1 (A' above the flip bound); the constraint's
    /// own side conditions were already enforced when it was built.
    pub fn new(
        objective: Qubo,
        constraint: ConstraintSpec,
        a_prime: f64,
    ) -> Result<Self, RepairError> {
        assert_eq!(
            objective.n(),
            constraint.n(),
            "objective and constraint sizes differ"
        );
        let bound = delta_q_bound(&objective);
        if !(a_prime > bound) {
            return Err(RepairError::PenaltyTooSmall { a_prime, bound });
        }

        let n = objective.n();
        let mut diag = vec![0.0; n];
        for (&i, &v) in objective.linear() {
            diag[i] = v;
        }
        let mut neighbors = vec![Vec::new(); n];
        for (&(i, j), &v) in objective.quadratic() {
            neighbors[i].push((j, v));
            neighbors[j].push((i, v));
        }

        let (activity, bounds) = match constraint.kind() {
            ConstraintKind::KHot { k, subset } => {
                let mut a = vec![0i64; n];
                for &i in subset {
                    a[i] = 1;
                }
                (a, (*k as i64, *k as i64))
            }
            ConstraintKind::Inequality {
                coeffs,
                b_min,
                b_max,
            } => (coeffs.clone(), (*b_min, *b_max)),
        };

        Ok(RepairModel {
            objective,
            constraint,
            a_prime,
            activity,
            bounds,
            diag,
            neighbors,
        })
    }

    /// Default-penalty model: A' = `default_a_prime`(objective).
    pub fn with_default_penalty(
        objective: Qubo,
        constraint: ConstraintSpec,
    ) -> Result<Self, RepairError> {
        let a_prime = default_a_prime(&objective);
        RepairModel::new(objective, constraint, a_prime)
    }

    pub fn n(&self) -> usize {
        self.objective.n()
    }

    pub fn objective(&self) -> &Qubo {
        &self.objective
    }

    pub fn constraint(&self) -> &ConstraintSpec {
        &self.constraint
    }

    pub fn a_prime(&self) -> f64 {
        self.a_prime
    }

    /// Q'(x) = Q_obj(x) + A'·penalty(x)
    pub fn repair_energy(&self, x: &SpinConfig) -> f64 {
        let obj = self
            .objective
            .eval(x)
            .expect("dimensions enforced at construction");
        obj + self.a_prime * linear_penalty(&self.constraint, x)
    }

    fn penalty_of_sum(&self, s: i64) -> f64 {
        let (b_min, b_max) = self.bounds;
        0f64.max((s - b_max) as f64).max((b_min - s) as f64)
    }

    /// Change of Q_obj when flipping variable i of x.
    fn objective_flip_delta(&self, x: &SpinConfig, i: usize) -> f64 {
        let sign = 1.0 - 2.0 * f64::from(x.bit(i));
        let mut coupled = self.diag[i];
        for &(j, v) in &self.neighbors[i] {
            if x.bit(j) == 1 {
                coupled += v;
            }
        }
        sign * coupled
    }

    /// Steepest-descent repair: flip whichever variable lowers Q' the most,
    /// lowest index on ties, until no flip strictly improves. The result is
    /// a local minimum of Q' and therefore feasible.
    pub fn greedy_repair(&self, x: &SpinConfig) -> SpinConfig {
        self.greedy_repair_trace(x).0
    }

    /// Same as [`greedy_repair`](Self::greedy_repair), also returning the
    /// accepted flip sequence.
    pub fn greedy_repair_trace(&self, x: &SpinConfig) -> (SpinConfig, Vec<usize>) {
        assert_eq!(
            x.n(),
            self.n(),
            "configuration size must match repair model"
        );
        let n = self.n();
        let mut cur = *x;
        let mut trace = Vec::new();
        let mut activity_sum: i64 = (0..n)
            .filter(|&i| cur.bit(i) == 1)
            .map(|i| self.activity[i])
            .sum();
        let max_steps = 1usize << n;

        loop {
            let base_penalty = self.penalty_of_sum(activity_sum);
            let mut best: Option<(usize, f64)> = None;
            for i in 0..n {
                let sign = if cur.bit(i) == 1 { -1 } else { 1 };
                let flipped_sum = activity_sum + sign * self.activity[i];
                let delta = self.objective_flip_delta(&cur, i)
                    + self.a_prime * (self.penalty_of_sum(flipped_sum) - base_penalty);
                if delta < 0.0 && best.is_none_or(|(_, b)| delta < b) {
                    best = Some((i, delta));
                }
            }
            match best {
                Some((i, _)) => {
                    let sign = if cur.bit(i) == 1 { -1 } else { 1 };
                    activity_sum += sign * self.activity[i];
                    cur = cur.flipped(i);
                    trace.push(i);
                    assert!(
                        trace.len() <= max_steps,
                        "greedy repair exceeded 2^n flips; repair model invariants are broken"
                    );
                }
                None => return (cur, trace),
            }
        }
    }

    /// Pushes every support point through the repair map and accumulates
    /// its mass on the image (the feasible local minima of Q').
    ///
    /// For an empirical shot distribution, `top_k` keeps only the k
    /// lowest-objective repaired shots (ties resolved by basis index, with
    /// a partial count at the cutoff) and renormalizes over them. Exact
    /// amplitude distributions keep their full repaired support.
    pub fn transform_distribution(&self, d: &Distribution, top_k: Option<u64>) -> Distribution {
        assert_eq!(d.n(), self.n(), "distribution size must match repair model");
        let dim = d.mass().len();
        let mut repaired = vec![0.0f64; dim];
        for (b, &p) in d.mass().iter().enumerate() {
            if p > 0.0 {
                let image = self.greedy_repair(&SpinConfig::from_index(b, self.n()));
                repaired[image.index()] += p;
            }
        }

        let shots = d.shots();
        if let (Some(shots), Some(k)) = (shots, top_k) {
            if k < shots {
                return self.truncate_to_top_shots(&repaired, shots, k);
            }
        }
        Distribution::new(repaired, shots)
    }

    fn truncate_to_top_shots(&self, repaired: &[f64], shots: u64, k: u64) -> Distribution {
        let mut support: Vec<(usize, u64)> = repaired
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(b, &p)| (b, libm::round(p * shots as f64) as u64))
            .collect();
        support.sort_by(|&(a, _), &(b, _)| {
            let ca = self
                .objective
                .eval(&SpinConfig::from_index(a, self.n()))
                .unwrap();
            let cb = self
                .objective
                .eval(&SpinConfig::from_index(b, self.n()))
                .unwrap();
            ca.partial_cmp(&cb).expect("finite costs").then(a.cmp(&b))
        });

        let mut kept = vec![0.0f64; repaired.len()];
        let mut remaining = k;
        for (b, count) in support {
            if remaining == 0 {
                break;
            }
            let take = count.min(remaining);
            kept[b] = take as f64 / k as f64;
            remaining -= take;
        }
        Distribution::new(kept, Some(k))
    }
}
