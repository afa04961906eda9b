//! Experiment harness: the four algorithm variants (pVQA, VQA, pQA, QA),
//! their evaluation metrics, penalty-coefficient tuning, and seeded
//! ensemble runs.
//!
//! A variant run wires the pieces together: build the penalized Hamiltonian
//! and rescale it, evolve the state along a (possibly optimized) schedule,
//! measure, optionally repair, and score the final distribution against the
//! brute-force optimum set:
//!
//! * pVQA / VQA optimize the schedule; pQA / QA anneal along the fixed
//!   0 → 1 ramp.
//! * pVQA / pQA repair every outcome, so their feasible rate is exactly 1;
//!   their objective is E = Σ p(σ)·C(σ) over the repaired distribution.
//! * VQA / QA score the raw distribution; their variational objective is
//!   E' = Σ p'(σ)·C'(σ) with the penalty included.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pvqa_core::dynamics::{default_dt, sample_shots, Distribution, DynamicsError, Evolver};
use pvqa_core::model::{ModelError, QuboPair, SpinConfig};
use pvqa_core::optimize::{
    continuous_gradient_descent, grid_search, powell_minimize, Objective, OptimizeError,
    OptimizeResult,
};
use pvqa_core::problems::{
    brute_force_optima, ConstraintSpec, Optima, ProblemError, ProblemInstance,
};
use pvqa_core::repair::{RepairError, RepairModel};
use pvqa_core::schedule::Schedule;

/// Raw feasible-rate floor an A value must clear to be tunable.
pub const FEASIBLE_RATE_THRESHOLD: f64 = 0.1;

#[derive(Debug)]
pub enum HarnessError {
    Model(ModelError),
    Problem(ProblemError),
    Dynamics(DynamicsError),
    Repair(RepairError),
    Optimize(OptimizeError),
    InvalidSpec(String),
    /// No grid point reached the feasible-rate threshold.
    NoAdmissiblePenalty,
}

impl std::fmt::Display for HarnessError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HarnessError::Model(e) => write!(f, "{e}"),
            HarnessError::Problem(e) => write!(f, "{e}"),
            HarnessError::Dynamics(e) => write!(f, "{e}"),
            HarnessError::Repair(e) => write!(f, "{e}"),
            HarnessError::Optimize(e) => write!(f, "{e}"),
            HarnessError::InvalidSpec(msg) => write!(f, "invalid variant spec: {msg}"),
            HarnessError::NoAdmissiblePenalty => write!(f, "no admissible penalty on the grid"),
        }
    }
}

impl std::error::Error for HarnessError {}

macro_rules! from_err {
    ($variant:ident, $ty:ty) => {
        impl From<$ty> for HarnessError {
            fn from(e: $ty) -> Self {
                HarnessError::$variant(e)
            }
        }
    };
}
from_err!(Model, ModelError);
from_err!(Problem, ProblemError);
from_err!(Dynamics, DynamicsError);
from_err!(Repair, RepairError);
from_err!(Optimize, OptimizeError);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[serde(rename = "pvqa")]
    PVqa,
    Vqa,
    #[serde(rename = "pqa")]
    PQa,
    Qa,
}

impl Variant {
    /// Whether measurement outcomes are repaired before scoring.
    pub fn post_processed(self) -> bool {
        matches!(self, Variant::PVqa | Variant::PQa)
    }

    /// Whether the schedule is optimized by a classical outer loop.
    pub fn variational(self) -> bool {
        matches!(self, Variant::PVqa | Variant::Vqa)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::PVqa => "pvqa",
            Variant::Vqa => "vqa",
            Variant::PQa => "pqa",
            Variant::Qa => "qa",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleFamily {
    Continuous { m: usize },
    Linear,
    Qaoa { p: usize },
    AnnealerPiecewise,
}

impl ScheduleFamily {
    pub fn param_count(&self) -> usize {
        match self {
            ScheduleFamily::Continuous { m } => *m,
            ScheduleFamily::Linear | ScheduleFamily::AnnealerPiecewise => 2,
            ScheduleFamily::Qaoa { p } => 2 * p,
        }
    }

    pub fn bounds(&self, horizon: f64) -> Vec<(f64, f64)> {
        match self {
            ScheduleFamily::Qaoa { .. } => vec![(0.0, horizon); self.param_count()],
            _ => vec![(0.0, 1.0); self.param_count()],
        }
    }

    /// Optimizer starting point: s = 0.5 everywhere, except QAOA
    /// breakpoints which start at zero.
    pub fn initial_params(&self) -> Vec<f64> {
        match self {
            ScheduleFamily::Qaoa { .. } => vec![0.0; self.param_count()],
            _ => vec![0.5; self.param_count()],
        }
    }

    /// Parameters of the non-variational baseline path: the 0 → 1 ramp
    /// (its discretization for the continuous family, a straight line
    /// through the hardware anchors, an empty circuit for QAOA).
    pub fn fixed_params(&self) -> Vec<f64> {
        match self {
            ScheduleFamily::Continuous { m } => {
                (0..*m).map(|k| (k as f64 + 0.5) / *m as f64).collect()
            }
            ScheduleFamily::Linear => vec![0.0, 1.0],
            ScheduleFamily::AnnealerPiecewise => vec![0.1, 0.9],
            ScheduleFamily::Qaoa { p } => vec![0.0; 2 * p],
        }
    }

    pub fn build(&self, params: &[f64], horizon: f64) -> Schedule {
        assert_eq!(params.len(), self.param_count());
        match self {
            ScheduleFamily::Continuous { .. } => Schedule::Continuous {
                values: params.to_vec(),
                horizon,
            },
            ScheduleFamily::Linear => Schedule::Linear {
                s1: params[0],
                s2: params[1],
                horizon,
            },
            ScheduleFamily::Qaoa { .. } => Schedule::Qaoa {
                breakpoints: params.to_vec(),
                horizon,
            },
            ScheduleFamily::AnnealerPiecewise => Schedule::AnnealerPiecewise {
                s1: params[0],
                s2: params[1],
                horizon,
            },
        }
    }

    pub fn as_str(&self) -> String {
        match self {
            ScheduleFamily::Continuous { m } => format!("continuous{m}"),
            ScheduleFamily::Linear => "linear".into(),
            ScheduleFamily::Qaoa { p } => format!("qaoa{p}"),
            ScheduleFamily::AnnealerPiecewise => "annealer".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    Powell { max_iter: usize },
    GridSearch { resolution: f64 },
    GradientDescent { max_iter: usize },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Shots {
        count: u64,
        top_k: Option<u64>,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub variant: Variant,
    pub schedule: ScheduleFamily,
    pub horizon: f64,
    pub optimizer: OptimizerSpec,
    pub mode: Mode,
}

impl VariantSpec {
    /// Fixed-path baseline: pQA or QA on the standard ramp.
    pub fn baseline(variant: Variant, horizon: f64) -> Self {
        assert!(!variant.variational());
        VariantSpec {
            variant,
            schedule: ScheduleFamily::Linear,
            horizon,
            optimizer: OptimizerSpec::None,
            mode: Mode::Exact,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.horizon > 0.0) {
            return Err(HarnessError::InvalidSpec(format!(
                "horizon {} must be positive",
                self.horizon
            )));
        }
        if !self.variant.variational() {
            if self.optimizer != OptimizerSpec::None {
                return Err(HarnessError::InvalidSpec(format!(
                    "{} is a fixed-path variant and cannot carry an optimizer",
                    self.variant.as_str()
                )));
            }
            if self.schedule != ScheduleFamily::Linear {
                return Err(HarnessError::InvalidSpec(format!(
                    "{} anneals along the linear 0 -> 1 ramp",
                    self.variant.as_str()
                )));
            }
        }
        if let Mode::Shots { count, top_k, .. } = &self.mode {
            if *count == 0 {
                return Err(HarnessError::InvalidSpec(
                    "shot count must be positive".into(),
                ));
            }
            if let Some(k) = top_k {
                if *k == 0 || k > count {
                    return Err(HarnessError::InvalidSpec(format!(
                        "top_k = {k} must lie in 1..={count}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Everything derived from one problem instance at one penalty value:
/// the QUBO pair, its rescaled Ising model, the shared energy tables, the
/// repair model, and the exact optimum set.
pub struct RunSetup {
    pub label: String,
    pub pair: QuboPair,
    pub constraint: ConstraintSpec,
    pub repair: RepairModel,
    pub optima: Optima,
    pub evolver: Evolver,
    /// Divisor applied to the Ising coefficients before evolution.
    pub scale: f64,
    cost_objective: Vec<f64>,
    cost_full: Vec<f64>,
}

impl RunSetup {
    pub fn prepare(instance: &ProblemInstance, penalty: f64) -> Result<Self, HarnessError> {
        let pair = instance.qubo_pair(penalty);
        let constraint = instance.constraint()?;
        let repair =
            RepairModel::with_default_penalty(pair.objective().clone(), constraint.clone())?;
        let optima = brute_force_optima(&pair, &constraint)?;
        let combined = pair.combined();
        let (ising, scale) = combined.to_ising().rescaled()?;
        let evolver = Evolver::new(&ising)?;
        let cost_objective = pair.objective().energy_table();
        let cost_full = combined.energy_table();
        Ok(RunSetup {
            label: instance.label(),
            pair,
            constraint,
            repair,
            optima,
            evolver,
            scale,
            cost_objective,
            cost_full,
        })
    }

    /// Setup with the automatic penalty of [`auto_penalty`].
    pub fn with_auto_penalty(instance: &ProblemInstance) -> Result<Self, HarnessError> {
        let a = auto_penalty(instance)?;
        RunSetup::prepare(instance, a)
    }

    pub fn n(&self) -> usize {
        self.pair.n()
    }

    /// Objective cost table C(σ) shared by metrics and repair scoring.
    pub fn objective_costs(&self) -> &[f64] {
        &self.cost_objective
    }

    /// Full penalized cost table C'(σ).
    pub fn full_costs(&self) -> &[f64] {
        &self.cost_full
    }
}

/// Smallest penalty on the integer grid A ∈ {1, 2, …} for which every
/// ground state of the penalized Hamiltonian is feasible (so the annealing
/// target coincides with the constrained optimum set). This is the static
/// stand-in for the measured tuning loop of [`tune_penalty`]: it needs no
/// dynamics and keeps A small, which preserves the objective structure
/// after rescaling.
pub fn auto_penalty(instance: &ProblemInstance) -> Result<f64, HarnessError> {
    const GRID_LIMIT: u32 = 1000;
    let constraint = instance.constraint()?;
    // QKP penalties act on the squared weight fraction, so the useful grid
    // is coarser by the paper's factor of 200.
    let step = match instance {
        ProblemInstance::Gpp(_) => 1.0,
        ProblemInstance::Qkp(_) => 200.0,
    };
    for k in 1..=GRID_LIMIT {
        let a = step * f64::from(k);
        let pair = instance.qubo_pair(a);
        let table = pair.combined().energy_table();
        let best = table.iter().cloned().fold(f64::INFINITY, f64::min);
        let ok = table.iter().enumerate().all(|(b, &e)| {
            e > best + 1e-9 || constraint.is_feasible(&SpinConfig::from_index(b, pair.n()))
        });
        if ok {
            return Ok(a);
        }
    }
    Err(HarnessError::NoAdmissiblePenalty)
}

/// Box-bounded objective whose batch evaluations fan out across the rayon
/// pool. The wrapped closure receives the evaluation index, which seeds
/// per-evaluation shot sampling deterministically.
pub struct ParallelObjective<F> {
    f: F,
    bounds: Vec<(f64, f64)>,
    counter: AtomicU64,
}

impl<F: Fn(&[f64], u64) -> f64 + Sync> ParallelObjective<F> {
    pub fn new(bounds: Vec<(f64, f64)>, f: F) -> Self {
        ParallelObjective {
            f,
            bounds,
            counter: AtomicU64::new(0),
        }
    }
}

impl<F: Fn(&[f64], u64) -> f64 + Sync> Objective for ParallelObjective<F> {
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn eval(&mut self, params: &[f64]) -> f64 {
        let idx = self.counter.fetch_add(1, Ordering::Relaxed);
        (self.f)(params, idx)
    }

    fn eval_batch(&mut self, batch: &[Vec<f64>]) -> Vec<f64> {
        let base = self
            .counter
            .fetch_add(batch.len() as u64, Ordering::Relaxed);
        batch
            .par_iter()
            .enumerate()
            .map(|(i, p)| (self.f)(p, base + i as u64))
            .collect()
    }

    fn evaluations(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}

/// Per-evaluation RNG stream: splitmix64 of the base seed and the
/// evaluation index.
fn shot_seed(base: u64, eval_index: u64) -> u64 {
    let mut z = base ^ eval_index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Flat parameter view of a schedule, matching the optimizer encoding.
pub fn schedule_params(schedule: &Schedule) -> Vec<f64> {
    match schedule {
        Schedule::Continuous { values, .. } => values.clone(),
        Schedule::Linear { s1, s2, .. } | Schedule::AnnealerPiecewise { s1, s2, .. } => {
            vec![*s1, *s2]
        }
        Schedule::Qaoa { breakpoints, .. } => breakpoints.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub instance: String,
    pub variant: Variant,
    pub schedule_family: String,
    pub horizon: f64,
    /// Full descriptor of the final (optimized or fixed) path.
    pub schedule: Schedule,
    pub penalty_a: f64,
    pub a_prime: f64,
    /// Feasible rate of the scored distribution (exactly 1 after repair).
    pub p_fs: f64,
    /// Feasible rate of the raw pre-repair distribution.
    pub raw_p_fs: f64,
    /// Average objective cost over (feasible) outcomes; absent when no
    /// feasible mass exists.
    pub c_ave: Option<f64>,
    pub p_suc: f64,
    /// c_ave - c_opt.
    pub residual: Option<f64>,
    pub c_opt: f64,
    pub evaluations: u64,
    pub iterations: usize,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn schedule_params(&self) -> Vec<f64> {
        schedule_params(&self.schedule)
    }
}

/// A finished run: the serializable report plus the final distributions
/// for exact re-scoring.
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub raw: Distribution,
    pub post: Option<Distribution>,
    pub optimizer_trace: Option<Vec<(Vec<f64>, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub p_fs: f64,
    pub c_ave: Option<f64>,
    pub p_suc: f64,
}

/// Scores a distribution:
///
/// * post-processed: p_FS = 1, c_ave = Σ C(σ)p(σ), p_suc = Σ_{σ∈S} p(σ);
/// * raw: p_FS = Σ_{σ∈F} p'(σ), c_ave = Σ_{σ∈F} C(σ)p'(σ) / p_FS (absent
///   when p_FS = 0), p_suc = Σ_{σ∈S} p'(σ).
pub fn metrics(
    d: &Distribution,
    pair: &QuboPair,
    constraint: &ConstraintSpec,
    optima: &Optima,
    post_processed: bool,
) -> Metrics {
    let n = pair.n();
    let p_suc: f64 = optima.configs.iter().map(|x| d.mass_of(x)).sum();
    if post_processed {
        let c_ave = d
            .mass()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(b, &p)| {
                p * pair
                    .objective()
                    .eval(&SpinConfig::from_index(b, n))
                    .expect("sizes match")
            })
            .sum();
        return Metrics {
            p_fs: 1.0,
            c_ave: Some(c_ave),
            p_suc,
        };
    }
    let mut p_fs = 0.0;
    let mut weighted_cost = 0.0;
    for (b, &p) in d.mass().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let x = SpinConfig::from_index(b, n);
        if constraint.is_feasible(&x) {
            p_fs += p;
            weighted_cost += p * pair.objective().eval(&x).expect("sizes match");
        }
    }
    let c_ave = (p_fs > 0.0).then(|| weighted_cost / p_fs);
    Metrics { p_fs, c_ave, p_suc }
}

/// Difference between the average cost and the optimum cost.
pub fn residual_energy(c_ave: f64, c_opt: f64) -> f64 {
    c_ave - c_opt
}

/// Runs one variant on one prepared instance: optimizes the schedule when
/// the variant is variational, evaluates the final distribution, and
/// assembles the report.
pub fn run_variant(
    spec: &VariantSpec,
    setup: &RunSetup,
    dt_override: Option<f64>,
) -> Result<RunOutcome, HarnessError> {
    spec.validate()?;
    let started = Instant::now();
    let dt = dt_override.unwrap_or_else(|| default_dt(spec.horizon));
    let post_processed = spec.variant.post_processed();
    let horizon = spec.horizon;

    let evaluate = |params: &[f64],
                    eval_index: u64|
     -> Result<(Distribution, Option<Distribution>), HarnessError> {
        let schedule = spec.schedule.build(params, horizon).clamp_project();
        let psi = match &schedule {
            Schedule::Qaoa { .. } => setup.evolver.evolve_qaoa_exact(&schedule)?,
            _ => setup.evolver.evolve_rk4(&schedule, dt)?,
        };
        let exact = psi.measure();
        let (raw, top_k) = match &spec.mode {
            Mode::Exact => (exact, None),
            Mode::Shots { count, top_k, seed } => (
                sample_shots(&exact, *count, shot_seed(*seed, eval_index)),
                *top_k,
            ),
        };
        let post = post_processed.then(|| setup.repair.transform_distribution(&raw, top_k));
        Ok((raw, post))
    };
    let energy_of = |raw: &Distribution, post: &Option<Distribution>| -> f64 {
        match post {
            Some(p) => p.expectation(&setup.cost_objective),
            None => raw.expectation(&setup.cost_full),
        }
    };

    let opt_result: Option<OptimizeResult> = match &spec.optimizer {
        OptimizerSpec::None => None,
        optimizer => {
            let bounds = spec.schedule.bounds(horizon);
            let objective = |params: &[f64], eval_index: u64| -> f64 {
                match evaluate(params, eval_index) {
                    Ok((raw, post)) => energy_of(&raw, &post),
                    Err(_) => f64::NAN,
                }
            };
            let mut f = ParallelObjective::new(bounds, objective);
            let x0 = spec.schedule.initial_params();
            let result = match optimizer {
                OptimizerSpec::Powell { max_iter } => powell_minimize(&mut f, &x0, *max_iter)?,
                OptimizerSpec::GridSearch { resolution } => grid_search(&mut f, *resolution)?,
                OptimizerSpec::GradientDescent { max_iter } => {
                    continuous_gradient_descent(&mut f, *max_iter)?
                }
                OptimizerSpec::None => unreachable!(),
            };
            Some(result)
        }
    };

    let (params, evaluations, iterations, trace) = match opt_result {
        Some(r) => (r.best_params, r.evaluations, r.iterations, r.trace),
        None => (spec.schedule.fixed_params(), 0, 0, None),
    };
    // also clamp here so the report carries the actually-used parameters
    let final_schedule = spec.schedule.build(&params, horizon).clamp_project();
    let (raw, post) = evaluate(&params, evaluations)?;

    let scored = metrics(
        post.as_ref().unwrap_or(&raw),
        &setup.pair,
        &setup.constraint,
        &setup.optima,
        post_processed,
    );
    let raw_p_fs = metrics(&raw, &setup.pair, &setup.constraint, &setup.optima, false).p_fs;

    let report = ExperimentReport {
        instance: setup.label.clone(),
        variant: spec.variant,
        schedule_family: spec.schedule.as_str(),
        horizon,
        schedule: final_schedule,
        penalty_a: setup.pair.penalty_coefficient(),
        a_prime: setup.repair.a_prime(),
        p_fs: scored.p_fs,
        raw_p_fs,
        c_ave: scored.c_ave,
        p_suc: scored.p_suc,
        residual: scored.c_ave.map(|c| residual_energy(c, setup.optima.c_opt)),
        c_opt: setup.optima.c_opt,
        evaluations,
        iterations,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutcome {
        report,
        raw,
        post,
        optimizer_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyGrid {
    pub a_min: f64,
    pub step: f64,
    pub a_max: f64,
}

impl PenaltyGrid {
    pub fn values(&self) -> Vec<f64> {
        assert!(self.step > 0.0 && self.a_max >= self.a_min && self.a_min > 0.0);
        let count = ((self.a_max - self.a_min) / self.step + 1e-9) as usize;
        (0..=count)
            .map(|k| self.a_min + k as f64 * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunePoint {
    pub a: f64,
    pub raw_p_fs: f64,
    pub c_ave: Option<f64>,
    pub admissible: bool,
}

/// Sweeps the penalty grid, runs the variant at each A, keeps the values
/// whose raw (pre-repair) feasible rate clears the 0.1 floor, and returns
/// the admissible A with the lowest average cost (smallest A on ties).
pub fn tune_penalty(
    spec: &VariantSpec,
    instance: &ProblemInstance,
    grid: &PenaltyGrid,
    dt_override: Option<f64>,
) -> Result<(f64, Vec<TunePoint>), HarnessError> {
    let mut points = Vec::new();
    let mut best: Option<(f64, f64)> = None; // (c_ave, a)
    for a in grid.values() {
        let setup = RunSetup::prepare(instance, a)?;
        let outcome = run_variant(spec, &setup, dt_override)?;
        let raw_p_fs = outcome.report.raw_p_fs;
        let c_ave = outcome.report.c_ave;
        let admissible = raw_p_fs >= FEASIBLE_RATE_THRESHOLD && c_ave.is_some();
        if admissible {
            let c = c_ave.expect("checked above");
            if best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, a));
            }
        }
        points.push(TunePoint {
            a,
            raw_p_fs,
            c_ave,
            admissible,
        });
    }
    match best {
        Some((_, a)) => Ok((a, points)),
        None => Err(HarnessError::NoAdmissiblePenalty),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStat {
    pub mean: f64,
    pub std: f64,
}

fn stat_of(values: &[f64]) -> EnsembleStat {
    if values.is_empty() {
        return EnsembleStat {
            mean: f64::NAN,
            std: f64::NAN,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    EnsembleStat {
        mean,
        std: var.sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: Variant,
    pub horizon: f64,
    pub schedule: String,
    pub mean_penalty_a: f64,
    pub p_fs: EnsembleStat,
    pub c_ave: EnsembleStat,
    pub p_suc: EnsembleStat,
    pub residual: EnsembleStat,
    pub instances: usize,
}

pub struct EnsembleResult {
    pub row: SummaryRow,
    pub outcomes: Vec<RunOutcome>,
}

/// Runs every spec over every prepared instance (instances in parallel)
/// and aggregates mean ± σ per spec. Row order follows the spec order.
pub fn ensemble_run(
    specs: &[VariantSpec],
    setups: &[RunSetup],
    dt_override: Option<f64>,
) -> Result<Vec<EnsembleResult>, HarnessError> {
    assert!(!setups.is_empty(), "ensemble needs at least one instance");
    specs
        .iter()
        .map(|spec| {
            let outcomes: Result<Vec<RunOutcome>, HarnessError> = setups
                .par_iter()
                .map(|setup| run_variant(spec, setup, dt_override))
                .collect();
            let outcomes = outcomes?;
            let collect = |f: &dyn Fn(&ExperimentReport) -> Option<f64>| -> Vec<f64> {
                outcomes.iter().filter_map(|o| f(&o.report)).collect()
            };
            let row = SummaryRow {
                variant: spec.variant,
                horizon: spec.horizon,
                schedule: spec.schedule.as_str(),
                mean_penalty_a: stat_of(&collect(&|r| Some(r.penalty_a))).mean,
                p_fs: stat_of(&collect(&|r| Some(r.p_fs))),
                c_ave: stat_of(&collect(&|r| r.c_ave)),
                p_suc: stat_of(&collect(&|r| Some(r.p_suc))),
                residual: stat_of(&collect(&|r| r.residual)),
                instances: setups.len(),
            };
            Ok(EnsembleResult { row, outcomes })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use pvqa_core::problems::gen_gpp;

    fn gpp_setup(seed: u64) -> RunSetup {
        let inst = ProblemInstance::Gpp(gen_gpp(8, 0.5, seed).unwrap());
        RunSetup::with_auto_penalty(&inst).unwrap()
    }

    fn exact_spec(variant: Variant) -> VariantSpec {
        if variant.variational() {
            VariantSpec {
                variant,
                schedule: ScheduleFamily::Linear,
                horizon: 1.0,
                optimizer: OptimizerSpec::Powell { max_iter: 3 },
                mode: Mode::Exact,
            }
        } else {
            VariantSpec::baseline(variant, 1.0)
        }
    }

    #[test]
    fn validation_rejects_inconsistent_specs() {
        let mut spec = exact_spec(Variant::PQa);
        spec.optimizer = OptimizerSpec::Powell { max_iter: 3 };
        assert!(spec.validate().is_err());

        let mut spec = exact_spec(Variant::Qa);
        spec.schedule = ScheduleFamily::Qaoa { p: 1 };
        assert!(spec.validate().is_err());

        let mut spec = exact_spec(Variant::PVqa);
        spec.mode = Mode::Shots {
            count: 100,
            top_k: Some(200),
            seed: 0,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn post_processed_variants_report_unit_feasible_rate() {
        let setup = gpp_setup(3);
        for variant in [Variant::PVqa, Variant::PQa] {
            let outcome = run_variant(&exact_spec(variant), &setup, None).unwrap();
            assert_eq!(outcome.report.p_fs, 1.0);
            let post = outcome
                .post
                .expect("post-processed run keeps the repaired distribution");
            for (b, &p) in post.mass().iter().enumerate() {
                if p > 0.0 {
                    assert!(setup.constraint.is_feasible(&SpinConfig::from_index(b, 8)));
                }
            }
        }
    }

    #[test]
    fn raw_variants_have_bounded_metrics() {
        let setup = gpp_setup(3);
        let outcome = run_variant(&exact_spec(Variant::Qa), &setup, None).unwrap();
        let r = &outcome.report;
        assert!(r.p_suc >= 0.0 && r.p_suc <= r.p_fs && r.p_fs <= 1.0);
        assert!(outcome.post.is_none());
    }

    #[test]
    fn pvqa_without_optimizer_reduces_to_pqa() {
        let setup = gpp_setup(5);
        let free = VariantSpec {
            variant: Variant::PVqa,
            schedule: ScheduleFamily::Linear,
            horizon: 1.0,
            optimizer: OptimizerSpec::None,
            mode: Mode::Exact,
        };
        let a = run_variant(&free, &setup, None).unwrap();
        let b = run_variant(&VariantSpec::baseline(Variant::PQa, 1.0), &setup, None).unwrap();
        assert_eq!(a.report.p_suc, b.report.p_suc);
        assert_eq!(a.report.c_ave, b.report.c_ave);
        assert_eq!(a.raw.mass(), b.raw.mass());
    }

    #[test]
    fn point_mass_metrics_hit_the_optimum() {
        let setup = gpp_setup(1);
        let target = setup.optima.configs[0];
        let mut mass = vec![0.0; 1 << 8];
        mass[target.index()] = 1.0;
        let d = Distribution::new(mass, None);
        let m = metrics(&d, &setup.pair, &setup.constraint, &setup.optima, true);
        assert_eq!(m.p_fs, 1.0);
        assert_eq!(m.c_ave, Some(setup.optima.c_opt));
        assert_eq!(m.p_suc, 1.0);
        assert_eq!(residual_energy(m.c_ave.unwrap(), setup.optima.c_opt), 0.0);
    }

    #[test]
    fn residual_matches_reported_definition() {
        assert_eq!(residual_energy(-21456.0, -21790.0), 334.0);
    }

    #[test]
    fn uniform_mass_splits_between_feasible_and_optimal_counts() {
        // path graph on 4 nodes: 6 balanced assignments, 2 optimal cuts
        let inst = ProblemInstance::Gpp(gen_gpp(4, 0.5, 0).unwrap());
        let setup = RunSetup::with_auto_penalty(&inst).unwrap();
        let feasible = SpinConfig::enumerate(4)
            .filter(|x| setup.constraint.is_feasible(x))
            .count();
        assert_eq!(feasible, 6);
        let d = Distribution::new(vec![1.0 / 16.0; 16], None);
        let m = metrics(&d, &setup.pair, &setup.constraint, &setup.optima, false);
        assert_eq!(m.p_fs, 6.0 / 16.0);
        assert_eq!(m.p_suc, setup.optima.configs.len() as f64 / 16.0);
    }

    #[test]
    fn tuning_fails_when_no_penalty_is_admissible() {
        // eight identical weights at the capacity: only the empty and the
        // eight one-hot selections are feasible, a raw rate of 9/256 < 0.1
        // that no penalty can change at a vanishing horizon
        let q = pvqa_core::problems::QkpInstance::new(
            8,
            [((0, 0), 5)].into_iter().collect(),
            vec![40; 8],
            40,
            0,
        );
        let inst = ProblemInstance::Qkp(q);
        let spec = VariantSpec::baseline(Variant::Qa, 1e-9);
        let grid = PenaltyGrid {
            a_min: 200.0,
            step: 200.0,
            a_max: 600.0,
        };
        match tune_penalty(&spec, &inst, &grid, None) {
            Err(HarnessError::NoAdmissiblePenalty) => {}
            other => panic!(
                "expected no admissible penalty, got {:?}",
                other.map(|(a, _)| a)
            ),
        }
    }

    #[test]
    fn raw_metrics_with_zero_feasible_mass_have_no_average() {
        let setup = gpp_setup(1);
        let infeasible = SpinConfig::from_bits(&[1, 1, 1, 1, 1, 0, 0, 0]).flipped(7);
        assert!(!setup.constraint.is_feasible(&infeasible));
        let mut mass = vec![0.0; 1 << 8];
        mass[infeasible.index()] = 1.0;
        let d = Distribution::new(mass, None);
        let m = metrics(&d, &setup.pair, &setup.constraint, &setup.optima, false);
        assert_eq!(m.p_fs, 0.0);
        assert_eq!(m.c_ave, None);
    }

    #[test]
    fn exact_runs_are_deterministic() {
        let setup = gpp_setup(7);
        let spec = exact_spec(Variant::PVqa);
        let a = run_variant(&spec, &setup, None).unwrap();
        let b = run_variant(&spec, &setup, None).unwrap();
        assert_eq!(a.report.schedule, b.report.schedule);
        assert_eq!(a.report.p_suc, b.report.p_suc);
        assert_eq!(a.report.evaluations, b.report.evaluations);
    }

    #[test]
    fn shot_mode_is_seed_deterministic_and_respects_top_k() {
        let setup = gpp_setup(2);
        let spec = VariantSpec {
            variant: Variant::PQa,
            schedule: ScheduleFamily::Linear,
            horizon: 1.0,
            optimizer: OptimizerSpec::None,
            mode: Mode::Shots {
                count: 100,
                top_k: Some(50),
                seed: 11,
            },
        };
        let mut spec = spec;
        spec.validate().unwrap();
        let a = run_variant(&spec, &setup, None).unwrap();
        let b = run_variant(&spec, &setup, None).unwrap();
        assert_eq!(
            a.post.as_ref().unwrap().mass(),
            b.post.as_ref().unwrap().mass()
        );
        assert_eq!(a.post.as_ref().unwrap().shots(), Some(50));

        spec.mode = Mode::Shots {
            count: 100,
            top_k: Some(50),
            seed: 12,
        };
        let c = run_variant(&spec, &setup, None).unwrap();
        assert_ne!(a.raw.mass(), c.raw.mass());
    }

    #[test]
    fn tuning_returns_the_cheapest_admissible_penalty() {
        let inst = ProblemInstance::Gpp(gen_gpp(6, 0.5, 4).unwrap());
        let spec = VariantSpec::baseline(Variant::PQa, 1.0);
        let grid = PenaltyGrid {
            a_min: 1.0,
            step: 1.0,
            a_max: 5.0,
        };
        let (a_star, points) = tune_penalty(&spec, &inst, &grid, None).unwrap();
        assert_eq!(points.len(), 5);
        assert!(points.iter().any(|p| p.admissible));
        let best = points
            .iter()
            .filter(|p| p.admissible)
            .min_by(|x, y| {
                x.c_ave
                    .partial_cmp(&y.c_ave)
                    .unwrap()
                    .then(x.a.partial_cmp(&y.a).unwrap())
            })
            .unwrap();
        assert_eq!(a_star, best.a);
        // determinism of the whole tuning loop
        let (a_again, _) = tune_penalty(&spec, &inst, &grid, None).unwrap();
        assert_eq!(a_star, a_again);
    }

    #[test]
    fn ensemble_of_identical_instances_has_zero_variance() {
        let setups = vec![gpp_setup(9), gpp_setup(9)];
        let specs = vec![VariantSpec::baseline(Variant::PQa, 0.5)];
        let results = ensemble_run(&specs, &setups, None).unwrap();
        assert_eq!(results.len(), 1);
        let row = &results[0].row;
        assert_eq!(row.instances, 2);
        assert_eq!(row.p_suc.std, 0.0);
        assert_eq!(row.residual.std, 0.0);
    }

    #[test]
    fn single_instance_summary_equals_its_report() {
        let setups = vec![gpp_setup(10)];
        let specs = vec![VariantSpec::baseline(Variant::Qa, 0.5)];
        let results = ensemble_run(&specs, &setups, None).unwrap();
        let row = &results[0].row;
        let report = &results[0].outcomes[0].report;
        assert_eq!(row.p_suc.mean, report.p_suc);
        assert_eq!(row.p_suc.std, 0.0);
        assert_eq!(row.c_ave.mean, report.c_ave.unwrap());
    }
}
