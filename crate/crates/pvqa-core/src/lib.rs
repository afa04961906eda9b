//! Core algorithms for post-processing variational quantum annealing:
//! QUBO/Ising models, GPP and QKP encodings, annealing schedules,
//! state-vector dynamics, greedy feasibility repair, and the classical
//! outer-loop optimizers.
//!
//! Everything here is pure computation over owned values; IO, file formats,
//! and the experiment harness live in the companion `pvqa-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod dynamics;
pub mod model;
pub mod optimize;
pub mod problems;
pub mod repair;
pub mod schedule;

pub use dynamics::{default_dt, sample_shots, Distribution, Evolver, StateVector};
pub use model::{IsingModel, Qubo, QuboPair, SpinConfig, MAX_SPINS};
pub use problems::{
    brute_force_optima, constraint_of, derive_qkp, gen_gpp, gen_qkp_base, gpp_qubo,
    parse_qkp_benchmark, qkp_qubo, serialize_qkp_benchmark, synthetic_qkp, ConstraintKind,
    ConstraintSpec, GppInstance, Optima, ProblemInstance, QkpInstance,
};
pub use repair::{default_a_prime, delta_q_bound, linear_penalty, RepairModel};
pub use schedule::Schedule;
