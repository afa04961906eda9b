//! State-vector dynamics under H(s) = s·H_Ising + (1-s)·H_q.
//!
//! H_Ising is diagonal in the computational basis (its 2^n energies are
//! precomputed once per model and shared with the oracles), while the
//! transverse-field driver H_q = -Σ_i σ_i^x couples each basis state to its
//! n single-bit flips. The Schrödinger equation
//!
//! ```text
//! dψ/dt = -i [ s(t)·H_Ising + (1 - s(t))·H_q ] ψ,     ħ = 1
//! ```
//!
//! is integrated with classical RK4, splitting steps at schedule
//! discontinuities so piecewise-constant paths are handled without loss of
//! order. Bang-bang (QAOA) paths also have an exact propagator that
//! alternates diagonal phases with the closed-form single-spin mixing
//! e^{+iΔσ^x} = cos Δ·I + i sin Δ·σ^x.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{IsingModel, SpinConfig, MAX_SPINS};
use crate::schedule::Schedule;

/// Hard failure threshold on |‖ψ(T)‖² - 1| after an integration.
pub const NORM_DRIFT_LIMIT: f64 = 1e-4;

/// Expected drift at the default step size; used by callers as a budget.
pub const NORM_DRIFT_BUDGET: f64 = 1e-6;

/// Step size used when none is requested: min(1e-3, T/1000).
pub fn default_dt(horizon: f64) -> f64 {
    (1e-3_f64).min(horizon / 1000.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    SpinCountOutOfRange {
        n: usize,
    },
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    InvalidTimeStep {
        dt: f64,
    },
    /// Norm drift exceeded [`NORM_DRIFT_LIMIT`].
    IntegratorUnstable {
        drift: f64,
    },
    InvalidSchedule(alloc::string::String),
    NotBangBang,
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::SpinCountOutOfRange { n } => {
                write!(f, "spin count {n} outside 1..={MAX_SPINS}")
            }
            DynamicsError::DimensionMismatch { expected, got } => {
                write!(
                    f,
                    "dimension mismatch: model has {expected} spins, state has {got}"
                )
            }
            DynamicsError::InvalidTimeStep { dt } => write!(f, "time step {dt} must be positive"),
            DynamicsError::IntegratorUnstable { drift } => {
                write!(f, "integrator unstable, reduce dt (norm drift {drift:e})")
            }
            DynamicsError::InvalidSchedule(msg) => write!(f, "invalid schedule: {msg}"),
            DynamicsError::NotBangBang => write!(f, "exact propagation requires a QAOA schedule"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DynamicsError {}

/// 2^n complex amplitudes; index b is the basis configuration with bits of
/// b read as x_i (see [`SpinConfig`]).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Uniform superposition 2^{-n/2}·Σ|b⟩: the ground state of H_q.
    pub fn uniform(n: usize) -> Result<Self, DynamicsError> {
        if n == 0 || n > MAX_SPINS {
            return Err(DynamicsError::SpinCountOutOfRange { n });
        }
        let dim = 1usize << n;
        let amp = Complex64::new(1.0 / libm::sqrt(dim as f64), 0.0);
        Ok(StateVector {
            n,
            amps: vec![amp; dim],
        })
    }

    /// Basis state |b⟩.
    pub fn basis(n: usize, index: usize) -> Result<Self, DynamicsError> {
        if n == 0 || n > MAX_SPINS {
            return Err(DynamicsError::SpinCountOutOfRange { n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), 1usize << n);
        StateVector { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Born-rule masses |⟨b|ψ⟩|², renormalized by the exact norm so
    /// integrator drift never leaks into probabilities.
    pub fn measure(&self) -> Distribution {
        let total = self.norm_sqr();
        let mass = self.amps.iter().map(|a| a.norm_sqr() / total).collect();
        Distribution { mass, shots: None }
    }
}

/// Probability mass over all 2^n configurations, indexed by basis index.
///
/// `shots` is set on empirical distributions drawn by [`sample_shots`]; the
/// masses are then multiples of 1/shots.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    mass: Vec<f64>,
    shots: Option<u64>,
}

impl Distribution {
    pub fn new(mass: Vec<f64>, shots: Option<u64>) -> Self {
        assert!(
            mass.len().is_power_of_two(),
            "mass vector must cover all 2^n configs"
        );
        debug_assert!(mass.iter().all(|&p| p >= 0.0));
        debug_assert!((mass.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Distribution { mass, shots }
    }

    pub fn n(&self) -> usize {
        self.mass.len().trailing_zeros() as usize
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass_of(&self, x: &SpinConfig) -> f64 {
        self.mass[x.index()]
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Σ_b p(b)·table[b]
    pub fn expectation(&self, table: &[f64]) -> f64 {
        assert_eq!(table.len(), self.mass.len());
        self.mass.iter().zip(table).map(|(p, v)| p * v).sum()
    }

    /// Total variation distance ½·Σ|p - q|.
    pub fn tv_distance(&self, other: &Distribution) -> f64 {
        assert_eq!(self.mass.len(), other.mass.len());
        0.5 * self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    }
}

/// Empirical distribution of `shots` independent draws, deterministic for a
/// fixed seed.
pub fn sample_shots(d: &Distribution, shots: u64, seed: u64) -> Distribution {
    assert!(shots >= 1);
    let mut cdf: Vec<f64> = Vec::with_capacity(d.mass.len());
    let mut acc = 0.0;
    for &p in &d.mass {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; d.mass.len()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(d.mass.len() - 1);
        counts[idx] += 1;
    }
    let mass = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    Distribution {
        mass,
        shots: Some(shots),
    }
}

/// Precomputed action of one Ising model: the 2^n diagonal energy table
/// plus the bit-flip structure of the driver.
#[derive(Debug, Clone)]
pub struct Evolver {
    n: usize,
    energies: Vec<f64>,
}

impl Evolver {
    pub fn new(model: &IsingModel) -> Result<Self, DynamicsError> {
        let n = model.n();
        if n == 0 || n > MAX_SPINS {
            return Err(DynamicsError::SpinCountOutOfRange { n });
        }
        Ok(Evolver {
            n,
            energies: model.energy_table(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// ⟨b|H_Ising|b⟩ for every basis index b, offset included.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// [s·H_Ising + (1-s)·H_q]·ψ
    pub fn apply(&self, s: f64, psi: &StateVector) -> Result<StateVector, DynamicsError> {
        if psi.n != self.n {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.n,
                got: psi.n,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); psi.amps.len()];
        self.apply_into(s, &psi.amps, &mut out);
        Ok(StateVector {
            n: self.n,
            amps: out,
        })
    }

    /// out = H(s)·psi. The transverse part is applied one spin at a time as
    /// paired half-block sweeps, which keeps every pass contiguous.
    fn apply_into(&self, s: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let c = 1.0 - s;
        for ((o, p), &e) in out.iter_mut().zip(psi).zip(&self.energies) {
            let se = s * e;
            o.re = se * p.re;
            o.im = se * p.im;
        }
        for i in 0..self.n {
            let stride = 1usize << i;
            let block = stride << 1;
            for (ob, pb) in out.chunks_exact_mut(block).zip(psi.chunks_exact(block)) {
                let (o_lo, o_hi) = ob.split_at_mut(stride);
                let (p_lo, p_hi) = pb.split_at(stride);
                for (o, p) in o_lo.iter_mut().zip(p_hi) {
                    o.re -= c * p.re;
                    o.im -= c * p.im;
                }
                for (o, p) in o_hi.iter_mut().zip(p_lo) {
                    o.re -= c * p.re;
                    o.im -= c * p.im;
                }
            }
        }
    }

    /// RK4 integration of the Schrödinger equation from the uniform initial
    /// state to the end of the schedule's evolution window.
    ///
    /// Steps never straddle a schedule discontinuity: each smooth segment
    /// is integrated with steps of `dt`, shrinking the last step to land on
    /// the segment boundary exactly.
    pub fn evolve_rk4(&self, sch: &Schedule, dt: f64) -> Result<StateVector, DynamicsError> {
        self.evolve_rk4_from(&StateVector::uniform(self.n)?, sch, dt)
    }

    /// Same integration from an arbitrary initial state.
    pub fn evolve_rk4_from(
        &self,
        psi0: &StateVector,
        sch: &Schedule,
        dt: f64,
    ) -> Result<StateVector, DynamicsError> {
        if !(dt > 0.0) {
            return Err(DynamicsError::InvalidTimeStep { dt });
        }
        if psi0.n != self.n {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.n,
                got: psi0.n,
            });
        }
        let violations = sch.validate();
        if !violations.is_empty() {
            return Err(DynamicsError::InvalidSchedule(alloc::format!(
                "{:?}", violations
            )));
        }

        let norm_in = psi0.norm_sqr();
        let mut psi = psi0.clone();
        let dim = psi.amps.len();
        let mut k1 = vec![Complex64::new(0.0, 0.0); dim];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut y = k1.clone();

        let boundaries = sch.segment_boundaries();
        for w in boundaries.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut t = a;
            // relative tolerance so accumulated rounding cannot spawn a
            // zero-length trailing step
            let eps = dt * 1e-9;
            while b - t > eps {
                let h = dt.min(b - t);
                let s0 = segment_value(sch, a, b, t);
                let s_mid = segment_value(sch, a, b, t + 0.5 * h);
                let s1 = segment_value(sch, a, b, (t + h).min(b));

                self.apply_into(s0, &psi.amps, &mut k1);
                axpy(&mut y, &psi.amps, Complex64::new(0.0, -0.5 * h), &k1);
                self.apply_into(s_mid, &y, &mut k2);
                axpy(&mut y, &psi.amps, Complex64::new(0.0, -0.5 * h), &k2);
                self.apply_into(s_mid, &y, &mut k3);
                axpy(&mut y, &psi.amps, Complex64::new(0.0, -h), &k3);
                self.apply_into(s1, &y, &mut k4);

                let w6 = Complex64::new(0.0, -h / 6.0);
                for ((((p, a1), a2), a3), a4) in
                    psi.amps.iter_mut().zip(&k1).zip(&k2).zip(&k3).zip(&k4)
                {
                    let sum = a1 + 2.0 * (a2 + a3) + a4;
                    *p += w6 * sum;
                }
                t += h;
            }
        }

        let drift = (psi.norm_sqr() - norm_in).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(DynamicsError::IntegratorUnstable { drift });
        }
        Ok(psi)
    }

    /// Exact bang-bang propagation of a QAOA schedule: alternating diagonal
    /// phases e^{-i·E(b)·Δ} and per-spin mixings e^{+iΔσ^x}, identity on
    /// the frozen tail [s_2p, T].
    pub fn evolve_qaoa_exact(&self, sch: &Schedule) -> Result<StateVector, DynamicsError> {
        let breakpoints = match sch {
            Schedule::Qaoa { breakpoints, .. } => breakpoints,
            _ => return Err(DynamicsError::NotBangBang),
        };
        let violations = sch.validate();
        if !violations.is_empty() {
            return Err(DynamicsError::InvalidSchedule(alloc::format!(
                "{:?}", violations
            )));
        }

        let mut psi = StateVector::uniform(self.n)?;
        let mut prev = 0.0;
        for (k, &bp) in breakpoints.iter().enumerate() {
            let duration = bp - prev;
            if k % 2 == 0 {
                self.ising_phase(duration, &mut psi.amps);
            } else {
                self.transverse_mix(duration, &mut psi.amps);
            }
            prev = bp;
        }
        Ok(psi)
    }

    /// ψ[b] ← e^{-i·E(b)·Δ}·ψ[b]
    fn ising_phase(&self, delta: f64, amps: &mut [Complex64]) {
        for (a, &e) in amps.iter_mut().zip(&self.energies) {
            let phase = Complex64::new(libm::cos(e * delta), -libm::sin(e * delta));
            *a *= phase;
        }
    }

    /// Apply e^{+iΔσ^x} = cos Δ·I + i sin Δ·σ^x to every spin.
    fn transverse_mix(&self, delta: f64, amps: &mut [Complex64]) {
        let c = libm::cos(delta);
        let s = libm::sin(delta);
        for i in 0..self.n {
            let stride = 1usize << i;
            let block = stride << 1;
            for ab in amps.chunks_exact_mut(block) {
                let (lo, hi) = ab.split_at_mut(stride);
                for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (a, b) = (*l, *h);
                    // (a, b) -> (c·a + i·s·b, i·s·a + c·b)
                    *l = Complex64::new(c * a.re - s * b.im, c * a.im + s * b.re);
                    *h = Complex64::new(c * b.re - s * a.im, c * b.im + s * a.re);
                }
            }
        }
    }
}

/// Schedule value seen by the integrator inside segment [a, b]: families
/// that are constant per segment are sampled at the segment midpoint so the
/// closing RK4 stage at t = b never reads the next segment's value.
fn segment_value(sch: &Schedule, a: f64, b: f64, t: f64) -> f64 {
    let t_eval = match sch {
        Schedule::Continuous { .. } | Schedule::Qaoa { .. } => 0.5 * (a + b),
        _ => t,
    };
    sch.value_at(t_eval.clamp(0.0, sch.horizon()))
        .expect("segment times lie inside the horizon")
}

/// y = base + w·k
fn axpy(y: &mut [Complex64], base: &[Complex64], w: Complex64, k: &[Complex64]) {
    for ((y, b), k) in y.iter_mut().zip(base).zip(k) {
        *y = b + w * k;
    }
}
