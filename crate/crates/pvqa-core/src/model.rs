//! QUBO and Ising Hamiltonians with an objective/constraint split.
//!
//! A QUBO is a quadratic polynomial over binary variables x_i ∈ {0, 1}:
//!
//! ```text
//! Q(x) = Σ_{(i,j)} q_ij x_i x_j + Σ_i q_ii x_i + Q_0
//! ```
//!
//! The equivalent Ising model over spins σ_i ∈ {-1, +1} follows from the
//! substitution x_i = (σ_i + 1)/2:
//!
//! ```text
//! H(σ) = Σ_{(i,j)} J_ij σ_i σ_j + Σ_i h_i σ_i + H_0
//! ```
//!
//! Both energies agree exactly on corresponding configurations. Coefficients
//! are kept in sparse ordered maps; dense energy tables over all 2^n
//! configurations are derived on demand for the dynamics and the exact
//! oracles.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

/// Hard cap on the spin count for dense 2^n enumeration and state vectors.
pub const MAX_SPINS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// Configuration length does not match the model's variable count.
    DimensionMismatch { expected: usize, got: usize },
    /// All couplings and fields are zero, so no rescaling factor exists.
    DegenerateModel,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::DimensionMismatch { expected, got } => {
                write!(
                    f,
                    "dimension mismatch: model has {expected} variables, config has {got}"
                )
            }
            ModelError::DegenerateModel => {
                write!(f, "degenerate model: all couplings and fields are zero")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// A binary configuration of n ≤ 24 variables, packed as a bitmask.
///
/// Bit i of the mask is x_i; the corresponding spin is σ_i = 2 x_i - 1.
/// The basis index of the configuration is Σ_i x_i 2^i, which is also how
/// state-vector amplitudes and distribution masses are indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinConfig {
    mask: u32,
    n: u8,
}

impl SpinConfig {
    /// Configuration with basis index `index` over `n` variables.
    pub fn from_index(index: usize, n: usize) -> Self {
        assert!(n <= MAX_SPINS, "spin count {n} exceeds {MAX_SPINS}");
        assert!(
            index < (1usize << n),
            "index {index} out of range for {n} variables"
        );
        SpinConfig {
            mask: index as u32,
            n: n as u8,
        }
    }

    /// Configuration from an explicit 0/1 slice, bits[i] = x_i.
    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(bits.len() <= MAX_SPINS);
        let mut mask = 0u32;
        for (i, &b) in bits.iter().enumerate() {
            assert!(b <= 1, "bit {i} is {b}, expected 0 or 1");
            mask |= u32::from(b) << i;
        }
        SpinConfig {
            mask,
            n: bits.len() as u8,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_index(0, n)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn index(&self) -> usize {
        self.mask as usize
    }

    /// x_i ∈ {0, 1}
    pub fn bit(&self, i: usize) -> u8 {
        debug_assert!(i < self.n());
        ((self.mask >> i) & 1) as u8
    }

    /// σ_i = 2 x_i - 1 ∈ {-1, +1}
    pub fn spin(&self, i: usize) -> i8 {
        2 * self.bit(i) as i8 - 1
    }

    /// The configuration with variable i flipped.
    pub fn flipped(&self, i: usize) -> Self {
        debug_assert!(i < self.n());
        SpinConfig {
            mask: self.mask ^ (1 << i),
            n: self.n,
        }
    }

    /// Number of variables set to 1.
    pub fn count_ones(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.n()).map(|i| self.bit(i)).collect()
    }

    /// All 2^n configurations in basis-index order.
    pub fn enumerate(n: usize) -> impl Iterator<Item = SpinConfig> {
        assert!(n <= MAX_SPINS);
        (0..1usize << n).map(move |b| SpinConfig::from_index(b, n))
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

/// Sparse quadratic polynomial over binary variables.
///
/// Quadratic keys are unordered pairs stored as (i, j) with i < j; linear
/// terms are the diagonal coefficients q_ii. Exact zeros are pruned so the
/// stored support is canonical.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qubo {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl Qubo {
    pub fn new(n: usize) -> Self {
        Qubo {
            n,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, q0: f64) {
        self.offset = q0;
    }

    pub fn add_offset(&mut self, dq: f64) {
        self.offset += dq;
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn linear_coeff(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic_coeff(&self, i: usize, j: usize) -> f64 {
        self.quadratic.get(&pair_key(i, j)).copied().unwrap_or(0.0)
    }

    pub fn add_linear(&mut self, i: usize, dq: f64) {
        assert!(i < self.n, "variable {i} out of range for n = {}", self.n);
        let v = self.linear.entry(i).or_insert(0.0);
        *v += dq;
        if *v == 0.0 {
            self.linear.remove(&i);
        }
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, dq: f64) {
        assert!(
            i < self.n && j < self.n,
            "pair ({i},{j}) out of range for n = {}",
            self.n
        );
        let key = pair_key(i, j);
        let v = self.quadratic.entry(key).or_insert(0.0);
        *v += dq;
        if *v == 0.0 {
            self.quadratic.remove(&key);
        }
    }

    /// self += factor · other (term-wise; offsets included).
    pub fn axpy(&mut self, factor: f64, other: &Qubo) {
        assert_eq!(self.n, other.n, "cannot combine QUBOs of different sizes");
        for (&i, &q) in &other.linear {
            self.add_linear(i, factor * q);
        }
        for (&(i, j), &q) in &other.quadratic {
            self.add_quadratic(i, j, factor * q);
        }
        self.offset += factor * other.offset;
    }

    /// Q(x) = Σ q_ij x_i x_j + Σ q_ii x_i + Q_0
    pub fn eval(&self, x: &SpinConfig) -> Result<f64, ModelError> {
        if x.n() != self.n {
            return Err(ModelError::DimensionMismatch {
                expected: self.n,
                got: x.n(),
            });
        }
        let mut e = self.offset;
        for (&i, &q) in &self.linear {
            if x.bit(i) == 1 {
                e += q;
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            if x.bit(i) == 1 && x.bit(j) == 1 {
                e += q;
            }
        }
        Ok(e)
    }

    /// Dense table of Q over all 2^n configurations, indexed by basis index.
    pub fn energy_table(&self) -> Vec<f64> {
        assert!(
            self.n <= MAX_SPINS,
            "energy table over {} spins exceeds {MAX_SPINS}",
            self.n
        );
        SpinConfig::enumerate(self.n)
            .map(|x| {
                self.eval(&x)
                    .expect("enumerated config has matching dimension")
            })
            .collect()
    }

    /// Ising model with identical energies under x_i = (σ_i + 1)/2.
    ///
    /// Substituting x_i x_j = (σ_i σ_j + σ_i + σ_j + 1)/4 and
    /// x_i = (σ_i + 1)/2 and collecting terms:
    /// J_ij = q_ij/4, h picks up q_ij/4 per incident pair plus q_ii/2, and
    /// all constant parts fold into H_0.
    pub fn to_ising(&self) -> IsingModel {
        let mut ising = IsingModel::new(self.n);
        for (&(i, j), &q) in &self.quadratic {
            ising.add_coupling(i, j, q / 4.0);
            ising.add_field(i, q / 4.0);
            ising.add_field(j, q / 4.0);
            ising.add_offset(q / 4.0);
        }
        for (&i, &q) in &self.linear {
            ising.add_field(i, q / 2.0);
            ising.add_offset(q / 2.0);
        }
        ising.add_offset(self.offset);
        ising
    }
}

fn pair_key(i: usize, j: usize) -> (usize, usize) {
    assert!(
        i != j,
        "quadratic terms require i != j (diagonal terms are linear)"
    );
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Objective/constraint QUBO pair with the full Hamiltonian
/// Q = Q_obj + A · Q_cst.
///
/// The constraint part is stored with unit coefficient; the penalty weight A
/// is kept separate so it can be tuned without rebuilding the polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboPair {
    objective: Qubo,
    constraint: Qubo,
    penalty_coefficient: f64,
}

impl QuboPair {
    pub fn new(objective: Qubo, constraint: Qubo, penalty_coefficient: f64) -> Self {
        assert_eq!(
            objective.n(),
            constraint.n(),
            "objective and constraint sizes differ"
        );
        assert!(
            penalty_coefficient > 0.0,
            "penalty coefficient must be positive"
        );
        QuboPair {
            objective,
            constraint,
            penalty_coefficient,
        }
    }

    pub fn n(&self) -> usize {
        self.objective.n()
    }

    pub fn objective(&self) -> &Qubo {
        &self.objective
    }

    pub fn constraint(&self) -> &Qubo {
        &self.constraint
    }

    pub fn penalty_coefficient(&self) -> f64 {
        self.penalty_coefficient
    }

    pub fn with_penalty(&self, penalty_coefficient: f64) -> Self {
        QuboPair::new(
            self.objective.clone(),
            self.constraint.clone(),
            penalty_coefficient,
        )
    }

    /// The annealed Hamiltonian Q_obj + A · Q_cst as a single QUBO.
    pub fn combined(&self) -> Qubo {
        let mut q = self.objective.clone();
        q.axpy(self.penalty_coefficient, &self.constraint);
        q
    }

    /// (C, C') at x: the objective cost and the full penalized cost.
    pub fn eval_cost(&self, x: &SpinConfig) -> Result<(f64, f64), ModelError> {
        let c = self.objective.eval(x)?;
        let cst = self.constraint.eval(x)?;
        Ok((c, c + self.penalty_coefficient * cst))
    }
}

/// Sparse Ising Hamiltonian H(σ) = Σ J_ij σ_i σ_j + Σ h_i σ_i + H_0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    n: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: BTreeMap<usize, f64>,
    offset: f64,
}

impl IsingModel {
    pub fn new(n: usize) -> Self {
        IsingModel {
            n,
            couplings: BTreeMap::new(),
            fields: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn fields(&self) -> &BTreeMap<usize, f64> {
        &self.fields
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, dj: f64) {
        assert!(
            i < self.n && j < self.n,
            "pair ({i},{j}) out of range for n = {}",
            self.n
        );
        let key = pair_key(i, j);
        let v = self.couplings.entry(key).or_insert(0.0);
        *v += dj;
        if *v == 0.0 {
            self.couplings.remove(&key);
        }
    }

    pub fn add_field(&mut self, i: usize, dh: f64) {
        assert!(i < self.n, "variable {i} out of range for n = {}", self.n);
        let v = self.fields.entry(i).or_insert(0.0);
        *v += dh;
        if *v == 0.0 {
            self.fields.remove(&i);
        }
    }

    pub fn add_offset(&mut self, dh: f64) {
        self.offset += dh;
    }

    /// H(σ) with σ_i = 2 x_i - 1 read off the binary configuration.
    pub fn eval(&self, x: &SpinConfig) -> Result<f64, ModelError> {
        if x.n() != self.n {
            return Err(ModelError::DimensionMismatch {
                expected: self.n,
                got: x.n(),
            });
        }
        let mut e = self.offset;
        for (&i, &h) in &self.fields {
            e += h * f64::from(x.spin(i));
        }
        for (&(i, j), &j_ij) in &self.couplings {
            e += j_ij * f64::from(x.spin(i)) * f64::from(x.spin(j));
        }
        Ok(e)
    }

    /// Dense table of H over all 2^n configurations, indexed by basis index.
    ///
    /// This is the diagonal of the Ising Hamiltonian in the computational
    /// basis; the dynamics, the repair checks, and the exact oracles all
    /// share this table.
    pub fn energy_table(&self) -> Vec<f64> {
        assert!(
            self.n <= MAX_SPINS,
            "energy table over {} spins exceeds {MAX_SPINS}",
            self.n
        );
        SpinConfig::enumerate(self.n)
            .map(|x| {
                self.eval(&x)
                    .expect("enumerated config has matching dimension")
            })
            .collect()
    }

    /// Largest magnitude over all couplings and fields (offset excluded).
    pub fn max_coefficient(&self) -> f64 {
        let j = self.couplings.values().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = self.fields.values().fold(0.0f64, |m, v| m.max(v.abs()));
        j.max(h)
    }

    /// Uniformly divide J, h, and H_0 so that max(|J_ij|, |h_i|) = 1.
    ///
    /// Returns the rescaled model and the divisor. Fails on an all-zero
    /// Hamiltonian. Ground states are unchanged because the scaling is a
    /// positive constant.
    pub fn rescaled(&self) -> Result<(IsingModel, f64), ModelError> {
        let scale = self.max_coefficient();
        if scale == 0.0 {
            return Err(ModelError::DegenerateModel);
        }
        let mut m = IsingModel::new(self.n);
        for (&(i, j), &v) in &self.couplings {
            m.add_coupling(i, j, v / scale);
        }
        for (&i, &v) in &self.fields {
            m.add_field(i, v / scale);
        }
        m.offset = self.offset / scale;
        Ok((m, scale))
    }
}

#[cfg(feature = "serde")]
mod canonical {
    //! Canonical serialized form: coefficient triples sorted by index,
    //! pairs stored with i < j.

    use super::{IsingModel, Qubo};
    use alloc::vec::Vec;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    struct CanonicalQuadratic {
        n: usize,
        linear: Vec<(usize, f64)>,
        quadratic: Vec<(usize, usize, f64)>,
        offset: f64,
    }

    impl Serialize for Qubo {
        fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            CanonicalQuadratic {
                n: self.n,
                linear: self.linear.iter().map(|(&i, &v)| (i, v)).collect(),
                quadratic: self
                    .quadratic
                    .iter()
                    .map(|(&(i, j), &v)| (i, j, v))
                    .collect(),
                offset: self.offset,
            }
            .serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for Qubo {
        fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let c = CanonicalQuadratic::deserialize(d)?;
            let mut q = Qubo::new(c.n);
            for (i, v) in c.linear {
                q.add_linear(i, v);
            }
            for (i, j, v) in c.quadratic {
                q.add_quadratic(i, j, v);
            }
            q.set_offset(c.offset);
            Ok(q)
        }
    }

    impl Serialize for IsingModel {
        fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            CanonicalQuadratic {
                n: self.n,
                linear: self.fields.iter().map(|(&i, &v)| (i, v)).collect(),
                quadratic: self
                    .couplings
                    .iter()
                    .map(|(&(i, j), &v)| (i, j, v))
                    .collect(),
                offset: self.offset,
            }
            .serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for IsingModel {
        fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let c = CanonicalQuadratic::deserialize(d)?;
            let mut m = IsingModel::new(c.n);
            for (i, v) in c.linear {
                m.add_field(i, v);
            }
            for (i, j, v) in c.quadratic {
                m.add_coupling(i, j, v);
            }
            m.add_offset(c.offset);
            Ok(m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_linear_term_to_ising() {
        // Q = x_0  ->  h_0 = 1/2, H_0 = 1/2, no couplings
        let mut q = Qubo::new(1);
        q.add_linear(0, 1.0);
        let m = q.to_ising();
        assert_eq!(m.fields().get(&0), Some(&0.5));
        assert_eq!(m.offset(), 0.5);
        assert!(m.couplings().is_empty());
    }

    #[test]
    fn single_quadratic_term_to_ising() {
        // Q = x_0 x_1  ->  J_01 = 1/4, h_0 = h_1 = 1/4, H_0 = 1/4
        let mut q = Qubo::new(2);
        q.add_quadratic(0, 1, 1.0);
        let m = q.to_ising();
        assert_eq!(m.couplings().get(&(0, 1)), Some(&0.25));
        assert_eq!(m.fields().get(&0), Some(&0.25));
        assert_eq!(m.fields().get(&1), Some(&0.25));
        assert_eq!(m.offset(), 0.25);
    }

    #[test]
    fn rescale_divides_uniformly() {
        let mut m = IsingModel::new(2);
        m.add_coupling(0, 1, 4.0);
        m.add_field(0, 2.0);
        m.add_offset(8.0);
        let (r, scale) = m.rescaled().unwrap();
        assert_eq!(scale, 4.0);
        assert_eq!(r.couplings().get(&(0, 1)), Some(&1.0));
        assert_eq!(r.fields().get(&0), Some(&0.5));
        assert_eq!(r.offset(), 2.0);
    }

    #[test]
    fn rescale_of_normalized_model_is_identity() {
        let mut m = IsingModel::new(2);
        m.add_coupling(0, 1, 1.0);
        m.add_field(1, -0.25);
        let (r, scale) = m.rescaled().unwrap();
        assert_eq!(scale, 1.0);
        assert_eq!(r, m);
    }

    #[test]
    fn rescale_rejects_degenerate_model() {
        let mut m = IsingModel::new(3);
        m.add_offset(5.0);
        assert_eq!(m.rescaled().unwrap_err(), ModelError::DegenerateModel);
    }

    #[test]
    fn eval_all_zeros_is_offset() {
        let mut q = Qubo::new(3);
        q.add_quadratic(0, 2, -3.0);
        q.add_linear(1, 7.0);
        q.set_offset(2.5);
        assert_eq!(q.eval(&SpinConfig::zeros(3)).unwrap(), 2.5);
    }

    #[test]
    fn eval_direct_substitution() {
        // Q = x_0 x_1 + 2 x_0 + 1 at (1,1) -> 4
        let mut q = Qubo::new(2);
        q.add_quadratic(0, 1, 1.0);
        q.add_linear(0, 2.0);
        q.set_offset(1.0);
        assert_eq!(q.eval(&SpinConfig::from_bits(&[1, 1])).unwrap(), 4.0);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let q = Qubo::new(3);
        let err = q.eval(&SpinConfig::zeros(2)).unwrap_err();
        assert_eq!(
            err,
            ModelError::DimensionMismatch {
                expected: 3,
                got: 2
            }
        );
    }

    #[test]
    fn eval_cost_splits_objective_and_penalty() {
        let mut obj = Qubo::new(2);
        obj.add_linear(0, 1.0);
        let mut cst = Qubo::new(2);
        cst.add_linear(1, 1.0);
        let pair = QuboPair::new(obj, cst, 3.0);
        let (c, c_full) = pair.eval_cost(&SpinConfig::from_bits(&[1, 1])).unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(c_full, 4.0);
    }

    #[test]
    fn combined_matches_eval_cost() {
        let mut obj = Qubo::new(2);
        obj.add_quadratic(0, 1, -2.0);
        obj.set_offset(1.0);
        let mut cst = Qubo::new(2);
        cst.add_linear(0, 1.0);
        cst.add_quadratic(0, 1, 2.0);
        let pair = QuboPair::new(obj, cst, 2.5);
        let combined = pair.combined();
        for x in SpinConfig::enumerate(2) {
            let (_, c_full) = pair.eval_cost(&x).unwrap();
            assert_eq!(combined.eval(&x).unwrap(), c_full);
        }
    }

    #[test]
    fn spin_config_round_trip() {
        let x = SpinConfig::from_bits(&[1, 0, 1, 1]);
        assert_eq!(x.index(), 0b1101);
        assert_eq!(x.spin(0), 1);
        assert_eq!(x.spin(1), -1);
        assert_eq!(x.count_ones(), 3);
        assert_eq!(x.flipped(1).bits(), &[1, 1, 1, 1]);
        assert_eq!(alloc::format!("{x}"), "1011");
    }
}
