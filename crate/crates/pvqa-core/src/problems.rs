//! Graph partitioning (GPP) and quadratic knapsack (QKP) instances, their
//! QUBO encodings, feasibility predicates, and an exact brute-force oracle.
//!
//! GPP splits an even node set into two equal halves minimizing the cut:
//!
//! ```text
//! Q_obj = -2 Σ_{(i,j)∈E} x_i x_j + Σ_i k_i x_i        (k_i = degree of i)
//! Q_cst = (Σ_i x_i - |V|/2)²                           (unit coefficient)
//! ```
//!
//! On a balanced assignment Q_obj equals the number of cut edges.
//!
//! QKP picks items maximizing pairwise profits within a weight capacity:
//!
//! ```text
//! Q_obj = -Σ_{i≤j} p_ij x_i x_j
//! Q_cst = (Σ_i w_i x_i / C)²                           (unit coefficient)
//! ```
//!
//! The penalty weight A multiplies Q_cst inside [`QuboPair`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Qubo, QuboPair, SpinConfig, MAX_SPINS};

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    OddNodeCount(usize),
    TooFewNodes(usize),
    InvalidDensity(f64),
    BaseSizeMismatch {
        expected: usize,
        got: usize,
    },
    DerivedSizeOutOfRange {
        n: usize,
        base: usize,
    },
    ZeroCapacity,
    /// k-hot side condition k ≤ |V'| fails.
    KHotOverfull {
        k: usize,
        subset_len: usize,
    },
    /// Span side condition b_max - b_min ≥ max|a_i| - 1 fails.
    Condition2Violated {
        span: i64,
        max_abs_coeff: i64,
    },
    /// Nonemptiness side condition fails: the constraint admits no
    /// configuration at all.
    NoFeasibleSolution,
    TooManyVariables {
        n: usize,
        max: usize,
    },
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::OddNodeCount(n) => write!(f, "node count {n} must be even"),
            ProblemError::TooFewNodes(n) => write!(f, "node count {n} must be at least 4"),
            ProblemError::InvalidDensity(d) => write!(f, "edge density {d} must lie in (0, 1]"),
            ProblemError::BaseSizeMismatch { expected, got } => {
                write!(f, "base instance must have {expected} items, got {got}")
            }
            ProblemError::DerivedSizeOutOfRange { n, base } => {
                write!(f, "derived size {n} must lie in 2..={base}")
            }
            ProblemError::ZeroCapacity => write!(f, "derived capacity is zero"),
            ProblemError::KHotOverfull { k, subset_len } => {
                write!(
                    f,
                    "k-hot condition violated: k = {k} exceeds subset size {subset_len}"
                )
            }
            ProblemError::Condition2Violated {
                span,
                max_abs_coeff,
            } => {
                write!(
                    f,
                    "condition 2 violated: b_max - b_min = {span} < max|a_i| - 1 = {}",
                    max_abs_coeff - 1
                )
            }
            ProblemError::NoFeasibleSolution => {
                write!(f, "condition 3 violated: no feasible solution exists")
            }
            ProblemError::TooManyVariables { n, max } => {
                write!(f, "{n} variables exceed the enumeration limit of {max}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProblemError {}

/// Random graph for the balanced two-way partitioning problem.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GppInstance {
    n_nodes: usize,
    /// Undirected edges stored as (i, j) with i < j.
    edges: BTreeSet<(usize, usize)>,
    seed: u64,
}

impl GppInstance {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == i || b == i)
            .count()
    }

    pub fn label(&self) -> String {
        format!("gpp_{}_{}", self.n_nodes, self.seed)
    }

    /// Number of edges with exactly one endpoint in the x = 1 part.
    pub fn cut_size(&self, x: &SpinConfig) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| x.bit(a) != x.bit(b))
            .count()
    }
}

/// Erdős–Rényi style graph: each of the C(n,2) edges is included
/// independently with probability `density` under a seeded RNG.
pub fn gen_gpp(n_nodes: usize, density: f64, seed: u64) -> Result<GppInstance, ProblemError> {
    if !n_nodes.is_multiple_of(2) {
        return Err(ProblemError::OddNodeCount(n_nodes));
    }
    if n_nodes < 4 {
        return Err(ProblemError::TooFewNodes(n_nodes));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(ProblemError::InvalidDensity(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    for i in 0..n_nodes {
        for j in (i + 1)..n_nodes {
            if rng.gen::<f64>() < density {
                edges.insert((i, j));
            }
        }
    }
    Ok(GppInstance {
        n_nodes,
        edges,
        seed,
    })
}

/// Balanced-partition QUBO pair with penalty weight `a`.
pub fn gpp_qubo(g: &GppInstance, a: f64) -> QuboPair {
    let n = g.n_nodes;
    let half = n as f64 / 2.0;

    let mut objective = Qubo::new(n);
    for &(i, j) in &g.edges {
        objective.add_quadratic(i, j, -2.0);
        objective.add_linear(i, 1.0);
        objective.add_linear(j, 1.0);
    }

    // (Σ x_i - n/2)² expanded with x² = x.
    let mut constraint = Qubo::new(n);
    for i in 0..n {
        constraint.add_linear(i, 1.0 - 2.0 * half);
        for j in (i + 1)..n {
            constraint.add_quadratic(i, j, 2.0);
        }
    }
    constraint.set_offset(half * half);

    QuboPair::new(objective, constraint, a)
}

/// Quadratic knapsack payload. Profits are an upper-triangular map with
/// i ≤ j; the diagonal p_ii is the single-item profit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QkpInstance {
    n_items: usize,
    profits: BTreeMap<(usize, usize), u64>,
    weights: Vec<u64>,
    capacity: u64,
    seed: u64,
}

impl QkpInstance {
    pub fn new(
        n_items: usize,
        profits: BTreeMap<(usize, usize), u64>,
        weights: Vec<u64>,
        capacity: u64,
        seed: u64,
    ) -> Self {
        assert_eq!(weights.len(), n_items);
        assert!(weights.iter().all(|&w| w >= 1), "weights must be positive");
        assert!(capacity >= 1, "capacity must be positive");
        assert!(
            profits.keys().all(|&(i, j)| i <= j && j < n_items),
            "profit keys must satisfy i <= j < n"
        );
        QkpInstance {
            n_items,
            profits,
            weights,
            capacity,
            seed,
        }
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn profits(&self) -> &BTreeMap<(usize, usize), u64> {
        &self.profits
    }

    pub fn profit(&self, i: usize, j: usize) -> u64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.profits.get(&key).copied().unwrap_or(0)
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> String {
        format!("qkp_{}_{}", self.n_items, self.seed)
    }

    /// Total profit Σ_{i≤j, x_i = x_j = 1} p_ij of a selection.
    pub fn total_profit(&self, x: &SpinConfig) -> u64 {
        self.profits
            .iter()
            .filter(|&(&(i, j), _)| x.bit(i) == 1 && x.bit(j) == 1)
            .map(|(_, &p)| p)
            .sum()
    }

    pub fn total_weight(&self, x: &SpinConfig) -> u64 {
        (0..self.n_items)
            .filter(|&i| x.bit(i) == 1)
            .map(|i| self.weights[i])
            .sum()
    }
}

/// Synthetic 100-item base in the benchmark layout: dense profits in
/// 1..=100, weights in 1..=50, capacity in 1250..=2500. The capacity range
/// keeps every derived size n ≥ 2 within the repair side conditions.
pub fn gen_qkp_base(seed: u64) -> QkpInstance {
    let n = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profits = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            profits.insert((i, j), rng.gen_range(1..=100u64));
        }
    }
    let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=50u64)).collect();
    let capacity = rng.gen_range(1250..=2500u64);
    QkpInstance::new(n, profits, weights, capacity, seed)
}

/// Truncate a 100-item base to its first `n` items with capacity
/// ⌊n·C/100⌋.
pub fn derive_qkp(base: &QkpInstance, n: usize) -> Result<QkpInstance, ProblemError> {
    if base.n_items != 100 {
        return Err(ProblemError::BaseSizeMismatch {
            expected: 100,
            got: base.n_items,
        });
    }
    if n < 2 || n > base.n_items {
        return Err(ProblemError::DerivedSizeOutOfRange {
            n,
            base: base.n_items,
        });
    }
    let capacity = (n as u64) * base.capacity / 100;
    if capacity == 0 {
        return Err(ProblemError::ZeroCapacity);
    }
    let profits = base
        .profits
        .iter()
        .filter(|&(&(_, j), _)| j < n)
        .map(|(&k, &p)| (k, p))
        .collect();
    let weights = base.weights[..n].to_vec();
    Ok(QkpInstance::new(n, profits, weights, capacity, base.seed))
}

/// Synthetic n-item QKP: a seeded 100-item base truncated to n items.
pub fn synthetic_qkp(n: usize, seed: u64) -> Result<QkpInstance, ProblemError> {
    derive_qkp(&gen_qkp_base(seed), n)
}

/// Knapsack QUBO pair with penalty weight `a`.
pub fn qkp_qubo(q: &QkpInstance, a: f64) -> QuboPair {
    let n = q.n_items;
    let cap = q.capacity as f64;

    let mut objective = Qubo::new(n);
    for (&(i, j), &p) in &q.profits {
        if i == j {
            objective.add_linear(i, -(p as f64));
        } else {
            objective.add_quadratic(i, j, -(p as f64));
        }
    }

    // (Σ w_i x_i / C)² expanded with x² = x.
    let mut constraint = Qubo::new(n);
    for i in 0..n {
        let wi = q.weights[i] as f64;
        constraint.add_linear(i, wi * wi / (cap * cap));
        for j in (i + 1)..n {
            let wj = q.weights[j] as f64;
            constraint.add_quadratic(i, j, 2.0 * wi * wj / (cap * cap));
        }
    }

    QuboPair::new(objective, constraint, a)
}

#[cfg(feature = "serde")]
mod qkp_serde {
    //! Profits serialize as sorted (i, j, p) triples so the JSON form has
    //! no non-string map keys.

    use super::QkpInstance;
    use alloc::vec::Vec;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    struct Canonical {
        n_items: usize,
        profits: Vec<(usize, usize, u64)>,
        weights: Vec<u64>,
        capacity: u64,
        seed: u64,
    }

    impl Serialize for QkpInstance {
        fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            Canonical {
                n_items: self.n_items,
                profits: self.profits.iter().map(|(&(i, j), &p)| (i, j, p)).collect(),
                weights: self.weights.clone(),
                capacity: self.capacity,
                seed: self.seed,
            }
            .serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for QkpInstance {
        fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let c = Canonical::deserialize(d)?;
            let profits = c.profits.into_iter().map(|(i, j, p)| ((i, j), p)).collect();
            Ok(QkpInstance::new(
                c.n_items, profits, c.weights, c.capacity, c.seed,
            ))
        }
    }
}

/// Either problem kind, carrying everything needed to build its QUBO pair
/// and constraint.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ProblemInstance {
    Gpp(GppInstance),
    Qkp(QkpInstance),
}

impl ProblemInstance {
    pub fn n(&self) -> usize {
        match self {
            ProblemInstance::Gpp(g) => g.n_nodes(),
            ProblemInstance::Qkp(q) => q.n_items(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProblemInstance::Gpp(g) => g.label(),
            ProblemInstance::Qkp(q) => q.label(),
        }
    }

    pub fn qubo_pair(&self, a: f64) -> QuboPair {
        match self {
            ProblemInstance::Gpp(g) => gpp_qubo(g, a),
            ProblemInstance::Qkp(q) => qkp_qubo(q, a),
        }
    }

    pub fn constraint(&self) -> Result<ConstraintSpec, ProblemError> {
        constraint_of(self)
    }
}

/// Constraint kind recognized by the repair post-processing.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ConstraintKind {
    /// Σ_{i ∈ subset} x_i = k
    KHot { k: usize, subset: Vec<usize> },
    /// b_min ≤ Σ_i a_i x_i ≤ b_max with integer coefficients.
    Inequality {
        coeffs: Vec<i64>,
        b_min: i64,
        b_max: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintSpec {
    n: usize,
    kind: ConstraintKind,
}

impl ConstraintSpec {
    /// Builds the spec and verifies the side conditions the repair
    /// guarantee needs: k ≤ |V'| for k-hot; the span and nonemptiness
    /// conditions for the inequality.
    pub fn new(n: usize, kind: ConstraintKind) -> Result<Self, ProblemError> {
        match &kind {
            ConstraintKind::KHot { k, subset } => {
                assert!(subset.iter().all(|&i| i < n), "subset indices must be < n");
                if *k > subset.len() {
                    return Err(ProblemError::KHotOverfull {
                        k: *k,
                        subset_len: subset.len(),
                    });
                }
            }
            ConstraintKind::Inequality {
                coeffs,
                b_min,
                b_max,
            } => {
                assert_eq!(coeffs.len(), n, "coefficient count must equal n");
                let max_abs = coeffs.iter().map(|a| a.abs()).max().unwrap_or(0);
                let span = b_max - b_min;
                if span < max_abs - 1 {
                    return Err(ProblemError::Condition2Violated {
                        span,
                        max_abs_coeff: max_abs,
                    });
                }
                let spec = ConstraintSpec {
                    n,
                    kind: kind.clone(),
                };
                if !spec.has_feasible_witness() {
                    return Err(ProblemError::NoFeasibleSolution);
                }
                return Ok(spec);
            }
        }
        Ok(ConstraintSpec { n, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ConstraintKind {
        &self.kind
    }

    fn has_feasible_witness(&self) -> bool {
        match &self.kind {
            ConstraintKind::KHot { .. } => true,
            ConstraintKind::Inequality { b_min, b_max, .. } => {
                if *b_min <= 0 && 0 <= *b_max {
                    return true; // all-zeros witness
                }
                if self.n <= MAX_SPINS {
                    return SpinConfig::enumerate(self.n).any(|x| self.is_feasible(&x));
                }
                false
            }
        }
    }

    /// Exact integer feasibility check.
    pub fn is_feasible(&self, x: &SpinConfig) -> bool {
        assert_eq!(x.n(), self.n, "configuration size must match constraint");
        match &self.kind {
            ConstraintKind::KHot { k, subset } => {
                subset.iter().filter(|&&i| x.bit(i) == 1).count() == *k
            }
            ConstraintKind::Inequality {
                coeffs,
                b_min,
                b_max,
            } => {
                let s: i64 = (0..self.n)
                    .filter(|&i| x.bit(i) == 1)
                    .map(|i| coeffs[i])
                    .sum();
                *b_min <= s && s <= *b_max
            }
        }
    }
}

/// Constraint attached to each problem kind: |V|/2-hot over all nodes for
/// GPP, and 0 ≤ Σ w_i x_i ≤ C for QKP.
pub fn constraint_of(instance: &ProblemInstance) -> Result<ConstraintSpec, ProblemError> {
    match instance {
        ProblemInstance::Gpp(g) => ConstraintSpec::new(
            g.n_nodes(),
            ConstraintKind::KHot {
                k: g.n_nodes() / 2,
                subset: (0..g.n_nodes()).collect(),
            },
        ),
        ProblemInstance::Qkp(q) => ConstraintSpec::new(
            q.n_items(),
            ConstraintKind::Inequality {
                coeffs: q.weights().iter().map(|&w| w as i64).collect(),
                b_min: 0,
                b_max: q.capacity() as i64,
            },
        ),
    }
}

/// Exact optimum set of a constrained pair, by full enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Optima {
    /// All feasible minimizers of the objective cost, in basis-index order.
    pub configs: Vec<SpinConfig>,
    pub c_opt: f64,
}

impl Optima {
    pub fn contains(&self, x: &SpinConfig) -> bool {
        self.configs.binary_search(x).is_ok()
    }
}

/// Enumerates all 2^n configurations, keeps the feasible ones, and returns
/// every minimizer of the objective cost (ties included).
pub fn brute_force_optima(
    pair: &QuboPair,
    constraint: &ConstraintSpec,
) -> Result<Optima, ProblemError> {
    let n = pair.n();
    assert_eq!(constraint.n(), n, "constraint size must match pair");
    if n > MAX_SPINS {
        return Err(ProblemError::TooManyVariables { n, max: MAX_SPINS });
    }
    let mut best = f64::INFINITY;
    let mut configs: Vec<SpinConfig> = Vec::new();
    for x in SpinConfig::enumerate(n) {
        if !constraint.is_feasible(&x) {
            continue;
        }
        let c = pair.objective().eval(&x).expect("dimensions checked above");
        if c < best {
            best = c;
            configs.clear();
            configs.push(x);
        } else if c == best {
            configs.push(x);
        }
    }
    if configs.is_empty() {
        return Err(ProblemError::NoFeasibleSolution);
    }
    Ok(Optima {
        configs,
        c_opt: best,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

/// Parses the plain-text benchmark layout for QKP instances:
///
/// ```text
/// n
/// capacity
/// p_00 p_11 ... p_(n-1)(n-1)          (linear profits)
/// p_01 p_02 ... p_0(n-1)              (n-1 triangular rows)
/// ...
/// p_(n-2)(n-1)
/// w_0 w_1 ... w_(n-1)                 (weights)
/// ```
///
/// Blank lines are ignored; errors carry the 1-based source line number.
pub fn parse_qkp_benchmark(text: &str) -> Result<QkpInstance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut last_line = 0;

    let mut next_row = |expected: usize, what: &str| -> Result<(usize, Vec<u64>), ParseError> {
        let (no, line) = lines.next().ok_or(ParseError {
            line: last_line + 1,
            message: format!("unexpected end of file, expected {what}"),
        })?;
        last_line = no;
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>().map_err(|_| ParseError {
                    line: no,
                    message: format!("invalid integer '{tok}' in {what}"),
                })
            })
            .collect::<Result<Vec<u64>, ParseError>>()?;
        if values.len() != expected {
            return Err(ParseError {
                line: no,
                message: format!(
                    "expected {expected} values in {what}, found {}",
                    values.len()
                ),
            });
        }
        Ok((no, values))
    };

    let (no, header) = next_row(1, "item count")?;
    let n = header[0] as usize;
    if n < 2 {
        return Err(ParseError {
            line: no,
            message: format!("item count {n} must be at least 2"),
        });
    }
    let (no, cap_row) = next_row(1, "capacity")?;
    let capacity = cap_row[0];
    if capacity == 0 {
        return Err(ParseError {
            line: no,
            message: String::from("capacity must be positive"),
        });
    }

    let mut profits = BTreeMap::new();
    let (_, diag) = next_row(n, "linear profits")?;
    for (i, &p) in diag.iter().enumerate() {
        if p != 0 {
            profits.insert((i, i), p);
        }
    }
    for i in 0..(n - 1) {
        let (_, row) = next_row(n - 1 - i, &format!("profit row {i}"))?;
        for (off, &p) in row.iter().enumerate() {
            if p != 0 {
                profits.insert((i, i + 1 + off), p);
            }
        }
    }

    let (no, weights) = next_row(n, "weights")?;
    if let Some(w) = weights.iter().position(|&w| w == 0) {
        return Err(ParseError {
            line: no,
            message: format!("weight of item {w} must be positive"),
        });
    }

    if let Some((no, _)) = lines.next() {
        return Err(ParseError {
            line: no,
            message: String::from("unexpected trailing content"),
        });
    }

    Ok(QkpInstance::new(n, profits, weights, capacity, 0))
}

/// Writes the benchmark layout accepted by [`parse_qkp_benchmark`].
pub fn serialize_qkp_benchmark(q: &QkpInstance) -> String {
    let n = q.n_items();
    let mut out = String::new();
    let _ = writeln!(out, "{n}");
    let _ = writeln!(out, "{}", q.capacity());
    let diag: Vec<String> = (0..n).map(|i| format!("{}", q.profit(i, i))).collect();
    let _ = writeln!(out, "{}", diag.join(" "));
    for i in 0..(n - 1) {
        let row: Vec<String> = ((i + 1)..n)
            .map(|j| format!("{}", q.profit(i, j)))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let row: Vec<String> = q.weights().iter().map(|w| format!("{w}")).collect();
    let _ = writeln!(out, "{}", row.join(" "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn path_graph_4() -> GppInstance {
        GppInstance {
            n_nodes: 4,
            edges: [(0, 1), (1, 2), (2, 3)].into_iter().collect(),
            seed: 0,
        }
    }

    fn toy_qkp() -> QkpInstance {
        // p_00 = 3, p_11 = 5, p_01 = 2, w = (1, 1), C = 2
        let profits = [((0, 0), 3), ((1, 1), 5), ((0, 1), 2)]
            .into_iter()
            .collect();
        QkpInstance::new(2, profits, vec![1, 1], 2, 0)
    }

    #[test]
    fn full_density_gives_complete_graph() {
        let g = gen_gpp(8, 1.0, 3).unwrap();
        assert_eq!(g.edges().len(), 8 * 7 / 2);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = gen_gpp(8, 0.5, 17).unwrap();
        let b = gen_gpp(8, 0.5, 17).unwrap();
        assert_eq!(a, b);
        let c = gen_gpp(8, 0.5, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn odd_node_count_rejected() {
        assert_eq!(
            gen_gpp(7, 0.5, 0).unwrap_err(),
            ProblemError::OddNodeCount(7)
        );
    }

    #[test]
    fn gpp_objective_counts_cut_edges() {
        let g = path_graph_4();
        let pair = gpp_qubo(&g, 1.0);
        // (1,1,0,0): single cut edge 1-2
        let x = SpinConfig::from_bits(&[1, 1, 0, 0]);
        assert_eq!(pair.objective().eval(&x).unwrap(), 1.0);
        // (1,0,1,0): all three edges cut
        let x = SpinConfig::from_bits(&[1, 0, 1, 0]);
        assert_eq!(pair.objective().eval(&x).unwrap(), 3.0);
    }

    #[test]
    fn gpp_constraint_vanishes_on_balanced_assignments() {
        let g = gen_gpp(6, 0.5, 1).unwrap();
        let pair = gpp_qubo(&g, 2.0);
        for x in SpinConfig::enumerate(6) {
            let cst = pair.constraint().eval(&x).unwrap();
            if x.count_ones() == 3 {
                assert_eq!(cst, 0.0);
            } else {
                assert!(cst > 0.0);
            }
        }
    }

    #[test]
    fn gpp_all_zeros_pays_full_penalty() {
        let g = path_graph_4();
        let pair = gpp_qubo(&g, 3.0);
        let (c, c_full) = pair.eval_cost(&SpinConfig::zeros(4)).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(c_full, 3.0 * 4.0); // A · (|V|/2)²
    }

    #[test]
    fn derive_keeps_base_at_full_size() {
        let base = gen_qkp_base(5);
        let derived = derive_qkp(&base, 100).unwrap();
        assert_eq!(derived, base);
    }

    #[test]
    fn derive_floors_capacity() {
        let mut base = gen_qkp_base(5);
        base.capacity = 1000;
        assert_eq!(derive_qkp(&base, 50).unwrap().capacity(), 500);
        assert_eq!(derive_qkp(&base, 33).unwrap().capacity(), 330);
        assert!(matches!(
            derive_qkp(&base, 101),
            Err(ProblemError::DerivedSizeOutOfRange { .. })
        ));
    }

    #[test]
    fn qkp_objective_is_negated_profit() {
        let pair = qkp_qubo(&toy_qkp(), 1.0);
        let x = SpinConfig::from_bits(&[1, 1]);
        assert_eq!(pair.objective().eval(&x).unwrap(), -10.0);
        assert_eq!(pair.objective().eval(&SpinConfig::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn qkp_constraint_is_squared_weight_fraction() {
        let pair = qkp_qubo(&toy_qkp(), 4.0);
        let x = SpinConfig::from_bits(&[1, 1]);
        // weight sum equals capacity, so the unit penalty is 1 and the
        // weighted penalty is A
        assert_eq!(pair.constraint().eval(&x).unwrap(), 1.0);
        let (_, c_full) = pair.eval_cost(&x).unwrap();
        assert_eq!(c_full, -10.0 + 4.0);
    }

    #[test]
    fn constraints_of_both_kinds() {
        let g = ProblemInstance::Gpp(gen_gpp(8, 0.5, 2).unwrap());
        let c = constraint_of(&g).unwrap();
        assert_eq!(
            c.kind(),
            &ConstraintKind::KHot {
                k: 4,
                subset: (0..8).collect()
            }
        );

        let q = ProblemInstance::Qkp(QkpInstance::new(
            3,
            [((0, 0), 1)].into_iter().collect(),
            vec![3, 5, 2],
            6,
            0,
        ));
        let c = constraint_of(&q).unwrap();
        assert_eq!(
            c.kind(),
            &ConstraintKind::Inequality {
                coeffs: vec![3, 5, 2],
                b_min: 0,
                b_max: 6
            }
        );
    }

    #[test]
    fn oversized_weight_violates_condition_2() {
        let q = ProblemInstance::Qkp(QkpInstance::new(2, BTreeMap::new(), vec![9, 1], 6, 0));
        let err = constraint_of(&q).unwrap_err();
        assert_eq!(
            err,
            ProblemError::Condition2Violated {
                span: 6,
                max_abs_coeff: 9
            }
        );
        assert!(format!("{err}").contains("condition 2"));
    }

    #[test]
    fn feasibility_checks_are_exact() {
        let khot = ConstraintSpec::new(
            4,
            ConstraintKind::KHot {
                k: 2,
                subset: (0..4).collect(),
            },
        )
        .unwrap();
        assert!(khot.is_feasible(&SpinConfig::from_bits(&[1, 1, 0, 0])));
        assert!(!khot.is_feasible(&SpinConfig::from_bits(&[1, 1, 1, 0])));

        let ineq = ConstraintSpec::new(
            3,
            ConstraintKind::Inequality {
                coeffs: vec![3, 5, 2],
                b_min: 0,
                b_max: 6,
            },
        )
        .unwrap();
        assert!(ineq.is_feasible(&SpinConfig::from_bits(&[1, 0, 1])));
        assert!(!ineq.is_feasible(&SpinConfig::from_bits(&[1, 1, 0])));
    }

    #[test]
    fn brute_force_path_graph() {
        let g = path_graph_4();
        let inst = ProblemInstance::Gpp(g.clone());
        let pair = gpp_qubo(&g, 1.0);
        let optima = brute_force_optima(&pair, &inst.constraint().unwrap()).unwrap();
        assert_eq!(optima.c_opt, 1.0);
        assert!(optima.contains(&SpinConfig::from_bits(&[1, 1, 0, 0])));
        assert!(optima.contains(&SpinConfig::from_bits(&[0, 0, 1, 1])));
        assert_eq!(optima.configs.len(), 2);
    }

    #[test]
    fn brute_force_complete_graph() {
        let g = gen_gpp(4, 1.0, 0).unwrap();
        let inst = ProblemInstance::Gpp(g.clone());
        let pair = gpp_qubo(&g, 1.0);
        let optima = brute_force_optima(&pair, &inst.constraint().unwrap()).unwrap();
        // every balanced cut of K4 severs exactly 4 edges
        assert_eq!(optima.c_opt, 4.0);
        assert_eq!(optima.configs.len(), 6);
    }

    #[test]
    fn brute_force_toy_qkp() {
        let q = toy_qkp();
        let inst = ProblemInstance::Qkp(q.clone());
        let pair = qkp_qubo(&q, 1.0);
        let optima = brute_force_optima(&pair, &inst.constraint().unwrap()).unwrap();
        assert_eq!(optima.c_opt, -10.0);
        assert_eq!(optima.configs, vec![SpinConfig::from_bits(&[1, 1])]);
    }

    #[test]
    fn benchmark_round_trip() {
        let q = synthetic_qkp(7, 11).unwrap();
        let text = serialize_qkp_benchmark(&q);
        let mut parsed = parse_qkp_benchmark(&text).unwrap();
        parsed.seed = q.seed; // the text layout does not carry the seed
        assert_eq!(parsed, q);
    }

    #[test]
    fn minimal_three_item_file() {
        let text = "3\n10\n1 2 3\n4 5\n6\n2 3 4\n";
        let q = parse_qkp_benchmark(text).unwrap();
        assert_eq!(q.n_items(), 3);
        assert_eq!(q.capacity(), 10);
        assert_eq!(q.profit(0, 1), 4);
        assert_eq!(q.profit(1, 2), 6);
        assert_eq!(q.weights(), &[2, 3, 4]);
    }

    #[test]
    fn truncated_weight_row_is_reported_with_line() {
        let text = "3\n10\n1 2 3\n4 5\n6\n2 3\n";
        let err = parse_qkp_benchmark(text).unwrap_err();
        assert_eq!(err.line, 6);
        assert!(err.message.contains("weights"));
    }
}
