//! Derivative-free outer-loop optimizers over box-bounded parameter
//! vectors: Powell's conjugate-direction method, exhaustive grid search,
//! and projected gradient descent with central finite differences.
//!
//! All three are deterministic given a deterministic objective, never
//! report a value worse than the starting point, and clamp every candidate
//! into the bounds before evaluation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Golden-section bracket tolerance per line search.
const LINE_TOL: f64 = 1e-4;
/// Probe budget per line search.
const MAX_LINE_PROBES: usize = 50;
/// Powell stops when the relative improvement of an iteration falls below
/// this.
const REL_IMPROVEMENT_TOL: f64 = 1e-6;
/// Central-difference step per component.
const FD_STEP: f64 = 1e-4;
/// Initial backtracking step along the normalized descent direction.
const GD_INITIAL_STEP: f64 = 0.1;
/// Line-search floor; below this the descent iteration gives up.
const GD_MIN_STEP: f64 = 1e-6;
/// Convergence threshold on the gradient infinity norm.
const GD_GRAD_TOL: f64 = 1e-5;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizeError {
    ZeroIterationBudget,
    TooFewParameters { dim: usize },
    TooManyDimensions { dim: usize, max: usize },
    LatticeTooLarge { points: usize, max: usize },
    InvalidResolution { resolution: f64 },
    NonFiniteObjective,
}

impl fmt::Display for OptimizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizeError::ZeroIterationBudget => write!(f, "max_iter must be at least 1"),
            OptimizeError::TooFewParameters { dim } => {
                write!(f, "{dim} parameters, need at least 2")
            }
            OptimizeError::TooManyDimensions { dim, max } => {
                write!(f, "{dim} dimensions exceed the grid-search limit of {max}")
            }
            OptimizeError::LatticeTooLarge { points, max } => {
                write!(f, "lattice of {points} points exceeds the limit of {max}")
            }
            OptimizeError::InvalidResolution { resolution } => {
                write!(f, "resolution {resolution} must be positive")
            }
            OptimizeError::NonFiniteObjective => write!(f, "objective returned a non-finite value"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OptimizeError {}

/// Box-bounded objective with an evaluation counter.
///
/// `eval_batch` exists so callers may evaluate independent points
/// concurrently (finite-difference stencils, grid lattices); the default
/// maps sequentially and implementations must preserve input order.
pub trait Objective {
    fn bounds(&self) -> &[(f64, f64)];

    fn eval(&mut self, params: &[f64]) -> f64;

    fn eval_batch(&mut self, batch: &[Vec<f64>]) -> Vec<f64> {
        batch.iter().map(|p| self.eval(p)).collect()
    }

    fn evaluations(&self) -> u64;

    fn dim(&self) -> usize {
        self.bounds().len()
    }
}

/// Closure-backed [`Objective`].
pub struct FnObjective<F> {
    f: F,
    bounds: Vec<(f64, f64)>,
    evaluations: u64,
}

impl<F: FnMut(&[f64]) -> f64> FnObjective<F> {
    pub fn new(bounds: Vec<(f64, f64)>, f: F) -> Self {
        assert!(
            bounds.iter().all(|(lo, hi)| lo <= hi),
            "bounds must satisfy lo <= hi"
        );
        FnObjective {
            f,
            bounds,
            evaluations: 0,
        }
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<F> {
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn eval(&mut self, params: &[f64]) -> f64 {
        self.evaluations += 1;
        (self.f)(params)
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub evaluations: u64,
    pub iterations: usize,
    /// Best point after each iteration (improvements only for grid search).
    pub trace: Option<Vec<(Vec<f64>, f64)>>,
}

fn clamp_to_bounds(params: &mut [f64], bounds: &[(f64, f64)]) {
    for (p, &(lo, hi)) in params.iter_mut().zip(bounds) {
        *p = p.clamp(lo, hi);
    }
}

/// Feasible step interval [t_lo, t_hi] keeping x + t·d inside the bounds.
fn step_interval(x: &[f64], d: &[f64], bounds: &[(f64, f64)]) -> (f64, f64) {
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for ((&xi, &di), &(lo, hi)) in x.iter().zip(d).zip(bounds) {
        if di == 0.0 {
            continue;
        }
        let (a, b) = ((lo - xi) / di, (hi - xi) / di);
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        t_lo = t_lo.max(a);
        t_hi = t_hi.min(b);
    }
    if !t_lo.is_finite() || !t_hi.is_finite() || t_lo > t_hi {
        (0.0, 0.0)
    } else {
        (t_lo, t_hi)
    }
}

/// Bounded golden-section search along x + t·d, refined by one parabolic
/// fit through the three best probes. Returns the new point and value;
/// never worse than the incoming (x, fx).
fn line_minimize<O: Objective + ?Sized>(
    f: &mut O,
    x: &[f64],
    d: &[f64],
    fx: f64,
) -> (Vec<f64>, f64) {
    let bounds = f.bounds().to_vec();
    let (t_lo, t_hi) = step_interval(x, d, &bounds);
    if t_hi - t_lo <= 0.0 {
        return (x.to_vec(), fx);
    }

    let at = |t: f64| -> Vec<f64> {
        let mut p: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + t * di).collect();
        clamp_to_bounds(&mut p, &bounds);
        p
    };

    let mut probes: Vec<(f64, f64)> = vec![(0.0, fx)];
    let eval_at = |f: &mut O, t: f64, probes: &mut Vec<(f64, f64)>| -> f64 {
        let v = f.eval(&at(t));
        probes.push((t, v));
        v
    };

    let (mut a, mut b) = (t_lo, t_hi);
    let mut c = b - GOLDEN * (b - a);
    let mut e = a + GOLDEN * (b - a);
    let mut fc = eval_at(f, c, &mut probes);
    let mut fe = eval_at(f, e, &mut probes);
    let mut used = 2;
    while b - a > LINE_TOL && used < MAX_LINE_PROBES {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - GOLDEN * (b - a);
            fc = eval_at(f, c, &mut probes);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + GOLDEN * (b - a);
            fe = eval_at(f, e, &mut probes);
        }
        used += 1;
    }

    // parabolic refinement through the three best distinct probes
    if used < MAX_LINE_PROBES {
        probes.sort_by(|p, q| p.1.partial_cmp(&q.1).expect("finite objective values"));
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(3);
        for &(t, v) in probes.iter() {
            if pts.iter().all(|&(u, _)| (u - t).abs() > 1e-12) {
                pts.push((t, v));
            }
            if pts.len() == 3 {
                break;
            }
        }
        if pts.len() == 3 {
            if let Some(tv) = parabola_vertex(pts[0], pts[1], pts[2]) {
                if tv >= t_lo && tv <= t_hi {
                    eval_at(f, tv, &mut probes);
                }
            }
        }
    }

    let (t_best, f_best) = probes
        .into_iter()
        .min_by(|p, q| {
            p.1.partial_cmp(&q.1)
                .expect("finite objective values")
                .then(p.0.partial_cmp(&q.0).expect("finite t"))
        })
        .expect("probe list is nonempty");
    if f_best < fx {
        (at(t_best), f_best)
    } else {
        (x.to_vec(), fx)
    }
}

fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<f64> {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    if denom == 0.0 {
        return None;
    }
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if a <= 0.0 {
        return None; // not convex along this slice
    }
    let t = -b / (2.0 * a);
    t.is_finite().then_some(t)
}

/// Powell's conjugate-direction method: cycle line minimizations over a
/// direction set seeded with the coordinate axes, then replace the
/// direction of largest decrease with the net displacement when the
/// standard acceptance test passes. Stops after `max_iter` iterations or
/// when the relative improvement drops below 1e-6.
pub fn powell_minimize<O: Objective + ?Sized>(
    f: &mut O,
    x0: &[f64],
    max_iter: usize,
) -> Result<OptimizeResult, OptimizeError> {
    if max_iter == 0 {
        return Err(OptimizeError::ZeroIterationBudget);
    }
    let dim = f.dim();
    assert_eq!(x0.len(), dim, "x0 length must match objective dimension");
    let evals_before = f.evaluations();

    let mut x = x0.to_vec();
    clamp_to_bounds(&mut x, f.bounds());
    let mut fx = f.eval(&x);

    let mut directions: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut trace = vec![(x.clone(), fx)];
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        let f_start = fx;
        let x_start = x.clone();

        let mut biggest_drop = 0.0;
        let mut biggest_idx = 0;
        for (idx, dir) in directions.iter().enumerate() {
            let f_before = fx;
            let (xn, fn_) = line_minimize(f, &x, dir, fx);
            x = xn;
            fx = fn_;
            if f_before - fx > biggest_drop {
                biggest_drop = f_before - fx;
                biggest_idx = idx;
            }
        }

        let mut d_new: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let d_norm = libm::sqrt(d_new.iter().map(|v| v * v).sum());
        if d_norm > 1e-12 {
            for v in d_new.iter_mut() {
                *v /= d_norm;
            }
            // extrapolated point 2x - x_start
            let mut xe: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| 2.0 * a - b).collect();
            clamp_to_bounds(&mut xe, f.bounds());
            let fe = f.eval(&xe);
            if fe < f_start {
                let t = 2.0
                    * (f_start - 2.0 * fx + fe)
                    * (f_start - fx - biggest_drop)
                    * (f_start - fx - biggest_drop)
                    - biggest_drop * (f_start - fe) * (f_start - fe);
                if t < 0.0 {
                    let (xn, fn_) = line_minimize(f, &x, &d_new, fx);
                    x = xn;
                    fx = fn_;
                    directions[biggest_idx] = d_new;
                }
            }
        }

        trace.push((x.clone(), fx));
        let improvement = f_start - fx;
        if improvement <= REL_IMPROVEMENT_TOL * (fx.abs() + f_start.abs() + 1e-30) {
            break;
        }
    }

    Ok(OptimizeResult {
        best_params: x,
        best_value: fx,
        evaluations: f.evaluations() - evals_before,
        iterations,
        trace: Some(trace),
    })
}

/// Exhaustive evaluation of the lattice {lo, lo+res, …} per parameter.
/// Ties go to the lexicographically smallest vector. Guarded to at most 3
/// dimensions and 10^6 lattice points.
pub fn grid_search<O: Objective + ?Sized>(
    f: &mut O,
    resolution: f64,
) -> Result<OptimizeResult, OptimizeError> {
    const MAX_DIMS: usize = 3;
    const MAX_POINTS: usize = 1_000_000;
    if !(resolution > 0.0) {
        return Err(OptimizeError::InvalidResolution { resolution });
    }
    let dim = f.dim();
    if dim > MAX_DIMS {
        return Err(OptimizeError::TooManyDimensions { dim, max: MAX_DIMS });
    }
    let evals_before = f.evaluations();

    let axes: Vec<Vec<f64>> = f
        .bounds()
        .iter()
        .map(|&(lo, hi)| {
            let steps = ((hi - lo) / resolution + 1e-9) as usize;
            (0..=steps)
                .map(|k| (lo + k as f64 * resolution).min(hi))
                .collect()
        })
        .collect();
    let points: usize = axes.iter().map(Vec::len).product();
    if points > MAX_POINTS {
        return Err(OptimizeError::LatticeTooLarge {
            points,
            max: MAX_POINTS,
        });
    }

    // lexicographic order: first axis slowest
    let mut lattice: Vec<Vec<f64>> = Vec::with_capacity(points);
    let mut idx = vec![0usize; dim];
    'odometer: loop {
        lattice.push(idx.iter().enumerate().map(|(d, &k)| axes[d][k]).collect());
        let mut d = dim;
        while d > 0 {
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                continue 'odometer;
            }
            idx[d] = 0;
        }
        break;
    }

    let values = f.eval_batch(&lattice);
    let mut best = 0;
    let mut trace = vec![(lattice[0].clone(), values[0])];
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
            trace.push((lattice[i].clone(), v));
        }
    }

    Ok(OptimizeResult {
        best_params: lattice[best].clone(),
        best_value: values[best],
        evaluations: f.evaluations() - evals_before,
        iterations: 1,
        trace: Some(trace),
    })
}

/// Projected gradient descent from the constant-0.5 vector: central
/// finite-difference gradient, backtracking steps along the ∞-normalized
/// descent direction starting at 0.1 and halving until a decrease (floor
/// 1e-6), projection onto the box after every move. Stops at `max_iter`
/// iterations, a gradient ∞-norm below 1e-5, or a stalled line search.
pub fn continuous_gradient_descent<O: Objective + ?Sized>(
    f: &mut O,
    max_iter: usize,
) -> Result<OptimizeResult, OptimizeError> {
    if max_iter == 0 {
        return Err(OptimizeError::ZeroIterationBudget);
    }
    let dim = f.dim();
    if dim < 2 {
        return Err(OptimizeError::TooFewParameters { dim });
    }
    let bounds = f.bounds().to_vec();
    let evals_before = f.evaluations();

    let mut x = vec![0.5; dim];
    clamp_to_bounds(&mut x, &bounds);
    let mut fx = f.eval(&x);
    if !fx.is_finite() {
        return Err(OptimizeError::NonFiniteObjective);
    }
    let mut trace = vec![(x.clone(), fx)];
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;

        // central-difference stencil, clamped at the box faces
        let mut stencil: Vec<Vec<f64>> = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut p = x.clone();
                p[i] += sign * FD_STEP;
                clamp_to_bounds(&mut p, &bounds);
                stencil.push(p);
            }
        }
        let values = f.eval_batch(&stencil);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(OptimizeError::NonFiniteObjective);
        }
        let gradient: Vec<f64> = (0..dim)
            .map(|i| (values[2 * i] - values[2 * i + 1]) / (2.0 * FD_STEP))
            .collect();

        let g_inf = gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if g_inf < GD_GRAD_TOL {
            break;
        }

        let direction: Vec<f64> = gradient.iter().map(|g| -g / g_inf).collect();
        let mut step = GD_INITIAL_STEP;
        let mut moved = false;
        while step >= GD_MIN_STEP {
            let mut candidate: Vec<f64> = x
                .iter()
                .zip(&direction)
                .map(|(xi, di)| xi + step * di)
                .collect();
            clamp_to_bounds(&mut candidate, &bounds);
            let fc = f.eval(&candidate);
            if !fc.is_finite() {
                return Err(OptimizeError::NonFiniteObjective);
            }
            if fc < fx {
                x = candidate;
                fx = fc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        trace.push((x.clone(), fx));
        if !moved {
            break;
        }
    }

    Ok(OptimizeResult {
        best_params: x,
        best_value: fx,
        evaluations: f.evaluations() - evals_before,
        iterations,
        trace: Some(trace),
    })
}
