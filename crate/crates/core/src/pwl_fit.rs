//! Refitting a K-segment piecewise-linear approximation under max-absolute-error.
//!
//! The outer problem (where to put the K−1 interior breakpoints) is searched by
//! differential evolution (rand/1/bin) on a uniform grid, followed by a
//! coordinate polish in grid-index space. The inner problem (best line on one
//! segment) is solved exactly: the minimax line through a point set is the centre
//! line of the thinnest vertical strip containing it, found on the convex hulls.
//! Segments are fitted independently; the model is not forced to be continuous.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::PiecewiseLinearModel;

/// `cos(π(1 − λ))`, the function the reference model approximates.
pub fn kedem_target(lambda: f64) -> f64 {
    (PI * (1.0 - lambda)).cos()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InnerFit {
    #[default]
    Minimax,
    /// Per-segment least squares. Cheaper objective, not minimax-optimal.
    LeastSquares,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub n_segments: usize,
    /// Uniform grid points on [0, 1], endpoints included.
    pub grid_size: usize,
    /// Mirror breakpoints about 1/2 (for targets with `f(1 − λ) = −f(λ)`).
    pub antisymmetry_constraint: bool,
    pub max_iterations: usize,
    pub population: usize,
    /// Relative fitness spread at which the population counts as converged.
    pub tolerance: f64,
    pub seed: u64,
    pub inner: InnerFit,
    pub differential_weight: f64,
    pub crossover: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_segments: 5,
            grid_size: 10_001,
            antisymmetry_constraint: false,
            max_iterations: 1_000,
            population: 40,
            tolerance: 1e-9,
            seed: 0,
            inner: InnerFit::Minimax,
            differential_weight: 0.7,
            crossover: 0.9,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if self.n_segments == 0 {
            return Err(Error::invalid("n_segments must be >= 1"));
        }
        if self.grid_size < 2 * self.n_segments || self.grid_size < 2 {
            return Err(Error::invalid(format!(
                "grid_size {} too small for {} segments",
                self.grid_size, self.n_segments
            )));
        }
        if self.population < 4 {
            return Err(Error::invalid("population must be >= 4"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::invalid("tolerance must be >= 0"));
        }
        if !(0.0..=2.0).contains(&self.differential_weight)
            || !(0.0..=1.0).contains(&self.crossover)
        {
            return Err(Error::invalid(
                "differential weight in [0, 2], crossover in [0, 1]",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOutcome {
    pub model: PiecewiseLinearModel,
    /// Max |model − target| over the fitting grid.
    pub max_error: f64,
    pub argmax: f64,
    pub generations: usize,
    pub converged: bool,
    pub inner: InnerFit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Max absolute residual over the fitted points.
    pub error: f64,
}

/// Exact minimax (Chebyshev) line through `(x, y)`; `x` strictly increasing.
pub fn minimax_line(x: &[f64], y: &[f64]) -> LineFit {
    debug_assert_eq!(x.len(), y.len());
    match x.len() {
        0 => {
            return LineFit {
                slope: 0.0,
                intercept: 0.0,
                error: 0.0,
            }
        }
        1 => {
            return LineFit {
                slope: 0.0,
                intercept: y[0],
                error: 0.0,
            }
        }
        _ => {}
    }
    let cross = |o: usize, a: usize, b: usize| {
        (x[a] - x[o]) * (y[b] - y[o]) - (y[a] - y[o]) * (x[b] - x[o])
    };
    let mut upper: Vec<usize> = Vec::new();
    let mut lower: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], i) >= 0.0 {
            upper.pop();
        }
        upper.push(i);
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], i) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let edge_slope = |a: usize, b: usize| (y[b] - y[a]) / (x[b] - x[a]);
    // upper hull slopes decrease, lower hull slopes increase
    let up_slopes: Vec<f64> = upper.windows(2).map(|w| edge_slope(w[0], w[1])).collect();
    let lo_slopes: Vec<f64> = lower.windows(2).map(|w| edge_slope(w[0], w[1])).collect();

    let top = |m: f64| {
        let v = upper[up_slopes.partition_point(|&s| s > m)];
        y[v] - m * x[v]
    };
    let bottom = |m: f64| {
        let v = lower[lo_slopes.partition_point(|&s| s < m)];
        y[v] - m * x[v]
    };
    let width = |m: f64| top(m) - bottom(m);

    let (mut lo, mut hi) = up_slopes
        .iter()
        .chain(&lo_slopes)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
            (a.min(s), b.max(s))
        });
    // width is convex and piecewise linear in the slope
    for _ in 0..200 {
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if width(m1) < width(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let m = 0.5 * (lo + hi);
    let (t, b) = (top(m), bottom(m));
    LineFit {
        slope: m,
        intercept: 0.5 * (t + b),
        error: 0.5 * (t - b),
    }
}

/// Ordinary least-squares line, with its max absolute residual.
pub fn least_squares_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    if x.len() < 2 {
        return minimax_line(x, y);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let error = x
        .iter()
        .zip(y)
        .map(|(a, b)| (intercept + slope * a - b).abs())
        .fold(0.0, f64::max);
    LineFit {
        slope,
        intercept,
        error,
    }
}

/// Max over a `grid_size`-point uniform grid of |model − target|, and where.
pub fn max_abs_error(
    model: &PiecewiseLinearModel,
    target: impl Fn(f64) -> f64,
    grid_size: usize,
) -> (f64, f64) {
    let last = (grid_size.max(2) - 1) as f64;
    let mut best = (0.0, 0.0);
    for i in 0..grid_size.max(2) {
        let l = i as f64 / last;
        let e = (model.eval_unchecked(l) - target(l)).abs();
        if e > best.0 {
            best = (e, l);
        }
    }
    best
}

const PENALTY: f64 = 1e3;

struct Problem<'a> {
    xs: Vec<f64>,
    ys: Vec<f64>,
    cfg: &'a FitConfig,
}

impl Problem<'_> {
    fn line(&self, start: usize, end: usize) -> LineFit {
        let (x, y) = (&self.xs[start..end], &self.ys[start..end]);
        match self.cfg.inner {
            InnerFit::Minimax => minimax_line(x, y),
            InnerFit::LeastSquares => least_squares_line(x, y),
        }
    }

    /// Number of free breakpoint coordinates searched by the optimiser.
    fn dims(&self) -> usize {
        let interior = self.cfg.n_segments - 1;
        if self.cfg.antisymmetry_constraint {
            interior / 2
        } else {
            interior
        }
    }

    /// Full sorted list of interior segment start indices from free coordinates.
    fn expand(&self, free: &[usize]) -> Vec<usize> {
        if !self.cfg.antisymmetry_constraint {
            let mut v = free.to_vec();
            v.sort_unstable();
            return v;
        }
        let last = self.xs.len() - 1;
        let mut v = free.to_vec();
        if (self.cfg.n_segments - 1) % 2 == 1 {
            v.push(self.xs.partition_point(|&x| x < 0.5));
        }
        v.extend(free.iter().map(|&j| last + 1 - j));
        v.sort_unstable();
        v
    }

    fn genes_to_indices(&self, genes: &[f64]) -> Vec<usize> {
        let scale = if self.cfg.antisymmetry_constraint {
            0.5
        } else {
            1.0
        };
        genes
            .iter()
            .map(|&g| self.xs.partition_point(|&x| x < g * scale))
            .collect()
    }

    /// Max segment error for the given interior start indices, penalised when
    /// a segment holds fewer than two grid points.
    fn objective(&self, starts: &[usize]) -> f64 {
        let mut bounds = Vec::with_capacity(starts.len() + 2);
        bounds.push(0);
        bounds.extend_from_slice(starts);
        bounds.push(self.xs.len());
        let shortfall: usize = bounds
            .windows(2)
            .map(|w| 2usize.saturating_sub(w[1].saturating_sub(w[0])))
            .sum();
        if shortfall > 0 {
            return PENALTY + shortfall as f64;
        }
        bounds
            .windows(2)
            .map(|w| self.line(w[0], w[1]).error)
            .fold(0.0, f64::max)
    }

    fn free_objective(&self, free: &[usize]) -> f64 {
        self.objective(&self.expand(free))
    }

    fn build(&self, starts: &[usize]) -> Result<(PiecewiseLinearModel, f64, f64)> {
        let mut bounds = vec![0];
        bounds.extend_from_slice(starts);
        bounds.push(self.xs.len());
        let mut breakpoints = vec![0.0];
        breakpoints.extend(starts.iter().map(|&j| self.xs[j]));
        breakpoints.push(1.0);
        let (mut intercepts, mut slopes) = (Vec::new(), Vec::new());
        let mut worst = (0.0, 0.0);
        for w in bounds.windows(2) {
            let f = self.line(w[0], w[1]);
            intercepts.push(f.intercept);
            slopes.push(f.slope);
            for i in w[0]..w[1] {
                let e = (f.intercept + f.slope * self.xs[i] - self.ys[i]).abs();
                if e > worst.0 {
                    worst = (e, self.xs[i]);
                }
            }
        }
        let model = PiecewiseLinearModel::new(breakpoints, intercepts, slopes)?;
        Ok((model, worst.0, worst.1))
    }

    /// Coordinate descent on the free indices with shrinking step sizes.
    fn polish(&self, mut free: Vec<usize>) -> Vec<usize> {
        let mut best = self.free_objective(&free);
        let last = self.xs.len() - 1;
        let mut step = (self.xs.len() / 200).max(1);
        loop {
            let mut improved = false;
            for k in 0..free.len() {
                for dir in [-1i64, 1] {
                    let cand = free[k] as i64 + dir * step as i64;
                    if cand < 1 || cand as usize >= last {
                        continue;
                    }
                    let mut trial = free.clone();
                    trial[k] = cand as usize;
                    let f = self.free_objective(&trial);
                    if f < best {
                        best = f;
                        free = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                if step == 1 {
                    break;
                }
                step /= 2;
            }
        }
        free
    }
}

/// Fit `cfg.n_segments` affine pieces to `target` on [0, 1].
///
/// Returns [`Error::NotConverged`] carrying the best model when the population has
/// not collapsed within `max_iterations` generations.
pub fn fit_piecewise<F>(target: F, cfg: &FitConfig) -> Result<FitOutcome>
where
    F: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    let last = (cfg.grid_size - 1) as f64;
    let xs: Vec<f64> = (0..cfg.grid_size).map(|i| i as f64 / last).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| target(x)).collect();
    let problem = Problem { xs, ys, cfg };
    let dims = problem.dims();

    let (free, generations, converged) = if dims == 0 {
        (Vec::new(), 0, true)
    } else {
        differential_evolution(&problem, dims)
    };
    let free = problem.polish(free);
    let starts = problem.expand(&free);
    let (model, max_error, argmax) = problem.build(&starts)?;
    let outcome = FitOutcome {
        model,
        max_error,
        argmax,
        generations,
        converged,
        inner: cfg.inner,
    };
    if converged {
        Ok(outcome)
    } else {
        Err(Error::NotConverged {
            iterations: generations,
            best: Box::new(outcome),
        })
    }
}

/// Returns the best free index vector, generations run, and whether the
/// population converged.
fn differential_evolution(problem: &Problem<'_>, dims: usize) -> (Vec<usize>, usize, bool) {
    let cfg = problem.cfg;
    let np = cfg.population;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| (0..dims).map(|_| rng.random::<f64>()).collect())
        .collect();
    let eval = |genes: &Vec<f64>| problem.free_objective(&problem.genes_to_indices(genes));
    let mut fit: Vec<f64> = pop.par_iter().map(eval).collect();

    let mut generations = 0;
    let mut converged = false;
    while generations < cfg.max_iterations {
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.random_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let a = pick();
                let b = loop {
                    let r = pick();
                    if r != a {
                        break r;
                    }
                };
                let c = loop {
                    let r = pick();
                    if r != a && r != b {
                        break r;
                    }
                };
                let forced = rng.random_range(0..dims);
                (0..dims)
                    .map(|j| {
                        if j == forced || rng.random::<f64>() < cfg.crossover {
                            reflect(pop[a][j] + cfg.differential_weight * (pop[b][j] - pop[c][j]))
                        } else {
                            pop[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_fit: Vec<f64> = trials.par_iter().map(eval).collect();
        for (i, (t, f)) in trials.into_iter().zip(trial_fit).enumerate() {
            if f <= fit[i] {
                pop[i] = t;
                fit[i] = f;
            }
        }
        generations += 1;

        let (lo, hi) = fit
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &f| {
                (a.min(f), b.max(f))
            });
        if hi - lo <= cfg.tolerance * lo.abs() + f64::MIN_POSITIVE {
            converged = true;
            break;
        }
    }
    let best = (0..np)
        .min_by(|&a, &b| fit[a].total_cmp(&fit[b]))
        .expect("population is nonempty");
    (problem.genes_to_indices(&pop[best]), generations, converged)
}

/// Fold a coordinate back into [0, 1].
fn reflect(v: f64) -> f64 {
    let mut v = v;
    if v < 0.0 {
        v = -v;
    }
    if v > 1.0 {
        v = 2.0 - v;
    }
    v.clamp(0.0, 1.0)
}
