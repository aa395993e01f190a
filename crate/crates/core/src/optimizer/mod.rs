//! Multistart maximization of the figure of merit over the demon's
//! parameters in the unit box.
//!
//! A coarse grid is evaluated first; the best grid points plus a set of
//! rotated Halton points seed independent simplex runs, and the best run
//! wins. The reflectance axes of the grid and of the Halton points are
//! log-spaced on `[1e-4, 0.9]` because optima sit near `R ≈ 2/n̄`.
//!
//! Runs are independent, so callers may execute [`Optimizer::run_start`] in
//! parallel and hand the results, in seed order, to [`Optimizer::finish`];
//! the outcome is identical to [`optimize`].

mod polish;
mod simplex;
mod sweep;

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::channel::{outcome_reports, DemonParams};
use crate::error::{Error, Result};
use crate::merit::{best_strategy, delta_n, PolarityStrategy};
use crate::state::JointNumberState;

pub use sweep::{sweep, sweep_with, StateFamily, SweepPoint};

use simplex::{minimize, SimplexSettings};

const R_MIN: f64 = 1e-4;
const R_MAX: f64 = 0.9;

/// Relative tolerance under which two optima count as tied.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `⟨Δn⟩` itself.
    TotalDelta,
    /// `⟨Δn⟩` minus the no-demon baseline.
    DemonContribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyMode {
    /// Pick the best polarity strategy at every evaluation.
    Pointwise,
    /// Keep one strategy throughout.
    Fixed(PolarityStrategy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub objective: Objective,
    pub strategy: StrategyMode,
    /// Share one reflectance between the modes (3 parameters) or not (4).
    pub common_r: bool,
    pub starts: usize,
    /// Nodes per axis of the coarse grid.
    pub grid: usize,
    pub ftol: f64,
    pub xtol: f64,
    /// Evaluation budget per start.
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            objective: Objective::TotalDelta,
            strategy: StrategyMode::Pointwise,
            common_r: true,
            starts: 16,
            grid: 9,
            ftol: 1e-10,
            xtol: 1e-8,
            max_evals: 10_000,
            seed: 0,
        }
    }
}

/// Result of one simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct StartSummary {
    pub start: DemonParams,
    pub params: DemonParams,
    pub strategy: PolarityStrategy,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub projections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub params: DemonParams,
    pub strategy: PolarityStrategy,
    pub value: f64,
    /// Objective evaluations across grid, starts and candidate checks.
    pub evaluations: usize,
    pub converged: bool,
    pub starts: usize,
    /// Trial points clamped onto the box.
    pub projections: usize,
    pub runs: Vec<StartSummary>,
}

/// Objective of one state under a fixed configuration.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    state: &'a JointNumberState,
    objective: Objective,
    strategy: StrategyMode,
    common_r: bool,
    means: (f64, f64),
}

impl<'a> Problem<'a> {
    pub fn new(state: &'a JointNumberState, config: &OptimizerConfig) -> Self {
        Self {
            state,
            objective: config.objective,
            strategy: config.strategy,
            common_r: config.common_r,
            means: state.marginal_means(),
        }
    }

    pub fn dim(&self) -> usize {
        if self.common_r {
            3
        } else {
            4
        }
    }

    /// Box coordinates: `(R, η_A, η_B)` or `(R_A, R_B, η_A, η_B)`.
    pub fn params_at(&self, x: &[f64]) -> Result<DemonParams> {
        if self.common_r {
            DemonParams::new(x[0], x[1], x[2])
        } else {
            DemonParams::independent(x[0], x[1], x[2], x[3])
        }
    }

    pub fn coords_of(&self, p: &DemonParams) -> Vec<f64> {
        if self.common_r {
            alloc::vec![p.r_a(), p.eta_a(), p.eta_b()]
        } else {
            p.to_array().to_vec()
        }
    }

    fn is_r_axis(&self, i: usize) -> bool {
        if self.common_r {
            i == 0
        } else {
            i < 2
        }
    }

    /// Objective value and the strategy that attains it.
    pub fn evaluate(&self, params: &DemonParams) -> Result<(PolarityStrategy, f64)> {
        let reports = outcome_reports(self.state, params);
        let (strategy, mut value) = match self.strategy {
            StrategyMode::Pointwise => best_strategy(reports.as_slice()),
            StrategyMode::Fixed(s) => (s, delta_n(reports.as_slice(), s)),
        };
        if self.objective == Objective::DemonContribution {
            let (mean_a, mean_b) = self.means;
            value -= (1.0 - params.r_b()) * mean_b - (1.0 - params.r_a()) * mean_a;
        }
        if !value.is_finite() {
            let [r_a, r_b, eta_a, eta_b] = params.to_array();
            return Err(Error::NumericalFailure { r_a, r_b, eta_a, eta_b, value });
        }
        Ok((strategy, value))
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

const HALTON_BASES: [u64; 4] = [2, 3, 5, 7];

/// Candidate ordering: higher value, then fewer switched outcomes, then
/// lexicographically larger `(R_A, R_B, η_A, η_B)`.
fn compare(a: &StartSummary, b: &StartSummary) -> Ordering {
    let scale = a.value.abs().max(b.value.abs()).max(1.0);
    if (a.value - b.value).abs() > TIE_TOL * scale {
        return a.value.total_cmp(&b.value);
    }
    b.strategy
        .switch_count()
        .cmp(&a.strategy.switch_count())
        .then_with(|| {
            let (x, y) = (a.params.to_array(), b.params.to_array());
            x.iter()
                .zip(&y)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

pub struct Optimizer<'a> {
    problem: Problem<'a>,
    config: OptimizerConfig,
    settings: SimplexSettings,
}

impl<'a> Optimizer<'a> {
    pub fn new(state: &'a JointNumberState, config: &OptimizerConfig) -> Self {
        Self {
            problem: Problem::new(state, config),
            config: config.clone(),
            settings: SimplexSettings {
                ftol: config.ftol,
                xtol: config.xtol,
                max_evals: config.max_evals,
                restarts: 3,
            },
        }
    }

    pub fn problem(&self) -> &Problem<'a> {
        &self.problem
    }

    /// The state has no photons, so every parameter choice gives zero.
    pub fn is_degenerate(&self) -> bool {
        let (a, b) = self.problem.means;
        a + b <= f64::MIN_POSITIVE
    }

    fn axis_value(&self, axis: usize, u: f64) -> f64 {
        if self.problem.is_r_axis(axis) {
            R_MIN * libm::pow(R_MAX / R_MIN, u)
        } else {
            u
        }
    }

    /// Coarse-grid evaluation followed by seed selection. Returns the start
    /// points (warm starts first) and the number of evaluations spent.
    pub fn seeds(&self, warm: &[DemonParams]) -> Result<(Vec<Vec<f64>>, usize)> {
        let d = self.problem.dim();
        let g = self.config.grid.max(2);
        let total = g.pow(d as u32);
        let mut scored: Vec<(f64, Vec<f64>)> = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rest = idx;
            let mut x = Vec::with_capacity(d);
            for axis in 0..d {
                let k = rest % g;
                rest /= g;
                x.push(self.axis_value(axis, k as f64 / (g - 1) as f64));
            }
            let (_, v) = self.problem.evaluate(&self.problem.params_at(&x)?)?;
            scored.push((v, x));
        }
        // stable sort keeps grid order among equal values
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));

        let mut seeds: Vec<Vec<f64>> = warm.iter().map(|p| self.problem.coords_of(p)).collect();
        let n_grid = self.config.starts / 2;
        seeds.extend(scored.into_iter().take(n_grid).map(|(_, x)| x));

        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let shift: Vec<f64> = (0..d).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).collect();
        for i in 0..self.config.starts - n_grid {
            let x = (0..d)
                .map(|axis| {
                    let u = radical_inverse(i as u64 + 1, HALTON_BASES[axis]) + shift[axis];
                    self.axis_value(axis, u - libm::floor(u))
                })
                .collect();
            seeds.push(x);
        }
        Ok((seeds, total))
    }

    pub fn run_start(&self, x0: &[f64]) -> Result<StartSummary> {
        let problem = &self.problem;
        let out = minimize(|x| problem.evaluate(&problem.params_at(x)?).map(|(_, v)| -v), x0, self.settings)?;
        let params = problem.params_at(&out.x)?;
        let (strategy, value) = problem.evaluate(&params)?;
        Ok(StartSummary {
            start: problem.params_at(x0)?,
            params,
            strategy,
            value,
            evaluations: out.evals + 1,
            converged: out.converged,
            projections: out.projections,
        })
    }

    /// Merges runs (in seed order) with their A↔B mirror images.
    pub fn finish(&self, runs: Vec<StartSummary>, grid_evals: usize) -> Result<OptimizationResult> {
        let mut evaluations = grid_evals + runs.iter().map(|r| r.evaluations).sum::<usize>();
        let projections = runs.iter().map(|r| r.projections).sum();
        let mut best: Option<StartSummary> = None;
        for run in &runs {
            let mirror_params = run.params.mirrored();
            let (strategy, value) = self.problem.evaluate(&mirror_params)?;
            evaluations += 1;
            let mirror = StartSummary { params: mirror_params, strategy, value, ..run.clone() };
            for cand in [run, &mirror] {
                if best.as_ref().is_none_or(|b| compare(cand, b) == Ordering::Greater) {
                    best = Some(cand.clone());
                }
            }
        }
        let best = best.ok_or(Error::EmptyGrid)?;
        let (best, polish_evals) = self.polish(best)?;
        evaluations += polish_evals;
        Ok(OptimizationResult {
            params: best.params,
            strategy: best.strategy,
            value: best.value,
            evaluations,
            converged: best.converged,
            starts: runs.len(),
            projections,
            runs,
        })
    }

    /// Newton refinement of the winner's interior coordinates.
    fn polish(&self, best: StartSummary) -> Result<(StartSummary, usize)> {
        let problem = &self.problem;
        let x0 = problem.coords_of(&best.params);
        let out = polish::polish(|x: &[f64]| problem.evaluate(&problem.params_at(x)?).map(|(_, v)| v), &x0, best.value)?;
        if out.x == x0 {
            return Ok((best, out.evals));
        }
        let params = problem.params_at(&out.x)?;
        let (strategy, value) = problem.evaluate(&params)?;
        Ok((StartSummary { params, strategy, value, ..best }, out.evals + 1))
    }

    fn zero_result(&self) -> Result<OptimizationResult> {
        let x = alloc::vec![0.0; self.problem.dim()];
        let params = self.problem.params_at(&x)?;
        let (strategy, value) = self.problem.evaluate(&params)?;
        Ok(OptimizationResult {
            params,
            strategy,
            value,
            evaluations: 1,
            converged: true,
            starts: 0,
            projections: 0,
            runs: Vec::new(),
        })
    }

    /// Serial driver: seeds, runs, merge.
    pub fn run(&self, warm: &[DemonParams]) -> Result<OptimizationResult> {
        if self.is_degenerate() {
            return self.zero_result();
        }
        let (seeds, grid_evals) = self.seeds(warm)?;
        let runs = seeds.iter().map(|x| self.run_start(x)).collect::<Result<Vec<_>>>()?;
        self.finish(runs, grid_evals)
    }

    /// Exposed for callers that parallelize runs.
    pub fn zero_if_degenerate(&self) -> Option<Result<OptimizationResult>> {
        self.is_degenerate().then(|| self.zero_result())
    }
}

/// Maximizes the configured objective for `state`.
pub fn optimize(state: &JointNumberState, config: &OptimizerConfig) -> Result<OptimizationResult> {
    Optimizer::new(state, config).run(&[])
}

/// As [`optimize`], with extra start points tried before the fresh seeds.
pub fn optimize_warm(state: &JointNumberState, config: &OptimizerConfig, warm: &[DemonParams]) -> Result<OptimizationResult> {
    Optimizer::new(state, config).run(warm)
}
