//! Rayon drivers. Starts run in parallel but are merged in seed order, so the
//! results are bit-identical to the serial optimizer.

use demon_core::optimizer::{sweep_with, Optimizer, SweepPoint};
use demon_core::{DemonParams, JointNumberState, OptimizationResult, OptimizerConfig, Result, StateFamily};
use rayon::prelude::*;

pub fn optimize(state: &JointNumberState, config: &OptimizerConfig, warm: &[DemonParams]) -> Result<OptimizationResult> {
    let opt = Optimizer::new(state, config);
    if let Some(zero) = opt.zero_if_degenerate() {
        return zero;
    }
    let (seeds, grid_evals) = opt.seeds(warm)?;
    let runs = seeds.par_iter().map(|x| opt.run_start(x)).collect::<Result<Vec<_>>>()?;
    opt.finish(runs, grid_evals)
}

pub fn sweep(family: StateFamily, grid: &[f64], config: &OptimizerConfig, eps_tail: f64) -> Result<Vec<SweepPoint>> {
    sweep_with(family, grid, config, eps_tail, optimize)
}
