use alloc::vec::Vec;
use core::fmt;

use super::{optimize_warm, OptimizationResult, OptimizerConfig};
use crate::channel::DemonParams;
use crate::error::{Error, Result};
use crate::state::{
    anticorrelated, product_thermal, split_thermal, thermal_marginal_anticorrelated, tmss_diagonal, JointNumberState,
};

/// One-parameter state families; the sweep variable `x` is documented per
/// variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamily {
    /// `x = n̄` on both modes.
    EqualThermal,
    /// `x = n̄_A`, `n̄_B = ratio · n̄_A`.
    ProductThermal { ratio: f64 },
    /// `x = n̄_B`.
    ProductThermalFixedA { nbar_a: f64 },
    /// `x = n̄_in` split at angle `theta`.
    SplitThermal { theta: f64 },
    /// `x = n̄` per mode.
    Tmss,
    /// `x = n̄ <= 1`.
    AnticorrelatedThermal,
    /// `x = m`, rounded to the nearest integer.
    FixedM,
}

impl StateFamily {
    pub fn build(&self, x: f64, eps_tail: f64) -> Result<JointNumberState> {
        match *self {
            Self::EqualThermal => product_thermal(x, x, eps_tail),
            Self::ProductThermal { ratio } => product_thermal(x, ratio * x, eps_tail),
            Self::ProductThermalFixedA { nbar_a } => product_thermal(nbar_a, x, eps_tail),
            Self::SplitThermal { theta } => split_thermal(x, theta, eps_tail),
            Self::Tmss => tmss_diagonal(x, eps_tail),
            Self::AnticorrelatedThermal => thermal_marginal_anticorrelated(x, eps_tail),
            Self::FixedM => {
                if !(x >= 0.0) || x > (1u32 << 24) as f64 {
                    return Err(Error::InvalidSpec { what: "m", value: x });
                }
                let m = libm::round(x) as usize;
                let mut q = alloc::vec![0.0; m + 1];
                q[m] = 1.0;
                anticorrelated(&q)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::EqualThermal => "equal-thermal",
            Self::ProductThermal { .. } => "product-thermal",
            Self::ProductThermalFixedA { .. } => "product-thermal-fixed-a",
            Self::SplitThermal { .. } => "split-thermal",
            Self::Tmss => "tmss",
            Self::AnticorrelatedThermal => "anticorrelated-thermal",
            Self::FixedM => "fixed-m",
        }
    }
}

impl fmt::Display for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug)]
pub struct SweepPoint {
    pub x: f64,
    /// A failed point does not stop the sweep.
    pub result: Result<OptimizationResult>,
}

/// Optimizes every grid point, warm-starting from the last successful optimum.
pub fn sweep(family: StateFamily, grid: &[f64], config: &OptimizerConfig, eps_tail: f64) -> Result<Vec<SweepPoint>> {
    sweep_with(family, grid, config, eps_tail, |state, cfg, warm| optimize_warm(state, cfg, warm))
}

/// As [`sweep`] with a caller-supplied optimizer, e.g. a parallel one.
pub fn sweep_with<F>(
    family: StateFamily,
    grid: &[f64],
    config: &OptimizerConfig,
    eps_tail: f64,
    mut runner: F,
) -> Result<Vec<SweepPoint>>
where
    F: FnMut(&JointNumberState, &OptimizerConfig, &[DemonParams]) -> Result<OptimizationResult>,
{
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut warm: Option<DemonParams> = None;
    let mut out = Vec::with_capacity(grid.len());
    for &x in grid {
        let result = family
            .build(x, eps_tail)
            .and_then(|state| runner(&state, config, warm.as_slice()));
        if let Ok(r) = &result {
            warm = Some(r.params);
        }
        out.push(SweepPoint { x, result });
    }
    Ok(out)
}
