//! Table and figure reproductions plus the ad-hoc eval/optimize/passivity
//! runs. Every function returns plain [`Table`]s; writing is the caller's job.

use std::f64::consts::FRAC_PI_4;

use anyhow::{bail, Context};
use demon_core::analytic::{fixed_m_max, equal_temp_plateau};
use demon_core::channel::outcome_reports;
use demon_core::merit::{baseline, best_strategy, classify_passive, delta_n};
use demon_core::optimizer::StartSummary;
use demon_core::state::{
    anticorrelated, product_thermal, split_thermal, thermal_marginal_anticorrelated, tmss_diagonal,
};
use demon_core::{
    DemonParams, JointNumberState, Objective, OptimizationResult, OptimizerConfig, PolarityStrategy, StateFamily,
    StrategyMode,
};

use crate::parallel;
use crate::table::{num, Table};

pub const PLATEAU: f64 = 16.0 / 27.0;

/// Knobs shared by every run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub eps_tail: f64,
    pub seed: u64,
    /// Evaluation budget per start.
    pub budget: usize,
    pub common_r: bool,
    /// Fixed strategy; `None` picks the best one pointwise.
    pub strategy: Option<PolarityStrategy>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            eps_tail: demon_core::DEFAULT_EPS_TAIL,
            seed: 0,
            budget: OptimizerConfig::default().max_evals,
            common_r: true,
            strategy: None,
        }
    }
}

impl Settings {
    pub fn config(&self, objective: Objective) -> OptimizerConfig {
        OptimizerConfig {
            objective,
            strategy: self.strategy.map_or(StrategyMode::Pointwise, StrategyMode::Fixed),
            common_r: self.common_r,
            seed: self.seed,
            max_evals: self.budget,
            ..OptimizerConfig::default()
        }
    }
}

/// A concrete two-mode input for the ad-hoc runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Thermal { nbar_a: f64, nbar_b: f64 },
    Split { nbar_in: f64, theta: f64 },
    Tmss { nbar: f64 },
    Anticorrelated { nbar: f64 },
    FixedM { m: u32 },
}

impl Family {
    pub fn build(&self, eps_tail: f64) -> demon_core::Result<JointNumberState> {
        match *self {
            Self::Thermal { nbar_a, nbar_b } => product_thermal(nbar_a, nbar_b, eps_tail),
            Self::Split { nbar_in, theta } => split_thermal(nbar_in, theta, eps_tail),
            Self::Tmss { nbar } => tmss_diagonal(nbar, eps_tail),
            Self::Anticorrelated { nbar } => thermal_marginal_anticorrelated(nbar, eps_tail),
            Self::FixedM { m } => {
                let mut q = vec![0.0; m as usize + 1];
                q[m as usize] = 1.0;
                anticorrelated(&q)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Thermal { .. } => "thermal",
            Self::Split { .. } => "split",
            Self::Tmss { .. } => "tmss",
            Self::Anticorrelated { .. } => "anticorrelated",
            Self::FixedM { .. } => "fixed-m",
        }
    }
}

const PARAM_COLUMNS: [&str; 6] = ["r_a", "r_b", "eta_a", "eta_b", "strategy", "converged"];

fn param_cells(res: &OptimizationResult) -> Vec<String> {
    let p = res.params;
    vec![
        num(p.r_a()),
        num(p.r_b()),
        num(p.eta_a()),
        num(p.eta_b()),
        num(res.strategy.bits()),
        num(res.converged),
    ]
}

fn header(lead: &[&str]) -> Vec<String> {
    lead.iter().chain(PARAM_COLUMNS.iter()).map(|s| s.to_string()).collect()
}

fn run_point(state: &JointNumberState, settings: &Settings, objective: Objective) -> anyhow::Result<OptimizationResult> {
    Ok(parallel::optimize(state, &settings.config(objective), &[])?)
}

// ---------------------------------------------------------------- table3

/// What a Table III cell is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Expected {
    fn abs(value: f64, tol: f64) -> Self {
        Self { value, lo: value - tol, hi: value + tol }
    }

    fn rel(value: f64, tol: f64) -> Self {
        let d = value.abs() * tol;
        Self { value, lo: value - d, hi: value + d }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

/// Mean photon number used for the "large n̄" column.
pub const LARGE_NBAR: f64 = 100.0;
/// Relative tolerance for the asymptotic large-n̄ entries.
pub const LARGE_REL_TOL: f64 = 0.05;

pub struct Table3Cell {
    pub state: &'static str,
    pub column: &'static str,
    pub nbar: f64,
    pub family: Family,
    pub expected: Expected,
}

pub fn table3_cells() -> Vec<Table3Cell> {
    let n = LARGE_NBAR;
    let m_large = (2.0 * n) as u32;
    let cell = |state, column, nbar, family, expected| Table3Cell { state, column, nbar, family, expected };
    vec![
        cell("uncorrelated", "n=1", 1.0, Family::Thermal { nbar_a: 1.0, nbar_b: 1.0 }, Expected::abs(0.255, 0.002)),
        cell("uncorrelated", "large", n, Family::Thermal { nbar_a: n, nbar_b: n }, Expected::rel(PLATEAU * n, LARGE_REL_TOL)),
        cell("split-thermal", "n=1", 1.0, Family::Split { nbar_in: 2.0, theta: FRAC_PI_4 }, Expected::abs(0.0, 1e-9)),
        cell("split-thermal", "large", n, Family::Split { nbar_in: 2.0 * n, theta: FRAC_PI_4 }, Expected::abs(0.0, 1e-9)),
        cell("number-correlated", "n=1", 1.0, Family::Tmss { nbar: 1.0 }, Expected::abs(0.272, 0.002)),
        cell("number-correlated", "large", n, Family::Tmss { nbar: n }, Expected { value: 0.7, lo: 0.65, hi: 0.72 }),
        cell("number-anticorrelated", "n=1", 1.0, Family::Anticorrelated { nbar: 1.0 }, Expected::abs(0.589, 0.002)),
        cell("number-anticorrelated-m", "n=1", 1.0, Family::FixedM { m: 2 }, Expected::abs(0.5, 1e-6)),
        cell("number-anticorrelated-m", "large", n, Family::FixedM { m: m_large }, Expected::rel(2.0 * n, LARGE_REL_TOL)),
    ]
}

/// Optimized demon contribution for every Table III entry next to its
/// expected value. The flag is false if any entry misses its window.
pub fn table3(settings: &Settings) -> anyhow::Result<(Table, bool)> {
    let mut t = Table::new(&header(&["state", "column", "nbar", "expected", "lo", "hi", "computed", "status"]));
    let mut all_ok = true;
    for c in table3_cells() {
        let state = c.family.build(settings.eps_tail).with_context(|| format!("building {} state", c.state))?;
        let res = run_point(&state, settings, Objective::DemonContribution)
            .with_context(|| format!("optimizing {} ({})", c.state, c.column))?;
        let ok = c.expected.contains(res.value);
        all_ok &= ok;
        let mut row = vec![
            c.state.to_string(),
            c.column.to_string(),
            num(c.nbar),
            num(c.expected.value),
            num(c.expected.lo),
            num(c.expected.hi),
            num(res.value),
            if ok { "ok" } else { "mismatch" }.to_string(),
        ];
        row.extend(param_cells(&res));
        t.push(row);
    }
    Ok((t, all_ok))
}

// ---------------------------------------------------------------- figures

pub const FIG_NBAR_GRID: [f64; 10] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
pub const FIG4_RATIOS: [f64; 3] = [1.0, 1.5, 2.0];
pub const FIG6_NBAR_A: f64 = 1e4;
pub const FIG7_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

pub fn fig6_ratios() -> Vec<f64> {
    (0..=12).map(|i| 0.85 + 0.025 * i as f64).collect()
}

fn sweep(
    family: StateFamily,
    grid: &[f64],
    settings: &Settings,
    objective: Objective,
) -> anyhow::Result<Vec<(f64, OptimizationResult)>> {
    let points = parallel::sweep(family, grid, &settings.config(objective), settings.eps_tail)?;
    points
        .into_iter()
        .map(|p| {
            let x = p.x;
            p.result.map(|r| (x, r)).with_context(|| format!("{family} at x = {x}"))
        })
        .collect()
}

/// Equal-temperature thermal optimum against n̄.
pub fn fig3(grid: &[f64], settings: &Settings) -> anyhow::Result<Table> {
    let mut t = Table::new(&header(&["nbar", "value", "value_over_nbar", "plateau"]));
    for (x, res) in sweep(StateFamily::EqualThermal, grid, settings, Objective::TotalDelta)? {
        let mut row = vec![num(x), num(res.value), num(res.value / x), num(equal_temp_plateau(x) / x)];
        row.extend(param_cells(&res));
        t.push(row);
    }
    Ok(t)
}

/// Fixed-ratio thermal sweeps; the demon contribution is optimized and
/// reported raw and scaled by n̄_A.
pub fn fig4(ratios: &[f64], grid: &[f64], settings: &Settings) -> anyhow::Result<Table> {
    let mut t = Table::new(&header(&[
        "ratio",
        "nbar_a",
        "nbar_b",
        "value",
        "demon",
        "demon_over_nbar_a",
        "asymptotic_demon",
    ]));
    for &ratio in ratios {
        for (x, res) in sweep(StateFamily::ProductThermal { ratio }, grid, settings, Objective::DemonContribution)? {
            let nbar_b = ratio * x;
            let total = res.value + (1.0 - res.params.r_b()) * nbar_b - (1.0 - res.params.r_a()) * x;
            let mut row = vec![
                num(ratio),
                num(x),
                num(nbar_b),
                num(total),
                num(res.value),
                num(res.value / x),
                num(PLATEAU * x * x / nbar_b),
            ];
            row.extend(param_cells(&res));
            t.push(row);
        }
    }
    Ok(t)
}

/// Number-correlated (TMSS) optimum against n̄.
pub fn fig5(grid: &[f64], settings: &Settings) -> anyhow::Result<Table> {
    let mut t = Table::new(&header(&["nbar", "value"]));
    for (x, res) in sweep(StateFamily::Tmss, grid, settings, Objective::TotalDelta)? {
        let mut row = vec![num(x), num(res.value)];
        row.extend(param_cells(&res));
        t.push(row);
    }
    Ok(t)
}

/// Backflow: n̄_A fixed, n̄_B varied, the strategy held fixed (default
/// `s(1,0) = 1`). Four series: no demon, no demon with the bias switched,
/// with the demon, and the demon's own share; plus the transmitted
/// baseline `(1 − R)(n̄_B − n̄_A)` at the optimum.
pub fn fig6(nbar_a: f64, ratios: &[f64], settings: &Settings) -> anyhow::Result<Table> {
    let mut settings = settings.clone();
    settings.strategy.get_or_insert(PolarityStrategy::switching(&[demon_core::Outcome::ONLY_A]));
    let grid: Vec<f64> = ratios.iter().map(|r| r * nbar_a).collect();
    let mut t = Table::new(&header(&[
        "nbar_a",
        "nbar_b",
        "no_demon",
        "switched_bias",
        "with_demon",
        "demon_only",
        "baseline_at_r",
    ]));
    for (nbar_b, res) in sweep(StateFamily::ProductThermalFixedA { nbar_a }, &grid, &settings, Objective::TotalDelta)? {
        let diff = nbar_b - nbar_a;
        let mut row = vec![
            num(nbar_a),
            num(nbar_b),
            num(diff),
            num(diff.abs()),
            num(res.value),
            num(res.value - diff),
            num((1.0 - res.params.r_a()) * diff),
        ];
        row.extend(param_cells(&res));
        t.push(row);
    }
    Ok(t)
}

/// Summary over the thermal-marginal families at equal means, n̄ ∈ (0, 1].
pub fn fig7(grid: &[f64], settings: &Settings) -> anyhow::Result<Table> {
    if let Some(&bad) = grid.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        bail!("fig7 needs 0 < nbar <= 1, got {bad}");
    }
    let obj = Objective::DemonContribution;
    let split_grid: Vec<f64> = grid.iter().map(|x| 2.0 * x).collect();
    let uncorrelated = sweep(StateFamily::EqualThermal, grid, settings, obj)?;
    let split = sweep(StateFamily::SplitThermal { theta: FRAC_PI_4 }, &split_grid, settings, obj)?;
    let tmss = sweep(StateFamily::Tmss, grid, settings, obj)?;
    let anti = sweep(StateFamily::AnticorrelatedThermal, grid, settings, obj)?;
    let mut t = Table::new(&["nbar", "uncorrelated", "split_thermal", "tmss", "anticorrelated"]);
    for i in 0..grid.len() {
        t.push(vec![
            num(grid[i]),
            num(uncorrelated[i].1.value),
            num(split[i].1.value),
            num(tmss[i].1.value),
            num(anti[i].1.value),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- ad hoc

/// Per-outcome report for one parameter point. The last three rows carry
/// `⟨Δn⟩`, the no-demon baseline and their difference.
pub fn eval(state: &JointNumberState, params: &DemonParams, strategy: Option<PolarityStrategy>) -> Table {
    let reports = outcome_reports(state, params);
    let strategy = strategy.unwrap_or_else(|| best_strategy(reports.as_slice()).0);
    let value = delta_n(reports.as_slice(), strategy);
    let base = baseline(state, params);
    let mut t = Table::new(&["outcome", "prob", "mean_a", "mean_b", "delta", "switched", "contribution"]);
    for r in reports.iter() {
        t.push(vec![
            r.outcome.to_string(),
            num(r.prob),
            num(r.mean_a),
            num(r.mean_b),
            if r.defined { num(r.delta) } else { String::new() },
            num(strategy.switches(r.outcome) as u8),
            num(strategy.sign(r.outcome) * r.prob * r.delta),
        ]);
    }
    let summary = |name: &str, v: f64| vec![name.to_string(), String::new(), String::new(), String::new(), String::new(), String::new(), num(v)];
    t.push(summary("total", value));
    t.push(summary("baseline", base));
    t.push(summary("demon", value - base));
    t
}

pub fn optimize(state: &JointNumberState, family: &str, objective: Objective, settings: &Settings) -> anyhow::Result<(Table, OptimizationResult)> {
    let res = run_point(state, settings, objective)?;
    let mut t = Table::new(&header(&["family", "objective", "value", "evaluations", "starts", "projections"]));
    let mut row = vec![
        family.to_string(),
        match objective {
            Objective::TotalDelta => "total",
            Objective::DemonContribution => "demon",
        }
        .to_string(),
        num(res.value),
        num(res.evaluations),
        num(res.starts),
        num(res.projections),
    ];
    row.extend(param_cells(&res));
    t.push(row);
    Ok((t, res))
}

/// One row per simplex run, in seed order.
pub fn trace(runs: &[StartSummary]) -> Table {
    let mut t = Table::new(&[
        "start", "r0_a", "r0_b", "eta0_a", "eta0_b", "value", "r_a", "r_b", "eta_a", "eta_b", "strategy", "evaluations",
        "converged", "projections",
    ]);
    for (i, r) in runs.iter().enumerate() {
        let mut row = vec![num(i)];
        row.extend(r.start.to_array().map(num));
        row.push(num(r.value));
        row.extend(r.params.to_array().map(num));
        row.extend([num(r.strategy.bits()), num(r.evaluations), num(r.converged), num(r.projections)]);
        t.push(row);
    }
    t
}

pub fn passivity(state: &JointNumberState, nbar_bath: f64, tol: f64) -> anyhow::Result<Table> {
    let v = classify_passive(state, nbar_bath, tol)?;
    let (ma, mb) = state.marginal_means();
    let mut t = Table::new(&["mean_a", "mean_b", "nbar_bath", "verdict", "reason"]);
    t.push(vec![
        num(ma),
        num(mb),
        num(nbar_bath),
        if v.passive { "passive" } else { "not passive" }.to_string(),
        format!("{:?}", v.reason),
    ]);
    Ok(t)
}

/// Closed-form optimum for the fixed-m family, used as a cross-check.
pub fn fixed_m_expected(m: u32) -> anyhow::Result<f64> {
    Ok(fixed_m_max(m)?.0)
}

/// Full lattice as `n_a, n_b, p` rows.
pub fn dump_state(state: &JointNumberState) -> Table {
    let mut t = Table::new(&["n_a", "n_b", "p"]);
    for e in state.entries() {
        t.push(vec![num(e.n_a), num(e.n_b), num(e.p)]);
    }
    t
}
