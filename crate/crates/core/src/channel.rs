//! The demon's measurement: a beam splitter on each mode followed by an
//! inefficient click/no-click counter on the reflected port.
//!
//! Per mode, a Fock state `|n⟩` is routed binomially (each photon reflected
//! with probability `R`); the counter fails to click on `k` reflected
//! photons with probability `(1 − η)^k`. Summed over `k` this gives
//!
//! * `P(no click | n) = (1 − Rη)ⁿ`
//! * `Σ_k P(k | n) (1 − η)^k (n − k) = n (1 − R) (1 − Rη)^{n−1}`
//! * unconditional transmitted mean `n (1 − R)`
//!
//! The two modes are measured independently, so joint outcome weights are
//! products of the per-mode factors.

use core::fmt;
use core::ops::Index;

use crate::error::{Error, Result};
use crate::numeric::powu;
use crate::state::{JointNumberState, ModePmf};

/// Joint click pattern `(c_A, c_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub click_a: bool,
    pub click_b: bool,
}

impl Outcome {
    pub const NONE: Outcome = Outcome::new(false, false);
    pub const ONLY_B: Outcome = Outcome::new(false, true);
    pub const ONLY_A: Outcome = Outcome::new(true, false);
    pub const BOTH: Outcome = Outcome::new(true, true);

    /// Canonical order `(0,0), (0,1), (1,0), (1,1)`.
    pub const ALL: [Outcome; 4] = [Self::NONE, Self::ONLY_B, Self::ONLY_A, Self::BOTH];

    pub const fn new(click_a: bool, click_b: bool) -> Self {
        Self { click_a, click_b }
    }

    /// Position in [`Outcome::ALL`]; also the bit used by strategy masks.
    pub const fn index(self) -> usize {
        ((self.click_a as usize) << 1) | self.click_b as usize
    }

    pub const fn from_index(i: usize) -> Self {
        Self::new(i & 2 != 0, i & 1 != 0)
    }

    /// The outcome with the roles of the two counters exchanged.
    pub const fn mirrored(self) -> Self {
        Self::new(self.click_b, self.click_a)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.click_a as u8, self.click_b as u8)
    }
}

/// Reflectances and counter efficiencies of the demon.
///
/// By default both modes share one reflectance; [`DemonParams::independent`]
/// lifts that restriction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemonParams {
    r_a: f64,
    r_b: f64,
    eta_a: f64,
    eta_b: f64,
    independent: bool,
}

fn unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidParams { name, value })
    }
}

impl DemonParams {
    pub fn new(r: f64, eta_a: f64, eta_b: f64) -> Result<Self> {
        let r = unit("R", r)?;
        Ok(Self {
            r_a: r,
            r_b: r,
            eta_a: unit("eta_A", eta_a)?,
            eta_b: unit("eta_B", eta_b)?,
            independent: false,
        })
    }

    pub fn independent(r_a: f64, r_b: f64, eta_a: f64, eta_b: f64) -> Result<Self> {
        Ok(Self {
            r_a: unit("R_A", r_a)?,
            r_b: unit("R_B", r_b)?,
            eta_a: unit("eta_A", eta_a)?,
            eta_b: unit("eta_B", eta_b)?,
            independent: true,
        })
    }

    pub fn r_a(&self) -> f64 {
        self.r_a
    }

    pub fn r_b(&self) -> f64 {
        self.r_b
    }

    pub fn eta_a(&self) -> f64 {
        self.eta_a
    }

    pub fn eta_b(&self) -> f64 {
        self.eta_b
    }

    pub fn is_independent(&self) -> bool {
        self.independent
    }

    /// The shared reflectance, if the modes use one.
    pub fn common_r(&self) -> Option<f64> {
        (!self.independent || self.r_a == self.r_b).then_some(self.r_a)
    }

    /// `(R_A, R_B, η_A, η_B)`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.r_a, self.r_b, self.eta_a, self.eta_b]
    }

    /// Parameters with modes A and B exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            r_a: self.r_b,
            r_b: self.r_a,
            eta_a: self.eta_b,
            eta_b: self.eta_a,
            independent: self.independent,
        }
    }
}

impl fmt::Display for DemonParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.independent {
            write!(
                f,
                "R_A={:.6} R_B={:.6} eta_A={:.6} eta_B={:.6}",
                self.r_a, self.r_b, self.eta_a, self.eta_b
            )
        } else {
            write!(f, "R={:.6} eta_A={:.6} eta_B={:.6}", self.r_a, self.eta_a, self.eta_b)
        }
    }
}

/// Per-mode reductions of the splitter + counter channel for a Fock input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeKernel {
    /// `P(no click | n)`.
    pub p_noclick: f64,
    /// Transmitted photon number weighted by the no-click probability.
    pub kept_noclick: f64,
    /// Unconditional transmitted mean.
    pub kept_total: f64,
}

impl ModeKernel {
    pub fn p_click(&self) -> f64 {
        1.0 - self.p_noclick
    }

    pub fn kept_click(&self) -> f64 {
        self.kept_total - self.kept_noclick
    }
}

/// Closed-form per-mode kernel.
pub fn mode_kernel(n: u32, r: f64, eta: f64) -> ModeKernel {
    let q = 1.0 - r * eta;
    let nf = n as f64;
    ModeKernel {
        p_noclick: powu(q, n),
        kept_noclick: if n == 0 { 0.0 } else { nf * (1.0 - r) * powu(q, n - 1) },
        kept_total: nf * (1.0 - r),
    }
}

/// The same kernel as an explicit sum over the binomial splitter output
/// and the counter's POVM elements. Quadratic in `n`; used as an oracle.
#[cfg(any(test, feature = "oracle"))]
pub fn mode_kernel_binomial(n: u32, r: f64, eta: f64) -> ModeKernel {
    let mut p_noclick = 0.0;
    let mut kept_noclick = 0.0;
    let mut kept_total = 0.0;
    let mut binom = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        let split = binom * powu(r, k) * powu(1.0 - r, n - k);
        let miss = powu(1.0 - eta, k);
        let kept = (n - k) as f64;
        p_noclick += split * miss;
        kept_noclick += split * miss * kept;
        kept_total += split * kept;
    }
    ModeKernel { p_noclick, kept_noclick, kept_total }
}

/// Statistics the figure of merit needs from one outcome.
pub trait OutcomeStats {
    fn outcome(&self) -> Outcome;
    /// `P_C`.
    fn prob(&self) -> f64;
    /// `⟨Δn⟩_C = n̄_{B|C} − n̄_{A|C}`.
    fn delta(&self) -> f64;

    fn weighted_delta(&self) -> f64 {
        self.prob() * self.delta()
    }
}

/// Probability and conditional transmitted means for one outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeReport {
    pub outcome: Outcome,
    pub prob: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub delta: f64,
    /// `false` when `P_C = 0`; the means are then reported as 0.
    pub defined: bool,
}

impl OutcomeReport {
    fn from_sums(outcome: Outcome, prob: f64, weighted_a: f64, weighted_b: f64) -> Self {
        if prob > 0.0 {
            let mean_a = weighted_a / prob;
            let mean_b = weighted_b / prob;
            Self { outcome, prob, mean_a, mean_b, delta: mean_b - mean_a, defined: true }
        } else {
            Self { outcome, prob: 0.0, mean_a: 0.0, mean_b: 0.0, delta: 0.0, defined: false }
        }
    }
}

impl OutcomeStats for OutcomeReport {
    fn outcome(&self) -> Outcome {
        self.outcome
    }
    fn prob(&self) -> f64 {
        self.prob
    }
    fn delta(&self) -> f64 {
        self.delta
    }
}

/// Reports for all four outcomes in [`Outcome::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeReports(pub [OutcomeReport; 4]);

impl OutcomeReports {
    pub fn iter(&self) -> core::slice::Iter<'_, OutcomeReport> {
        self.0.iter()
    }

    pub fn total_prob(&self) -> f64 {
        self.0.iter().map(|r| r.prob).sum()
    }

    /// `Σ_C P_C (n̄_{A|C} + n̄_{B|C})`.
    pub fn transmitted_photons(&self) -> f64 {
        self.0.iter().map(|r| r.prob * (r.mean_a + r.mean_b)).sum()
    }

    pub fn as_slice(&self) -> &[OutcomeReport] {
        &self.0
    }
}

impl Index<Outcome> for OutcomeReports {
    type Output = OutcomeReport;

    fn index(&self, c: Outcome) -> &OutcomeReport {
        &self.0[c.index()]
    }
}

/// Accumulated `(P, P·n̄_A, P·n̄_B)` per outcome.
type Sums = [[f64; 3]; 4];

fn reports_from_sums(sums: &Sums) -> OutcomeReports {
    OutcomeReports(core::array::from_fn(|i| {
        let [p, wa, wb] = sums[i];
        OutcomeReport::from_sums(Outcome::from_index(i), p, wa, wb)
    }))
}

/// Per-mode sums over a pmf: `[no-click, click]` weights and the matching
/// transmitted-photon weights.
#[derive(Debug, Clone, Copy)]
struct ModeSums {
    weight: [f64; 2],
    kept: [f64; 2],
}

/// `(Σ p_n zⁿ, Σ n p_n zⁿ⁻¹)` with `z = 1 − d`.
fn power_sums(pmf: &ModePmf, d: f64) -> (f64, f64) {
    match pmf.geometric() {
        Some((vacuum, lambda)) => geometric_power_sums(vacuum, lambda, pmf.probs().len(), d),
        None => direct_power_sums(pmf.probs(), d),
    }
}

/// `Σ_{n<N} xⁿ` and `Σ_{n<N} n xⁿ⁻¹` given `1 − x`.
fn geometric_series(x: f64, one_minus_x: f64, len: usize) -> (f64, f64) {
    let n = len as f64;
    let x_n = libm::pow(x, n);
    let x_nm1 = libm::pow(x, n - 1.0);
    let s0 = (1.0 - x_n) / one_minus_x;
    let s1 = (1.0 - n * x_nm1 + (n - 1.0) * x_n) / (one_minus_x * one_minus_x);
    (s0, s1)
}

/// Closed form of [`direct_power_sums`] for `p_n = (1 − λ) λⁿ`, `n < len`.
/// Constant cost, which matters at n̄ ~ 10⁴ where the cutoff is ~3·10⁵.
fn geometric_power_sums(vacuum: f64, lambda: f64, len: usize, d: f64) -> (f64, f64) {
    let (s0, s1) = geometric_series(lambda * (1.0 - d), vacuum + lambda * d, len);
    (vacuum * s0, vacuum * lambda * s1)
}

fn direct_power_sums(probs: &[f64], d: f64) -> (f64, f64) {
    const ANCHOR: usize = 512;
    let z = 1.0 - d;
    let (mut s0, mut s1) = (0.0, 0.0);
    // z^{n-1} and z^n for the current n
    let mut prev = 0.0;
    let mut cur = 1.0;
    for (n, &p) in probs.iter().enumerate() {
        if n > 0 && n % ANCHOR == 0 {
            prev = powu(z, n as u32 - 1);
            cur = powu(z, n as u32);
        }
        s0 += p * cur;
        s1 += n as f64 * p * prev;
        prev = cur;
        cur *= z;
    }
    (s0, s1)
}

fn mode_sums(pmf: &ModePmf, r: f64, eta: f64) -> ModeSums {
    let (total, photons) = power_sums(pmf, 0.0);
    let (noclick, kept) = power_sums(pmf, r * eta);
    let kept_noclick = (1.0 - r) * kept;
    let kept_total = (1.0 - r) * photons;
    ModeSums {
        weight: [noclick, total - noclick],
        kept: [kept_noclick, kept_total - kept_noclick],
    }
}

/// Outcome reports for an uncorrelated state, from the two marginals alone.
/// Linear in the cutoff of each mode.
pub fn product_outcome_reports(a: &ModePmf, b: &ModePmf, params: &DemonParams) -> OutcomeReports {
    let sa = mode_sums(a, params.r_a, params.eta_a);
    let sb = mode_sums(b, params.r_b, params.eta_b);
    let mut sums: Sums = [[0.0; 3]; 4];
    for c in Outcome::ALL {
        let (ia, ib) = (c.click_a as usize, c.click_b as usize);
        sums[c.index()] = [
            sa.weight[ia] * sb.weight[ib],
            sa.kept[ia] * sb.weight[ib],
            sa.weight[ia] * sb.kept[ib],
        ];
    }
    reports_from_sums(&sums)
}

/// Outcome reports for one beam split binomially into the two modes.
///
/// Each input photon independently ends up detected in A (`c R_A η_A`),
/// kept in A (`c (1 − R_A)`), and likewise for B, so "no click in a set of
/// modes" has probability `zᴺ` and every outcome follows by
/// inclusion–exclusion over the sets. Linear in the input cutoff.
pub fn split_outcome_reports(input: &ModePmf, cos2: f64, sin2: f64, params: &DemonParams) -> OutcomeReports {
    let det_a = cos2 * params.r_a * params.eta_a;
    let det_b = sin2 * params.r_b * params.eta_b;
    let keep_a = cos2 * (1.0 - params.r_a);
    let keep_b = sin2 * (1.0 - params.r_b);
    // no click in: nothing, A, B, both
    let [all, na, nb, nab] = [0.0, det_a, det_b, det_a + det_b].map(|d| power_sums(input, d));
    let combos = [
        nab.0,
        na.0 - nab.0,
        nb.0 - nab.0,
        all.0 - na.0 - nb.0 + nab.0,
    ];
    let kept = [nab.1, na.1 - nab.1, nb.1 - nab.1, all.1 - na.1 - nb.1 + nab.1];
    let sums: Sums = core::array::from_fn(|i| [combos[i], keep_a * kept[i], keep_b * kept[i]]);
    reports_from_sums(&sums)
}

fn kernel_table(max_n: u32, r: f64, eta: f64, kernel: fn(u32, f64, f64) -> ModeKernel) -> alloc::vec::Vec<ModeKernel> {
    (0..=max_n).map(|n| kernel(n, r, eta)).collect()
}

fn lattice_reports(state: &JointNumberState, params: &DemonParams, kernel: fn(u32, f64, f64) -> ModeKernel) -> OutcomeReports {
    let ka = kernel_table(state.cutoff(), params.r_a, params.eta_a, kernel);
    let kb = kernel_table(state.cutoff(), params.r_b, params.eta_b, kernel);
    let mut sums: Sums = [[0.0; 3]; 4];
    for e in state.entries() {
        let a = &ka[e.n_a as usize];
        let b = &kb[e.n_b as usize];
        let wa = [a.p_noclick, a.p_click()];
        let ma = [a.kept_noclick, a.kept_click()];
        let wb = [b.p_noclick, b.p_click()];
        let mb = [b.kept_noclick, b.kept_click()];
        for c in Outcome::ALL {
            let (ia, ib) = (c.click_a as usize, c.click_b as usize);
            let s = &mut sums[c.index()];
            s[0] += e.p * wa[ia] * wb[ib];
            s[1] += e.p * ma[ia] * wb[ib];
            s[2] += e.p * wa[ia] * mb[ib];
        }
    }
    reports_from_sums(&sums)
}

/// Outcome probabilities and conditional transmitted means for any state.
///
/// Product states take the factorized path; everything else is a lattice
/// sum over the stored support.
pub fn outcome_reports(state: &JointNumberState, params: &DemonParams) -> OutcomeReports {
    if let Some((a, b)) = state.factors() {
        return product_outcome_reports(a, b, params);
    }
    if let Some((input, cos2, sin2)) = state.split_parts() {
        return split_outcome_reports(input, cos2, sin2, params);
    }
    lattice_reports(state, params, mode_kernel)
}

/// [`outcome_reports`] evaluated with the explicit binomial kernel on the
/// full lattice (product states included).
#[cfg(any(test, feature = "oracle"))]
pub fn outcome_reports_binomial(state: &JointNumberState, params: &DemonParams) -> OutcomeReports {
    lattice_reports(state, params, mode_kernel_binomial)
}

/// Mean photon number after a single-photon subtraction, `a ρ a† / tr{·}`:
/// `Σ n² p(n) / Σ n p(n) − 1`.
pub fn photon_subtracted_mean(pmf: &ModePmf) -> Result<f64> {
    let mean = pmf.mean();
    if !(mean > 0.0) {
        return Err(Error::UndefinedSubtraction);
    }
    Ok(pmf.second_moment() / mean - 1.0)
}
