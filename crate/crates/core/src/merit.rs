//! Feed-forward figure of merit `⟨Δn⟩ = Σ_C (−1)^{s(C)} P_C ⟨Δn⟩_C`, the
//! polarity strategy `s`, and the single-copy passivity test.

use core::fmt;

use crate::channel::{outcome_reports, DemonParams, Outcome, OutcomeStats};
use crate::error::{Error, Result};
use crate::state::JointNumberState;

/// Which outcomes flip the capacitor polarity. Bit `c.index()` set means
/// `s(c) = 1`, so the mask order is `(0,0), (0,1), (1,0), (1,1)` from the
/// least significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PolarityStrategy(u8);

impl PolarityStrategy {
    /// Never switch.
    pub const KEEP: Self = Self(0);

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits < 16).then_some(Self(bits))
    }

    /// Switch exactly on the listed outcomes.
    pub fn switching(outcomes: &[Outcome]) -> Self {
        Self(outcomes.iter().fold(0, |m, c| m | (1 << c.index())))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn switches(self, c: Outcome) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn sign(self, c: Outcome) -> f64 {
        if self.switches(c) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn switch_count(self) -> u32 {
        self.0.count_ones()
    }

    /// All sixteen strategies.
    pub fn all() -> impl Iterator<Item = Self> {
        (0u8..16).map(Self)
    }
}

impl fmt::Display for PolarityStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in Outcome::ALL.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "s{}={}", c, self.switches(*c) as u8)?;
        }
        Ok(())
    }
}

/// `Σ_C (−1)^{s(C)} P_C ⟨Δn⟩_C`.
pub fn delta_n<S: OutcomeStats>(reports: &[S], strategy: PolarityStrategy) -> f64 {
    reports
        .iter()
        .map(|r| strategy.sign(r.outcome()) * r.weighted_delta())
        .sum()
}

/// Pointwise-optimal strategy: switch exactly where `⟨Δn⟩_C < 0`. Its value is
/// `Σ_C P_C |⟨Δn⟩_C|`, which no fixed strategy can exceed.
pub fn best_strategy<S: OutcomeStats>(reports: &[S]) -> (PolarityStrategy, f64) {
    let mut strategy = PolarityStrategy::KEEP;
    let mut value = 0.0;
    for r in reports {
        if r.delta() < 0.0 {
            strategy.0 |= 1 << r.outcome().index();
        }
        value += libm::fabs(r.weighted_delta());
    }
    (strategy, value)
}

/// Photon-number difference the transmitted beams deliver without any
/// feed-forward, `(1 − R_B) n̄_B − (1 − R_A) n̄_A`.
pub fn baseline(state: &JointNumberState, params: &DemonParams) -> f64 {
    let (mean_a, mean_b) = state.marginal_means();
    (1.0 - params.r_b()) * mean_b - (1.0 - params.r_a()) * mean_a
}

/// What the demon adds on top of [`baseline`] under `strategy`.
pub fn demon_contribution(state: &JointNumberState, params: &DemonParams, strategy: PolarityStrategy) -> f64 {
    let reports = outcome_reports(state, params);
    delta_n(reports.as_slice(), strategy) - baseline(state, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassivityReason {
    /// `n̄_A ≠ n̄_B`: the capacitor charges without any help.
    MeansDiffer,
    /// `n̄_A = n̄_B ≠ n̄_T`: thermalizing one mode with the bath creates a bias.
    MeanDiffersFromBath,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassivityVerdict {
    pub passive: bool,
    pub reason: PassivityReason,
}

/// Single-copy passivity under the charging scheme with a free bath of mean
/// occupation `nbar_bath`: passive iff `n̄_A = n̄_B = n̄_T` within `tol`.
pub fn classify_passive(state: &JointNumberState, nbar_bath: f64, tol: f64) -> Result<PassivityVerdict> {
    if !(nbar_bath > 0.0) || !nbar_bath.is_finite() {
        return Err(Error::InvalidSpec { what: "nbar_bath", value: nbar_bath });
    }
    let (mean_a, mean_b) = state.marginal_means();
    let reason = if libm::fabs(mean_a - mean_b) > tol {
        PassivityReason::MeansDiffer
    } else if libm::fabs(mean_a - nbar_bath) > tol {
        PassivityReason::MeanDiffersFromBath
    } else {
        PassivityReason::Passive
    };
    Ok(PassivityVerdict { passive: reason == PassivityReason::Passive, reason })
}
