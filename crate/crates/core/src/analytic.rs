//! Closed-form outcome statistics for each state family.
//!
//! These are transcriptions of known expressions, kept independent of the
//! lattice engine in [`crate::channel`] so the two can check each other.
//!
//! Two different shorthands are in use for the "effective reflectance":
//! the thermal tables scale it by the mode's mean, `n̄_X R η_X`
//! ([`TableRTilde`]), while the two-mode squeezed state uses the bare
//! `η_X R` ([`AppendixRTilde`]). They are separate types so one cannot be
//! passed where the other is expected.

use crate::channel::{DemonParams, Outcome, OutcomeStats};
use crate::error::{Error, Result};
use crate::numeric::{bisect, powu};

/// `R̃_X = n̄_X R η_X`, the shorthand of the thermal tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRTilde {
    pub a: f64,
    pub b: f64,
}

impl TableRTilde {
    pub fn new(nbar_a: f64, nbar_b: f64, params: &DemonParams) -> Result<Self> {
        let r = shared_r(params)?;
        Ok(Self { a: nbar_a * r * params.eta_a(), b: nbar_b * r * params.eta_b() })
    }

    /// Inverse of the thermal click probability: `R̃_X = 1/(1 − p_X) − 1`.
    pub fn from_click_probs(p_a: f64, p_b: f64) -> Self {
        Self { a: 1.0 / (1.0 - p_a) - 1.0, b: 1.0 / (1.0 - p_b) - 1.0 }
    }
}

/// `R̃_X = η_X R`, the shorthand of the number-correlated state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixRTilde {
    pub a: f64,
    pub b: f64,
}

impl AppendixRTilde {
    pub fn new(params: &DemonParams) -> Result<Self> {
        let r = shared_r(params)?;
        Ok(Self { a: params.eta_a() * r, b: params.eta_b() * r })
    }
}

fn shared_r(params: &DemonParams) -> Result<f64> {
    params.common_r().ok_or(Error::IndependentReflectance)
}

/// Outcome probability and photon-number difference from a closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticReport {
    pub outcome: Outcome,
    pub prob: f64,
    pub delta: f64,
}

impl OutcomeStats for AnalyticReport {
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

fn reports(prob: [f64; 4], delta: [f64; 4]) -> [AnalyticReport; 4] {
    core::array::from_fn(|i| AnalyticReport { outcome: Outcome::from_index(i), prob: prob[i], delta: delta[i] })
}

/// Click probability of a counter behind a splitter on a thermal mode,
/// `Rηλ / (1 − λ + Rηλ)`. Bounded by `λ`.
pub fn click_prob_thermal(nbar: f64, r: f64, eta: f64) -> f64 {
    let lambda = nbar / (1.0 + nbar);
    let x = r * eta * lambda;
    x / (1.0 - lambda + x)
}

/// `(δ₁, δ₂, δ₃)` of the uncorrelated-thermal table.
pub fn table1_deltas(nbar_a: f64, nbar_b: f64, params: &DemonParams) -> Result<(f64, f64, f64)> {
    let r = shared_r(params)?;
    let (ea, eb) = (params.eta_a(), params.eta_b());
    let d1 = r * nbar_a * nbar_b * (ea - eb);
    let d2 = r * nbar_b * ((nbar_b - nbar_a) * eb + nbar_a * ea * (2.0 + r * nbar_b * eb));
    let d3 = r * nbar_a * ((nbar_b - nbar_a) * ea - nbar_b * eb * (2.0 + r * nbar_a * ea));
    Ok((d1, d2, d3))
}

/// Two uncorrelated thermal modes at (possibly) different temperatures.
pub fn table1_reports(nbar_a: f64, nbar_b: f64, params: &DemonParams) -> Result<[AnalyticReport; 4]> {
    let r = shared_r(params)?;
    let p_a = click_prob_thermal(nbar_a, r, params.eta_a());
    let p_b = click_prob_thermal(nbar_b, r, params.eta_b());
    let (d1, d2, d3) = table1_deltas(nbar_a, nbar_b, params)?;
    let p00 = (1.0 - p_a) * (1.0 - p_b);
    let scale = p00 * (1.0 - r);
    let prob = [p00, (1.0 - p_a) * p_b, p_a * (1.0 - p_b), p_a * p_b];
    let rows = [
        nbar_b - nbar_a + d1,
        2.0 * nbar_b - nbar_a + d2,
        nbar_b - 2.0 * nbar_a + d3,
        2.0 * nbar_b - 2.0 * nbar_a + d2 + d3 - d1,
    ];
    Ok(reports(prob, rows.map(|x| x * scale)))
}

/// `⟨Δn⟩` for two thermal modes under `s(1,0) = 1`, in its `R̃` form and
/// in its click-probability form.
pub fn different_temp_forms(nbar_a: f64, nbar_b: f64, params: &DemonParams) -> Result<(f64, f64)> {
    let r = shared_r(params)?;
    let rt = TableRTilde::new(nbar_a, nbar_b, params)?;
    let (a, b) = (rt.a, rt.b);
    let tilde_form = (1.0 - r)
        * (nbar_b - nbar_a
            + 2.0 * a * (nbar_a * (1.0 + b) * (2.0 + a) - nbar_b * (1.0 + a))
                / ((1.0 + a) * (1.0 + a) * (1.0 + b) * (1.0 + b)));
    let p_a = click_prob_thermal(nbar_a, r, params.eta_a());
    let p_b = click_prob_thermal(nbar_b, r, params.eta_b());
    let p_form = (1.0 - r)
        * (nbar_b - nbar_a
            + 2.0 * p_a * (1.0 - p_b) * (nbar_a * (2.0 - p_a) - nbar_b * (1.0 - p_b)));
    Ok((tilde_form, p_form))
}

/// `⟨Δn⟩` for two thermal modes when only `(1,0)` flips the polarity.
pub fn different_temp_delta_n(nbar_a: f64, nbar_b: f64, params: &DemonParams) -> Result<f64> {
    let (tilde_form, p_form) = different_temp_forms(nbar_a, nbar_b, params)?;
    debug_assert!(
        libm::fabs(tilde_form - p_form) <= 1e-12 * libm::fmax(1.0, libm::fabs(tilde_form)),
        "closed forms disagree: {tilde_form} vs {p_form}"
    );
    Ok(tilde_form)
}

/// Large-n̄ optimum for equal temperatures, `(16/27) n̄`.
pub fn equal_temp_plateau(nbar: f64) -> f64 {
    16.0 / 27.0 * nbar
}

/// Large-n̄ optimal parameters for equal temperatures: `R = 2/n̄, η_A = 1, η_B = 1/4`.
pub fn equal_temp_asymptotic_params(nbar: f64) -> Result<DemonParams> {
    DemonParams::new(2.0 / nbar, 1.0, 0.25)
}

/// Large-n̄ estimate `n̄_B − n̄_A + (16/27) n̄_A² / n̄_B`.
pub fn different_temp_asymptotic(nbar_a: f64, nbar_b: f64) -> f64 {
    nbar_b - nbar_a + 16.0 / 27.0 * nbar_a * nbar_a / nbar_b
}

/// Parameters of the large-n̄ estimate: `R = 2/n̄_A, η_A = 1,
/// η_B = (3n̄_B − 2n̄_A)/(4n̄_B)`.
pub fn different_temp_asymptotic_params(nbar_a: f64, nbar_b: f64) -> Result<DemonParams> {
    DemonParams::new(2.0 / nbar_a, 1.0, (3.0 * nbar_b - 2.0 * nbar_a) / (4.0 * nbar_b))
}

/// Thermal beam split in two: table rows in terms of `R̃_X = n̄_X R η_X`.
pub fn table2_reports(nbar_a: f64, nbar_b: f64, params: &DemonParams) -> Result<[AnalyticReport; 4]> {
    let r = shared_r(params)?;
    let TableRTilde { a, b } = TableRTilde::new(nbar_a, nbar_b, params)?;
    let p00 = 1.0 / (1.0 + a + b);
    let k = 2.0 + a + b;
    let k_prime = 2.0 * (k - 1.0) * (3.0 + a * b + (a + b) * (a + b + 3.0)) + a * b * (a + b) * (a + b);
    let diff = nbar_b - nbar_a;
    let prob_rel = [1.0, b / (1.0 + a), a / (1.0 + b), a * b * k / ((1.0 + a) * (1.0 + b))];
    let rows = [
        diff,
        diff * (k + a) / (1.0 + a),
        diff * (k + b) / (1.0 + b),
        diff * k_prime / ((1.0 + a) * (1.0 + b) * k),
    ];
    let scale = p00 * (1.0 - r);
    Ok(reports(prob_rel.map(|x| x * p00), rows.map(|x| x * scale)))
}

/// Number-correlated (two-mode squeezed) state with `R̃_X = η_X R`.
///
/// `⟨Δn⟩_(0,1)` is always negative and `⟨Δn⟩_(1,0)` always positive;
/// `⟨Δn⟩_(0,0)` and `⟨Δn⟩_(1,1)` both carry the sign of `R̃_B − R̃_A`.
pub fn tmss_reports(nbar: f64, params: &DemonParams) -> Result<[AnalyticReport; 4]> {
    let r = shared_r(params)?;
    let AppendixRTilde { a, b } = AppendixRTilde::new(params)?;
    let n = nbar;
    let s = a + b - a * b;
    let d = 1.0 + n * s;
    let e = 1.0 + 2.0 * n + n * n * s;
    let (ha, hb) = (1.0 + n * a, 1.0 + n * b);

    let prob = [
        1.0 / d,
        n * b * (1.0 - a) / (ha * d),
        n * a * (1.0 - b) / (hb * d),
        n * a * b * e / (ha * hb * d),
    ];

    let t = 1.0 - r;
    let f1 = 3.0 + 2.0 * a + 2.0 * b - a * b;
    let f2 = 2.0 * (2.0 * a + 2.0 * b - a * b);
    let f3 = b * b * (1.0 - a) * (1.0 - a) + a * b * (3.0 - 2.0 * a) + a * a;
    let delta = [
        n * t * (b - a) / d,
        -t * (1.0 + n * a * (4.0 - 2.0 * a + n * (a * (3.0 - 2.0 * a) + b * (1.0 - a) * (1.0 - a))))
            / ((1.0 - a) * ha * d),
        t * (1.0 + n * b * (4.0 - 2.0 * b + n * (b * (3.0 - 2.0 * b) + a * (1.0 - b) * (1.0 - b))))
            / ((1.0 - b) * hb * d),
        n * t * (b - a) * (2.0 + n * f1 + n * n * f2 + n * n * n * f3) / (ha * hb * d * e),
    ];
    Ok(reports(prob, delta))
}

/// Total `⟨Δn⟩` of the number-correlated state with only `s(0,1) = 1`.
/// Equals `Σ_C P_C |⟨Δn⟩_C|` whenever `η_A <= η_B`.
pub fn tmss_total_delta_n(nbar: f64, params: &DemonParams) -> Result<f64> {
    let r = shared_r(params)?;
    let AppendixRTilde { a, b } = AppendixRTilde::new(params)?;
    let n = nbar;
    let d = 1.0 + n * (a + b - a * b);
    let num = 2.0
        * n
        * (1.0 - r)
        * b
        * (1.0 + 2.0 * n * a * (2.0 - a) + n * n * (a * a * (3.0 - 2.0 * a) + a * b * (1.0 - a) * (1.0 - a)));
    Ok(num / ((1.0 + n * a) * (1.0 + n * a) * d * d))
}

/// `P_C ⟨Δn⟩_C` for the anticorrelated mixture of `|m,0⟩` and `|0,m⟩`.
pub fn fixed_m_weighted_deltas(m: u32, params: &DemonParams) -> Result<[f64; 4]> {
    let r = shared_r(params)?;
    if m == 0 {
        return Ok([0.0; 4]);
    }
    let half = 0.5 * m as f64 * (1.0 - r);
    let miss_a = powu(1.0 - r * params.eta_a(), m - 1);
    let miss_b = powu(1.0 - r * params.eta_b(), m - 1);
    Ok([half * (miss_b - miss_a), half * (1.0 - miss_b), -half * (1.0 - miss_a), 0.0])
}

/// `⟨Δn⟩ = m (1 − R) [1 − (1 − Rη_A)^{m−1}]` for the fixed-`m` anticorrelated
/// state with `s(1,0) = 1`. Meant for `η_A >= η_B`.
pub fn fixed_m_delta_n(m: u32, params: &DemonParams) -> Result<f64> {
    let r = shared_r(params)?;
    if m <= 1 {
        return Ok(0.0);
    }
    Ok(m as f64 * (1.0 - r) * (1.0 - powu(1.0 - r * params.eta_a(), m - 1)))
}

/// Optimum of [`fixed_m_delta_n`]: value `(m − 1) m^{1/(1−m)}` at
/// `R = 1 − m^{1/(1−m)}`, `η_A = 1`.
pub fn fixed_m_max(m: u32) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(Error::InvalidSpec { what: "m", value: m as f64 });
    }
    let mf = m as f64;
    let root = libm::pow(mf, 1.0 / (1.0 - mf));
    Ok(((mf - 1.0) * root, 1.0 - root))
}

/// Large-`m` behaviour of [`fixed_m_max`], `m − 1 − ln m`.
pub fn fixed_m_asymptotic(m: u32) -> f64 {
    m as f64 - 1.0 - libm::log(m as f64)
}

/// `⟨Δn⟩ = 2(1 − R) Rη_A (2 + Rη_A) / (1 + Rη_A)²` for the anticorrelated
/// state with thermal marginals at `n̄ = 1` and `s(1,0) = 1`.
pub fn anticorr_thermal_delta_n(r: f64, eta_a: f64) -> f64 {
    let x = r * eta_a;
    2.0 * (1.0 - r) * x * (2.0 + x) / ((1.0 + x) * (1.0 + x))
}

/// Stationary point of [`anticorr_thermal_delta_n`] at `η_A = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    /// Root of `R³ + 3R² + 4R − 2` in (0, 1).
    pub r_opt: f64,
    /// Root of `4x³ − 49x² + 272x − 144` in (0, 1).
    pub dn_max: f64,
}

pub fn reflectance_cubic(r: f64) -> f64 {
    ((r + 3.0) * r + 4.0) * r - 2.0
}

pub fn value_cubic(x: f64) -> f64 {
    ((4.0 * x - 49.0) * x + 272.0) * x - 144.0
}

/// Both cubics are increasing on [0, 1] with a sign change, so bisection
/// finds their unique root there.
pub fn cubic_roots() -> CubicRoots {
    CubicRoots {
        r_opt: bisect(reflectance_cubic, 0.0, 1.0, 1e-15),
        dn_max: bisect(value_cubic, 0.0, 1.0, 1e-15),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: f64, a: f64, b: f64) -> DemonParams {
        DemonParams::new(r, a, b).unwrap()
    }

    #[test]
    fn click_prob_examples() {
        assert_eq!(click_prob_thermal(1.0, 1.0, 1.0), 0.5);
        assert_eq!(click_prob_thermal(3.0, 0.0, 0.7), 0.0);
        let lam = 0.9 / 1.9;
        assert!(click_prob_thermal(0.9, 1.0, 1.0) <= lam + 1e-16);
    }

    #[test]
    fn equal_efficiency_zeroes_delta1() {
        let (d1, _, _) = table1_deltas(1.0, 3.0, &p(0.4, 0.6, 0.6)).unwrap();
        assert_eq!(d1, 0.0);
    }

    #[test]
    fn table1_equal_means_row01() {
        // n̄_A = n̄_B: δ₂ = R n̄² η_A (2 + R n̄ η_B), row (0,1) = n̄ + δ₂
        let nbar = 2.0;
        let prm = p(0.3, 0.9, 0.5);
        let rep = table1_reports(nbar, nbar, &prm).unwrap();
        let (_, d2, _) = table1_deltas(nbar, nbar, &prm).unwrap();
        let expected_d2 = 0.3 * nbar * nbar * 0.9 * (2.0 + 0.3 * nbar * 0.5);
        assert!((d2 - expected_d2).abs() < 1e-14);
        let scale = rep[0].prob * 0.7;
        assert!((rep[1].delta / scale - (nbar + d2)).abs() < 1e-12);
    }

    #[test]
    fn different_temp_zero_reflectance() {
        let v = different_temp_delta_n(1.5, 4.0, &p(0.0, 0.3, 0.9)).unwrap();
        assert!((v - 2.5).abs() < 1e-15);
    }

    #[test]
    fn different_temp_forms_agree_on_grid() {
        for &na in &[0.3, 1.0, 7.0, 100.0] {
            for &nb in &[0.5, 1.0, 12.0, 150.0] {
                for &r in &[0.01, 0.2, 0.7, 1.0] {
                    for &ea in &[0.0, 0.4, 1.0] {
                        for &eb in &[0.1, 0.8] {
                            let (x, y) = different_temp_forms(na, nb, &p(r, ea, eb)).unwrap();
                            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{na} {nb} {r} {ea} {eb}: {x} {y}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rtilde_from_click_probs() {
        for &(nbar, r, eta) in &[(1.0, 0.344, 0.427), (5.0, 0.1, 1.0), (0.2, 0.9, 0.3)] {
            let pa = click_prob_thermal(nbar, r, eta);
            let rt = TableRTilde::from_click_probs(pa, pa);
            assert!((rt.a - nbar * r * eta).abs() < 1e-13);
        }
    }

    #[test]
    fn table2_equal_means_vanish() {
        let rep = table2_reports(1.5, 1.5, &p(0.4, 0.2, 0.9)).unwrap();
        assert!(rep.iter().all(|r| r.delta == 0.0));
        let total: f64 = rep.iter().map(|r| r.prob).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tmss_equal_efficiencies() {
        let rep = tmss_reports(2.0, &p(0.5, 0.6, 0.6)).unwrap();
        assert_eq!(rep[0].delta, 0.0);
        assert_eq!(rep[3].delta, 0.0);
        assert!(rep[1].delta < 0.0 && rep[2].delta > 0.0);
        let total: f64 = rep.iter().map(|r| r.prob).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn independent_reflectance_rejected() {
        let q = DemonParams::independent(0.2, 0.3, 1.0, 1.0).unwrap();
        assert_eq!(table1_reports(1.0, 1.0, &q), Err(Error::IndependentReflectance));
        assert_eq!(tmss_reports(1.0, &q), Err(Error::IndependentReflectance));
    }

    #[test]
    fn fixed_m_examples() {
        for &r in &[0.1, 0.5, 0.9] {
            let v = fixed_m_delta_n(2, &p(r, 1.0, 0.3)).unwrap();
            assert!((v - 2.0 * r * (1.0 - r)).abs() < 1e-15);
        }
        assert_eq!(fixed_m_delta_n(1, &p(0.5, 1.0, 0.0)).unwrap(), 0.0);
        assert_eq!(fixed_m_delta_n(0, &p(0.5, 1.0, 0.0)).unwrap(), 0.0);
        assert_eq!(fixed_m_max(2).unwrap(), (0.5, 0.5));
        let (v, r) = fixed_m_max(10).unwrap();
        let root = libm::pow(10.0, -1.0 / 9.0);
        assert!((v - 9.0 * root).abs() < 1e-14 && (r - (1.0 - root)).abs() < 1e-15);
        assert!(fixed_m_max(1).is_err());
    }

    #[test]
    fn fixed_m_weighted_sum_matches_total() {
        for m in [2u32, 3, 7, 20] {
            let prm = p(0.3, 0.9, 0.4);
            let w = fixed_m_weighted_deltas(m, &prm).unwrap();
            let total = w[0] + w[1] - w[2] + w[3];
            assert!((total - fixed_m_delta_n(m, &prm).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn fixed_m_asymptotics() {
        let (v, _) = fixed_m_max(1000).unwrap();
        assert!((v / fixed_m_asymptotic(1000) - 1.0).abs() < 0.02);
    }

    #[test]
    fn cubic_root_values() {
        let c = cubic_roots();
        assert!(reflectance_cubic(c.r_opt).abs() < 1e-10);
        assert!(value_cubic(c.dn_max).abs() < 1e-10);
        assert!(c.r_opt > 0.37 && c.r_opt < 0.39);
        assert!((anticorr_thermal_delta_n(c.r_opt, 1.0) - c.dn_max).abs() < 1e-9);
        assert_eq!(anticorr_thermal_delta_n(0.0, 1.0), 0.0);
    }
}
