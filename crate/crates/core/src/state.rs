//! Number-diagonal two-mode states stored as truncated joint pmfs.
//!
//! Every constructor truncates geometric tails at a caller-supplied
//! tolerance and records the discarded probability in `tail_mass`; stored
//! probabilities are never renormalized. Product states keep their two
//! factors instead of materializing the joint lattice.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, powu};

/// Normalization slack accepted for stored mass + tail mass.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Largest per-mode cutoff any constructor will allocate.
pub const MAX_CUTOFF: u32 = 1 << 26;

/// Mean photon number of a single-mode thermal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    nbar: f64,
}

impl ThermalSpec {
    pub fn new(nbar: f64) -> Result<Self> {
        if !nbar.is_finite() || nbar <= 0.0 {
            return Err(Error::InvalidSpec { what: "nbar", value: nbar });
        }
        Ok(Self { nbar })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Boltzmann ratio `λ = n̄ / (1 + n̄)`.
    pub fn lambda(&self) -> f64 {
        self.nbar / (1.0 + self.nbar)
    }

    /// `1 − λ`, computed without cancellation.
    pub fn vacuum_prob(&self) -> f64 {
        1.0 / (1.0 + self.nbar)
    }
}

/// Truncated single-mode photon-number distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePmf {
    probs: Vec<f64>,
    tail_mass: f64,
    /// `(1 − λ, λ)` when `probs[n] = (1 − λ) λⁿ`; enables closed-form sums.
    geometric: Option<(f64, f64)>,
}

impl ModePmf {
    /// Wraps an explicit distribution with no truncated tail.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tail(probs, 0.0)
    }

    pub(crate) fn with_tail(probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::NotNormalized { sum: 0.0 });
        }
        if let Some(&bad) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidSpec { what: "probability", value: bad });
        }
        let sum = compensated_sum(probs.iter().copied()) + tail_mass;
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { probs, tail_mass, geometric: None })
    }

    /// Fock state `|m⟩`.
    pub fn fock(m: u32) -> Self {
        let mut probs = alloc::vec![0.0; m as usize + 1];
        probs[m as usize] = 1.0;
        Self { probs, tail_mass: 0.0, geometric: None }
    }

    /// Poisson (coherent-state) statistics truncated once the remaining
    /// mass drops below `eps_tail`.
    pub fn poisson(mean: f64, eps_tail: f64) -> Result<Self> {
        if !mean.is_finite() || mean <= 0.0 {
            return Err(Error::InvalidSpec { what: "mean", value: mean });
        }
        check_eps(eps_tail)?;
        let mut probs = Vec::new();
        let mut p = libm::exp(-mean);
        let mut n = 0u32;
        loop {
            probs.push(p);
            let tail = 1.0 - compensated_sum(probs.iter().copied());
            // the mode must already be past the peak before the tail test counts
            if (n as f64) > mean && tail <= eps_tail {
                return Self::with_tail(probs, tail.max(0.0));
            }
            if n >= MAX_CUTOFF {
                return Err(Error::InvalidSpec { what: "cutoff", value: n as f64 });
            }
            n += 1;
            p *= mean / n as f64;
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `(1 − λ, λ)` for a truncated geometric (thermal) pmf.
    pub fn geometric(&self) -> Option<(f64, f64)> {
        self.geometric
    }

    pub fn get(&self, n: u32) -> f64 {
        self.probs.get(n as usize).copied().unwrap_or(0.0)
    }

    pub fn cutoff(&self) -> u32 {
        (self.probs.len() - 1) as u32
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn stored_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.probs.iter().enumerate().map(|(n, p)| n as f64 * p))
    }

    pub fn second_moment(&self) -> f64 {
        compensated_sum(
            self.probs
                .iter()
                .enumerate()
                .map(|(n, p)| (n as f64) * (n as f64) * p),
        )
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }
}

fn check_eps(eps_tail: f64) -> Result<()> {
    if !(eps_tail > 0.0 && eps_tail < 1.0) {
        return Err(Error::InvalidSpec { what: "eps_tail", value: eps_tail });
    }
    Ok(())
}

/// Smallest `k >= 1` with `scale * λ^k <= eps`.
fn geometric_tail_len(lambda: f64, scale: f64, eps: f64) -> Result<u32> {
    let estimate = libm::ceil(libm::log(eps / scale) / libm::log(lambda)).max(1.0);
    if !(estimate <= MAX_CUTOFF as f64) {
        return Err(Error::InvalidSpec { what: "cutoff", value: estimate });
    }
    let mut k = estimate as u32;
    while scale * powu(lambda, k) > eps {
        k += 1;
    }
    while k > 1 && scale * powu(lambda, k - 1) <= eps {
        k -= 1;
    }
    Ok(k)
}

/// Geometric thermal pmf `(1 − λ) λⁿ`, truncated at the smallest cutoff with
/// `λ^{cutoff+1} <= eps_tail`.
pub fn make_thermal(spec: ThermalSpec, eps_tail: f64) -> Result<ModePmf> {
    check_eps(eps_tail)?;
    let lambda = spec.lambda();
    let k = geometric_tail_len(lambda, 1.0, eps_tail)?;
    let vacuum = spec.vacuum_prob();
    let probs = (0..k).map(|n| vacuum * powu(lambda, n)).collect();
    Ok(ModePmf { probs, tail_mass: powu(lambda, k), geometric: Some((vacuum, lambda)) })
}

/// One stored point of a joint pmf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeEntry {
    pub n_a: u32,
    pub n_b: u32,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Support {
    /// Sorted by `(n_a, n_b)`, no duplicates, no zero entries.
    Sparse(Vec<LatticeEntry>),
    Product(ModePmf, ModePmf),
    /// One beam split binomially: `p_N C(N, n_A) cos²θ^{n_A} sin²θ^{n_B}`
    /// with `N = n_A + n_B` and `p_N` the input pmf. Lattice points are
    /// generated on demand.
    Split { input: ModePmf, cos2: f64, sin2: f64 },
}

/// Truncated joint photon-number distribution `p(n_A, n_B)`.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct JointNumberState {
    support: Support,
    cutoff: u32,
    tail_mass: f64,
}

impl JointNumberState {
    /// Builds a sparse state from explicit entries. Duplicate coordinates are
    /// summed; zero entries are dropped.
    pub fn from_entries(entries: Vec<LatticeEntry>, tail_mass: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tail_mass) {
            return Err(Error::InvalidSpec { what: "tail_mass", value: tail_mass });
        }
        if let Some(bad) = entries.iter().find(|e| !(e.p >= 0.0) || !e.p.is_finite()) {
            return Err(Error::InvalidSpec { what: "probability", value: bad.p });
        }
        let mut entries = entries;
        entries.sort_by(|x, y| (x.n_a, x.n_b).cmp(&(y.n_a, y.n_b)));
        let mut merged: Vec<LatticeEntry> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.n_a == e.n_a && last.n_b == e.n_b => last.p += e.p,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.p > 0.0);
        let sum = compensated_sum(merged.iter().map(|e| e.p)) + tail_mass;
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let cutoff = merged.iter().map(|e| e.n_a.max(e.n_b)).max().unwrap_or(0);
        Ok(Self { support: Support::Sparse(merged), cutoff, tail_mass })
    }

    /// Uncorrelated state `p_A(n_A) p_B(n_B)` kept in factorized form.
    pub fn product(a: ModePmf, b: ModePmf) -> Self {
        let cutoff = a.cutoff().max(b.cutoff());
        let tail_mass = a.tail_mass + b.tail_mass - a.tail_mass * b.tail_mass;
        Self { support: Support::Product(a, b), cutoff, tail_mass }
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// The two factors when the state is stored as a product.
    pub fn factors(&self) -> Option<(&ModePmf, &ModePmf)> {
        match &self.support {
            Support::Product(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// Input pmf and `(cos²θ, sin²θ)` when the state is stored as a split beam.
    pub fn split_parts(&self) -> Option<(&ModePmf, f64, f64)> {
        match &self.support {
            Support::Split { input, cos2, sin2 } => Some((input, *cos2, *sin2)),
            _ => None,
        }
    }

    /// Number of stored lattice points (including zeros of a product).
    pub fn len(&self) -> usize {
        match &self.support {
            Support::Sparse(e) => e.len(),
            Support::Product(a, b) => a.probs.len() * b.probs.len(),
            Support::Split { input, .. } => input.probs.len() * (input.probs.len() + 1) / 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, n_a: u32, n_b: u32) -> f64 {
        match &self.support {
            Support::Product(a, b) => a.get(n_a) * b.get(n_b),
            Support::Split { input, cos2, sin2 } => split_prob(input, *cos2, *sin2, n_a, n_b),
            Support::Sparse(e) => e
                .binary_search_by(|x| (x.n_a, x.n_b).cmp(&(n_a, n_b)))
                .map(|i| e[i].p)
                .unwrap_or(0.0),
        }
    }

    pub fn entries(&self) -> Entries<'_> {
        match &self.support {
            Support::Sparse(e) => Entries::Sparse(e.iter()),
            Support::Product(a, b) => Entries::Product { a, b, i: 0, j: 0 },
            Support::Split { input, cos2, sin2 } => Entries::Split { input, cos2: *cos2, sin2: *sin2, i: 0, j: 0 },
        }
    }

    /// Copy of this state in sparse form. Intended for cross-checking the
    /// factorized path on small product states.
    pub fn materialize(&self) -> Self {
        match &self.support {
            Support::Sparse(_) => self.clone(),
            Support::Product(..) | Support::Split { .. } => {
                let mut entries: Vec<LatticeEntry> = self.entries().filter(|e| e.p > 0.0).collect();
                entries.sort_by(|x, y| (x.n_a, x.n_b).cmp(&(y.n_a, y.n_b)));
                Self {
                    support: Support::Sparse(entries),
                    cutoff: self.cutoff,
                    tail_mass: self.tail_mass,
                }
            }
        }
    }

    pub fn stored_mass(&self) -> f64 {
        match &self.support {
            Support::Product(a, b) => a.stored_mass() * b.stored_mass(),
            Support::Split { input, .. } => input.stored_mass(),
            Support::Sparse(e) => compensated_sum(e.iter().map(|x| x.p)),
        }
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        match &self.support {
            Support::Product(a, b) => {
                let mb = b.stored_mass();
                a.probs.iter().map(|p| p * mb).collect()
            }
            _ => {
                let mut out = alloc::vec![0.0; self.cutoff as usize + 1];
                for x in self.entries() {
                    out[x.n_a as usize] += x.p;
                }
                out
            }
        }
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        match &self.support {
            Support::Product(a, b) => {
                let ma = a.stored_mass();
                b.probs.iter().map(|p| p * ma).collect()
            }
            _ => {
                let mut out = alloc::vec![0.0; self.cutoff as usize + 1];
                for x in self.entries() {
                    out[x.n_b as usize] += x.p;
                }
                out
            }
        }
    }

    /// Exact lattice sums `(Σ n_A p, Σ n_B p)` over the stored support.
    pub fn marginal_means(&self) -> (f64, f64) {
        match &self.support {
            Support::Product(a, b) => (a.mean() * b.stored_mass(), b.mean() * a.stored_mass()),
            Support::Split { input, cos2, sin2 } => (cos2 * input.mean(), sin2 * input.mean()),
            Support::Sparse(e) => (
                compensated_sum(e.iter().map(|x| x.n_a as f64 * x.p)),
                compensated_sum(e.iter().map(|x| x.n_b as f64 * x.p)),
            ),
        }
    }

    /// `⟨n_A n_B⟩` over the stored support.
    pub fn correlation(&self) -> f64 {
        match &self.support {
            Support::Product(a, b) => a.mean() * b.mean(),
            // E[n_A n_B | N] = N (N − 1) cos²θ sin²θ
            Support::Split { input, cos2, sin2 } => cos2 * sin2 * (input.second_moment() - input.mean()),
            Support::Sparse(e) => compensated_sum(e.iter().map(|x| x.n_a as f64 * x.n_b as f64 * x.p)),
        }
    }

    /// Swaps the roles of the two modes.
    pub fn swapped(&self) -> Self {
        let support = match &self.support {
            Support::Product(a, b) => Support::Product(b.clone(), a.clone()),
            Support::Split { input, cos2, sin2 } => Support::Split { input: input.clone(), cos2: *sin2, sin2: *cos2 },
            Support::Sparse(e) => {
                let mut s: Vec<LatticeEntry> = e
                    .iter()
                    .map(|x| LatticeEntry { n_a: x.n_b, n_b: x.n_a, p: x.p })
                    .collect();
                s.sort_by(|x, y| (x.n_a, x.n_b).cmp(&(y.n_a, y.n_b)));
                Support::Sparse(s)
            }
        };
        Self { support, cutoff: self.cutoff, tail_mass: self.tail_mass }
    }
}

/// Iterator over the stored lattice points of a [`JointNumberState`].
pub enum Entries<'a> {
    Sparse(core::slice::Iter<'a, LatticeEntry>),
    Product { a: &'a ModePmf, b: &'a ModePmf, i: usize, j: usize },
    /// Walks the triangle `n_A + n_B < len` row by row in `n_A`.
    Split { input: &'a ModePmf, cos2: f64, sin2: f64, i: usize, j: usize },
}

fn split_prob(input: &ModePmf, cos2: f64, sin2: f64, n_a: u32, n_b: u32) -> f64 {
    let total = n_a as usize + n_b as usize;
    let Some(&p) = input.probs.get(total) else {
        return 0.0;
    };
    if p == 0.0 || (n_a > 0 && cos2 == 0.0) || (n_b > 0 && sin2 == 0.0) {
        return 0.0;
    }
    let (a, b) = (n_a as f64, n_b as f64);
    let mut ln = libm::lgamma(a + b + 1.0) - libm::lgamma(a + 1.0) - libm::lgamma(b + 1.0);
    if n_a > 0 {
        ln += a * libm::log(cos2);
    }
    if n_b > 0 {
        ln += b * libm::log(sin2);
    }
    p * libm::exp(ln)
}

impl Iterator for Entries<'_> {
    type Item = LatticeEntry;

    fn next(&mut self) -> Option<LatticeEntry> {
        match self {
            Entries::Sparse(it) => it.next().copied(),
            Entries::Product { a, b, i, j } => {
                if *i >= a.probs.len() {
                    return None;
                }
                let e = LatticeEntry { n_a: *i as u32, n_b: *j as u32, p: a.probs[*i] * b.probs[*j] };
                *j += 1;
                if *j >= b.probs.len() {
                    *j = 0;
                    *i += 1;
                }
                Some(e)
            }
            Entries::Split { input, cos2, sin2, i, j } => {
                let len = input.probs.len();
                if *i >= len {
                    return None;
                }
                let (n_a, n_b) = (*i as u32, *j as u32);
                let e = LatticeEntry { n_a, n_b, p: split_prob(input, *cos2, *sin2, n_a, n_b) };
                *j += 1;
                if *i + *j >= len {
                    *j = 0;
                    *i += 1;
                }
                Some(e)
            }
        }
    }
}

/// Two independent thermal modes.
pub fn product_thermal(nbar_a: f64, nbar_b: f64, eps_tail: f64) -> Result<JointNumberState> {
    let a = make_thermal(ThermalSpec::new(nbar_a)?, eps_tail)?;
    let b = make_thermal(ThermalSpec::new(nbar_b)?, eps_tail)?;
    Ok(JointNumberState::product(a, b))
}

/// A thermal beam of mean `nbar_in` split on a beam splitter of reflectance
/// `sin²θ`: mode A keeps `n̄_in cos²θ`, mode B receives `n̄_in sin²θ`.
///
/// The total photon number is thermal, so truncation is applied to
/// `n_A + n_B`; the tail bound is the same as for the input beam. The
/// lattice is never stored: it has ~cutoff²/2 points.
pub fn split_thermal(nbar_in: f64, theta: f64, eps_tail: f64) -> Result<JointNumberState> {
    let spec = ThermalSpec::new(nbar_in)?;
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidSpec { what: "theta", value: theta });
    }
    let input = make_thermal(spec, eps_tail)?;
    let cos2 = libm::cos(theta) * libm::cos(theta);
    let sin2 = libm::sin(theta) * libm::sin(theta);
    let cutoff = input.cutoff();
    let tail_mass = input.tail_mass;
    Ok(JointNumberState { support: Support::Split { input, cos2, sin2 }, cutoff, tail_mass })
}

/// Perfectly number-correlated state with thermal marginals (the photon
/// statistics of a two-mode squeezed vacuum with `n̄ = sinh² r`).
pub fn tmss_diagonal(nbar: f64, eps_tail: f64) -> Result<JointNumberState> {
    let pmf = make_thermal(ThermalSpec::new(nbar)?, eps_tail)?;
    let entries = pmf
        .probs
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(n, &p)| LatticeEntry { n_a: n as u32, n_b: n as u32, p })
        .collect();
    Ok(JointNumberState {
        support: Support::Sparse(entries),
        cutoff: pmf.cutoff(),
        tail_mass: pmf.tail_mass,
    })
}

/// Number-anticorrelated mixture: `p(0,0) = q₀`, `p(n,0) = p(0,n) = q_n / 2`.
pub fn anticorrelated(q: &[f64]) -> Result<JointNumberState> {
    anticorrelated_with_tail(q, 0.0)
}

fn anticorrelated_with_tail(q: &[f64], tail_mass: f64) -> Result<JointNumberState> {
    if q.is_empty() {
        return Err(Error::NotNormalized { sum: 0.0 });
    }
    if let Some(&bad) = q.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidSpec { what: "q", value: bad });
    }
    let sum = compensated_sum(q.iter().copied()) + tail_mass;
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum });
    }
    let mut entries = Vec::with_capacity(2 * q.len());
    if q[0] > 0.0 {
        entries.push(LatticeEntry { n_a: 0, n_b: 0, p: q[0] });
    }
    for (n, &qn) in q.iter().enumerate().skip(1) {
        if qn > 0.0 {
            entries.push(LatticeEntry { n_a: 0, n_b: n as u32, p: 0.5 * qn });
            entries.push(LatticeEntry { n_a: n as u32, n_b: 0, p: 0.5 * qn });
        }
    }
    entries.sort_by(|x, y| (x.n_a, x.n_b).cmp(&(y.n_a, y.n_b)));
    Ok(JointNumberState {
        support: Support::Sparse(entries),
        cutoff: (q.len() - 1) as u32,
        tail_mass,
    })
}

/// Anticorrelated state whose marginals are thermal with mean `nbar`:
/// `q_n = 2/(1+n̄) · λⁿ` for `n > 0` and `q₀ = (1 − n̄)/(1 + n̄)`.
/// Only feasible for `n̄ <= 1`.
pub fn thermal_marginal_anticorrelated(nbar: f64, eps_tail: f64) -> Result<JointNumberState> {
    let spec = ThermalSpec::new(nbar)?;
    if nbar > 1.0 {
        return Err(Error::Infeasible { nbar });
    }
    check_eps(eps_tail)?;
    let lambda = spec.lambda();
    // Σ_{n>K} q_n = 2 λ^{K+1}
    let k = geometric_tail_len(lambda, 2.0, eps_tail)?;
    let mut q = Vec::with_capacity(k as usize);
    q.push((1.0 - nbar) / (1.0 + nbar));
    let scale = 2.0 * spec.vacuum_prob();
    q.extend((1..k).map(|n| scale * powu(lambda, n)));
    anticorrelated_with_tail(&q, 2.0 * powu(lambda, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    const EPS: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn thermal_nbar_one() {
        let pmf = make_thermal(ThermalSpec::new(1.0).unwrap(), EPS).unwrap();
        assert_eq!(pmf.get(0), 0.5);
        assert_eq!(pmf.get(1), 0.25);
        assert_eq!(pmf.get(2), 0.125);
        assert_eq!(pmf.cutoff(), 39);
        assert_eq!(pmf.tail_mass(), libm::pow(0.5, 40.0));
    }

    #[test]
    fn thermal_vacuum_probability() {
        for nbar in [0.01, 0.3, 2.0, 17.5, 400.0] {
            let pmf = make_thermal(ThermalSpec::new(nbar).unwrap(), EPS).unwrap();
            assert!(close(pmf.get(0), 1.0 / (1.0 + nbar), 1e-15));
        }
    }

    #[test]
    fn thermal_cutoff_is_minimal() {
        for nbar in [0.2, 1.0, 3.0, 50.0] {
            let spec = ThermalSpec::new(nbar).unwrap();
            let pmf = make_thermal(spec, EPS).unwrap();
            let n = pmf.cutoff();
            assert!(powu(spec.lambda(), n + 1) <= EPS);
            assert!(n == 0 || powu(spec.lambda(), n) > EPS);
        }
    }

    #[test]
    fn thermal_mean_truncation_deficit() {
        // Σ_{n>N} n (1−λ) λⁿ = λ^{N+1} (N + 1 + n̄)
        let nbar = 50.0;
        let pmf = make_thermal(ThermalSpec::new(nbar).unwrap(), EPS).unwrap();
        let c = (pmf.cutoff() as f64 + 1.0 + nbar) / nbar;
        let mean = pmf.mean();
        assert!(mean <= nbar);
        assert!(mean >= nbar - nbar * EPS * c - 1e-11);
        assert!(close(nbar - mean, pmf.tail_mass() * c * nbar, 1e-11));
    }

    #[test]
    fn thermal_rejects_bad_input() {
        assert!(ThermalSpec::new(0.0).is_err());
        assert!(ThermalSpec::new(-1.0).is_err());
        assert!(ThermalSpec::new(f64::NAN).is_err());
        assert!(ThermalSpec::new(f64::INFINITY).is_err());
        let spec = ThermalSpec::new(1.0).unwrap();
        assert!(make_thermal(spec, 0.0).is_err());
        assert!(make_thermal(spec, 1.0).is_err());
    }

    #[test]
    fn thermal_variance() {
        for nbar in [0.5, 1.0, 10.0] {
            let pmf = make_thermal(ThermalSpec::new(nbar).unwrap(), EPS).unwrap();
            assert!(close(pmf.variance(), nbar * nbar + nbar, 1e-8 * (1.0 + nbar * nbar)));
        }
    }

    #[test]
    fn product_vacuum_and_marginals() {
        let s = product_thermal(1.0, 1.0, EPS).unwrap();
        assert_eq!(s.get(0, 0), 0.25);
        let s = product_thermal(1.0, 2.0, EPS).unwrap();
        let (ma, mb) = s.marginal_means();
        assert!(close(ma, 1.0, 1e-9));
        assert!(close(mb, 2.0, 1e-9));
        assert!(close(s.stored_mass() + s.tail_mass(), 1.0, 1e-12));
    }

    #[test]
    fn split_thermal_examples() {
        let s = split_thermal(1.0, FRAC_PI_4, EPS).unwrap();
        assert!(close(s.get(0, 0), 0.5, 1e-15));
        assert!(close(s.get(1, 0), 0.125, 1e-15));
        assert!(close(s.get(0, 1), 0.125, 1e-15));

        let s = split_thermal(2.0, FRAC_PI_4, EPS).unwrap();
        let (ma, mb) = s.marginal_means();
        assert!(close(ma, 1.0, 1e-9) && close(mb, 1.0, 1e-9));
        assert!(close(s.correlation(), 2.0, 1e-9));

        let s = split_thermal(2.0, FRAC_PI_3, EPS).unwrap();
        let (ma, mb) = s.marginal_means();
        assert!(close(ma, 0.5, 1e-9) && close(mb, 1.5, 1e-9));
    }

    #[test]
    fn split_thermal_transparent() {
        let s = split_thermal(3.0, 0.0, EPS).unwrap();
        assert!(s.entries().filter(|e| e.p > 0.0).all(|e| e.n_b == 0));
        let thermal = make_thermal(ThermalSpec::new(3.0).unwrap(), EPS).unwrap();
        for n in 0..20 {
            assert!(close(s.get(n, 0), thermal.get(n), 1e-15));
        }
    }

    #[test]
    fn split_thermal_rejects_bad_theta() {
        assert!(split_thermal(1.0, -0.1, EPS).is_err());
        assert!(split_thermal(1.0, 2.0, EPS).is_err());
        assert!(split_thermal(0.0, 0.5, EPS).is_err());
    }

    #[test]
    fn tmss_examples() {
        let s = tmss_diagonal(1.0, EPS).unwrap();
        assert_eq!(s.get(0, 0), 0.5);
        assert_eq!(s.get(1, 1), 0.25);
        assert_eq!(s.get(1, 0), 0.0);
        // ⟨n²⟩ loses ~N²λᴺ to the truncation
        assert!(close(s.correlation(), 3.0, 1e-8));
        let s = tmss_diagonal(2.0, EPS).unwrap();
        let (ma, mb) = s.marginal_means();
        assert!(close(ma, 2.0, 1e-9) && close(mb, 2.0, 1e-9));
    }

    #[test]
    fn anticorrelated_fixed_m() {
        let s = anticorrelated(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.get(2, 0), 0.5);
        assert_eq!(s.get(0, 2), 0.5);
        let (ma, mb) = s.marginal_means();
        assert_eq!((ma, mb), (1.0, 1.0));
        assert!(anticorrelated(&[0.5, 0.4]).is_err());
        assert!(anticorrelated(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn anticorrelated_thermal_marginals() {
        let s = thermal_marginal_anticorrelated(1.0, EPS).unwrap();
        assert_eq!(s.get(0, 0), 0.0);
        for n in 1..30u32 {
            assert!(close(s.get(n, 0), 0.5 * libm::pow(0.5, n as f64), 1e-16));
        }
        let s = thermal_marginal_anticorrelated(0.5, EPS).unwrap();
        assert!(close(s.get(0, 0), 1.0 / 3.0, 1e-15));
        let (ma, mb) = s.marginal_means();
        assert!(close(ma, 0.5, 1e-10) && close(mb, 0.5, 1e-10));
        assert!(s.tail_mass() <= EPS);
        assert_eq!(thermal_marginal_anticorrelated(1.2, EPS), Err(Error::Infeasible { nbar: 1.2 }));
    }

    #[test]
    fn materialize_matches_product() {
        let s = product_thermal(0.7, 1.3, 1e-10).unwrap();
        let m = s.materialize();
        assert!(m.factors().is_none());
        for (n_a, n_b) in [(0, 0), (3, 1), (5, 9), (12, 2)] {
            assert_eq!(s.get(n_a, n_b), m.get(n_a, n_b));
        }
        let (a1, b1) = s.marginal_means();
        let (a2, b2) = m.marginal_means();
        assert!(close(a1, a2, 1e-12) && close(b1, b2, 1e-12));
    }

    #[test]
    fn from_entries_merges_and_validates() {
        let s = JointNumberState::from_entries(
            alloc::vec![
                LatticeEntry { n_a: 1, n_b: 0, p: 0.25 },
                LatticeEntry { n_a: 0, n_b: 0, p: 0.5 },
                LatticeEntry { n_a: 1, n_b: 0, p: 0.25 },
            ],
            0.0,
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(1, 0), 0.5);
        assert!(JointNumberState::from_entries(alloc::vec![LatticeEntry { n_a: 0, n_b: 0, p: 0.9 }], 0.0).is_err());
    }

    #[test]
    fn poisson_and_fock() {
        let p = ModePmf::poisson(3.0, EPS).unwrap();
        assert!(close(p.mean(), 3.0, 1e-10));
        assert!(close(p.variance(), 3.0, 1e-9));
        let f = ModePmf::fock(4);
        assert_eq!(f.mean(), 4.0);
        assert_eq!(f.variance(), 0.0);
    }
}
