//! Final refinement of an interior optimum.
//!
//! Comparing function values cannot place a smooth maximum closer than about
//! `sqrt(ε)` in the parameters, so the simplex result is finished with a few
//! coordinate-wise Newton steps on Richardson-extrapolated central
//! differences. Coordinates on (or within 1e-6 of) the box boundary are left
//! alone, and a step is kept only if the value does not drop beyond
//! rounding noise.

use alloc::vec::Vec;

const ON_BOUND: f64 = 1e-6;
const REL_STEP: f64 = 1e-3;
const SWEEPS: usize = 60;
const NOISE: f64 = 1e-15;

pub(crate) struct Polished {
    pub x: Vec<f64>,
    pub evals: usize,
}

/// Maximizes `f` near `x0`, where `f(x0) = f0`.
pub(crate) fn polish<E, F>(mut f: F, x0: &[f64], f0: f64) -> Result<Polished, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut evals = 0;
    let mut at = |x: &mut Vec<f64>, i: usize, v: f64, evals: &mut usize| -> Result<f64, E> {
        let old = x[i];
        x[i] = v;
        *evals += 1;
        let out = f(x);
        x[i] = old;
        out
    };
    for _ in 0..SWEEPS {
        let mut largest: f64 = 0.0;
        for i in 0..x.len() {
            let room = x[i].min(1.0 - x[i]);
            if room < ON_BOUND {
                continue;
            }
            let h = REL_STEP * room.min(0.1);
            let xi = x[i];
            let fp1 = at(&mut x, i, xi + h, &mut evals)?;
            let fm1 = at(&mut x, i, xi - h, &mut evals)?;
            let curv = fp1 - 2.0 * fx + fm1;
            // flat or convex along this axis, or curvature lost in rounding
            if !(-curv > 1e-12 * fx.abs().max(f64::MIN_POSITIVE)) {
                continue;
            }
            let fp2 = at(&mut x, i, xi + 2.0 * h, &mut evals)?;
            let fm2 = at(&mut x, i, xi - 2.0 * h, &mut evals)?;
            let d1 = (fp1 - fm1) / (2.0 * h);
            let d2 = (fp2 - fm2) / (4.0 * h);
            let grad = (4.0 * d1 - d2) / 3.0;
            let step = (-grad * h * h / curv).clamp(-10.0 * h, 10.0 * h);
            let trial = (xi + step).clamp(0.0, 1.0);
            if trial == xi {
                continue;
            }
            let ft = at(&mut x, i, trial, &mut evals)?;
            if ft >= fx - NOISE * fx.abs().max(1.0) {
                x[i] = trial;
                fx = ft;
                largest = largest.max((trial - xi).abs());
            }
        }
        if largest < 1e-13 {
            break;
        }
    }
    Ok(Polished { x, evals })
}
