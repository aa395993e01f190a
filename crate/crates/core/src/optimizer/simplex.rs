//! Nelder–Mead simplex minimization restricted to the unit box.
//!
//! Every trial point is clamped onto `[0, 1]^d` before evaluation, so the
//! objective is never called outside the box.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexSettings {
    pub ftol: f64,
    pub xtol: f64,
    pub max_evals: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub evals: usize,
    pub converged: bool,
    /// Trial points that had to be clamped onto the box.
    pub projections: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Counter<F> {
    f: F,
    evals: usize,
    projections: usize,
}

impl<E, F: FnMut(&[f64]) -> Result<f64, E>> Counter<F> {
    fn eval(&mut self, x: &mut [f64]) -> Result<f64, E> {
        let mut clamped = false;
        for v in x.iter_mut() {
            let c = v.clamp(0.0, 1.0);
            if c != *v {
                clamped = true;
                *v = c;
            }
        }
        if clamped {
            self.projections += 1;
        }
        self.evals += 1;
        (self.f)(x)
    }
}

fn initial_step(x: f64) -> f64 {
    let h = if x >= 0.2 { 0.1 } else { (0.5 * x).max(1e-4) };
    if x + h <= 1.0 {
        h
    } else {
        -h
    }
}

fn affine(base: &[f64], toward: &[f64], t: f64) -> Vec<f64> {
    base.iter().zip(toward).map(|(b, w)| b + t * (w - b)).collect()
}

/// Minimizes `f` from `x0`. After each convergence the simplex is rebuilt
/// around the incumbent, up to `settings.restarts` times, while that keeps
/// improving the value.
pub(crate) fn minimize<E, F>(f: F, x0: &[f64], settings: SimplexSettings) -> Result<SimplexOutcome, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let mut counter = Counter { f, evals: 0, projections: 0 };
    let mut best_x: Vec<f64> = x0.to_vec();
    let mut best_f = counter.eval(&mut best_x)?;
    let mut converged = false;
    for _ in 0..=settings.restarts {
        let (x, fx, conv) = run(&mut counter, &best_x, best_f, settings)?;
        let improved = best_f - fx > settings.ftol * best_f.abs().max(1.0);
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        converged = conv;
        if !improved || counter.evals >= settings.max_evals {
            break;
        }
    }
    Ok(SimplexOutcome {
        x: best_x,
        evals: counter.evals,
        converged,
        projections: counter.projections,
    })
}

fn run<E, F>(counter: &mut Counter<F>, x0: &[f64], f0: f64, s: SimplexSettings) -> Result<(Vec<f64>, f64, bool), E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let d = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(d + 1);
    pts.push(x0.to_vec());
    vals.push(f0);
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += initial_step(x0[i]);
        vals.push(counter.eval(&mut p)?);
        pts.push(p);
    }

    loop {
        // order by value, ties by insertion so runs are reproducible
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread_f = vals[d] - vals[0];
        let spread_x = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread_f <= s.ftol * vals[0].abs().max(1.0) && spread_x <= s.xtol {
            return Ok((pts.swap_remove(0), vals[0], true));
        }
        if counter.evals >= s.max_evals {
            return Ok((pts.swap_remove(0), vals[0], false));
        }

        let mut centroid = alloc::vec![0.0; d];
        for p in &pts[..d] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / d as f64;
            }
        }

        let worst = pts[d].clone();
        let mut xr = affine(&centroid, &worst, -REFLECT);
        let fr = counter.eval(&mut xr)?;

        if fr < vals[0] {
            let mut xe = affine(&centroid, &worst, -EXPAND);
            let fe = counter.eval(&mut xe)?;
            if fe < fr {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
            continue;
        }
        if fr < vals[d - 1] {
            pts[d] = xr;
            vals[d] = fr;
            continue;
        }

        let (mut xc, accept_below) = if fr < vals[d] {
            (affine(&centroid, &xr, CONTRACT), fr)
        } else {
            (affine(&centroid, &worst, CONTRACT), vals[d])
        };
        let fc = counter.eval(&mut xc)?;
        if fc < accept_below || (fr < vals[d] && fc <= fr) {
            pts[d] = xc;
            vals[d] = fc;
            continue;
        }

        let best = pts[0].clone();
        for i in 1..=d {
            let mut p = affine(&best, &pts[i], SHRINK);
            vals[i] = counter.eval(&mut p)?;
            pts[i] = p;
        }
    }
}
