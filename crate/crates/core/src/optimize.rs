//! Derivative-free minimisation and bracketing root search.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Box constraint for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn clamp(self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the spread of simplex values drops below this.
    pub f_tol: f64,
    /// Initial step as a fraction of each bound width.
    pub step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 400,
            f_tol: 1e-10,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Nelder–Mead on a box; trial points are clamped into the bounds.
pub fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: &[f64],
    bounds: &[Bounds],
    opts: NelderMeadOptions,
) -> Minimum {
    let dim = start.len();
    assert_eq!(dim, bounds.len(), "one bound per coordinate");
    let clamp = |x: &mut Vec<f64>| x.iter_mut().zip(bounds).for_each(|(v, b)| *v = b.clamp(*v));
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut x0 = start.to_vec();
    clamp(&mut x0);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(&x0, &mut evals);
    simplex.push((x0.clone(), v0));
    for k in 0..dim {
        let mut x = x0.clone();
        let width = bounds[k].hi - bounds[k].lo;
        let step = opts.step * width;
        x[k] = if x[k] + step <= bounds[k].hi {
            x[k] + step
        } else {
            x[k] - step
        };
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if (worst - best).abs() <= opts.f_tol {
            break;
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let along = |t: f64| {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut p);
            p
        };
        let xr = along(1.0);
        let vr = eval(&xr, &mut evals);
        if vr < best {
            let xe = along(2.0);
            let ve = eval(&xe, &mut evals);
            simplex[dim] = if ve < vr { (xe, ve) } else { (xr, vr) };
        } else if vr < simplex[dim - 1].1 {
            simplex[dim] = (xr, vr);
        } else {
            let t = if vr < worst { 0.5 } else { -0.5 };
            let xc = along(t);
            let vc = eval(&xc, &mut evals);
            if vc < worst.min(vr) {
                simplex[dim] = (xc, vc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = eval(x, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evals }
}

/// Runs Nelder–Mead from each start and keeps the best result. Ties keep
/// the earlier start.
pub fn nelder_mead_restarts(
    f: &mut impl FnMut(&[f64]) -> f64,
    starts: &[Vec<f64>],
    bounds: &[Bounds],
    opts: NelderMeadOptions,
) -> Option<Minimum> {
    starts
        .iter()
        .map(|s| nelder_mead(f, s, bounds, opts))
        .reduce(|best, m| if m.value < best.value { m } else { best })
}

/// Smallest `x` in `[lo, hi]` with `pred(x)` true, assuming `pred` is
/// monotone (false then true). Stops at width `tol`.
pub fn bisect_threshold(mut pred: impl FnMut(f64) -> Result<bool>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !pred(hi)? {
        return Err(Error::NoSolution("predicate false at the upper end"));
    }
    if pred(lo)? {
        return Ok(lo);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if pred(m)? {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}
