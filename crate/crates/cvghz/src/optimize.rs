//! Deterministic one-dimensional searches used by the sweep drivers: a coarse
//! grid to locate the basin, golden-section refinement inside it, and
//! bisection for threshold roots.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Inclusive linear grid; `steps` is the number of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min < max) || steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs min < max and at least 2 steps, got [{min}, {max}] with {steps}"
            )));
        }
        Ok(Self { min, max, steps })
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(move |k| self.min + h * k as f64)
    }
}

/// Golden-section maximization of `f` on `[a, b]` down to interval width
/// `tol`. Returns `(x_max, f_max)`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coarse grid over `[a, b]` followed by golden-section refinement in the
/// cell bracketing the best grid point. Ties keep the smallest abscissa, so
/// the result does not depend on evaluation order.
pub fn grid_then_golden(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    grid_points: usize,
    tol: f64,
) -> (f64, f64) {
    debug_assert!(grid_points >= 2);
    let h = (b - a) / (grid_points - 1) as f64;
    let mut best_k = 0;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..grid_points {
        let v = f(a + h * k as f64);
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    let lo = a + h * best_k.saturating_sub(1) as f64;
    let hi = (a + h * (best_k + 1) as f64).min(b);
    let (x, v) = golden_max(&f, lo, hi, tol);
    if best_v > v {
        (a + h * best_k as f64, best_v)
    } else {
        (x, v)
    }
}

/// Bisection root of `f` on `[lo, hi]` to abscissa tolerance `tol`; `f(lo)`
/// and `f(hi)` must have opposite signs.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoCrossing);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
