//! Mermin-Klyshko inequality tests with displaced parity observables.
//!
//! The expectation of a product of displaced parity operators equals `π³`
//! times the normalized Wigner function at the displacement point, so the
//! three-mode MK combination
//!
//! ```text
//! B₃ = π³ { W(α₁,α₂,α₃′) + W(α₁,α₂′,α₃) + W(α₁′,α₂,α₃) − W(α₁′,α₂′,α₃′) }
//! ```
//!
//! is directly computable from the Gaussian-mixture representation. Local
//! realistic models obey `|B₃| ≤ 2`; quantum mechanics reaches `2√2`. All
//! searches here use the setting `α = 0`, `α′ = ix` and scan the magnitude
//! `x`, with an optional uniform detection-loss channel applied first.
//!
//! The same recursive construction defines `B_n` for more parties (with
//! quantum maximum `2^{(n+1)/2}`); only the three-mode polynomial is built
//! here.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ghz::{photon_operated_ghz, PhotonOpSpec};
use crate::optimize::{bisect_root, grid_then_golden, GridRange};
use crate::phasespace::{GaussianMixtureState, WignerEvaluator};

/// Quantum-mechanical maximum of `|B₃|`.
pub const QUANTUM_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Search domain and resolution for the displacement magnitude.
const X_MAX: f64 = 2.0;
const X_GRID_POINTS: usize = 401;
const X_TOL: f64 = 1e-8;

/// Default squeezing scan for the joint maximization.
pub const DEFAULT_R_RANGE: GridRange = GridRange {
    min: 0.005,
    max: 2.0,
    steps: 200,
};

/// Measurement setting of the MK test: the common displacement magnitude.
/// `α = 0` maps to the phase-space origin and `α′ = ix` to `(0, √2·x)` on
/// each displaced mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MkSetting {
    pub x: f64,
}

impl MkSetting {
    pub fn new(x: f64) -> Self {
        Self { x }
    }

    /// The four six-dimensional evaluation points of the `B₃` combination,
    /// in the order (primed mode 3, primed mode 2, primed mode 1, all primed).
    fn points(&self) -> [[f64; 6]; 4] {
        let p = std::f64::consts::SQRT_2 * self.x;
        [
            [0.0, 0.0, 0.0, 0.0, 0.0, p],
            [0.0, 0.0, 0.0, p, 0.0, 0.0],
            [0.0, p, 0.0, 0.0, 0.0, 0.0],
            [0.0, p, 0.0, p, 0.0, p],
        ]
    }
}

fn b3_from_evaluator(eval: &WignerEvaluator, setting: &MkSetting) -> Result<f64> {
    let pts = setting.points();
    let w0 = eval.normalized_value(&pts[0])?;
    let w1 = eval.normalized_value(&pts[1])?;
    let w2 = eval.normalized_value(&pts[2])?;
    let w3 = eval.normalized_value(&pts[3])?;
    Ok(std::f64::consts::PI.powi(3) * (w0 + w1 + w2 - w3))
}

/// Signed `B₃` value of a three-mode state at the given setting.
pub fn b3_value(state: &GaussianMixtureState, setting: &MkSetting) -> Result<f64> {
    if state.num_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: 2 * state.num_modes(),
        });
    }
    b3_from_evaluator(&WignerEvaluator::new(state)?, setting)
}

/// Maximizes `|B₃|` over the displacement magnitude `x ∈ [0, 2]`.
///
/// A 401-point grid locates the basin and golden-section refinement pins the
/// maximum; ties resolve to the smallest `x`. Returns `(x*, |B₃|*)`.
pub fn maximize_b3(state: &GaussianMixtureState) -> Result<(f64, f64)> {
    if state.num_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: 2 * state.num_modes(),
        });
    }
    let eval = WignerEvaluator::new(state)?;
    // Probe once so a non-positive norm surfaces as an error, not as -inf.
    b3_from_evaluator(&eval, &MkSetting::new(0.0))?;
    let f = |x: f64| {
        b3_from_evaluator(&eval, &MkSetting::new(x))
            .map(f64::abs)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (x, v) = grid_then_golden(f, 0.0, X_MAX, X_GRID_POINTS, X_TOL);
    Ok((x, v))
}

/// Result of the joint squeezing/displacement maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct B3Maximum {
    pub r: f64,
    pub x: f64,
    pub value: f64,
}

/// Prepares the photon-operated GHZ state at squeezing `r`, degraded by the
/// loss channel of efficiency `eta` on every mode.
pub fn lossy_operated_ghz(
    r: f64,
    ops: &[PhotonOpSpec],
    eta: f64,
) -> Result<GaussianMixtureState> {
    photon_operated_ghz(r, ops)?.apply_loss(eta)
}

/// Maximizes `|B₃|` jointly over the squeezing grid and the displacement
/// magnitude, with detection efficiency `eta` applied to every mode.
///
/// Squeezing points whose conditioning probability is numerically zero are
/// skipped. The coarse grid winner is refined by a golden-section pass in
/// `r`; ties prefer the smallest `x`, then the smallest `r`.
pub fn max_b3_over_r(ops: &[PhotonOpSpec], eta: f64, r_range: &GridRange) -> Result<B3Maximum> {
    let value_at = |r: f64| -> Option<(f64, f64)> {
        let state = lossy_operated_ghz(r, ops, eta).ok()?;
        maximize_b3(&state).ok()
    };

    let rs: Vec<f64> = r_range.points().collect();
    let coarse: Vec<(f64, Option<(f64, f64)>)> = rs
        .par_iter()
        .map(|&r| (r, value_at(r)))
        .collect();

    let mut best: Option<B3Maximum> = None;
    for (r, res) in &coarse {
        let Some((x, v)) = res else { continue };
        let better = match &best {
            None => true,
            Some(b) => {
                *v > b.value
                    || (*v == b.value && (*x < b.x || (*x == b.x && *r < b.r)))
            }
        };
        if better {
            best = Some(B3Maximum {
                r: *r,
                x: *x,
                value: *v,
            });
        }
    }
    let coarse_best = best.ok_or(Error::ZeroSuccessProbability)?;

    // Local refinement in r around the winning grid cell.
    let h = (r_range.max - r_range.min) / (r_range.steps - 1) as f64;
    let lo = (coarse_best.r - h).max(r_range.min);
    let hi = (coarse_best.r + h).min(r_range.max);
    let (r_star, v_star) = grid_then_golden(
        |r| value_at(r).map(|(_, v)| v).unwrap_or(f64::NEG_INFINITY),
        lo,
        hi,
        17,
        1e-6,
    );
    if v_star > coarse_best.value {
        let (x_star, value) = value_at(r_star).ok_or(Error::ZeroSuccessProbability)?;
        Ok(B3Maximum {
            r: r_star,
            x: x_star,
            value,
        })
    } else {
        Ok(coarse_best)
    }
}

/// Detection efficiency at which the scheme's maximal `|B₃|` crosses the
/// local-realistic bound 2, found by bisection to 1e-4.
pub fn threshold_efficiency(ops: &[PhotonOpSpec]) -> Result<f64> {
    let excess = |eta: f64| {
        max_b3_over_r(ops, eta, &DEFAULT_R_RANGE)
            .map(|m| m.value - 2.0)
            .unwrap_or(-2.0)
    };
    if excess(1.0) <= 0.0 {
        return Err(Error::NoViolation);
    }
    // Walk down from perfect efficiency until the violation disappears.
    let mut lo = 1.0 - 0.05;
    while lo > 0.0 && excess(lo) > 0.0 {
        lo -= 0.05;
    }
    if lo <= 0.0 {
        return Err(Error::NoCrossing);
    }
    bisect_root(excess, lo, (lo + 0.05).min(1.0), 1e-4)
}
