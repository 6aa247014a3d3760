//! Fidelity of the three-party teleportation network, gain optimization,
//! output-state Wigner fields and EPR quadrature correlations.
//!
//! The sender (mode A) Bell-measures the input against her share, the helper
//! (mode B) measures `p` and feeds the result forward with gain `g`, and the
//! receiver (mode C) displaces accordingly. For a coherent input and a
//! zero-mean Gaussian resource with covariance `V`, the average fidelity has
//! the closed form `F = 4 / √(det V · det(L₁ + Kᵀ L₂ K))`, independent of the
//! input amplitude. An equivalent route goes through the output-noise map:
//! the teleported quadratures acquire additive noise `(x₃−x₁, p₁+g·p₂+p₃)`,
//! so `F = 1 / √det(I₂ + A V Aᵀ)`. Both are implemented; they cross-check
//! each other to near machine precision.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dd::{Dd, DdMat, ZERO};
use crate::error::{Error, Result};
use crate::ghz::{photon_operated_ghz, Mode, PhotonOpSpec};
use crate::optimize::{bisect_root, grid_then_golden};
use crate::phasespace::{CovarianceMatrix, GaussianMixtureState, GaussianTerm};

/// Whether the feed-forward gain is fixed at one or optimized per state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    Unit,
    Optimal,
}

const DET_FLOOR: f64 = 1e-300;

/// Gain search interval; the GHZ closed-form optimum stays below 1 and
/// photon-operated optima remain nearby.
const GAIN_RANGE: (f64, f64) = (0.0, 1.5);
const GAIN_GRID_POINTS: usize = 61;
const GAIN_TOL: f64 = 1e-8;

/// Feed-forward configuration of the network: Charlie's gain on Bob's
/// `p` outcome and the coherent input amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleportConfig {
    pub gain: f64,
    pub input_alpha: Complex64,
}

impl TeleportConfig {
    pub fn unit_gain(input_alpha: Complex64) -> Self {
        Self {
            gain: 1.0,
            input_alpha,
        }
    }
}

/// The three 8×8 blocks of the closed-form fidelity determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityMatrices {
    pub l1: DMatrix<f64>,
    pub l2: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

/// The feed-forward matrix `K`: passes the resource modes through and routes
/// the measured combinations `x₃ − (x₀ − x₁)` and `p₃ − (p₀ + p₁) − g·p₂`
/// into the resource's third slot.
fn feed_forward_k(gain: f64) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(8, 8);
    for i in 0..4 {
        k[(2 + i, 2 + i)] = 1.0;
    }
    k[(6, 0)] = -1.0;
    k[(6, 2)] = 1.0;
    k[(6, 6)] = 1.0;
    k[(7, 1)] = -1.0;
    k[(7, 3)] = -1.0;
    k[(7, 5)] = -gain;
    k[(7, 7)] = 1.0;
    k
}

impl FidelityMatrices {
    /// Builds `L₁ = diag(2I₂, 0₄, 2I₂)`, `L₂` with `V⁻¹` in its lower-right
    /// 6×6 block, and the feed-forward matrix `K` containing the gain.
    pub fn new(v: &CovarianceMatrix, gain: f64) -> Result<Self> {
        if v.dim() != 6 {
            return Err(Error::DimensionMismatch {
                expected: 6,
                found: v.dim(),
            });
        }
        let mut l1 = DMatrix::zeros(8, 8);
        for i in [0, 1, 6, 7] {
            l1[(i, i)] = 2.0;
        }

        let lu = v.matrix().clone().lu();
        if lu.determinant().abs() < DET_FLOOR {
            return Err(Error::Singular);
        }
        let v_inv = lu.try_inverse().ok_or(Error::Singular)?;
        let mut l2 = DMatrix::zeros(8, 8);
        l2.view_mut((2, 2), (6, 6)).copy_from(&v_inv);

        Ok(Self {
            l1,
            l2,
            k: feed_forward_k(gain),
        })
    }
}

/// Average teleportation fidelity of a zero-mean Gaussian resource with
/// covariance `v` at feed-forward gain `g`, via the determinant closed form.
pub fn fidelity_gaussian(v: &CovarianceMatrix, g: f64) -> Result<f64> {
    let mats = FidelityMatrices::new(v, g)?;
    let det_v = v.matrix().determinant();
    if det_v.abs() < DET_FLOOR {
        return Err(Error::Singular);
    }
    let q = &mats.l1 + mats.k.transpose() * &mats.l2 * &mats.k;
    let det_q = q.determinant();
    if det_q <= 0.0 {
        return Err(Error::Singular);
    }
    Ok(4.0 / (det_v * det_q).sqrt())
}

/// The 2×6 map sending resource quadratures to the additive output noise
/// `(x₃ − x₁, p₁ + g·p₂ + p₃)`.
fn noise_map(g: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(2, 6);
    a[(0, 0)] = -1.0;
    a[(0, 4)] = 1.0;
    a[(1, 1)] = 1.0;
    a[(1, 3)] = g;
    a[(1, 5)] = 1.0;
    a
}

/// Independent fidelity route through the output-noise map:
/// `Σ_out = I₂/2 + A V Aᵀ` and `F = 1/√det(Σ_out + I₂/2)`.
pub fn fidelity_two_path_check(v: &CovarianceMatrix, g: f64) -> Result<f64> {
    if v.dim() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: v.dim(),
        });
    }
    let a = noise_map(g);
    let overlap = &a * v.matrix() * a.transpose() + DMatrix::identity(2, 2);
    let det = overlap.determinant();
    if det <= 0.0 {
        return Err(Error::Singular);
    }
    Ok(1.0 / det.sqrt())
}

/// One term's fidelity through the same determinant closed form, carried in
/// double-double so the signed sum over terms survives the cancellation at
/// small joint click probabilities.
fn fidelity_term_dd(v: &DdMat, g: f64) -> Result<Dd> {
    let (det_v, v_inv) = v.lu_det_inverse().ok_or(Error::Singular)?;
    if det_v.to_f64().abs() < DET_FLOOR {
        return Err(Error::Singular);
    }
    let mut l2 = DdMat::zeros(8, 8);
    l2.set_block(2, 2, &v_inv);
    let mut q = l2.sandwich_f64(&feed_forward_k(g).transpose());
    for i in [0usize, 1, 6, 7] {
        q.set(i, i, q.get(i, i).add_f64(2.0));
    }
    let (det_q, _) = q.lu_det_inverse().ok_or(Error::Singular)?;
    if det_q.to_f64() <= 0.0 {
        return Err(Error::Singular);
    }
    Ok(det_v.mul(det_q).sqrt().recip().mul_f64(4.0))
}

/// Fidelity with a signed Gaussian mixture as the resource: the weighted
/// average of per-term fidelities (fidelity is linear in the resource
/// Wigner function).
pub fn fidelity_state(state: &GaussianMixtureState, g: f64) -> Result<f64> {
    if state.norm() <= 0.0 {
        return Err(Error::NonPositiveNorm);
    }
    let mut acc = ZERO;
    for t in state.terms() {
        acc = acc.add(t.weight_dd().mul(fidelity_term_dd(t.cov_dd(), g)?));
    }
    Ok(acc.div(state.norm_dd()).to_f64())
}

/// Closed-form optimal gain of the pure GHZ resource at squeezing `r`.
pub fn ghz_optimal_gain(r: f64) -> f64 {
    let e = (4.0 * r).exp();
    (e - 1.0) / (e + 0.5)
}

/// Maximizes the fidelity over the gain `g ∈ [0, 1.5]`; returns `(g*, F*)`.
pub fn optimal_gain(state: &GaussianMixtureState) -> Result<(f64, f64)> {
    if state.norm() <= 0.0 {
        return Err(Error::NonPositiveNorm);
    }
    // Per-term overlap determinants are quadratic in g, so the objective is
    // smooth; a coarse grid guards against signed-term shoulders before the
    // golden-section refinement.
    let f = |g: f64| fidelity_state(state, g).unwrap_or(f64::NEG_INFINITY);
    let (g, v) = grid_then_golden(f, GAIN_RANGE.0, GAIN_RANGE.1, GAIN_GRID_POINTS, GAIN_TOL);
    Ok((g, v))
}

/// Smallest squeezing at which the scheme's fidelity crosses the classical
/// bound 1/2, located on a scan grid and bisected to 1e-4.
pub fn threshold_squeezing(ops: &[PhotonOpSpec], gain_mode: GainMode) -> Result<f64> {
    let fidelity_at = |r: f64| -> Option<f64> {
        let state = photon_operated_ghz(r, ops).ok()?;
        match gain_mode {
            GainMode::Unit => fidelity_state(&state, 1.0).ok(),
            GainMode::Optimal => optimal_gain(&state).ok().map(|(_, f)| f),
        }
    };
    let excess = |r: f64| fidelity_at(r).map(|f| f - 0.5);

    // Whole scan evaluated up front (in parallel); the smallest upward
    // crossing is then bracketed and bisected.
    let steps = 800;
    let h = 2.0 / steps as f64;
    let rs: Vec<f64> = (1..=steps).map(|k| h * k as f64).collect();
    let values: Vec<Option<f64>> = rs.par_iter().map(|&r| excess(r)).collect();
    let mut prev: Option<(f64, f64)> = None;
    for (&r, e) in rs.iter().zip(&values) {
        let Some(e) = *e else { continue };
        if let Some((r_prev, e_prev)) = prev {
            if e_prev <= 0.0 && e > 0.0 {
                return bisect_root(|r| excess(r).unwrap_or(-1.0), r_prev, r, 1e-4);
            }
        }
        prev = Some((r, e));
    }
    Err(Error::NoCrossing)
}

/// Teleported one-mode output state for a coherent input: every resource
/// term maps to a Gaussian with mean `(√2 Re α, √2 Im α)` and covariance
/// `I₂/2 + A covᵢ Aᵀ`, keeping its weight.
pub fn output_state(
    state: &GaussianMixtureState,
    config: &TeleportConfig,
) -> Result<GaussianMixtureState> {
    if state.num_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: 2 * state.num_modes(),
        });
    }
    if state.norm() <= 0.0 {
        return Err(Error::NonPositiveNorm);
    }
    let a = noise_map(config.gain);
    let mean = DVector::from_column_slice(&[
        std::f64::consts::SQRT_2 * config.input_alpha.re,
        std::f64::consts::SQRT_2 * config.input_alpha.im,
    ]);
    let terms = state
        .terms()
        .iter()
        .map(|t| {
            let mut sigma = t.cov_dd().sandwich_f64(&a);
            for k in 0..2 {
                sigma.set(k, k, sigma.get(k, k).add_f64(0.5));
            }
            GaussianTerm::new_dd(t.weight_dd(), mean.clone(), sigma.symmetrize())
        })
        .collect();
    GaussianMixtureState::from_terms(1, terms)
}

/// Samples the normalized output Wigner function on the tensor grid
/// `xs × ps`; the result is row-major over `xs` then `ps`.
pub fn output_wigner(
    state: &GaussianMixtureState,
    config: &TeleportConfig,
    xs: &[f64],
    ps: &[f64],
) -> Result<Vec<f64>> {
    let out = output_state(state, config)?;
    let eval = crate::phasespace::WignerEvaluator::new(&out)?;
    let mut values = Vec::with_capacity(xs.len() * ps.len());
    for &x in xs {
        for &p in ps {
            values.push(eval.normalized_value(&[x, p])?);
        }
    }
    Ok(values)
}

/// EPR correlation sum `Var(x_i − x_j) + Var(Σ_k p_k)` from the effective
/// covariance of the resource.
pub fn epr_sum(state: &GaussianMixtureState, pair: (Mode, Mode)) -> Result<f64> {
    if pair.0 == pair.1 {
        return Err(Error::InvalidParameter(
            "EPR pair needs two distinct modes".into(),
        ));
    }
    let v = state.effective_covariance()?;
    let m = v.matrix();
    let (i, j) = (pair.0.index(), pair.1.index());
    let var_diff = m[(2 * i, 2 * i)] + m[(2 * j, 2 * j)] - 2.0 * m[(2 * i, 2 * j)];
    let mut var_sum_p = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            var_sum_p += m[(2 * a + 1, 2 * b + 1)];
        }
    }
    Ok(var_diff + var_sum_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghz::{ghz_covariance, ghz_state, GhzParams};
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_resource_anchor() {
        let v = CovarianceMatrix::vacuum(3);
        assert_abs_diff_eq!(
            fidelity_gaussian(&v, 1.0).unwrap(),
            1.0 / 5f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(fidelity_gaussian(&v, 0.0).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn both_routes_agree_on_ghz() {
        for &r in &[0.1, 0.3, 0.7] {
            for &g in &[0.0, 0.5, 1.0] {
                let v = ghz_covariance(&GhzParams::symmetric(r));
                assert_abs_diff_eq!(
                    fidelity_gaussian(&v, g).unwrap(),
                    fidelity_two_path_check(&v, g).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn fidelity_matrices_invariants() {
        let mats = FidelityMatrices::new(&ghz_covariance(&GhzParams::symmetric(0.3)), 0.8).unwrap();
        assert!((&mats.l1 - mats.l1.transpose()).abs().max() == 0.0);
        assert!((&mats.l2 - mats.l2.transpose()).abs().max() < 1e-12);
        assert!(mats.l1.symmetric_eigenvalues().iter().all(|&e| e >= -1e-12));
        assert!(mats.l2.symmetric_eigenvalues().iter().all(|&e| e >= -1e-12));
        assert_abs_diff_eq!(mats.k[(6, 0)], -1.0);
        assert_abs_diff_eq!(mats.k[(7, 1)], -1.0);
        assert_abs_diff_eq!(mats.k[(6, 1)], 0.0);
        assert_abs_diff_eq!(mats.k[(7, 0)], 0.0);
    }

    #[test]
    fn ghz_unit_gain_threshold() {
        let r = threshold_squeezing(&[], GainMode::Unit).unwrap();
        assert!((r - 0.107).abs() < 5e-3, "got {r}");
    }

    #[test]
    fn state_fidelity_matches_matrix_fidelity_without_ops() {
        let params = GhzParams::symmetric(0.4);
        assert_abs_diff_eq!(
            fidelity_state(&ghz_state(&params), 1.0).unwrap(),
            fidelity_gaussian(&ghz_covariance(&params), 1.0).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn optimal_gain_matches_closed_form() {
        let r = 0.3;
        let (g, f) = optimal_gain(&ghz_state(&GhzParams::symmetric(r))).unwrap();
        assert_abs_diff_eq!(g, ghz_optimal_gain(r), epsilon = 1e-6);
        assert!(f > fidelity_state(&ghz_state(&GhzParams::symmetric(r)), 1.0).unwrap());
    }

    #[test]
    fn optimal_fidelity_approaches_half_at_zero_squeezing() {
        let (_, f) = optimal_gain(&ghz_state(&GhzParams::symmetric(1e-4))).unwrap();
        assert_abs_diff_eq!(f, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn unit_gain_fidelity_increases_and_saturates() {
        let mut last = 0.0;
        for k in 1..=12 {
            let r = 0.25 * k as f64;
            let f = fidelity_state(&ghz_state(&GhzParams::symmetric(r)), 1.0).unwrap();
            assert!(f > last);
            last = f;
        }
        let f3 = fidelity_state(&ghz_state(&GhzParams::symmetric(3.0)), 1.0).unwrap();
        assert!(f3 > 0.97, "F(r=3) = {f3}");
    }

    #[test]
    fn output_state_of_vacuum_resource() {
        let config = TeleportConfig::unit_gain(Complex64::new(1.0, 0.0));
        let out = output_state(&GaussianMixtureState::vacuum(3), &config).unwrap();
        assert_eq!(out.num_modes(), 1);
        let t = &out.terms()[0];
        assert_abs_diff_eq!(t.mean()[0], std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(t.mean()[1], 0.0);
        // Σ_out = I/2 + A (I/2) Aᵀ = diag(3/2, 2) at unit gain; its overlap
        // determinant with another vacuum reproduces 1/√5.
        assert_abs_diff_eq!(t.cov().matrix()[(0, 0)], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(t.cov().matrix()[(1, 1)], 2.0, epsilon = 1e-14);
        let det = (t.cov().matrix() + DMatrix::identity(2, 2) * 0.5).determinant();
        assert_abs_diff_eq!(1.0 / det.sqrt(), 1.0 / 5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn strong_squeezing_teleports_faithfully() {
        let config = TeleportConfig::unit_gain(Complex64::new(0.7, -0.2));
        let out = output_state(&ghz_state(&GhzParams::symmetric(3.0)), &config).unwrap();
        let v = out.effective_covariance().unwrap();
        // residual noise is (3/2)e^{-2r} in the p entry
        assert!((v.matrix() - DMatrix::identity(2, 2) * 0.5).abs().max() < 4e-3);
    }

    #[test]
    fn epr_sum_closed_forms() {
        assert_abs_diff_eq!(
            epr_sum(&GaussianMixtureState::vacuum(3), (Mode::A, Mode::C)).unwrap(),
            2.5,
            epsilon = 1e-14
        );
        for &r in &[0.2, 0.5, 1.0] {
            assert_abs_diff_eq!(
                epr_sum(&ghz_state(&GhzParams::symmetric(r)), (Mode::A, Mode::C)).unwrap(),
                2.5 * (-2.0 * r).exp(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn epr_pair_must_differ() {
        assert!(epr_sum(&GaussianMixtureState::vacuum(3), (Mode::B, Mode::B)).is_err());
    }

    #[test]
    fn two_mode_subtraction_improves_epr_correlations() {
        let r = 0.2;
        let ghz = epr_sum(&ghz_state(&GhzParams::symmetric(r)), (Mode::A, Mode::C)).unwrap();
        let sub_ac = epr_sum(
            &photon_operated_ghz(
                r,
                &[PhotonOpSpec::subtract(Mode::A), PhotonOpSpec::subtract(Mode::C)],
            )
            .unwrap(),
            (Mode::A, Mode::C),
        )
        .unwrap();
        assert!(sub_ac < ghz, "subtraction should tighten correlations: {sub_ac} vs {ghz}");

        for ops in [
            vec![PhotonOpSpec::add(Mode::A)],
            vec![PhotonOpSpec::add(Mode::A), PhotonOpSpec::add(Mode::C)],
            vec![
                PhotonOpSpec::add(Mode::A),
                PhotonOpSpec::add(Mode::B),
                PhotonOpSpec::add(Mode::C),
            ],
        ] {
            let added = epr_sum(
                &photon_operated_ghz(r, &ops).unwrap(),
                (Mode::A, Mode::C),
            )
            .unwrap();
            assert!(added > ghz, "addition should not improve correlations");
        }
    }

    #[test]
    fn three_mode_subtraction_output_is_bimodal() {
        // The output field at weak squeezing splits along p: either the
        // section through the mean shows two local maxima, or the Wigner
        // function dips negative.
        let state = photon_operated_ghz(
            0.3,
            &[
                PhotonOpSpec::subtract(Mode::A),
                PhotonOpSpec::subtract(Mode::B),
                PhotonOpSpec::subtract(Mode::C),
            ],
        )
        .unwrap();
        let config = TeleportConfig::unit_gain(Complex64::new(1.0, 0.0));
        let out = output_state(&state, &config).unwrap();
        let eval = crate::phasespace::WignerEvaluator::new(&out).unwrap();
        let x0 = std::f64::consts::SQRT_2;
        let ps: Vec<f64> = (0..=400).map(|k| -5.0 + 0.025 * k as f64).collect();
        let vals: Vec<f64> = ps.iter().map(|&p| eval.normalized_value(&[x0, p]).unwrap()).collect();
        let negative = vals.iter().any(|&w| w < -1e-9);
        let mut maxima = 0;
        for k in 1..vals.len() - 1 {
            if vals[k] > vals[k - 1] && vals[k] > vals[k + 1] && vals[k] > 1e-6 {
                maxima += 1;
            }
        }
        assert!(
            negative || maxima >= 2,
            "expected split output structure (maxima={maxima}, negative={negative})"
        );
    }
}
