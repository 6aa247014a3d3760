//! Symplectic spectra, squared logarithmic negativity, and the Gaussian
//! tangle.
//!
//! For a Gaussian state with covariance `V`, the trace norm of the partial
//! transpose is `Π_k max(1, 1/(2ν̃_k))` over the symplectic eigenvalues `ν̃_k`
//! of the partially transposed covariance, so the logarithmic negativity is
//! `Σ_k max(0, -log₂(2ν̃_k))`. The Gaussian tangle is the residual of the
//! squared negativity over bipartitions, minimized over the focus mode.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::phasespace::{CovarianceMatrix, GaussianMixtureState, SymplecticForm};

/// Imaginary parts beyond this are treated as an eigensolver failure.
const IMAG_TOL: f64 = 1e-9;

/// One side of a bipartition: the modes whose `p` quadratures are flipped by
/// the partial transpose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    transposed_modes: Vec<usize>,
    num_modes: usize,
}

impl Partition {
    /// `modes` must be a nonempty proper subset of `0..num_modes`.
    pub fn new(modes: &[usize], num_modes: usize) -> Result<Self> {
        let mut sorted: Vec<usize> = modes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() || sorted.len() != modes.len() || sorted.len() >= num_modes {
            return Err(Error::InvalidParameter(format!(
                "partition must be a nonempty proper subset of 0..{num_modes}"
            )));
        }
        if let Some(&m) = sorted.iter().find(|&&m| m >= num_modes) {
            return Err(Error::InvalidMode { mode: m, num_modes });
        }
        Ok(Self {
            transposed_modes: sorted,
            num_modes,
        })
    }

    pub fn transposed_modes(&self) -> &[usize] {
        &self.transposed_modes
    }
}

/// Symplectic eigenvalues of a covariance matrix, sorted ascending.
///
/// Route: Cholesky `V = LLᵀ`, then the symmetric matrix `Lᵀ Ωᵀ V Ω L` has
/// eigenvalues `{ν_k², ν_k²}`; pairs are averaged and square-rooted.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = v.num_modes();
    let omega = SymplecticForm::new(n);
    let chol = v
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("covariance is not positive definite".into()))?;
    let l = chol.l();
    let m = l.transpose() * omega.matrix().transpose() * v.matrix() * omega.matrix() * &l;
    let sym = (&m + m.transpose()) * 0.5;
    let mut evs: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    evs.sort_by(|a, b| a.partial_cmp(b).expect("real eigenvalues"));
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let pair_avg = 0.5 * (evs[2 * k] + evs[2 * k + 1]);
        out.push(pair_avg.max(0.0).sqrt());
    }
    Ok(out)
}

/// Same spectrum through the nonsymmetric product `-(ΩV)²` and a dense
/// complex eigensolve. Kept as an independently routed cross-check.
pub fn symplectic_eigenvalues_direct(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = v.num_modes();
    let omega = SymplecticForm::new(n);
    let ov = omega.matrix() * v.matrix();
    let m = -(&ov * &ov);
    let evs = m.complex_eigenvalues();
    let mut reals: Vec<f64> = Vec::with_capacity(2 * n);
    for ev in evs.iter() {
        if ev.im.abs() > IMAG_TOL {
            return Err(Error::InvalidParameter(format!(
                "unexpected complex eigenvalue {ev} in symplectic spectrum"
            )));
        }
        reals.push(ev.re.max(0.0).sqrt());
    }
    reals.sort_by(|a, b| a.partial_cmp(b).expect("real eigenvalues"));
    Ok((0..n).map(|k| 0.5 * (reals[2 * k] + reals[2 * k + 1])).collect())
}

/// Partial transpose in phase space: flips the sign of the `p` rows/columns
/// of the transposed modes.
pub fn partial_transpose(v: &CovarianceMatrix, partition: &Partition) -> CovarianceMatrix {
    let dim = v.dim();
    let mut flip = DMatrix::identity(dim, dim);
    for &m in &partition.transposed_modes {
        flip[(2 * m + 1, 2 * m + 1)] = -1.0;
    }
    let pt = &flip * v.matrix() * &flip;
    CovarianceMatrix::from_matrix(pt).expect("sign conjugation keeps symmetry")
}

/// Squared logarithmic negativity `(-log₂ ||ρ^{T_i}||₁)²` of the bipartition.
pub fn squared_log_negativity(v: &CovarianceMatrix, partition: &Partition) -> Result<f64> {
    if partition.num_modes != v.num_modes() {
        return Err(Error::DimensionMismatch {
            expected: 2 * partition.num_modes,
            found: v.dim(),
        });
    }
    let pt = partial_transpose(v, partition);
    let nus = symplectic_eigenvalues(&pt)?;
    let ln: f64 = nus
        .iter()
        .map(|&nu| (-(2.0 * nu).log2()).max(0.0))
        .sum();
    Ok(ln * ln)
}

/// Keeps the listed modes of a covariance matrix, deleting the rest.
pub fn reduced_covariance(v: &CovarianceMatrix, keep: &[usize]) -> CovarianceMatrix {
    let mut m = DMatrix::zeros(2 * keep.len(), 2 * keep.len());
    for (i_new, &i_old) in keep.iter().enumerate() {
        for (j_new, &j_old) in keep.iter().enumerate() {
            for qi in 0..2 {
                for qj in 0..2 {
                    m[(2 * i_new + qi, 2 * j_new + qj)] =
                        v.matrix()[(2 * i_old + qi, 2 * j_old + qj)];
                }
            }
        }
    }
    CovarianceMatrix::from_matrix(m).expect("principal submatrix keeps symmetry")
}

/// Gaussian tangle of a three-mode covariance: the residual
/// `E^{i|jk} - E^{i|j} - E^{i|k}` of squared logarithmic negativities,
/// minimized over the focus mode `i`. Two-mode terms use the reduced
/// covariance with the third mode deleted.
pub fn gaussian_tangle(v: &CovarianceMatrix) -> Result<f64> {
    if v.num_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: v.dim(),
        });
    }
    let mut best = f64::INFINITY;
    for i in 0..3 {
        best = best.min(tangle_residual(v, i)?);
    }
    Ok(best)
}

/// The residual for one focus mode; exposed for the bipartition-structure
/// checks.
pub fn tangle_residual(v: &CovarianceMatrix, focus: usize) -> Result<f64> {
    let others: Vec<usize> = (0..3).filter(|&m| m != focus).collect();
    let one_vs_rest = squared_log_negativity(v, &Partition::new(&[focus], 3)?)?;
    let mut residual = one_vs_rest;
    for &j in &others {
        let pair = reduced_covariance(v, &[focus.min(j), focus.max(j)]);
        let focus_pos = if focus < j { 0 } else { 1 };
        residual -= squared_log_negativity(&pair, &Partition::new(&[focus_pos], 2)?)?;
    }
    Ok(residual)
}

/// Gaussian tangle of a (possibly non-Gaussian) mixture state, evaluated on
/// its effective covariance.
pub fn tangle_of_state(state: &GaussianMixtureState) -> Result<f64> {
    gaussian_tangle(&state.effective_covariance()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghz::{ghz_covariance, photon_operated_ghz, GhzParams, Mode, PhotonOpSpec};
    use crate::phasespace::{GaussianMixtureState, SymplecticMatrix};
    use approx::assert_abs_diff_eq;

    fn two_mode_squeezed(s: f64) -> CovarianceMatrix {
        let nd = SymplecticMatrix::two_mode_squeezer(s, 0, 1, 2).unwrap();
        GaussianMixtureState::vacuum(2)
            .apply_symplectic(&nd)
            .unwrap()
            .effective_covariance()
            .unwrap()
    }

    #[test]
    fn vacuum_spectrum_is_half() {
        let nus = symplectic_eigenvalues(&CovarianceMatrix::vacuum(3)).unwrap();
        for nu in nus {
            assert_abs_diff_eq!(nu, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn pure_two_mode_squeezed_spectrum() {
        let nus = symplectic_eigenvalues(&two_mode_squeezed(0.7)).unwrap();
        assert_eq!(nus.len(), 2);
        for nu in nus {
            assert_abs_diff_eq!(nu, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn thermal_spectrum() {
        let nbar = 1.3;
        let v = CovarianceMatrix::from_matrix(DMatrix::identity(2, 2) * (nbar + 0.5)).unwrap();
        let nus = symplectic_eigenvalues(&v).unwrap();
        assert_abs_diff_eq!(nus[0], nbar + 0.5, epsilon = 1e-13);
    }

    #[test]
    fn both_eigenvalue_routes_agree() {
        let v = ghz_covariance(&GhzParams::new(3, 0.6, 0.25).unwrap());
        let a = symplectic_eigenvalues(&v).unwrap();
        let b = symplectic_eigenvalues_direct(&v).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn partial_transpose_is_involutive() {
        let v = ghz_covariance(&GhzParams::symmetric(0.5));
        let p = Partition::new(&[1], 3).unwrap();
        let twice = partial_transpose(&partial_transpose(&v, &p), &p);
        assert!((twice.matrix() - v.matrix()).abs().max() == 0.0);
    }

    #[test]
    fn vacuum_has_no_negativity() {
        let v = CovarianceMatrix::vacuum(2);
        for modes in [&[0usize][..], &[1][..]] {
            let p = Partition::new(modes, 2).unwrap();
            assert_abs_diff_eq!(squared_log_negativity(&v, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_mode_squeezed_negativity_closed_form() {
        // The partially transposed spectrum is e^{∓2s}/2, so the logarithmic
        // negativity is 2s/ln 2.
        for &s in &[0.2, 0.5, 1.0] {
            let v = two_mode_squeezed(s);
            let p = Partition::new(&[0], 2).unwrap();
            let expected = (2.0 * s / std::f64::consts::LN_2).powi(2);
            assert_abs_diff_eq!(squared_log_negativity(&v, &p).unwrap(), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn product_of_squeezed_vacua_is_separable() {
        let s0 = SymplecticMatrix::single_mode_squeezer(0.8, 0, 2).unwrap();
        let s1 = SymplecticMatrix::single_mode_squeezer(-0.5, 1, 2).unwrap();
        let v = GaussianMixtureState::vacuum(2)
            .apply_symplectic(&s0)
            .unwrap()
            .apply_symplectic(&s1)
            .unwrap()
            .effective_covariance()
            .unwrap();
        let p = Partition::new(&[0], 2).unwrap();
        assert_abs_diff_eq!(squared_log_negativity(&v, &p).unwrap(), 0.0);
    }

    #[test]
    fn negativity_invariant_under_local_symplectics() {
        let v = ghz_covariance(&GhzParams::symmetric(0.5));
        let p = Partition::new(&[0], 3).unwrap();
        let base = squared_log_negativity(&v, &p).unwrap();
        // Local single-mode squeezers and phase rotations on each mode.
        let mut s = DMatrix::identity(6, 6);
        for (mode, &(r, th)) in [(0.3, 0.7), (-0.2, 1.9), (0.15, -0.4)].iter().enumerate() {
            let (c, sn) = (f64::cos(th), f64::sin(th));
            let rot = nalgebra::Matrix2::new(c, sn, -sn, c);
            let sq = nalgebra::Matrix2::new(f64::exp(r), 0.0, 0.0, f64::exp(-r));
            let local = rot * sq;
            s.view_mut((2 * mode, 2 * mode), (2, 2)).copy_from(&local);
        }
        let s = SymplecticMatrix::from_matrix(s).unwrap();
        let rotated = GaussianMixtureState::from_covariance(v)
            .apply_symplectic(&s)
            .unwrap()
            .effective_covariance()
            .unwrap();
        let after = squared_log_negativity(&rotated, &p).unwrap();
        assert_abs_diff_eq!(base, after, epsilon = 1e-9);
    }

    #[test]
    fn vacuum_tangle_is_zero() {
        assert_abs_diff_eq!(gaussian_tangle(&CovarianceMatrix::vacuum(3)).unwrap(), 0.0);
    }

    #[test]
    fn ghz_tangle_increases_with_squeezing() {
        let mut last = 0.0;
        for k in 1..=20 {
            let r = 0.05 * k as f64;
            let t = gaussian_tangle(&ghz_covariance(&GhzParams::symmetric(r))).unwrap();
            assert!(t > last, "tangle not increasing at r={r}");
            last = t;
        }
    }

    #[test]
    fn ghz_tangle_continuous_at_zero() {
        let t = gaussian_tangle(&ghz_covariance(&GhzParams::symmetric(1e-4))).unwrap();
        assert!(t >= 0.0 && t < 1e-6);
    }

    #[test]
    fn tangle_matches_direct_eigen_route() {
        // Recompute E^{i|jk} - E^{i|j} - E^{i|k} with the nonsymmetric
        // eigensolve route and compare.
        let v = ghz_covariance(&GhzParams::symmetric(0.5));
        let sq_ln = |cov: &CovarianceMatrix, modes: &[usize], n: usize| -> f64 {
            let pt = partial_transpose(cov, &Partition::new(modes, n).unwrap());
            let nus = symplectic_eigenvalues_direct(&pt).unwrap();
            let ln: f64 = nus.iter().map(|&nu| (-(2.0 * nu).log2()).max(0.0)).sum();
            ln * ln
        };
        let mut expected = f64::INFINITY;
        for i in 0..3 {
            let others: Vec<usize> = (0..3).filter(|&m| m != i).collect();
            let mut res = sq_ln(&v, &[i], 3);
            for &j in &others {
                let pair = reduced_covariance(&v, &[i.min(j), i.max(j)]);
                res -= sq_ln(&pair, &[if i < j { 0 } else { 1 }], 2);
            }
            expected = expected.min(res);
        }
        let got = gaussian_tangle(&v).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-9);
    }

    #[test]
    fn state_tangle_matches_matrix_tangle_without_ops() {
        let params = GhzParams::symmetric(0.4);
        let state = crate::ghz::ghz_state(&params);
        assert_abs_diff_eq!(
            tangle_of_state(&state).unwrap(),
            gaussian_tangle(&ghz_covariance(&params)).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn tangle_depends_only_on_op_count() {
        let r = 0.4;
        let ta = tangle_of_state(&photon_operated_ghz(r, &[PhotonOpSpec::subtract(Mode::A)]).unwrap())
            .unwrap();
        let tb = tangle_of_state(&photon_operated_ghz(r, &[PhotonOpSpec::subtract(Mode::B)]).unwrap())
            .unwrap();
        assert_abs_diff_eq!(ta, tb, epsilon = 1e-10);
    }

    #[test]
    fn two_mode_subtraction_beats_ghz_at_weak_squeezing() {
        let r = 0.2;
        let ghz = gaussian_tangle(&ghz_covariance(&GhzParams::symmetric(r))).unwrap();
        let sub2 = tangle_of_state(
            &photon_operated_ghz(
                r,
                &[PhotonOpSpec::subtract(Mode::A), PhotonOpSpec::subtract(Mode::B)],
            )
            .unwrap(),
        )
        .unwrap();
        assert!(sub2 > ghz, "two-mode subtraction should enhance the tangle: {sub2} vs {ghz}");
    }

    #[test]
    fn minimizing_bipartition_has_operated_focus() {
        // With an operation on one mode, the minimal residual picks that mode
        // as the focus.
        for k in 1..=8 {
            let r = 0.1 * k as f64;
            let state = photon_operated_ghz(r, &[PhotonOpSpec::subtract(Mode::B)]).unwrap();
            let v = state.effective_covariance().unwrap();
            let res_b = tangle_residual(&v, 1).unwrap();
            for focus in [0, 2] {
                assert!(
                    tangle_residual(&v, focus).unwrap() >= res_b - 1e-12,
                    "focus {focus} undercuts the operated mode at r={r}"
                );
            }
        }
    }
}
