//! Multimode states as signed Gaussian mixtures in quadrature phase space.
//!
//! Quadratures are ordered `(x_1, p_1, ..., x_N, p_N)` with `x = (a + a†)/√2`,
//! so the vacuum covariance is `I/2`. A state is a finite signed sum of
//! weighted Gaussian terms; Gaussian unitaries act as symplectic matrices on
//! means and covariances, and an on-off detector click on an ancilla mode
//! turns each term into two (a Schur-complement update with a negative
//! weight). The representation stays exact under every operation used here.
//!
//! Weights and covariances are carried in double-double precision: the total
//! weight of a conditioned state equals its joint click probability, which
//! for weak couplings lies many orders of magnitude below the individual
//! weights, and the signed sums would otherwise drown in `f64` cancellation.
//! Evaluation falls back to plain `f64` whenever the norm is large enough
//! for that to be harmless.

use nalgebra::{DMatrix, DVector};

use crate::dd::{Dd, DdMat, ONE, TWO_PI, ZERO};
use crate::error::{Error, Result};

/// Elementwise tolerance for symmetry and symplectic-closure checks.
pub const MATRIX_TOL: f64 = 1e-12;

/// Symplectic eigenvalues of physical states may undershoot 1/2 by this much.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// `|det|` below this counts as singular.
const DET_FLOOR: f64 = 1e-300;

/// Norms below this fraction of the total absolute weight are treated as a
/// zero-probability conditioning outcome. Double-double reductions resolve
/// cancellation far below this, but the `f64` rounding of transformation
/// entries (t² + r² = 1 only to machine precision) leaves physically-zero
/// click probabilities at ~1e-17; genuine probabilities in the supported
/// parameter ranges stay above 1e-15.
const ZERO_NORM_REL: f64 = 1e-16;

/// Above this norm fraction the Wigner evaluator runs in plain `f64`.
const FAST_EVAL_REL: f64 = 1e-5;

/// The antisymmetric form fixing the canonical commutators in the
/// `(x_1, p_1, ..., x_N, p_N)` ordering: 2×2 blocks `[[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    omega: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(num_modes: usize) -> Self {
        let dim = 2 * num_modes;
        let mut omega = DMatrix::zeros(dim, dim);
        for k in 0..num_modes {
            omega[(2 * k, 2 * k + 1)] = 1.0;
            omega[(2 * k + 1, 2 * k)] = -1.0;
        }
        Self { omega }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn num_modes(&self) -> usize {
        self.omega.nrows() / 2
    }
}

/// Real symmetric second-moment matrix of the quadratures (vacuum = `I/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    v: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a matrix after checking squareness, even dimension and symmetry.
    /// Small asymmetries from round-off are symmetrized away.
    pub fn from_matrix(v: DMatrix<f64>) -> Result<Self> {
        if v.nrows() != v.ncols() || v.nrows() % 2 != 0 || v.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: v.nrows(),
                found: v.ncols(),
            });
        }
        let max_asym = (&v - v.transpose()).abs().max();
        if max_asym > MATRIX_TOL {
            return Err(Error::NonSymmetric);
        }
        let sym = (&v + v.transpose()) * 0.5;
        Ok(Self { v: sym })
    }

    /// Vacuum covariance `I/2` on `num_modes` modes.
    pub fn vacuum(num_modes: usize) -> Self {
        Self {
            v: DMatrix::identity(2 * num_modes, 2 * num_modes) * 0.5,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn num_modes(&self) -> usize {
        self.v.nrows() / 2
    }

    /// Checks the uncertainty relation: every symplectic eigenvalue of a
    /// physical covariance is at least `1/2 - PHYSICALITY_TOL`.
    pub fn check_physical(&self) -> Result<()> {
        let nus = crate::entanglement::symplectic_eigenvalues(self)?;
        match nus.iter().all(|&nu| nu >= 0.5 - PHYSICALITY_TOL) {
            true => Ok(()),
            false => Err(Error::InvalidParameter(format!(
                "covariance violates the uncertainty relation (min symplectic eigenvalue {:.3e})",
                nus.first().copied().unwrap_or(f64::NAN)
            ))),
        }
    }
}

/// Linear mode transformation preserving the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    s: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Validates `S Ω Sᵀ = Ω` elementwise to [`MATRIX_TOL`].
    pub fn from_matrix(s: DMatrix<f64>) -> Result<Self> {
        if s.nrows() != s.ncols() || s.nrows() % 2 != 0 || s.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: s.nrows(),
                found: s.ncols(),
            });
        }
        let omega = SymplecticForm::new(s.nrows() / 2);
        let resid = (&s * omega.matrix() * s.transpose() - omega.matrix()).abs().max();
        if resid > MATRIX_TOL {
            return Err(Error::InvalidParameter(format!(
                "matrix is not symplectic (max residual {resid:.3e})"
            )));
        }
        Ok(Self { s })
    }

    pub fn identity(num_modes: usize) -> Self {
        Self {
            s: DMatrix::identity(2 * num_modes, 2 * num_modes),
        }
    }

    /// Beam splitter with transmissivity `t ∈ (0, 1]` coupling `mode_i` and
    /// `mode_j`: blocks `t I₂`, `-r I₂` / `r I₂`, `t I₂` with `r = √(1-t²)`,
    /// identity elsewhere.
    pub fn beam_splitter(t: f64, mode_i: usize, mode_j: usize, num_modes: usize) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beam-splitter transmissivity must lie in (0, 1], got {t}"
            )));
        }
        check_mode_pair(mode_i, mode_j, num_modes)?;
        let r = (1.0 - t * t).max(0.0).sqrt();
        let mut s = DMatrix::identity(2 * num_modes, 2 * num_modes);
        for q in 0..2 {
            let (i, j) = (2 * mode_i + q, 2 * mode_j + q);
            s[(i, i)] = t;
            s[(i, j)] = -r;
            s[(j, i)] = r;
            s[(j, j)] = t;
        }
        Ok(Self { s })
    }

    /// Nondegenerate parametric amplifier (two-mode squeezer) of strength
    /// `s_param ≥ 0` on `(mode_i, mode_j)`: blocks `I₂ cosh s` and
    /// `σ_z sinh s`.
    pub fn two_mode_squeezer(
        s_param: f64,
        mode_i: usize,
        mode_j: usize,
        num_modes: usize,
    ) -> Result<Self> {
        if !(s_param >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "two-mode squeezing strength must be nonnegative, got {s_param}"
            )));
        }
        check_mode_pair(mode_i, mode_j, num_modes)?;
        let (ch, sh) = (s_param.cosh(), s_param.sinh());
        let mut s = DMatrix::identity(2 * num_modes, 2 * num_modes);
        for q in 0..2 {
            let sign = if q == 0 { 1.0 } else { -1.0 };
            let (i, j) = (2 * mode_i + q, 2 * mode_j + q);
            s[(i, i)] = ch;
            s[(i, j)] = sign * sh;
            s[(j, i)] = sign * sh;
            s[(j, j)] = ch;
        }
        Ok(Self { s })
    }

    /// Single-mode squeezer `diag(e^r, e^{-r})` on the mode's `(x, p)` pair;
    /// `r > 0` squeezes `p`, `r < 0` squeezes `x`.
    pub fn single_mode_squeezer(r: f64, mode: usize, num_modes: usize) -> Result<Self> {
        check_mode(mode, num_modes)?;
        let mut s = DMatrix::identity(2 * num_modes, 2 * num_modes);
        s[(2 * mode, 2 * mode)] = r.exp();
        s[(2 * mode + 1, 2 * mode + 1)] = (-r).exp();
        Ok(Self { s })
    }

    /// Permutation sending mode `perm[k]` of the input to slot `k` of the
    /// output.
    pub(crate) fn mode_permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for (new, &old) in perm.iter().enumerate() {
            s[(2 * new, 2 * old)] = 1.0;
            s[(2 * new + 1, 2 * old + 1)] = 1.0;
        }
        Self { s }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn num_modes(&self) -> usize {
        self.s.nrows() / 2
    }
}

fn check_mode(mode: usize, num_modes: usize) -> Result<()> {
    if mode >= num_modes {
        return Err(Error::InvalidMode { mode, num_modes });
    }
    Ok(())
}

fn check_mode_pair(mode_i: usize, mode_j: usize, num_modes: usize) -> Result<()> {
    check_mode(mode_i, num_modes)?;
    check_mode(mode_j, num_modes)?;
    if mode_i == mode_j {
        return Err(Error::InvalidParameter(format!(
            "mode pair must be distinct, got ({mode_i}, {mode_j})"
        )));
    }
    Ok(())
}

/// One signed, weighted Gaussian Wigner component.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    weight: Dd,
    mean: DVector<f64>,
    cov: DdMat,
}

impl GaussianTerm {
    pub fn new(weight: f64, mean: DVector<f64>, cov: CovarianceMatrix) -> Result<Self> {
        if !weight.is_finite() || weight == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "term weight must be finite and nonzero, got {weight}"
            )));
        }
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                found: mean.len(),
            });
        }
        Ok(Self {
            weight: Dd::from_f64(weight),
            mean,
            cov: DdMat::from_f64(cov.matrix()),
        })
    }

    pub(crate) fn new_dd(weight: Dd, mean: DVector<f64>, cov: DdMat) -> Self {
        Self { weight, mean, cov }
    }

    pub fn weight(&self) -> f64 {
        self.weight.to_f64()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// The term covariance rounded to `f64`.
    pub fn cov(&self) -> CovarianceMatrix {
        CovarianceMatrix::from_matrix(self.cov.to_f64()).expect("stored covariance is symmetric")
    }

    pub(crate) fn weight_dd(&self) -> Dd {
        self.weight
    }

    pub(crate) fn cov_dd(&self) -> &DdMat {
        &self.cov
    }
}

/// An unnormalized multimode state as a finite signed sum of Gaussian terms.
///
/// The total weight is the success probability of all conditionings applied
/// so far; operations that need a normalized state divide by it.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureState {
    num_modes: usize,
    terms: Vec<GaussianTerm>,
}

impl GaussianMixtureState {
    /// Vacuum on `num_modes` modes: a single unit-weight term with `cov = I/2`.
    pub fn vacuum(num_modes: usize) -> Self {
        assert!(num_modes >= 1, "need at least one mode");
        Self {
            num_modes,
            terms: vec![GaussianTerm {
                weight: ONE,
                mean: DVector::zeros(2 * num_modes),
                cov: DdMat::identity_scaled(2 * num_modes, 0.5),
            }],
        }
    }

    /// Single-term zero-mean state with the given covariance.
    pub fn from_covariance(cov: CovarianceMatrix) -> Self {
        let num_modes = cov.num_modes();
        Self {
            num_modes,
            terms: vec![GaussianTerm {
                weight: ONE,
                mean: DVector::zeros(2 * num_modes),
                cov: DdMat::from_f64(cov.matrix()),
            }],
        }
    }

    pub fn from_terms(num_modes: usize, terms: Vec<GaussianTerm>) -> Result<Self> {
        for t in &terms {
            if t.cov.nrows() != 2 * num_modes {
                return Err(Error::DimensionMismatch {
                    expected: 2 * num_modes,
                    found: t.cov.nrows(),
                });
            }
        }
        if terms.is_empty() {
            return Err(Error::InvalidParameter("state needs at least one term".into()));
        }
        Ok(Self { num_modes, terms })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    /// Total weight of the signed mixture.
    pub fn norm(&self) -> f64 {
        self.norm_dd().to_f64()
    }

    pub(crate) fn norm_dd(&self) -> Dd {
        self.terms.iter().fold(ZERO, |acc, t| acc.add(t.weight))
    }

    fn sum_abs_weights(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.to_f64().abs()).sum()
    }

    /// Applies a symplectic transformation to every term: `μ → Sμ`,
    /// `V → S V Sᵀ`, weights untouched.
    pub fn apply_symplectic(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.matrix().nrows() != 2 * self.num_modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.num_modes,
                found: s.matrix().nrows(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| GaussianTerm {
                weight: t.weight,
                mean: s.matrix() * &t.mean,
                cov: t.cov.sandwich_f64(s.matrix()),
            })
            .collect();
        Ok(Self {
            num_modes: self.num_modes,
            terms,
        })
    }

    /// Appends `count` vacuum ancilla modes after the existing ones.
    pub fn attach_vacuum(&self, count: usize) -> Self {
        let n_new = self.num_modes + count;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut v = DdMat::identity_scaled(2 * n_new, 0.5);
                v.set_block(0, 0, &t.cov);
                let mut mean = DVector::zeros(2 * n_new);
                mean.rows_mut(0, 2 * self.num_modes).copy_from(&t.mean);
                GaussianTerm {
                    weight: t.weight,
                    mean,
                    cov: v,
                }
            })
            .collect();
        Self {
            num_modes: n_new,
            terms,
        }
    }

    /// Projects an on-off detector click (`Π = I − |0⟩⟨0|`) onto
    /// `ancilla_mode` and traces that mode out.
    ///
    /// Each zero-mean term `(w, 0, V)` with system/ancilla blocks
    /// `V = [[Γ, M], [Mᵀ, Δ]]` maps to the pair `(w, 0, Γ)` and
    /// `(-w/√det(Δ+I₂/2), 0, Γ − M(Δ+I₂/2)⁻¹Mᵀ)`. The output norm is the
    /// click probability times the input norm; a vanishing norm reports
    /// [`Error::ZeroSuccessProbability`].
    pub fn condition_on_click(&self, ancilla_mode: usize) -> Result<Self> {
        check_mode(ancilla_mode, self.num_modes)?;
        if self.num_modes < 2 {
            return Err(Error::InvalidParameter(
                "conditioning needs at least one system mode besides the ancilla".into(),
            ));
        }
        // Move the ancilla to the last block; system modes keep their order.
        let perm: Vec<usize> = (0..self.num_modes)
            .filter(|&m| m != ancilla_mode)
            .chain(std::iter::once(ancilla_mode))
            .collect();
        let p = SymplecticMatrix::mode_permutation(&perm);
        let n_sys = 2 * (self.num_modes - 1);

        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.mean.abs().max() > 0.0 {
                return Err(Error::NonzeroMean);
            }
            let v = t.cov.sandwich_f64(p.matrix());
            let gamma = v.block(0, 0, n_sys, n_sys);
            let m = v.block(0, n_sys, n_sys, 2);
            let d00 = v.get(n_sys, n_sys).add_f64(0.5);
            let d01 = v.get(n_sys, n_sys + 1);
            let d10 = v.get(n_sys + 1, n_sys);
            let d11 = v.get(n_sys + 1, n_sys + 1).add_f64(0.5);
            let det = d00.mul(d11).sub(d01.mul(d10));
            if det.to_f64().abs() < DET_FLOOR {
                return Err(Error::Singular);
            }
            let det_inv = det.recip();
            let mut d_inv = DdMat::zeros(2, 2);
            d_inv.set(0, 0, d11.mul(det_inv));
            d_inv.set(0, 1, d01.neg().mul(det_inv));
            d_inv.set(1, 0, d10.neg().mul(det_inv));
            d_inv.set(1, 1, d00.mul(det_inv));
            let schur = gamma.sub(&m.mul(&d_inv).mul(&m.transpose())).symmetrize();
            terms.push(GaussianTerm {
                weight: t.weight,
                mean: DVector::zeros(n_sys),
                cov: gamma,
            });
            terms.push(GaussianTerm {
                weight: t.weight.neg().mul(det.sqrt().recip()),
                mean: DVector::zeros(n_sys),
                cov: schur,
            });
        }

        let out = Self {
            num_modes: self.num_modes - 1,
            terms,
        };
        if out.norm() <= ZERO_NORM_REL * out.sum_abs_weights() {
            return Err(Error::ZeroSuccessProbability);
        }
        Ok(out)
    }

    /// Uniform loss channel with efficiency `eta` on every mode:
    /// `V → ηV + ((1-η)/2) I`, `μ → √η μ`.
    pub fn apply_loss(&self, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!(
                "efficiency must lie in [0, 1], got {eta}"
            )));
        }
        let dim = 2 * self.num_modes;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut v = t.cov.scale_f64(eta);
                for k in 0..dim {
                    v.set(k, k, v.get(k, k).add_f64((1.0 - eta) * 0.5));
                }
                GaussianTerm {
                    weight: t.weight,
                    mean: &t.mean * eta.sqrt(),
                    cov: v,
                }
            })
            .collect();
        Ok(Self {
            num_modes: self.num_modes,
            terms,
        })
    }

    /// Photon subtraction on `mode`: a fresh vacuum ancilla, a beam splitter
    /// of transmissivity `t`, and a detector click on the ancilla.
    pub fn photon_subtract(&self, mode: usize, t: f64) -> Result<Self> {
        check_mode(mode, self.num_modes)?;
        let with_anc = self.attach_vacuum(1);
        let bs = SymplecticMatrix::beam_splitter(t, mode, self.num_modes, with_anc.num_modes)?;
        with_anc.apply_symplectic(&bs)?.condition_on_click(self.num_modes)
    }

    /// Photon addition on `mode`: a fresh vacuum ancilla, a nondegenerate
    /// parametric amplifier of strength `s`, and a detector click.
    pub fn photon_add(&self, mode: usize, s: f64) -> Result<Self> {
        check_mode(mode, self.num_modes)?;
        let with_anc = self.attach_vacuum(1);
        let nd =
            SymplecticMatrix::two_mode_squeezer(s, mode, self.num_modes, with_anc.num_modes)?;
        with_anc.apply_symplectic(&nd)?.condition_on_click(self.num_modes)
    }

    /// Evaluates the Wigner function at `point`; with `normalized` the signed
    /// sum is divided by the total weight.
    pub fn wigner_value(&self, point: &[f64], normalized: bool) -> Result<f64> {
        let eval = WignerEvaluator::new(self)?;
        if normalized {
            eval.normalized_value(point)
        } else {
            Ok(eval.value(point))
        }
    }

    /// Second moments of the signed mixture as a covariance matrix.
    pub fn effective_covariance(&self) -> Result<CovarianceMatrix> {
        let norm = self.norm_dd();
        if norm.to_f64() <= ZERO_NORM_REL * self.sum_abs_weights() {
            return Err(Error::NonPositiveNorm);
        }
        let dim = 2 * self.num_modes;
        let norm_inv = norm.recip();
        let mut second = DdMat::zeros(dim, dim);
        let mut first = vec![ZERO; dim];
        for t in &self.terms {
            for i in 0..dim {
                for j in 0..dim {
                    let mut entry = t.cov.get(i, j);
                    if t.mean[i] != 0.0 && t.mean[j] != 0.0 {
                        entry = entry.add_f64(t.mean[i] * t.mean[j]);
                    }
                    second.set(i, j, second.get(i, j).add(entry.mul(t.weight)));
                }
                if t.mean[i] != 0.0 {
                    first[i] = first[i].add(t.weight.mul_f64(t.mean[i]));
                }
            }
        }
        let mut v = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let mu_term = first[i].mul(first[j]).mul(norm_inv).mul(norm_inv);
                v[(i, j)] = second.get(i, j).mul(norm_inv).sub(mu_term).to_f64();
            }
        }
        CovarianceMatrix::from_matrix((&v + v.transpose()) * 0.5)
    }
}

/// Wigner evaluation with per-term inverses and normalization constants
/// precomputed once; the workhorse for grid sweeps.
///
/// Healthy norms use a plain `f64` term loop; heavily cancelled mixtures
/// (joint click probabilities far below the term weights) switch to
/// double-double accumulation automatically.
pub struct WignerEvaluator {
    terms: Vec<PreparedTerm>,
    fast: bool,
    norm_dd: Dd,
    norm: f64,
    sum_abs: f64,
    dim: usize,
}

struct PreparedTerm {
    coeff: Dd,
    coeff_f64: f64,
    mean: DVector<f64>,
    inv_cov: DdMat,
    inv_cov_f64: DMatrix<f64>,
}

impl WignerEvaluator {
    pub fn new(state: &GaussianMixtureState) -> Result<Self> {
        let dim = 2 * state.num_modes();
        let mut two_pi_pow = ONE;
        for _ in 0..dim {
            two_pi_pow = two_pi_pow.mul(TWO_PI);
        }
        let mut terms = Vec::with_capacity(state.terms().len());
        for t in state.terms() {
            let (det, inv_cov) = t.cov_dd().lu_det_inverse().ok_or(Error::Singular)?;
            if det.to_f64().abs() < DET_FLOOR {
                return Err(Error::Singular);
            }
            // weight / sqrt(det(2πV))
            let coeff = t.weight_dd().div(det.mul(two_pi_pow).sqrt());
            terms.push(PreparedTerm {
                coeff,
                coeff_f64: coeff.to_f64(),
                mean: t.mean().clone(),
                inv_cov_f64: inv_cov.to_f64(),
                inv_cov,
            });
        }
        let norm_dd = state.norm_dd();
        let norm = norm_dd.to_f64();
        let sum_abs = state.sum_abs_weights();
        Ok(Self {
            terms,
            fast: norm > FAST_EVAL_REL * sum_abs,
            norm_dd,
            norm,
            sum_abs,
            dim,
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Unnormalized signed-mixture Wigner value.
    pub fn value(&self, point: &[f64]) -> f64 {
        self.value_dd(point).to_f64()
    }

    fn value_dd(&self, point: &[f64]) -> Dd {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        if self.fast {
            let mut total = 0.0;
            for t in &self.terms {
                let mut q = 0.0;
                for i in 0..self.dim {
                    let di = point[i] - t.mean[i];
                    let mut row = 0.0;
                    for j in 0..self.dim {
                        row += t.inv_cov_f64[(i, j)] * (point[j] - t.mean[j]);
                    }
                    q += di * row;
                }
                total += t.coeff_f64 * (-0.5 * q).exp();
            }
            return Dd::from_f64(total);
        }
        let mut total = ZERO;
        for t in &self.terms {
            let mut q = ZERO;
            for i in 0..self.dim {
                let di = point[i] - t.mean[i];
                if di == 0.0 {
                    continue;
                }
                for j in 0..self.dim {
                    let dj = point[j] - t.mean[j];
                    if dj != 0.0 {
                        q = q.add(t.inv_cov.get(i, j).mul_f64(di).mul_f64(dj));
                    }
                }
            }
            total = total.add(t.coeff.mul(q.mul_f64(-0.5).exp()));
        }
        total
    }

    pub fn normalized_value(&self, point: &[f64]) -> Result<f64> {
        if self.norm <= ZERO_NORM_REL * self.sum_abs {
            return Err(Error::NonPositiveNorm);
        }
        Ok(self.value_dd(point).div(self.norm_dd).to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn vacuum_state_basics() {
        let vac = GaussianMixtureState::vacuum(1);
        assert_eq!(vac.terms().len(), 1);
        assert_eq!(vac.terms()[0].cov().matrix(), &(DMatrix::identity(2, 2) * 0.5));

        let vac3 = GaussianMixtureState::vacuum(3);
        assert_abs_diff_eq!(vac3.norm(), 1.0);
        let w = vac3.wigner_value(&[0.0; 6], true).unwrap();
        assert_abs_diff_eq!(w, 1.0 / PI.powi(3), epsilon = 1e-15);
    }

    #[test]
    fn beam_splitter_is_symplectic_and_transparent_at_t_one() {
        let id = SymplecticMatrix::beam_splitter(1.0, 0, 1, 2).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(4, 4));

        let bs = SymplecticMatrix::beam_splitter(0.99, 0, 1, 2).unwrap();
        let omega = SymplecticForm::new(2);
        let resid = bs.matrix() * omega.matrix() * bs.matrix().transpose() - omega.matrix();
        assert!(resid.abs().max() < 1e-12);
    }

    #[test]
    fn vacuum_invariant_under_balanced_beam_splitter() {
        let bs = SymplecticMatrix::beam_splitter(1.0 / 2f64.sqrt(), 0, 1, 2).unwrap();
        let out = GaussianMixtureState::vacuum(2)
            .apply_symplectic(&bs)
            .unwrap()
            .apply_symplectic(&bs)
            .unwrap();
        let v = out.effective_covariance().unwrap();
        assert!(max_abs_diff(v.matrix(), &(DMatrix::identity(4, 4) * 0.5)) < 1e-14);
    }

    #[test]
    fn two_mode_squeezer_reduced_variance() {
        let id = SymplecticMatrix::two_mode_squeezer(0.0, 0, 1, 2).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(4, 4));

        let omega = SymplecticForm::new(2);
        let nd = SymplecticMatrix::two_mode_squeezer(0.01, 0, 1, 2).unwrap();
        let resid = nd.matrix() * omega.matrix() * nd.matrix().transpose() - omega.matrix();
        assert!(resid.abs().max() < 1e-12);

        // s = 0.3 on vacuum: each reduced mode is thermal with variance cosh(2s)/2.
        let nd = SymplecticMatrix::two_mode_squeezer(0.3, 0, 1, 2).unwrap();
        let out = GaussianMixtureState::vacuum(2).apply_symplectic(&nd).unwrap();
        let v = out.effective_covariance().unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(v.matrix()[(k, k)], (0.6f64).cosh() / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_mode_squeezer_covariance_and_purity() {
        let id = SymplecticMatrix::single_mode_squeezer(0.0, 0, 1).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(2, 2));

        let r = 0.4;
        let sq = SymplecticMatrix::single_mode_squeezer(r, 0, 1).unwrap();
        let out = GaussianMixtureState::vacuum(1).apply_symplectic(&sq).unwrap();
        let v = out.effective_covariance().unwrap();
        assert_abs_diff_eq!(v.matrix()[(0, 0)], (2.0 * r).exp() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.matrix()[(1, 1)], (-2.0 * r).exp() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.matrix().determinant(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn apply_symplectic_preserves_norm_and_identity() {
        let state = GaussianMixtureState::vacuum(2)
            .apply_symplectic(&SymplecticMatrix::two_mode_squeezer(0.3, 0, 1, 2).unwrap())
            .unwrap()
            .photon_subtract(0, 0.99)
            .unwrap();
        let norm_before = state.norm();
        let id = SymplecticMatrix::identity(2);
        let same = state.apply_symplectic(&id).unwrap();
        assert_eq!(same.terms().len(), state.terms().len());
        assert_abs_diff_eq!(same.norm(), norm_before, epsilon = 1e-16);

        let bs = SymplecticMatrix::beam_splitter(0.7, 0, 1, 2).unwrap();
        assert_abs_diff_eq!(
            state.apply_symplectic(&bs).unwrap().norm(),
            norm_before,
            epsilon = 1e-16
        );
    }

    #[test]
    fn dilation_block_structure_matches_direct_product() {
        // S_BS (V0 ⊕ I/2) S_BSᵀ assembled two ways: library path vs an
        // explicit quadruple loop over matrix entries.
        let params = crate::ghz::GhzParams::symmetric(0.37);
        let v0 = crate::ghz::ghz_covariance(&params);
        let state = GaussianMixtureState::from_covariance(v0.clone()).attach_vacuum(1);
        let bs = SymplecticMatrix::beam_splitter(0.99, 0, 3, 4).unwrap();
        let lib = state.apply_symplectic(&bs).unwrap();
        let got_cov = lib.terms()[0].cov();
        let got = got_cov.matrix();

        let mut big = DMatrix::zeros(8, 8);
        big.view_mut((0, 0), (6, 6)).copy_from(v0.matrix());
        big[(6, 6)] = 0.5;
        big[(7, 7)] = 0.5;
        let s = bs.matrix();
        let mut expected = DMatrix::zeros(8, 8);
        for i in 0..8 {
            for j in 0..8 {
                let mut acc = 0.0;
                for k in 0..8 {
                    for l in 0..8 {
                        acc += s[(i, k)] * big[(k, l)] * s[(j, l)];
                    }
                }
                expected[(i, j)] = acc;
            }
        }
        assert!(max_abs_diff(got, &expected) < 1e-12);

        // Detector-side block Δ = r² V_AA + t² I/2.
        let (t, r2) = (0.99f64, 1.0 - 0.99f64 * 0.99);
        let delta = got.view((6, 6), (2, 2)).into_owned();
        let expected_delta =
            v0.matrix().view((0, 0), (2, 2)) * r2 + DMatrix::identity(2, 2) * (t * t / 2.0);
        assert!(max_abs_diff(&delta, &expected_delta) < 1e-12);
    }

    #[test]
    fn attach_vacuum_is_a_product_state() {
        let params = crate::ghz::GhzParams::symmetric(0.3);
        let ghz = GaussianMixtureState::from_covariance(crate::ghz::ghz_covariance(&params));
        let bigger = ghz.attach_vacuum(1);
        assert_eq!(bigger.num_modes(), 4);
        assert_abs_diff_eq!(bigger.norm(), 1.0);
        let v = bigger.effective_covariance().unwrap();
        assert!(v.matrix().view((0, 6), (6, 2)).abs().max() == 0.0);
        assert!(v.matrix().view((6, 0), (2, 6)).abs().max() == 0.0);
    }

    #[test]
    fn click_on_uncoupled_ancilla_has_zero_probability() {
        let params = crate::ghz::GhzParams::symmetric(0.3);
        let ghz = GaussianMixtureState::from_covariance(crate::ghz::ghz_covariance(&params));
        let err = ghz.attach_vacuum(1).condition_on_click(3).unwrap_err();
        assert_eq!(err, Error::ZeroSuccessProbability);
    }

    #[test]
    fn subtraction_from_vacuum_has_zero_probability() {
        let err = GaussianMixtureState::vacuum(3).photon_subtract(0, 0.99).unwrap_err();
        assert_eq!(err, Error::ZeroSuccessProbability);

        // Fully transmissive coupling sends nothing to the detector either.
        let params = crate::ghz::GhzParams::symmetric(0.3);
        let ghz = GaussianMixtureState::from_covariance(crate::ghz::ghz_covariance(&params));
        assert_eq!(ghz.photon_subtract(0, 1.0).unwrap_err(), Error::ZeroSuccessProbability);
    }

    #[test]
    fn conditioning_doubles_terms() {
        let params = crate::ghz::GhzParams::symmetric(0.3);
        let ghz = GaussianMixtureState::from_covariance(crate::ghz::ghz_covariance(&params));
        let one = ghz.photon_subtract(0, 0.99).unwrap();
        assert_eq!(one.terms().len(), 2);
        let two = one.photon_subtract(1, 0.99).unwrap();
        assert_eq!(two.terms().len(), 4);
        let three = two.photon_subtract(2, 0.99).unwrap();
        assert_eq!(three.terms().len(), 8);
    }

    #[test]
    fn condition_rejects_nonzero_means() {
        let mut mean = DVector::zeros(4);
        mean[0] = 0.5;
        let term = GaussianTerm::new(1.0, mean, CovarianceMatrix::vacuum(2)).unwrap();
        let state = GaussianMixtureState::from_terms(2, vec![term]).unwrap();
        assert_eq!(state.condition_on_click(1).unwrap_err(), Error::NonzeroMean);
    }

    #[test]
    fn loss_channel_limits_and_formula() {
        let sq = SymplecticMatrix::single_mode_squeezer(0.5, 0, 1).unwrap();
        let state = GaussianMixtureState::vacuum(1).apply_symplectic(&sq).unwrap();

        let same = state.apply_loss(1.0).unwrap();
        assert!(
            max_abs_diff(same.terms()[0].cov().matrix(), state.terms()[0].cov().matrix()) == 0.0
        );

        let dead = state.apply_loss(0.0).unwrap();
        assert!(
            max_abs_diff(dead.terms()[0].cov().matrix(), &(DMatrix::identity(2, 2) * 0.5)) < 1e-16
        );

        let half = state.apply_loss(0.5).unwrap();
        assert_abs_diff_eq!(
            half.terms()[0].cov().matrix()[(0, 0)],
            ((1.0f64).exp() + 1.0) / 4.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            half.terms()[0].cov().matrix()[(1, 1)],
            ((-1.0f64).exp() + 1.0) / 4.0,
            epsilon = 1e-14
        );

        assert!(state.apply_loss(1.5).is_err());
    }

    #[test]
    fn loss_composes_multiplicatively() {
        let params = crate::ghz::GhzParams::symmetric(0.4);
        let ghz = GaussianMixtureState::from_covariance(crate::ghz::ghz_covariance(&params));
        let a = ghz.apply_loss(0.8).unwrap().apply_loss(0.7).unwrap();
        let b = ghz.apply_loss(0.8 * 0.7).unwrap();
        assert!(max_abs_diff(a.terms()[0].cov().matrix(), b.terms()[0].cov().matrix()) < 1e-12);
    }

    #[test]
    fn pure_zero_mean_gaussian_wigner_peak() {
        // Any pure zero-mean Gaussian has W(0) = 1/π^N.
        let sq0 = SymplecticMatrix::single_mode_squeezer(0.7, 0, 2).unwrap();
        let bs = SymplecticMatrix::beam_splitter(0.6, 0, 1, 2).unwrap();
        let state = GaussianMixtureState::vacuum(2)
            .apply_symplectic(&sq0)
            .unwrap()
            .apply_symplectic(&bs)
            .unwrap();
        let w = state.wigner_value(&[0.0; 4], true).unwrap();
        assert_abs_diff_eq!(w, 1.0 / PI.powi(2), epsilon = 1e-14);
    }

    #[test]
    fn effective_covariance_of_single_term_is_its_cov() {
        let params = crate::ghz::GhzParams::symmetric(0.3);
        let v = crate::ghz::ghz_covariance(&params);
        let state = GaussianMixtureState::from_covariance(v.clone());
        assert!(max_abs_diff(state.effective_covariance().unwrap().matrix(), v.matrix()) == 0.0);
    }

    #[test]
    fn deep_conditioning_keeps_tiny_norms_accurate() {
        // Three photon additions at the default coupling have a joint click
        // probability near 1e-12; the double-double pipeline must still give
        // a clean positive norm and a physical effective covariance.
        let params = crate::ghz::GhzParams::symmetric(0.1);
        let state = GaussianMixtureState::from_covariance(crate::ghz::ghz_covariance(&params))
            .photon_add(0, 0.01)
            .unwrap()
            .photon_add(1, 0.01)
            .unwrap()
            .photon_add(2, 0.01)
            .unwrap();
        let norm = state.norm();
        assert!(norm > 1e-13 && norm < 1e-10, "norm = {norm:e}");
        let v = state.effective_covariance().unwrap();
        v.check_physical().unwrap();
    }

    #[test]
    fn term_weight_must_be_finite_nonzero() {
        assert!(GaussianTerm::new(0.0, DVector::zeros(2), CovarianceMatrix::vacuum(1)).is_err());
        assert!(
            GaussianTerm::new(f64::NAN, DVector::zeros(2), CovarianceMatrix::vacuum(1)).is_err()
        );
    }

    #[test]
    fn covariance_rejects_asymmetry() {
        let mut m = DMatrix::identity(2, 2) * 0.5;
        m[(0, 1)] = 1e-6;
        assert_eq!(CovarianceMatrix::from_matrix(m).unwrap_err(), Error::NonSymmetric);
    }
}
