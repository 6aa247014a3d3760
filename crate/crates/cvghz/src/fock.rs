//! Truncated Fock-space brute force: an independent representation used to
//! validate the Gaussian-mixture pipeline at desk scale.
//!
//! States are dense complex amplitude tensors over photon numbers
//! `0..=cutoff` per mode. Beam splitters and two-mode squeezers are
//! exponentiated blockwise (they conserve the photon sum and difference,
//! respectively), photon operations attach an explicit ancilla and keep one
//! branch per detected photon number, and Wigner values come from displaced
//! parity expectations. Everything is exact in the truncated space; the
//! per-mode boundary tail diagnoses truncation error.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phasespace::CovarianceMatrix;

/// Boundary tail mass above which a state is rejected as unconverged.
pub const CONVERGENCE_TAIL: f64 = 1e-8;

/// Branches below this fraction of the running success probability are
/// dropped; weights are nonnegative so pruning cannot cancel anything.
const BRANCH_PRUNE_REL: f64 = 1e-18;

/// Dense amplitude tensor over `(n_1, ..., n_k)`, `n ∈ 0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockArray {
    num_modes: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl FockArray {
    pub fn vacuum(num_modes: usize, cutoff: usize) -> Self {
        let dim = cutoff + 1;
        let mut data = vec![Complex64::ZERO; dim.pow(num_modes as u32)];
        data[0] = Complex64::ONE;
        Self {
            num_modes,
            dim,
            data,
        }
    }

    /// Product state from per-mode amplitude vectors of equal length.
    pub fn product_state(amps: &[DVector<Complex64>]) -> Result<Self> {
        let dim = amps
            .first()
            .ok_or_else(|| Error::InvalidParameter("need at least one mode".into()))?
            .len();
        if amps.iter().any(|a| a.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: 0,
            });
        }
        let num_modes = amps.len();
        let mut data = vec![Complex64::ONE; dim.pow(num_modes as u32)];
        for (flat, value) in data.iter_mut().enumerate() {
            let mut rest = flat;
            for k in (0..num_modes).rev() {
                *value *= amps[k][rest % dim];
                rest /= dim;
            }
        }
        Ok(Self {
            num_modes,
            dim,
            data,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.dim - 1
    }

    fn stride(&self, mode: usize) -> usize {
        self.dim.pow((self.num_modes - 1 - mode) as u32)
    }

    pub fn amplitude(&self, ns: &[usize]) -> Complex64 {
        assert_eq!(ns.len(), self.num_modes);
        let mut flat = 0;
        for &n in ns {
            debug_assert!(n < self.dim);
            flat = flat * self.dim + n;
        }
        self.data[flat]
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest per-mode probability mass sitting on the top two photon
    /// levels (`n > cutoff - 2`).
    pub fn boundary_mass(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mode in 0..self.num_modes {
            let stride = self.stride(mode);
            let mut mass = 0.0;
            for (flat, c) in self.data.iter().enumerate() {
                if (flat / stride) % self.dim > self.dim - 3 {
                    mass += c.norm_sqr();
                }
            }
            worst = worst.max(mass);
        }
        worst
    }

    pub fn check_converged(&self) -> Result<()> {
        let tail = self.boundary_mass();
        if tail >= CONVERGENCE_TAIL {
            return Err(Error::Unconverged { tail });
        }
        Ok(())
    }

    /// Applies a single-mode operator to one axis of the tensor.
    pub fn apply_one_mode(&self, op: &DMatrix<Complex64>, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        if op.nrows() != self.dim || op.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: op.nrows(),
            });
        }
        let stride = self.stride(mode);
        let mut out = vec![Complex64::ZERO; self.data.len()];
        for (flat, c) in self.data.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let n = (flat / stride) % self.dim;
            let base = flat - n * stride;
            for m in 0..self.dim {
                let amp = op[(m, n)];
                if amp != Complex64::ZERO {
                    out[base + m * stride] += amp * c;
                }
            }
        }
        Ok(Self {
            num_modes: self.num_modes,
            dim: self.dim,
            data: out,
        })
    }

    /// Applies a real two-mode operator indexed as `n_i * dim + n_j`.
    pub fn apply_two_mode(&self, op: &DMatrix<f64>, mode_i: usize, mode_j: usize) -> Result<Self> {
        self.check_mode(mode_i)?;
        self.check_mode(mode_j)?;
        if mode_i == mode_j {
            return Err(Error::InvalidParameter("mode pair must be distinct".into()));
        }
        let d2 = self.dim * self.dim;
        if op.nrows() != d2 || op.ncols() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d2,
                found: op.nrows(),
            });
        }
        let (si, sj) = (self.stride(mode_i), self.stride(mode_j));
        let mut out = vec![Complex64::ZERO; self.data.len()];
        let mut gathered = vec![Complex64::ZERO; d2];
        let mut transformed = vec![Complex64::ZERO; d2];
        for rest in 0..self.data.len() {
            // Visit each configuration of the remaining modes exactly once.
            if (rest / si) % self.dim != 0 || (rest / sj) % self.dim != 0 {
                continue;
            }
            for a in 0..self.dim {
                for b in 0..self.dim {
                    gathered[a * self.dim + b] = self.data[rest + a * si + b * sj];
                }
            }
            for (row, t) in transformed.iter_mut().enumerate() {
                let mut acc = Complex64::ZERO;
                for (col, g) in gathered.iter().enumerate() {
                    let w = op[(row, col)];
                    if w != 0.0 {
                        acc += g * w;
                    }
                }
                *t = acc;
            }
            for a in 0..self.dim {
                for b in 0..self.dim {
                    out[rest + a * si + b * sj] = transformed[a * self.dim + b];
                }
            }
        }
        Ok(Self {
            num_modes: self.num_modes,
            dim: self.dim,
            data: out,
        })
    }

    /// Beam splitter of transmissivity `t` on `(mode_i, mode_j)`, mirroring
    /// the phase-space convention `a_i → t a_i − r a_j`, `a_j → r a_i + t a_j`.
    pub fn beam_splitter(&self, t: f64, mode_i: usize, mode_j: usize) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beam-splitter transmissivity must lie in (0, 1], got {t}"
            )));
        }
        let theta = t.min(1.0).acos();
        self.apply_two_mode(&beam_splitter_unitary(theta, self.dim), mode_i, mode_j)
    }

    /// Two-mode squeezer of strength `s` on `(mode_i, mode_j)`, mirroring the
    /// amplifier convention `a_i → cosh s · a_i + sinh s · a_j†`.
    pub fn two_mode_squeezer(&self, s: f64, mode_i: usize, mode_j: usize) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "squeezer strength must be nonnegative, got {s}"
            )));
        }
        self.apply_two_mode(&two_mode_squeezer_unitary(s, self.dim), mode_i, mode_j)
    }

    /// Appends a vacuum ancilla as the last mode.
    pub fn attach_vacuum_mode(&self) -> Self {
        let mut data = vec![Complex64::ZERO; self.data.len() * self.dim];
        for (flat, &c) in self.data.iter().enumerate() {
            data[flat * self.dim] = c;
        }
        Self {
            num_modes: self.num_modes + 1,
            dim: self.dim,
            data,
        }
    }

    /// Projects `⟨n|` on `mode` and removes that axis (unnormalized).
    pub fn slice_mode(&self, mode: usize, n: usize) -> Self {
        let stride = self.stride(mode);
        let mut data = Vec::with_capacity(self.data.len() / self.dim);
        for (flat, &c) in self.data.iter().enumerate() {
            if (flat / stride) % self.dim == n {
                data.push(c);
            }
        }
        Self {
            num_modes: self.num_modes - 1,
            dim: self.dim,
            data,
        }
    }

    /// On-off click on `mode`: one unnormalized branch per detected photon
    /// number `n ≥ 1`, the ancilla traced out.
    pub fn condition_on_click(&self, mode: usize) -> Result<FockBranchMixture> {
        self.check_mode(mode)?;
        let mut branches = Vec::new();
        for n in 1..self.dim {
            let amp = self.slice_mode(mode, n);
            if amp.norm_sq() > 0.0 {
                branches.push(FockBranch {
                    clicks: vec![n],
                    amp,
                });
            }
        }
        let mixture = FockBranchMixture {
            num_modes: self.num_modes - 1,
            dim: self.dim,
            branches,
        };
        if mixture.success_probability() <= 0.0 {
            return Err(Error::ZeroSuccessProbability);
        }
        Ok(mixture)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes {
            return Err(Error::InvalidMode {
                mode,
                num_modes: self.num_modes,
            });
        }
        Ok(())
    }

    fn quadrature_moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let nq = 2 * self.num_modes;
        let x_op = x_matrix(self.dim);
        let p_op = p_matrix(self.dim);
        let mut applied = Vec::with_capacity(nq);
        for mode in 0..self.num_modes {
            applied.push(self.apply_one_mode(&x_op, mode).expect("dims fixed"));
            applied.push(self.apply_one_mode(&p_op, mode).expect("dims fixed"));
        }
        let mut first = DVector::zeros(nq);
        let mut second = DMatrix::zeros(nq, nq);
        for k in 0..nq {
            first[k] = self.inner(&applied[k]).re;
            for l in k..nq {
                let m = applied[k].inner(&applied[l]).re;
                second[(k, l)] = m;
                second[(l, k)] = m;
            }
        }
        (first, second)
    }
}

/// Squeezed vacuum in the Fock basis; `r > 0` squeezes `p` (matching the
/// phase-space squeezer), `r < 0` squeezes `x`. Even amplitudes only:
/// `c_{2n} ∝ (tanh r)ⁿ √((2n)!)/(2ⁿ n!)`.
pub fn squeezed_vacuum_fock(r: f64, cutoff: usize) -> Result<FockArray> {
    if cutoff < 8 {
        return Err(Error::InvalidParameter(format!(
            "cutoff must be at least 8, got {cutoff}"
        )));
    }
    let dim = cutoff + 1;
    let mut amps = DVector::from_element(dim, Complex64::ZERO);
    let tanh = r.tanh();
    let mut c = 1.0 / r.cosh().sqrt();
    let mut n = 0;
    loop {
        amps[2 * n] = Complex64::new(c, 0.0);
        if 2 * (n + 1) >= dim {
            break;
        }
        let two_n = 2.0 * n as f64;
        c *= tanh * ((two_n + 1.0) * (two_n + 2.0)).sqrt() / (two_n + 2.0);
        n += 1;
    }
    let state = FockArray::product_state(&[amps])?;
    state.check_converged()?;
    Ok(state)
}

/// Three-mode GHZ state built by the same circuit as the phase-space
/// construction: p-squeezed and two x-squeezed vacua through
/// `BS(0,1; t=1/√3)` and `BS(1,2; t=1/√2)`.
pub fn ghz_fock(r: f64, cutoff: usize) -> Result<FockArray> {
    let sq_p = squeezed_vacuum_fock(r, cutoff)?;
    let sq_x = squeezed_vacuum_fock(-r, cutoff)?;
    let amps = [
        DVector::from_iterator(cutoff + 1, sq_p.data.iter().copied()),
        DVector::from_iterator(cutoff + 1, sq_x.data.iter().copied()),
        DVector::from_iterator(cutoff + 1, sq_x.data.iter().copied()),
    ];
    let state = FockArray::product_state(&amps)?
        .beam_splitter(1.0 / 3f64.sqrt(), 0, 1)?
        .beam_splitter(1.0 / 2f64.sqrt(), 1, 2)?;
    state.check_converged()?;
    Ok(state)
}

/// One conditioned branch: the detected photon numbers (in operation order)
/// and the unnormalized post-selection amplitude.
#[derive(Debug, Clone)]
pub struct FockBranch {
    pub clicks: Vec<usize>,
    pub amp: FockArray,
}

/// Probability-weighted branches of a conditioned state; the total weight is
/// the joint success probability.
#[derive(Debug, Clone)]
pub struct FockBranchMixture {
    num_modes: usize,
    dim: usize,
    branches: Vec<FockBranch>,
}

impl FockBranchMixture {
    pub fn from_pure(state: FockArray) -> Self {
        Self {
            num_modes: state.num_modes,
            dim: state.dim,
            branches: vec![FockBranch {
                clicks: Vec::new(),
                amp: state,
            }],
        }
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn branches(&self) -> &[FockBranch] {
        &self.branches
    }

    pub fn success_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.amp.norm_sq()).sum()
    }

    fn apply_conditional(&self, op: impl Fn(&FockArray) -> Result<FockArray>) -> Result<Self> {
        let mut branches: Vec<FockBranch> = Vec::new();
        for branch in &self.branches {
            let extended = op(&branch.amp.attach_vacuum_mode())?;
            for n in 1..self.dim {
                let amp = extended.slice_mode(self.num_modes, n);
                if amp.norm_sq() > 0.0 {
                    let mut clicks = branch.clicks.clone();
                    clicks.push(n);
                    branches.push(FockBranch { clicks, amp });
                }
            }
        }
        let total: f64 = branches.iter().map(|b| b.amp.norm_sq()).sum();
        if total <= 0.0 {
            return Err(Error::ZeroSuccessProbability);
        }
        branches.retain(|b| b.amp.norm_sq() > BRANCH_PRUNE_REL * total);
        Ok(Self {
            num_modes: self.num_modes,
            dim: self.dim,
            branches,
        })
    }

    /// Photon subtraction: ancilla, beam splitter of transmissivity `t` on
    /// `(mode, ancilla)`, click.
    pub fn photon_subtract(&self, mode: usize, t: f64) -> Result<Self> {
        self.apply_conditional(|ext| ext.beam_splitter(t, mode, self.num_modes))
    }

    /// Photon addition: ancilla, two-mode squeezer of strength `s`, click.
    pub fn photon_add(&self, mode: usize, s: f64) -> Result<Self> {
        self.apply_conditional(|ext| ext.two_mode_squeezer(s, mode, self.num_modes))
    }

    /// The branch where every detector saw exactly one photon (the dominant
    /// contribution for weak couplings).
    pub fn single_click_branch(&self) -> Option<&FockArray> {
        self.branches
            .iter()
            .find(|b| !b.clicks.is_empty() && b.clicks.iter().all(|&n| n == 1))
            .map(|b| &b.amp)
    }

    /// Quadrature covariance of the normalized mixture.
    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        let w = self.success_probability();
        if w <= 0.0 {
            return Err(Error::NonPositiveNorm);
        }
        let nq = 2 * self.num_modes;
        let mut first = DVector::zeros(nq);
        let mut second = DMatrix::zeros(nq, nq);
        for b in &self.branches {
            let (f, s) = b.amp.quadrature_moments();
            first += f;
            second += s;
        }
        first /= w;
        second /= w;
        second -= &first * first.transpose();
        CovarianceMatrix::from_matrix((&second + second.transpose()) * 0.5)
    }

    /// Normalized Wigner value at a phase-space point via displaced parity
    /// expectations; errors outside the reliable window `|α|² < cutoff/4`.
    pub fn wigner_value(&self, point: &[f64]) -> Result<f64> {
        if point.len() != 2 * self.num_modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.num_modes,
                found: point.len(),
            });
        }
        let w = self.success_probability();
        if w <= 0.0 {
            return Err(Error::NonPositiveNorm);
        }
        let mut parity_ops = Vec::with_capacity(self.num_modes);
        for mode in 0..self.num_modes {
            let alpha = Complex64::new(point[2 * mode], point[2 * mode + 1])
                / std::f64::consts::SQRT_2;
            if alpha.norm_sqr() >= (self.dim - 1) as f64 / 4.0 {
                return Err(Error::WindowExceeded);
            }
            parity_ops.push(displaced_parity(alpha, self.dim));
        }
        let mut acc = 0.0;
        for b in &self.branches {
            let mut transformed = b.amp.clone();
            for (mode, op) in parity_ops.iter().enumerate() {
                transformed = transformed.apply_one_mode(op, mode)?;
            }
            acc += b.amp.inner(&transformed).re;
        }
        Ok(acc / (w * std::f64::consts::PI.powi(self.num_modes as i32)))
    }
}

fn annihilation(dim: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::from_element(dim, dim, Complex64::ZERO);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

fn x_matrix(dim: usize) -> DMatrix<Complex64> {
    let a = annihilation(dim);
    (&a + a.adjoint()) / Complex64::new(std::f64::consts::SQRT_2, 0.0)
}

fn p_matrix(dim: usize) -> DMatrix<Complex64> {
    let a = annihilation(dim);
    (a.adjoint() - &a) * Complex64::new(0.0, 1.0 / std::f64::consts::SQRT_2)
}

/// Displaced parity `D(α) (−1)ⁿ D†(α) = D(2α) Π` in the truncated space.
pub fn displaced_parity(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
    let a = annihilation(dim);
    let gamma = 2.0 * alpha;
    let gen = &a.adjoint() * gamma - &a * gamma.conj();
    let d = gen.exp();
    let mut out = d;
    for n in 0..dim {
        if n % 2 == 1 {
            for m in 0..dim {
                out[(m, n)] = -out[(m, n)];
            }
        }
    }
    out
}

/// Beam-splitter unitary `exp[θ(a b† − a† b)]`, exponentiated per block of
/// conserved total photon number.
pub fn beam_splitter_unitary(theta: f64, dim: usize) -> DMatrix<f64> {
    let d2 = dim * dim;
    let mut u = DMatrix::zeros(d2, d2);
    for total in 0..=(2 * (dim - 1)) {
        let a_lo = total.saturating_sub(dim - 1);
        let a_hi = total.min(dim - 1);
        let size = a_hi - a_lo + 1;
        let mut g = DMatrix::<f64>::zeros(size, size);
        for p in 0..size {
            let a = a_lo + p;
            let b = total - a;
            // a b† lowers a and raises b.
            if p > 0 {
                g[(p - 1, p)] = theta * ((a * (b + 1)) as f64).sqrt();
            }
            if p + 1 < size {
                g[(p + 1, p)] = -theta * (((a + 1) * b) as f64).sqrt();
            }
        }
        let block = g.exp();
        for p in 0..size {
            for q in 0..size {
                let (ar, br) = (a_lo + p, total - (a_lo + p));
                let (ac, bc) = (a_lo + q, total - (a_lo + q));
                u[(ar * dim + br, ac * dim + bc)] = block[(p, q)];
            }
        }
    }
    u
}

/// Two-mode squeezer unitary `exp[s(a†b† − ab)]`, exponentiated per block of
/// conserved photon-number difference.
pub fn two_mode_squeezer_unitary(s: f64, dim: usize) -> DMatrix<f64> {
    let d2 = dim * dim;
    let mut u = DMatrix::zeros(d2, d2);
    let last = (dim - 1) as isize;
    for delta in -last..=last {
        let (off_a, off_b) = if delta >= 0 {
            (delta as usize, 0)
        } else {
            (0, (-delta) as usize)
        };
        let size = dim - off_a.max(off_b);
        let mut g = DMatrix::<f64>::zeros(size, size);
        for q in 0..size {
            let a = q + off_a;
            let b = q + off_b;
            if q + 1 < size {
                g[(q + 1, q)] = s * (((a + 1) * (b + 1)) as f64).sqrt();
            }
            if q > 0 {
                g[(q - 1, q)] = -s * ((a * b) as f64).sqrt();
            }
        }
        let block = g.exp();
        for p in 0..size {
            for q in 0..size {
                u[((p + off_a) * dim + p + off_b, (q + off_a) * dim + q + off_b)] =
                    block[(p, q)];
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn squeezed_vacuum_limits_and_covariance() {
        let vac = squeezed_vacuum_fock(0.0, 10).unwrap();
        assert_abs_diff_eq!(vac.amplitude(&[0]).re, 1.0);
        assert_abs_diff_eq!(vac.norm_sq(), 1.0, epsilon = 1e-12);

        // r > 0 squeezes p, r < 0 squeezes x.
        for &r in &[0.3, -0.3] {
            let state = squeezed_vacuum_fock(r, 14).unwrap();
            assert_abs_diff_eq!(state.norm_sq(), 1.0, epsilon = 1e-8);
            let v = FockBranchMixture::from_pure(state).covariance().unwrap();
            assert_abs_diff_eq!(v.matrix()[(0, 0)], (2.0 * r).exp() / 2.0, epsilon = 1e-6);
            assert_abs_diff_eq!(v.matrix()[(1, 1)], (-2.0 * r).exp() / 2.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn beam_splitter_single_photon_split() {
        let t: f64 = 0.99;
        let mut one = FockArray::vacuum(2, 10);
        let idx = one.stride(0);
        one.data[idx] = Complex64::ONE;
        one.data[0] = Complex64::ZERO;
        let out = one.beam_splitter(t, 0, 1).unwrap();
        let r = (1.0 - t * t).sqrt();
        assert_abs_diff_eq!(out.amplitude(&[1, 0]).re, t, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitude(&[0, 1]).re.abs(), r, epsilon = 1e-12);
        assert_abs_diff_eq!(out.norm_sq(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn beam_splitter_identity_and_unitarity() {
        let state = ghz_fock(0.2, 12).unwrap();
        let same = state.beam_splitter(1.0, 0, 1).unwrap();
        assert!((same.inner(&state).re - state.norm_sq()).abs() < 1e-12);
        let rotated = state.beam_splitter(0.8, 0, 2).unwrap();
        assert_abs_diff_eq!(rotated.norm_sq(), state.norm_sq(), epsilon = 1e-12);
    }

    #[test]
    fn two_mode_squeezer_pair_amplitude() {
        let s = 0.01;
        let out = FockArray::vacuum(2, 10).two_mode_squeezer(s, 0, 1).unwrap();
        assert_abs_diff_eq!(out.amplitude(&[1, 1]).re, s, epsilon = 1e-5);
        assert_abs_diff_eq!(out.norm_sq(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn conditioning_on_uncoupled_ancilla_fails() {
        let state = ghz_fock(0.3, 14).unwrap().attach_vacuum_mode();
        assert_eq!(state.condition_on_click(3).unwrap_err(), Error::ZeroSuccessProbability);
    }

    #[test]
    fn branch_weights_sum_to_probability() {
        let mixture = FockBranchMixture::from_pure(ghz_fock(0.3, 14).unwrap())
            .photon_subtract(0, 0.99)
            .unwrap();
        let p = mixture.success_probability();
        assert!(p > 0.0 && p < 1.0);
        let sum: f64 = mixture.branches().iter().map(|b| b.amp.norm_sq()).sum();
        assert_abs_diff_eq!(p, sum);
        assert!(mixture.single_click_branch().is_some());
    }

    #[test]
    fn ghz_fock_covariance_matches_closed_form() {
        let r = 0.3;
        let state = ghz_fock(r, 14).unwrap();
        let v = FockBranchMixture::from_pure(state).covariance().unwrap();
        let expected = crate::ghz::ghz_covariance(&crate::ghz::GhzParams::symmetric(r));
        let diff = (v.matrix() - expected.matrix()).abs().max();
        assert!(diff < 1e-6, "max covariance deviation {diff:.3e}");
    }

    #[test]
    fn ghz_fock_small_squeezing_amplitudes() {
        let r = 0.01;
        let state = ghz_fock(r, 10).unwrap();
        let c000 = state.amplitude(&[0, 0, 0]).re;
        let ratio_200 = state.amplitude(&[2, 0, 0]).re / c000;
        let ratio_110 = state.amplitude(&[1, 1, 0]).re / c000;
        assert!(
            (ratio_200 - (-(2f64.sqrt()) / 6.0 * r)).abs() < 0.05 * (2f64.sqrt() / 6.0 * r),
            "⟨200⟩/⟨000⟩ = {ratio_200}"
        );
        assert!(
            (ratio_110 - 2.0 / 3.0 * r).abs() < 0.05 * (2.0 / 3.0 * r),
            "⟨110⟩/⟨000⟩ = {ratio_110}"
        );
    }

    #[test]
    fn vacuum_wigner_at_origin() {
        let mixture = FockBranchMixture::from_pure(FockArray::vacuum(3, 10));
        let w = mixture.wigner_value(&[0.0; 6]).unwrap();
        assert_abs_diff_eq!(w, 1.0 / std::f64::consts::PI.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn wigner_window_is_enforced() {
        let mixture = FockBranchMixture::from_pure(FockArray::vacuum(1, 10));
        assert_eq!(
            mixture.wigner_value(&[4.0, 4.0]).unwrap_err(),
            Error::WindowExceeded
        );
    }

    #[test]
    fn unconverged_tail_is_rejected() {
        assert!(matches!(
            squeezed_vacuum_fock(1.5, 8).unwrap_err(),
            Error::Unconverged { .. }
        ));
    }
}
