//! Continuous-variable GHZ states and photon-operation pipelines.
//!
//! A CV GHZ state on `N` modes is the Gaussian state produced by sending one
//! p-squeezed vacuum (parameter `r1`) and `N-1` x-squeezed vacua (parameter
//! `r2`) through a balanced distribution network of beam splitters. Its
//! covariance matrix has a closed form: `a` on the x diagonal, `c` on x
//! off-diagonals, `b`/`d` likewise for p, and no x–p coupling.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::phasespace::{CovarianceMatrix, GaussianMixtureState, SymplecticMatrix};

/// Default beam-splitter amplitude transmissivity for photon subtraction:
/// the tap transmits 99% of the intensity, so the amplitude entry of the
/// symplectic matrix is √0.99.
pub const DEFAULT_SUBTRACT_T: f64 = 0.994_987_437_106_619_9;
/// Default amplifier interaction strength for photon addition.
pub const DEFAULT_ADD_S: f64 = 0.01;

/// Squeezing parameters of a CV GHZ state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzParams {
    pub num_modes: usize,
    /// p-squeezing of the first input mode.
    pub r1: f64,
    /// x-squeezing of the remaining `N-1` input modes.
    pub r2: f64,
}

impl GhzParams {
    pub fn new(num_modes: usize, r1: f64, r2: f64) -> Result<Self> {
        if num_modes < 2 {
            return Err(Error::InvalidParameter(format!(
                "a GHZ state needs at least 2 modes, got {num_modes}"
            )));
        }
        if !(r1 >= 0.0 && r2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "squeezing parameters must be nonnegative, got r1={r1}, r2={r2}"
            )));
        }
        Ok(Self { num_modes, r1, r2 })
    }

    /// Three-mode state with equal squeezing `r1 = r2 = r`.
    pub fn symmetric(r: f64) -> Self {
        Self {
            num_modes: 3,
            r1: r,
            r2: r,
        }
    }
}

/// Entries of the closed-form GHZ covariance.
fn ghz_entries(params: &GhzParams) -> (f64, f64, f64, f64) {
    let n = params.num_modes as f64;
    let (e1p, e1m) = ((2.0 * params.r1).exp(), (-2.0 * params.r1).exp());
    let (e2p, e2m) = ((2.0 * params.r2).exp(), (-2.0 * params.r2).exp());
    let a = e1p / (2.0 * n) + (n - 1.0) * e2m / (2.0 * n);
    let b = e1m / (2.0 * n) + (n - 1.0) * e2p / (2.0 * n);
    let c = (e1p - e2m) / (2.0 * n);
    let d = (e1m - e2p) / (2.0 * n);
    (a, b, c, d)
}

/// Closed-form GHZ covariance matrix.
pub fn ghz_covariance(params: &GhzParams) -> CovarianceMatrix {
    let (a, b, c, d) = ghz_entries(params);
    let dim = 2 * params.num_modes;
    let mut v = DMatrix::zeros(dim, dim);
    for i in 0..params.num_modes {
        for j in 0..params.num_modes {
            if i == j {
                v[(2 * i, 2 * j)] = a;
                v[(2 * i + 1, 2 * j + 1)] = b;
            } else {
                v[(2 * i, 2 * j)] = c;
                v[(2 * i + 1, 2 * j + 1)] = d;
            }
        }
    }
    CovarianceMatrix::from_matrix(v).expect("closed form is symmetric")
}

/// Single-term zero-mean state with the closed-form GHZ covariance.
pub fn ghz_state(params: &GhzParams) -> GaussianMixtureState {
    GaussianMixtureState::from_covariance(ghz_covariance(params))
}

/// Builds the three-mode GHZ state by circuit: squeezed vacua through the
/// two-splitter distribution network `BS(0,1; t=1/√3)` then `BS(1,2; t=1/√2)`.
///
/// The closed form is the ground truth; this construction reproduces it to
/// machine precision and doubles as the template for the Fock-space mirror.
pub fn ghz_circuit(params: &GhzParams) -> Result<GaussianMixtureState> {
    if params.num_modes != 3 {
        return Err(Error::InvalidParameter(format!(
            "circuit construction is implemented for 3 modes, got {}",
            params.num_modes
        )));
    }
    let sq_p = SymplecticMatrix::single_mode_squeezer(params.r1, 0, 3)?;
    let sq_x1 = SymplecticMatrix::single_mode_squeezer(-params.r2, 1, 3)?;
    let sq_x2 = SymplecticMatrix::single_mode_squeezer(-params.r2, 2, 3)?;
    let bs01 = SymplecticMatrix::beam_splitter(1.0 / 3f64.sqrt(), 0, 1, 3)?;
    let bs12 = SymplecticMatrix::beam_splitter(1.0 / 2f64.sqrt(), 1, 2, 3)?;
    GaussianMixtureState::vacuum(3)
        .apply_symplectic(&sq_p)?
        .apply_symplectic(&sq_x1)?
        .apply_symplectic(&sq_x2)?
        .apply_symplectic(&bs01)?
        .apply_symplectic(&bs12)
}

/// Party labels of the three-mode analyses; teleportation roles are
/// sender = A, helper = B, receiver = C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
    C,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::A => 0,
            Mode::B => 1,
            Mode::C => 2,
        }
    }

    pub const ALL: [Mode; 3] = [Mode::A, Mode::B, Mode::C];
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::A => write!(f, "A"),
            Mode::B => write!(f, "B"),
            Mode::C => write!(f, "C"),
        }
    }
}

/// Which conditional photon operation to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Subtract,
    Add,
}

/// One conditional photon operation: kind, target mode and coupling
/// (beam-splitter transmissivity `t` for subtraction, amplifier strength `s`
/// for addition).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonOpSpec {
    pub kind: OpKind,
    pub mode: Mode,
    pub coupling: f64,
}

impl PhotonOpSpec {
    pub fn subtract(mode: Mode) -> Self {
        Self {
            kind: OpKind::Subtract,
            mode,
            coupling: DEFAULT_SUBTRACT_T,
        }
    }

    pub fn add(mode: Mode) -> Self {
        Self {
            kind: OpKind::Add,
            mode,
            coupling: DEFAULT_ADD_S,
        }
    }

    pub fn subtract_with(mode: Mode, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "subtraction transmissivity must lie in (0, 1), got {t}"
            )));
        }
        Ok(Self {
            kind: OpKind::Subtract,
            mode,
            coupling: t,
        })
    }

    pub fn add_with(mode: Mode, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "addition strength must be positive, got {s}"
            )));
        }
        Ok(Self {
            kind: OpKind::Add,
            mode,
            coupling: s,
        })
    }
}

/// Applies the listed photon operations in sequence, each with a fresh
/// ancilla that is transformed, conditioned on a click and discarded.
///
/// At most one operation per mode; a result with `k` operations carries
/// `2^k` Gaussian terms and its norm is the joint success probability.
pub fn apply_photon_ops(
    state: &GaussianMixtureState,
    ops: &[PhotonOpSpec],
) -> Result<GaussianMixtureState> {
    let mut seen = [false; 3];
    for op in ops {
        let idx = op.mode.index();
        if seen[idx] {
            return Err(Error::InvalidParameter(format!(
                "at most one photon operation per mode (mode {} repeated)",
                op.mode
            )));
        }
        seen[idx] = true;
    }
    let mut out = state.clone();
    for op in ops {
        out = match op.kind {
            OpKind::Subtract => out.photon_subtract(op.mode.index(), op.coupling)?,
            OpKind::Add => out.photon_add(op.mode.index(), op.coupling)?,
        };
    }
    Ok(out)
}

/// Symmetric three-mode GHZ state at squeezing `r` with the listed photon
/// operations applied.
pub fn photon_operated_ghz(r: f64, ops: &[PhotonOpSpec]) -> Result<GaussianMixtureState> {
    let params = GhzParams::new(3, r, r)?;
    apply_photon_ops(&ghz_state(&params), ops)
}
