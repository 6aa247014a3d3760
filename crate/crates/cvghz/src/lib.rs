//! Phase-space toolkit for three-mode continuous-variable GHZ states under
//! conditional photon subtraction and addition.
//!
//! States live in quadrature phase space as finite signed sums of Gaussian
//! Wigner components, which stay closed under the operations used here:
//! symplectic circuits, ancilla dilation, on-off detector conditioning and
//! loss. On top of that representation the crate evaluates
//!
//! * the Gaussian tangle and squared logarithmic negativities
//!   ([`entanglement`]),
//! * Mermin-Klyshko nonlocality with displaced parity observables, including
//!   detection-efficiency thresholds ([`nonlocality`]),
//! * teleportation-network fidelities at unit or optimized gain, output
//!   Wigner fields and EPR correlation sums ([`teleportation`]),
//! * a truncated Fock-space brute force that independently validates click
//!   probabilities, covariances and Wigner values ([`fock`], [`checks`]).
//!
//! Conventions: quadrature ordering `(x_1, p_1, ..., x_N, p_N)` with
//! `x = (a + a†)/√2`, vacuum covariance `I/2`. Photon subtraction taps a mode
//! with a transmissivity-0.99 beam splitter by default; addition couples it
//! to an amplifier of strength 0.01.
//!
//! ```
//! use cvghz::ghz::{photon_operated_ghz, Mode, PhotonOpSpec};
//! use cvghz::teleportation::fidelity_state;
//!
//! // Subtract a photon from the sender and receiver modes, then teleport.
//! let ops = [PhotonOpSpec::subtract(Mode::A), PhotonOpSpec::subtract(Mode::C)];
//! let resource = photon_operated_ghz(0.25, &ops)?;
//! let fidelity = fidelity_state(&resource, 1.0)?;
//! assert!(fidelity > 0.5); // beats the classical benchmark
//! # Ok::<(), cvghz::Error>(())
//! ```

pub mod checks;
mod dd;
pub mod entanglement;
mod error;
pub mod fock;
pub mod ghz;
pub mod nonlocality;
pub mod optimize;
pub mod phasespace;
pub mod teleportation;

pub use error::{Error, Result};
pub use ghz::{GhzParams, Mode, OpKind, PhotonOpSpec};
pub use optimize::GridRange;
pub use phasespace::{
    CovarianceMatrix, GaussianMixtureState, GaussianTerm, SymplecticForm, SymplecticMatrix,
    WignerEvaluator,
};

// The guide's code blocks double as doctests so the book cannot drift from
// the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }

    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(PhaseSpace, "../../../book/src/phase-space.md");
    chapter!(PhotonOperations, "../../../book/src/photon-operations.md");
    chapter!(GhzStates, "../../../book/src/ghz-states.md");
    chapter!(Entanglement, "../../../book/src/entanglement.md");
    chapter!(Nonlocality, "../../../book/src/nonlocality.md");
    chapter!(Teleportation, "../../../book/src/teleportation.md");
    chapter!(FockChecks, "../../../book/src/fock-checks.md");
    chapter!(Cli, "../../../book/src/cli.md");
}
