//! End-to-end simulation of a piezoelectrically strain-tuned diamond
//! color-center (SnV) spin-photon interface.
//!
//! The crate models the full chain
//!
//! ```text
//! actuator voltage -> strain -> emitter Hamiltonian -> optical / spin spectra
//!                  -> photonic routing -> detector statistics
//! ```
//!
//! together with the inverse parameter-extraction pipeline (Lorentzian and
//! sideband-comb fits, linear susceptibility regression, phonon-number and
//! spin-phonon-coupling estimates).
//!
//! Modules map onto the physical subsystems:
//!
//! * [`frames`] — strain tensors and rotations between the device frame and
//!   the internal frames of the four ⟨111⟩ SnV orientation classes.
//! * [`hamiltonian`] — 4×4 ground/excited manifold Hamiltonians under strain,
//!   pre-strain and magnetic field; optical transitions, `g_orb`, `g_sm`.
//! * [`actuator`] — DC gains plus a modal-superposition surrogate for the
//!   nanoelectromechanical frequency response; on-chip power bookkeeping.
//! * [`spectroscopy`] — PLE spectrum synthesis (static, slow-modulation,
//!   resolved-sideband) and the fitting toolbox.
//! * [`spin`] — acoustically driven spin manipulation and readout sweeps.
//! * [`photonics`] — transfer-matrix network of couplers, phase shifters and
//!   cps-/dCPS-MZIs; photon-stream Monte Carlo and g² statistics.
//! * [`config`] / [`scenario`] — JSON device configuration and the named
//!   end-to-end scenarios exposed by the CLI.

pub mod actuator;
pub mod config;
pub mod frames;
pub mod hamiltonian;
pub mod photonics;
pub mod rng;
pub mod scenario;
pub mod spectroscopy;
pub mod spin;

pub use config::DeviceConfig;
pub use frames::{Frame, StrainTensor};
pub use hamiltonian::SnVParams;
