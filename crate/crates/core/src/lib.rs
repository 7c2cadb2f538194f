//! Simulation and analysis kernels for a permanent magnet levitated above the
//! stub of a superconducting coaxial quarter-wave cavity.
//!
//! * [`magnetostatics`]: elliptic integrals, loop inductances, dipole fields.
//! * [`levitation`]: image method, response-loop screening model, equilibria,
//!   critical field and onset temperature.
//! * [`cavity`]: quarter-wave resonance and the frequency-shift map with its inversion.
//! * [`spectra`]: S21 parsing, Lorentzian fitting, cooldown tracking and segmentation.
//!
//! All quantities are SI unless a name says otherwise.

pub mod cavity;
pub mod constants;
pub mod error;
pub mod levitation;
pub mod lsq;
pub mod magnetostatics;
pub mod roots;
pub mod spectra;

pub use error::{Error, Result};
