//! Coded-aperture design toolkit.
//!
//! The crate evaluates the linear MMSE of a circulant mask camera for a given
//! scene spectral prior and thermal/shot noise model, computes the waterfilling
//! lower bound on that error, and synthesizes masks that provably meet the
//! bound up to a constant factor in exposure time:
//!
//! * [`flatseq`] builds binary spectrally flat masks from quadratic, quartic and
//!   octic residues (cyclic difference sets) for i.i.d. scenes.
//! * [`nazarov`] solves the coefficient problem for arbitrary priors with a
//!   greedy local search over sign cortèges, in 1D and 2D.
//!
//! Every design comes back with a [`DesignCertificate`] that re-checks the
//! spectral guarantees numerically.

pub mod cli;
pub mod error;
pub mod flatseq;
pub mod io;
pub mod model;
pub mod nazarov;
pub mod spectra;
pub mod waterfill;

pub use error::{Error, Result};
pub use model::{Aperture, ImagingConfig, PriorKind, ScenePrior};
pub use nazarov::DesignCertificate;
pub use waterfill::SpectrumAllocation;
