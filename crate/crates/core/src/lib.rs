//! Quantumness of the generalized Rabi model family.
//!
//! The quantumness of a Hamiltonian is the difference `F_Q - F_C` between the
//! free energy of its quantum description and that of its classical
//! (coherent-state phase-space) description. This crate computes both sides
//! by independent routes:
//!
//! * closed-form asymptotic free energies for the JC and aJC limits,
//! * partition sums over exact spectra (analytic 2x2 blocks or Fock-space
//!   diagonalization with the in-crate symmetric eigensolver),
//! * numerically exact phase-space quadrature of the classical partition
//!   function,
//!
//! and then fits the large-`x` scaling law `A/sqrt(x) + B/x`.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod export;
pub mod linalg;
pub mod params;
pub mod quadrature;
pub mod spectra;
pub mod thermo;

pub use error::{Error, Result};
pub use params::{DerivedParams, ModelKind, ModelParams, Phase};
pub use spectra::{Spectrum, SpectrumSource};
pub use thermo::{FreeEnergy, Method, Treatment};
