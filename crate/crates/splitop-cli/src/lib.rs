//! Command-line front end for the split-operator vibrational-spectra
//! emulator: stage commands (prepare, dipole, propagate, spectrum), the
//! dense-diagonalization oracle, gate-resource accounting, and the
//! orchestrated pipeline and parameter scans with hashed run manifests.

pub mod commands;
pub mod config;
pub mod io;
pub mod pipeline;
