//! Simulation and analysis toolkit for tunable Fabry-Perot microcavities
//! containing a thin crystalline membrane.
//!
//! The crate covers the full chain from multilayer mirror modeling to the
//! predicted cavity-to-confocal signal enhancement:
//!
//! * [`stack`] — multilayer descriptions, quarter-wave mirror constructors and
//!   cavity assemblies,
//! * [`tmm`] — the one-dimensional transfer-matrix engine: spectra, stopbands,
//!   standing-wave field profiles and layer-thickness refinement,
//! * [`gaussmodes`] — Gaussian transverse-mode dispersion, beam waists and
//!   Hermite-Gaussian mode images,
//! * [`coupledcavity`] — coupled diamond/air cavity dispersion, mode-number
//!   identification and geometry inference,
//! * [`raman`] — Stokes kinematics, linewidth unit conversions and phonon
//!   lifetimes,
//! * [`purcell`] — vacuum-field quantization, effective mode volume, Purcell
//!   factor and the enhancement budget,
//! * [`spectrafit`] — Lorentzian and Lorentzian-product fits of measured
//!   spectra, finesse extraction and power-linearity checks.
//!
//! All lengths are nanometers unless a field or argument name says otherwise
//! (`_um`, `_pm`). Refractive indices are real and non-dispersive; stacks are
//! lossless.

// argument validation uses `!(x > 0.0)` so NaN is rejected along with the
// out-of-range values; the suggested `x <= 0.0` would let NaN through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod coupledcavity;
pub mod error;
pub mod gaussmodes;
pub mod io;
pub mod optim;
pub mod purcell;
pub mod raman;
pub mod spectrafit;
pub mod stack;
pub mod tmm;

pub use error::{Error, Result};
