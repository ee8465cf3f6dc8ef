//! Localization statistics of the local spectral density (LSD) for a
//! periodically driven band random matrix with disordered diagonal (BRMDD).
//!
//! A probe state `|g>` is coupled by a quasi-monochromatic drive to the
//! midpoint of a disordered band of levels. The crate samples disorder
//! realizations, builds the one-period Floquet operator from piecewise
//! exponentials, accumulates the disorder-averaged LSD of the probe state
//! over quasienergy, fits the closed-form lineshapes of the driven
//! two-state system with irreversible losses, and extracts the shape width
//! and inverse participation ratio together with their empirical scaling
//! laws.
//!
//! Module map:
//! - [`ensemble`]: BRMDD sampling with seeded, per-realization random streams
//! - [`floquet`]: drive Hamiltonians, step unitaries, quasienergy spectra
//! - [`spectral`]: LSD accumulation, IPR, field-free reference quantities
//! - [`tssil`]: closed-form contours of the lossy driven two-state model
//! - [`fitting`]: contour fits, the right-slope width rule, power laws
//! - [`experiments`]: point/sweep runners, scaling regressions, CSV outputs
//!
//! All randomness flows from `(seed, realization index)` ChaCha streams and
//! reductions run in fixed order, so outputs are byte-reproducible for a
//! given configuration regardless of thread count.

pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod floquet;
pub mod scalar;
pub mod spectral;
pub mod tssil;

pub use error::{Error, Result};

/// Working precision of the matrix pipeline.
pub type Real = f64;

/// Complex scalar paired with [`Real`].
pub type Cplx = num_complex::Complex<Real>;
