//! Period matrices of degenerating hyperelliptic curves `y^2 = Q(z)` and the
//! special Kähler geometry they induce.
//!
//! The crate is organized bottom-up:
//!
//! - [`polyfield`]: complex polynomials, simultaneous root finding, root matching.
//! - [`surface`]: branch classification, sheet-tracked square roots, forms.
//! - [`contour`]: paths, lifted cycles and symplectic cycle bases.
//! - [`periods`]: adaptive quadrature, period matrices, dual bases, `tau`.
//! - [`skgeom`]: special coordinates, metric blocks, Kähler potential.
//! - [`family`]: one-parameter root families and basis transport.
//! - [`scans`]: degeneration ladders, regressions, monodromy, Jacobian checks.

pub mod contour;
pub mod error;
pub mod family;
pub mod periods;
pub mod polyfield;
pub mod scans;
pub mod skgeom;
pub mod surface;

pub use error::{Error, Result};
pub use num_complex::Complex64;
