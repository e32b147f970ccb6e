//! Sharp lower bounds for the first nonzero Neumann eigenvalue of the
//! p-Laplacian under a Bakry–Émery curvature condition, computed on the
//! one-dimensional comparison models.
//!
//! - [`ptrig`]: `π_p`, `sin_p`, `cos_p` and friends.
//! - [`model`]: parameters and the four drift families.
//! - [`pruefer`]: the phase/amplitude system, profiles and the envelope function.
//! - [`spectrum`]: `λ_D`, odd-solution radii, maximum maps and the critical phase speed.
//! - [`oracle`]: independent discrete solvers used to cross-check the shooting results.
//! - [`verify`]: named property checks, shared by the test suite and the CLI.

pub mod error;
pub mod ptrig;
pub mod quad;
pub mod model;
pub(crate) mod ode;
pub mod pruefer;
pub mod spectrum;
pub mod oracle;
pub mod verify;
