//! Interior transmission eigenvalues of Maxwell's equations on a radially
//! stratified ball.
//!
//! The library computes the wavenumbers `k` for which the interior
//! transmission problem
//!
//! ```text
//! curl curl E  - k^2 n(r) E  = 0        in the ball,
//! curl curl E0 - k^2      E0 = 0        in the ball,
//! nu x E = nu x E0,  nu x curl E = nu x curl E0   on the sphere,
//! ```
//!
//! admits a nontrivial solution, for refractive indices `n(r)` that are
//! constant in a shell touching the boundary.  Two independent routes are
//! provided and cross-checked:
//!
//! * an analytic route: per spherical-harmonic mode the problem reduces to
//!   a 2x2 boundary matching determinant in spherical Bessel functions,
//!   whose complex roots are certified by argument-principle counting;
//! * an operator route: the problem is rewritten as a coupled pair system
//!   in `(u, v) = (E - E0, k^2 E0)`, shifted to a spectral parameter `z`
//!   on an admissible ray, inverted, and projected onto divergence-
//!   constrained fields; eigenvalues `mu` of the projected resolvent map
//!   to wavenumbers via `k^2 = z + 1/mu`.
//!
//! Supporting machinery (semiclassical estimate verification, resolvent
//! ray scans, manufactured-solution checks) lives in the corresponding
//! modules.

pub mod admissibility;
pub mod ball_analytic;
pub mod error;
pub mod estimates_verifier;
pub mod grid;
pub mod linalg;
pub mod medium;
pub mod modes;
pub mod poly;
pub mod radial_operator;
pub mod rootfinder;
pub mod specfun;

pub use error::Error;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Complex zero and one.
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// `Result` alias with the library error type.
pub type Result<T> = std::result::Result<T, Error>;
