//! Robin plate spectral laboratory.
//!
//! Computes eigenvalues of `Δ² − τΔ` with Robin-type natural boundary
//! conditions: exactly on the unit ball in any dimension `d ≥ 2` (through
//! ultraspherical Bessel boundary determinants), and approximately on smooth
//! star-shaped planar domains (through Rayleigh–Ritz). The [`verify`] module
//! checks, over parameter grids, every inequality that the ball-maximality
//! argument for the second eigenvalue relies on.

pub mod ball;
pub mod error;
pub mod io;
pub mod profile;
pub mod ritz;
pub mod roots;
pub mod specfun;
pub mod verify;

pub use ball::{BallParams, Branch, RadialMode};
pub use error::{Error, Result};
pub use profile::TrialProfile;
pub use ritz::{Domain2D, RitzOptions, RitzSolution, RitzSystem};
pub use specfun::UltraIndex;
pub use verify::{GridSpec, VerificationReport};
