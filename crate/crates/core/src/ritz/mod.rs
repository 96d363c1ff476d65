//! Rayleigh–Ritz approximation of the Robin plate spectrum on smooth
//! star-shaped planar domains, over global Legendre polynomials.

pub mod basis;
pub mod checks;
pub mod domain;
pub mod quadrature;
pub mod system;

pub use checks::{
    com_translation, equal_area_profile, isoperimetric_check, ritz_sweep, steklov_sigma2, weinberger_sum_identity, ComResult,
    IsoperimetricRecord, SweepRow, WeinbergerRecord,
};
pub use domain::{Domain2D, DomainSpec};
pub use system::{assemble, solve, PolarRule, RitzOptions, RitzSolution, RitzSystem};
