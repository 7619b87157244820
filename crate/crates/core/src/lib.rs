//! Radial-mode reduction of the fast-rotating 2D Gross-Pitaevskii problem.
//!
//! The energy of a unit-mass condensate u on R^2, in scaled variables, is
//!
//! ```text
//! F_omega(u) = Int |grad u - i omega x_perp u|^2
//!            + D (omega^2/2)(|x|^2 - 1)^2 |u|^2 + G |u|^4 dx
//! ```
//!
//! Expanding u in angular Fourier modes u = sum_n f_n(r) e^{i n theta}
//! decouples the quadratic part into one radial problem per winding number n,
//! leaving a single quartic mode-convolution term. This crate provides the
//! pieces of that reduction at desk scale:
//!
//! - [`params`]: physical trap parameters -> scaled (omega, D, G), regimes.
//! - [`grid`]: radial grids, r dr quadrature, field normalization.
//! - [`pencil`]: the shared symmetric tridiagonal discretization (Numerov
//!   generalized pencil) behind every solver in the crate.
//! - [`linear1d`]: per-mode potentials V_n, well geometry (R_n, h_n), the two
//!   lowest eigenpairs, mode windows and optimal-mode selection.
//! - [`oscillator`]: Hermite-basis machinery for the semiclassical expansions
//!   around the well bottom (corrections P_n, Q_n, tau_n; constants K'_n, J'_n).
//! - [`nonlinear1d`]: per-mode nonlinear ground states via normalized
//!   gradient flow.
//! - [`coupled2d`]: the full multi-mode energy, exact quartic convolution,
//!   and joint minimization.
//! - [`diagnostics`]: giant-vortex phenomenology on converged states (winding
//!   number, central hole, annular Gaussian profile, decay rate).
//! - [`validate`]: the calibrated acceptance checks, runnable from tests or
//!   the CLI.

pub mod coupled2d;
pub mod diagnostics;
mod fit;
pub mod grid;
pub mod linear1d;
pub mod nonlinear1d;
pub mod oscillator;
pub mod params;
pub mod pencil;
// pub mod validate; // TEMP-STUB

mod error;
#[cfg(test)]
mod testbed;

pub use coupled2d::{CondensateState, EnergyBreakdown, MinimizeOutcome, ModeMassSpectrum};
pub use diagnostics::{PolarSamples, VortexReport};
pub use error::Error;
pub use grid::{RadialField, RadialGrid};
pub use linear1d::{BlowUpProfile, EigenResult, ModeProblem, ModeSelection, ModeWindow};
pub use nonlinear1d::{FlowParams, GammaProfile, NonlinearResult};
pub use oscillator::{CorrectionResult, HermiteExpansion};
pub use params::{RegimeKind, RegimeTag, ScaledParams, TrapParams};
// pub use validate::{CheckRecord, ValidationReport}; // TEMP-STUB

pub type Result<T> = std::result::Result<T, Error>;
