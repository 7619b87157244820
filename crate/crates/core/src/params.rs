//! Trap parameters and their scaled form.
//!
//! Physical inputs are the rotation speed Omega > 1, the quartic trap
//! strength k > 0 and the coupling G > 0. Rescaling lengths by
//! R = sqrt((Omega^2 - 1)/(2k)) turns the trap into the double-well radial
//! profile (omega^2/2) D (r^2 - 1)^2 with
//!
//! ```text
//! omega = Omega (Omega^2 - 1) / (2k),      D = (Omega^2 - 1) / Omega^2.
//! ```
//!
//! Energies of the original functional are the scaled ones times
//! 2k/(Omega^2 - 1).

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical trap parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    /// Rotation speed, dimensionless; must exceed 1 for the rescaling to exist.
    pub omega_phys: f64,
    /// Quartic trap strength, > 0.
    pub k_trap: f64,
    /// Interaction coupling, > 0.
    pub g_coupling: f64,
}

impl TrapParams {
    pub fn new(omega_phys: f64, k_trap: f64, g_coupling: f64) -> Result<Self> {
        if !(omega_phys > 1.0) {
            return Err(Error::invalid(format!(
                "rotation speed must exceed 1, got {omega_phys}"
            )));
        }
        if !(k_trap > 0.0) {
            return Err(Error::invalid(format!("trap strength must be positive, got {k_trap}")));
        }
        if !(g_coupling > 0.0) {
            return Err(Error::invalid(format!("coupling must be positive, got {g_coupling}")));
        }
        Ok(TrapParams { omega_phys, k_trap, g_coupling })
    }
}

/// Scaled parameters (omega, D, G) of the reduced functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    /// Effective rotation, > 0; the giant-vortex regime is omega -> infinity.
    pub omega: f64,
    /// Trap-deconfinement ratio, strictly inside (0, 1).
    pub d_omega: f64,
    /// Interaction coupling, >= 0; zero is the noninteracting limit.
    pub g_coupling: f64,
}

impl ScaledParams {
    pub fn new(omega: f64, d_omega: f64, g_coupling: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::invalid(format!("omega must be positive, got {omega}")));
        }
        if !(d_omega > 0.0 && d_omega < 1.0) {
            return Err(Error::invalid(format!(
                "D must lie strictly inside (0, 1), got {d_omega}"
            )));
        }
        if !(g_coupling >= 0.0) {
            return Err(Error::invalid(format!("coupling must be nonnegative, got {g_coupling}")));
        }
        Ok(ScaledParams { omega, d_omega, g_coupling })
    }
}

/// Asymptotic-regime classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    /// omega >> G^2: the giant-vortex asymptotics apply.
    ExtremeRotation,
    /// G of order one but the rotation not yet extreme.
    FixedG,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeTag {
    pub kind: RegimeKind,
    /// G^2/omega; ExtremeRotation is declared when this is at most `threshold`.
    pub ratio_g2_over_omega: f64,
    /// Reporting convention for the (strictly asymptotic) condition omega >> G^2.
    pub threshold: f64,
    /// Set when G is of order one (|G| <= 10) regardless of the rotation regime.
    pub fixed_g_eligible: bool,
}

/// Declare ExtremeRotation when G^2/omega <= 0.1 (a reporting convention;
/// the regime condition is asymptotic).
pub const REGIME_THRESHOLD: f64 = 0.1;

/// Map physical trap parameters to the scaled triple.
pub fn scale_parameters(p: &TrapParams) -> Result<ScaledParams> {
    let om2 = p.omega_phys * p.omega_phys;
    ScaledParams::new(
        p.omega_phys * (om2 - 1.0) / (2.0 * p.k_trap),
        (om2 - 1.0) / om2,
        p.g_coupling,
    )
}

/// Spatial blow-up factor R = sqrt((Omega^2 - 1)/(2k)) of the rescaling.
pub fn rescale_length(p: &TrapParams) -> Result<f64> {
    if !(p.omega_phys > 1.0) {
        return Err(Error::invalid("rotation speed must exceed 1"));
    }
    Ok(((p.omega_phys * p.omega_phys - 1.0) / (2.0 * p.k_trap)).sqrt())
}

/// Convert a scaled energy back to the physical (tilde) energy.
/// Linear in the energy argument.
pub fn unscale_energy(p: &TrapParams, f_omega_value: f64) -> Result<f64> {
    if !(p.omega_phys > 1.0) {
        return Err(Error::invalid("rotation speed must exceed 1"));
    }
    Ok(2.0 * p.k_trap / (p.omega_phys * p.omega_phys - 1.0) * f_omega_value)
}

/// Classify the asymptotic regime of a scaled parameter set. The rotation
/// dominates once G^2/omega drops below the reporting threshold; a coupling
/// with G^2 <= omega still behaves as a fixed constant against the rotation.
pub fn classify_regime(s: &ScaledParams) -> RegimeTag {
    let ratio = s.g_coupling * s.g_coupling / s.omega;
    let fixed_g_eligible = ratio <= 1.0;
    let kind = if ratio <= REGIME_THRESHOLD {
        RegimeKind::ExtremeRotation
    } else if fixed_g_eligible {
        RegimeKind::FixedG
    } else {
        RegimeKind::Other
    };
    RegimeTag { kind, ratio_g2_over_omega: ratio, threshold: REGIME_THRESHOLD, fixed_g_eligible }
}
