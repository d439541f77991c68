//! Physical constants.
//!
//! Internally every energy is stored divided by Planck's constant, i.e. in Hz.
//! This keeps all quantities of interest (GHz detunings, mK temperatures, µV
//! drives) within a few orders of magnitude of unity and avoids carrying
//! 1e-34-scale factors through the numerics.

/// Boltzmann constant over Planck constant, Hz/K.
pub const KB_OVER_H: f64 = 2.083_661_912_3e10;

/// Elementary charge over Planck constant, Hz/V.
pub const E_OVER_H: f64 = 2.417_989_242e14;

/// Elementary charge, C. Used only when converting charge motion to amperes.
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// e²/h in siemens, the natural admittance scale of single-charge devices.
pub const E2_OVER_H: f64 = E_CHARGE * E_OVER_H;
