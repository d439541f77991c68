//! Special functions used by the quantum rate formulas: the complex digamma
//! function, Fermi-Dirac and Bose-Einstein statistics, and the
//! Lorentzian-broadened Fermi function.
//!
//! All energy arguments are in frequency units (Hz, i.e. E/h).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// An energy stored in frequency units (Hz = E/h).
///
/// Finite by invariant; comparisons against temperature use k_B·T/h in the
/// same units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Energy(pub f64);

impl Energy {
    #[inline]
    pub fn hz(value: f64) -> Self {
        Energy(value)
    }

    #[inline]
    pub fn as_hz(self) -> f64 {
        self.0
    }

    /// k_B·T/h for a temperature in kelvin.
    #[inline]
    pub fn from_kelvin(t: f64) -> Self {
        Energy(crate::constants::KB_OVER_H * t)
    }
}

/// B_{2k}/(2k) for k = 1..8, the asymptotic-expansion coefficients of the
/// digamma function.
const DIGAMMA_ASYMP: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// Recurrence shifts `z` until |z| reaches this radius before the asymptotic
/// series is applied. 8 Bernoulli terms at |z| = 12 leave a truncation error
/// below 1e-18.
const DIGAMMA_SHIFT_RADIUS: f64 = 12.0;

/// Euler's digamma function ψ₀(z) for complex argument.
///
/// Upward recurrence ψ₀(z+1) = ψ₀(z) + 1/z shifts the argument into the
/// asymptotic region, where ψ₀(z) ≈ ln z − 1/(2z) − Σ B_{2k}/(2k·z^{2k});
/// the reflection formula handles Re z < 1/2. Errors out on the poles at
/// non-positive real integers.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain("digamma", format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::domain("digamma", format!("pole at z = {}", z.re)));
    }
    if z.re < 0.5 {
        // ψ(z) = ψ(1−z) − π·cot(πz)
        return Ok(digamma_upper(Complex64::new(1.0, 0.0) - z) - PI * cot_pi(z));
    }
    Ok(digamma_upper(z))
}

/// Digamma for Re z ≥ 1/2 (no reflection needed).
fn digamma_upper(mut z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    while z.norm_sqr() < DIGAMMA_SHIFT_RADIUS * DIGAMMA_SHIFT_RADIUS {
        acc -= z.inv();
        z += 1.0;
    }
    let mut res = z.ln() - 0.5 * z.inv();
    let z2inv = (z * z).inv();
    let mut term = z2inv;
    for &c in DIGAMMA_ASYMP.iter() {
        res -= c * term;
        term *= z2inv;
    }
    res + acc
}

/// cot(πz) without overflowing cosh/sinh for large |Im z|.
fn cot_pi(z: Complex64) -> Complex64 {
    if z.im.abs() > 50.0 {
        // cot(πz) → ∓i for Im z → ±∞, with exponentially small corrections.
        return Complex64::new(0.0, -z.im.signum());
    }
    let w = PI * z;
    w.cos() / w.sin()
}

/// Fermi-Dirac occupation 1/(1 + exp(ε/kT)), overflow-safe for |ε/kT| > 700.
pub fn fermi(eps: Energy, kt: Energy) -> Result<f64> {
    if kt.0 <= 0.0 {
        return Err(Error::domain("fermi", format!("kT = {} must be positive", kt.0)));
    }
    Ok(fermi_raw(eps.0, kt.0))
}

#[inline]
pub(crate) fn fermi_raw(eps: f64, kt: f64) -> f64 {
    let x = eps / kt;
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Convolution of a Lorentzian level density (HWHM = γ/2) with the Fermi
/// function: F(ε) = 1/2 − (1/π)·Im ψ₀(1/2 + (γ/2 + iε)/(2π·kT)).
///
/// Monotonically decreasing in ε with range (0, 1); reduces to [`fermi`] for
/// γ = 0.
pub fn broadened_fermi(eps: Energy, gamma: f64, kt: Energy) -> Result<f64> {
    if kt.0 <= 0.0 {
        return Err(Error::domain(
            "broadened_fermi",
            format!("kT = {} must be positive", kt.0),
        ));
    }
    if gamma < 0.0 {
        return Err(Error::domain(
            "broadened_fermi",
            format!("gamma = {gamma} must be non-negative"),
        ));
    }
    Ok(broadened_fermi_raw(eps.0, gamma, kt.0))
}

#[inline]
pub(crate) fn broadened_fermi_raw(eps: f64, gamma: f64, kt: f64) -> f64 {
    let denom = 2.0 * PI * kt;
    let z = Complex64::new(0.5 + 0.5 * gamma / denom, eps / denom);
    // Re z ≥ 1/2 here, so the pole/reflection paths cannot trigger.
    let psi = digamma_upper(z);
    0.5 - psi.im / PI
}

/// Bose-Einstein occupation n = 1/(exp(ΔE/kT) − 1) for ΔE > 0.
pub fn bose_einstein(delta_e: Energy, kt: Energy) -> Result<f64> {
    if delta_e.0 <= 0.0 {
        return Err(Error::domain(
            "bose_einstein",
            format!("deltaE = {} must be positive", delta_e.0),
        ));
    }
    if kt.0 <= 0.0 {
        return Err(Error::domain(
            "bose_einstein",
            format!("kT = {} must be positive", kt.0),
        ));
    }
    Ok(bose_einstein_raw(delta_e.0, kt.0))
}

#[inline]
pub(crate) fn bose_einstein_raw(delta_e: f64, kt: f64) -> f64 {
    let x = delta_e / kt;
    if x > 700.0 {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}
