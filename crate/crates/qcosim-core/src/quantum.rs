//! Quantum-dot device models in Bloch form.
//!
//! A two-level density matrix is parametrized as ρ = ½(I + x·σx + y·σy + z·σz),
//! which enforces Hermiticity and unit trace structurally. The Lindblad master
//! equation then becomes an affine ODE on the Bloch vector,
//! `ds/dt = A(ε)·s + b(ε)`, with the detuning ε set by the terminal voltages.
//!
//! Two devices ship:
//!
//! - the single-electron box (SEB): a dot exchanging electrons with a thermal
//!   reservoir, `z = P_occ − P_empty`, populations relaxing toward the
//!   lifetime-broadened Fermi occupation;
//! - the double-quantum-dot charge qubit (DQD): two tunnel-coupled charge
//!   states with an avoided crossing of gap 2t_c, dissipators defined in the
//!   instantaneous eigenbasis (relaxation via a phonon bath plus pure
//!   dephasing) and rotated to the lab charge basis.
//!
//! Rates quoted in Hz are converted to angular rates (×2π) inside the
//! generators; that conversion happens here and nowhere else.

use crate::constants::{E_OVER_H, KB_OVER_H};
use crate::error::{Error, Result};
use crate::specfun::{bose_einstein_raw, broadened_fermi_raw, Energy};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::TAU;

/// Bloch vector (x, y, z) of a two-level density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochState {
    pub const TOL: f64 = 1e-9;

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochState { x, y, z }
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        BlochState { x: v[0], y: v[1], z: v[2] }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }

    /// Population of basis state 1, ρ₁₁ = (1 + z)/2.
    pub fn p1(&self) -> f64 {
        0.5 * (1.0 + self.z)
    }

    /// Population of basis state 2, ρ₂₂ = (1 − z)/2.
    pub fn p2(&self) -> f64 {
        0.5 * (1.0 - self.z)
    }

    /// True when the state lies inside the Bloch ball (within tolerance), the
    /// condition for ρ to be positive semidefinite.
    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + Self::TOL
    }

    /// Density-matrix entries ((ρ11, ρ12), (ρ21, ρ22)) as (re, im) pairs.
    /// Trace is 1 by construction.
    pub fn density(&self) -> [[(f64, f64); 2]; 2] {
        [
            [(self.p1(), 0.0), (0.5 * self.x, -0.5 * self.y)],
            [(0.5 * self.x, 0.5 * self.y), (self.p2(), 0.0)],
        ]
    }
}

/// The Lindblad generator in Bloch form: `ds/dt = a·s + b`, entries in 1/s.
///
/// For any fixed ε the eigenvalues of `a` have non-positive real part and the
/// fixed point −a⁻¹·b lies inside the Bloch ball.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineGenerator {
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
}

impl AffineGenerator {
    /// Right-hand side A·s + b.
    #[inline]
    pub fn apply(&self, s: &Vector3<f64>) -> Vector3<f64> {
        self.a * s + self.b
    }

    /// Fixed point −A⁻¹·b, if A is invertible.
    pub fn fixed_point(&self) -> Option<Vector3<f64>> {
        self.a.lu().solve(&(-self.b))
    }
}

/// Single-electron box parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SebParams {
    /// Gate lever arm, in [0, 1].
    pub alpha_g: f64,
    /// Reservoir lever arm, in [0, 1].
    pub alpha_r: f64,
    /// Total tunnel rate, Hz.
    pub gamma: f64,
    /// Reservoir temperature, K.
    pub temperature: f64,
}

impl SebParams {
    pub fn new(alpha_g: f64, alpha_r: f64, gamma: f64, temperature: f64) -> Result<Self> {
        let p = SebParams { alpha_g, alpha_r, gamma, temperature };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alphaG", self.alpha_g), ("alphaR", self.alpha_r)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::domain("SebParams", format!("{name} = {a} outside [0,1]")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(Error::domain("SebParams", format!("gamma = {} must be > 0", self.gamma)));
        }
        if self.temperature <= 0.0 {
            return Err(Error::domain(
                "SebParams",
                format!("temp = {} must be > 0", self.temperature),
            ));
        }
        Ok(())
    }

    pub fn kt(&self) -> f64 {
        KB_OVER_H * self.temperature
    }
}

/// Double-quantum-dot charge qubit parameters.
///
/// `alpha[k][l]` is the signed lever arm of gate l on dot k: its sign encodes
/// the direction in which that gate pushes the detuning, so a differential
/// gate pair has opposite-sign entries. The effective gate lever arms are the
/// column sums `alpha[0][l] + alpha[1][l]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqdParams {
    pub alpha: [[f64; 2]; 2],
    /// Tunnel coupling, Hz.
    pub t_c: f64,
    /// Charge relaxation rate, Hz.
    pub gamma_cr: f64,
    /// Pure dephasing rate, Hz.
    pub gamma_phi: f64,
    /// Lattice temperature, K.
    pub temperature: f64,
}

impl DqdParams {
    pub fn new(
        alpha: [[f64; 2]; 2],
        t_c: f64,
        gamma_cr: f64,
        gamma_phi: f64,
        temperature: f64,
    ) -> Result<Self> {
        let p = DqdParams { alpha, t_c, gamma_cr, gamma_phi, temperature };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_c <= 0.0 {
            return Err(Error::domain("DqdParams", format!("tc = {} must be > 0", self.t_c)));
        }
        if self.gamma_cr < 0.0 || self.gamma_phi < 0.0 {
            return Err(Error::domain("DqdParams", "gcr and gphi must be >= 0".to_string()));
        }
        if self.temperature <= 0.0 {
            return Err(Error::domain(
                "DqdParams",
                format!("temp = {} must be > 0", self.temperature),
            ));
        }
        Ok(())
    }

    /// Effective signed lever arm of gate l (column sum over dots).
    pub fn gate_lever(&self, l: usize) -> f64 {
        self.alpha[0][l] + self.alpha[1][l]
    }

    pub fn kt(&self) -> f64 {
        KB_OVER_H * self.temperature
    }
}

/// SEB detuning: ε/h = (e/h)·((1 − α_R)·V_R − α_G·V_G).
///
/// Positive ε means the dot level sits above the reservoir Fermi level, so the
/// dot empties (a positive gate voltage pulls the electron level down).
pub fn detuning_seb(v_g: f64, v_r: f64, p: &SebParams) -> Energy {
    Energy(E_OVER_H * ((1.0 - p.alpha_r) * v_r - p.alpha_g * v_g))
}

/// DQD detuning: ε/h = (e/h)·Σ_l (α₁ₗ + α₂ₗ)·V_l with signed lever arms.
pub fn detuning_dqd(v_g1: f64, v_g2: f64, p: &DqdParams) -> Energy {
    Energy(E_OVER_H * (p.gate_lever(0) * v_g1 + p.gate_lever(1) * v_g2))
}

/// SEB Bloch generator at detuning ε.
///
/// With z = P_occ − P_empty the populations obey dP_occ/dt = 2πΓ·(F(ε) − P_occ)
/// where F is the lifetime-broadened Fermi function; coherences decay at half
/// the total rate, precess at ε, and are never driven (the Hamiltonian is
/// diagonal).
pub fn seb_generator(eps: Energy, p: &SebParams) -> AffineGenerator {
    let g = TAU * p.gamma;
    let w = TAU * eps.0;
    let f = broadened_fermi_raw(eps.0, p.gamma, p.kt());
    let a = Matrix3::new(
        -0.5 * g, -w, 0.0, //
        w, -0.5 * g, 0.0, //
        0.0, 0.0, -g,
    );
    let b = Vector3::new(0.0, 0.0, g * (2.0 * f - 1.0));
    AffineGenerator { a, b }
}

/// Instantaneous eigen-splitting and mixing angle of the DQD Hamiltonian.
///
/// ΔE = sqrt(ε² + (2t_c)²); θ = atan2(2t_c, −ε) ∈ (0, π) so that the
/// eigenbasis-to-lab transform is the spin rotation R_y(θ). θ is continuous
/// in ε, with θ = π/2 at the symmetry point.
pub fn dqd_eigen(eps: Energy, t_c: f64) -> (Energy, f64) {
    let two_tc = 2.0 * t_c;
    let delta_e = eps.0.hypot(two_tc);
    let theta = two_tc.atan2(-eps.0);
    (Energy(delta_e), theta)
}

/// Bloch-space rotation about y by angle θ, the image of the spin rotation
/// U = exp(−iθσy/2) mapping eigenbasis to lab (charge) basis.
pub fn rotation_y(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(
        c, 0.0, s, //
        0.0, 1.0, 0.0, //
        -s, 0.0, c,
    )
}

/// DQD generator in the eigenbasis at fixed splitting ΔE: precession about the
/// eigenaxis at 2πΔE, thermal relaxation Γ↑ = Γ_cr·n, Γ↓ = Γ_cr·(n+1), and
/// pure dephasing Γ_φ along the eigenaxis.
fn dqd_eigenframe_generator(delta_e: f64, p: &DqdParams) -> AffineGenerator {
    let n = bose_einstein_raw(delta_e, p.kt());
    let omega = TAU * delta_e;
    let g_long = TAU * p.gamma_cr * (2.0 * n + 1.0);
    let g_trans = 0.5 * g_long + TAU * p.gamma_phi;
    let a = Matrix3::new(
        -g_trans, -omega, 0.0, //
        omega, -g_trans, 0.0, //
        0.0, 0.0, -g_long,
    );
    let b = Vector3::new(0.0, 0.0, -TAU * p.gamma_cr);
    AffineGenerator { a, b }
}

/// DQD Bloch generator at detuning ε, in the lab (charge) basis.
///
/// The dissipators live in the instantaneous eigenbasis of the Hamiltonian
/// ½·h·(2t_c·σx − ε·σz) and are rotated to the lab frame through R_y(θ); the
/// Hamiltonian precession maps onto the axis 2π·(2t_c, 0, −ε) under the same
/// rotation, so the full eigenframe generator is conjugated in one go.
pub fn dqd_generator(eps: Energy, p: &DqdParams) -> AffineGenerator {
    let (delta_e, theta) = dqd_eigen(eps, p.t_c);
    let eig = dqd_eigenframe_generator(delta_e.0, p);
    let r = rotation_y(theta);
    AffineGenerator { a: r * eig.a * r.transpose(), b: r * eig.b }
}

/// Closed-form fixed point of the SEB generator: x = y = 0, z = 2F(ε) − 1.
pub fn seb_fixed_point(eps: Energy, p: &SebParams) -> Vector3<f64> {
    let f = broadened_fermi_raw(eps.0, p.gamma, p.kt());
    Vector3::new(0.0, 0.0, 2.0 * f - 1.0)
}

/// Closed-form fixed point of the DQD generator: the thermal state along the
/// instantaneous eigenaxis, z̃ = −tanh(ΔE/2kT), rotated to the lab frame.
/// Valid for all Γ_cr ≥ 0 (detailed balance fixes the ratio even as the rate
/// scale goes to zero).
pub fn dqd_fixed_point(eps: Energy, p: &DqdParams) -> Vector3<f64> {
    let (delta_e, theta) = dqd_eigen(eps, p.t_c);
    let z_eig = -(delta_e.0 / (2.0 * p.kt())).tanh();
    rotation_y(theta) * Vector3::new(0.0, 0.0, z_eig)
}

/// One quantum device's contribution to the coupled system at a given set of
/// terminal voltages: the operating detuning, the Bloch generator there, and
/// the per-terminal charge rows c_l such that I_l = e·c_l·(ds/dt).
#[derive(Debug, Clone)]
pub struct QuantumContribution {
    pub epsilon: Energy,
    pub generator: AffineGenerator,
    pub charge_rows: Vec<Vector3<f64>>,
}

/// A two-level quantum device as seen by the engine: detuning map, generator,
/// charge rows, and closed-form fixed point.
pub trait QuantumModel: Send + Sync {
    /// Number of circuit terminals.
    fn num_terminals(&self) -> usize;

    /// Detuning (Hz) from the terminal voltages, in terminal order.
    fn detuning(&self, v: &[f64]) -> Energy;

    /// ∂ε/∂V_l per terminal, Hz/V. Constant (lever arms).
    fn detuning_gradient(&self) -> Vec<f64>;

    /// Bloch generator at detuning ε.
    fn generator(&self, eps: Energy) -> AffineGenerator;

    /// Charge row c_l per terminal: I_l = e·c_l·(A·s + b). Depends only on
    /// lever arms.
    fn charge_rows(&self) -> Vec<Vector3<f64>>;

    /// Steady state at fixed ε.
    fn fixed_point(&self, eps: Energy) -> Vector3<f64>;

    /// ∂A/∂ε and ∂b/∂ε by central difference with step max(1e−6·|ε|, 1 kHz);
    /// the rates involve digamma/Bose factors with no convenient closed-form
    /// derivative.
    fn generator_derivative(&self, eps: Energy) -> (Matrix3<f64>, Vector3<f64>) {
        let h = (1e-6 * eps.0.abs()).max(1e3);
        let hi = self.generator(Energy(eps.0 + h));
        let lo = self.generator(Energy(eps.0 - h));
        ((hi.a - lo.a) / (2.0 * h), (hi.b - lo.b) / (2.0 * h))
    }

    /// Full contribution at the given terminal voltages.
    fn contribution(&self, v: &[f64]) -> QuantumContribution {
        let eps = self.detuning(v);
        QuantumContribution {
            epsilon: eps,
            generator: self.generator(eps),
            charge_rows: self.charge_rows(),
        }
    }
}

impl QuantumModel for SebParams {
    fn num_terminals(&self) -> usize {
        2
    }

    /// Terminals ordered (gate, reservoir).
    fn detuning(&self, v: &[f64]) -> Energy {
        detuning_seb(v[0], v[1], self)
    }

    fn detuning_gradient(&self) -> Vec<f64> {
        vec![-E_OVER_H * self.alpha_g, E_OVER_H * (1.0 - self.alpha_r)]
    }

    fn generator(&self, eps: Energy) -> AffineGenerator {
        seb_generator(eps, self)
    }

    /// P_occ = (1 + z)/2, so each terminal's screening row is α_l/2 along z.
    fn charge_rows(&self) -> Vec<Vector3<f64>> {
        vec![
            Vector3::new(0.0, 0.0, 0.5 * self.alpha_g),
            Vector3::new(0.0, 0.0, 0.5 * self.alpha_r),
        ]
    }

    fn fixed_point(&self, eps: Energy) -> Vector3<f64> {
        seb_fixed_point(eps, self)
    }
}

impl QuantumModel for DqdParams {
    fn num_terminals(&self) -> usize {
        2
    }

    /// Terminals ordered (gate 1, gate 2).
    fn detuning(&self, v: &[f64]) -> Energy {
        detuning_dqd(v[0], v[1], self)
    }

    fn detuning_gradient(&self) -> Vec<f64> {
        vec![E_OVER_H * self.gate_lever(0), E_OVER_H * self.gate_lever(1)]
    }

    fn generator(&self, eps: Energy) -> AffineGenerator {
        dqd_generator(eps, self)
    }

    /// ρ₁₁ − ρ₂₂ = z, so gate l sees the dot-population difference weighted by
    /// its signed lever arms: c_l = (α₁ₗ + α₂ₗ)/2 along z.
    fn charge_rows(&self) -> Vec<Vector3<f64>> {
        vec![
            Vector3::new(0.0, 0.0, 0.5 * self.gate_lever(0)),
            Vector3::new(0.0, 0.0, 0.5 * self.gate_lever(1)),
        ]
    }

    fn fixed_point(&self, eps: Energy) -> Vector3<f64> {
        dqd_fixed_point(eps, self)
    }
}
