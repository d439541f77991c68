//! Coupled simulation of lumped-element networks and two-level open quantum
//! systems (quantum-dot devices governed by a Lindblad master equation).
//!
//! The crate is organized around a pipeline:
//!
//! - [`netlist`] parses a SPICE-flavored text format into an elaborated
//!   [`netlist::Circuit`] of linear elements, sources, and quantum devices;
//! - [`quantum`] builds the Bloch-form affine generator `ds/dt = A(ε)s + b(ε)`
//!   for the single-electron box and the double-quantum-dot charge qubit, plus
//!   the charge rows translating quantum motion into terminal currents;
//! - [`engine`] assembles network (MNA) and quantum unknowns into one Newton
//!   iteration per timestep and provides DC and adaptive transient analysis;
//! - [`analyses`] layers small-signal linear response, S11, large-signal
//!   admittance extraction, harmonic spectra, and parameter sweeps on top;
//! - [`oracle`] is an independent open-loop Crank-Nicolson integrator used as
//!   numerical ground truth for the engine.
//!
//! All energies are stored in frequency units (Hz = E/h); see [`constants`].

pub mod analyses;
pub mod constants;
pub mod engine;
pub mod error;
pub mod interp;
pub mod netlist;
pub mod oracle;
pub mod parallel;
pub mod quantum;
pub mod specfun;

pub use error::{Error, Result};
