//! Resonance offset tailored (ROTTEN) composite pulses.
//!
//! A hard pulse applied off resonance rotates about a tilted axis and through
//! a stretched angle, so a single pulse cannot realize its nominal rotation
//! away from resonance. This crate synthesizes three-pulse sequences, in
//! closed form, that realize an exact single-qubit rotation at two symmetric
//! off-resonance fractions +-f*, with f* anywhere up to sqrt(3), and provides
//! the machinery to check that claim: spin-1/2 propagator simulation, rotor
//! fidelity scans, Bloch-sphere trajectories, a derivative-free numeric
//! search used as an independent oracle, and a small two-line excitation
//! spectrum simulation.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * spin operators are I_k = sigma_k / 2, so a pulse generator
//!   theta (I_x cos phi + I_y sin phi + f I_z) is theta/2 in Pauli units;
//! * rotations are exp(-i theta sigma.n / 2); a 90 degree x pulse sends
//!   z to -y and y to z;
//! * angles are radians everywhere inside the library, degrees only at the
//!   CLI and file boundaries;
//! * rotors are unit quaternions, renormalized after every composition, and
//!   all propagator comparisons ignore global phase.

pub mod fidelity;
pub mod oracle;
pub mod pulse;
pub mod rotor;
pub mod spectrum;
pub mod synthesis;
pub mod trajectory;

pub use pulse::{ideal_propagator, CompositeSequence, OffResonance, Pulse, Target};
pub use rotor::{BlochVector, Rotation};
pub use synthesis::{synthesize, verify, Branch, SynthesisError, SynthesisRequest, VerifyReport};
