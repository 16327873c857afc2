//! Pulse model: hard pulses, off-resonance, and three-pulse sequences.
//!
//! A resonant hard pulse with nominal flip angle `theta` and phase `phi`
//! generates the rotor `exp(-i theta (I_x cos phi + I_y sin phi))`. Off
//! resonance, with offset fraction `f` = offset / nutation rate, the
//! generator picks up a `theta f I_z` term, so the pulse actually rotates by
//! the stretched angle `theta sqrt(1 + f^2)` about the tilted unit axis
//! `(cos phi, sin phi, f) / sqrt(1 + f^2)`. Everything downstream (synthesis,
//! fidelity, trajectories, spectra) is built on that single propagator rule.
//!
//! Sequences are applied left to right: pulse 1 first, so the overall
//! propagator is `U3 U2 U1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rotor::Rotation;

const TAU: f64 = std::f64::consts::TAU;

/// Errors from off-resonance construction and sequence file parsing.
#[derive(Debug, Error)]
pub enum PulseModelError {
    #[error("nutation rate nu1_hz must be positive, got {nu1_hz}")]
    NonPositiveNutationRate { nu1_hz: f64 },
    #[error("sequence document is not valid JSON after '#' comment lines: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("sequence document has {found} pulses, expected 3")]
    WrongPulseCount { found: usize },
}

/// Hard pulse with nominal flip angle `theta >= 0` and phase `phi` in
/// `[0, 2 pi)`, both radians.
///
/// A negative input angle is canonicalized at construction to a positive
/// angle with the phase advanced by pi, the way a spectrometer would program
/// it. (The two differ off resonance; the canonical form is what runs.)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    theta: f64,
    phi: f64,
}

/// Wraps an angle into `[0, 2 pi)`, guarding the rounding case where
/// `rem_euclid` lands exactly on 2 pi.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl Pulse {
    pub fn new(theta: f64, phi: f64) -> Self {
        let (theta, phi) = if theta < 0.0 {
            (-theta, phi + std::f64::consts::PI)
        } else {
            (theta, phi)
        };
        Pulse { theta, phi: wrap_angle(phi) }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Propagator of this pulse at the given off-resonance.
    pub fn propagator(&self, off: OffResonance) -> Rotation {
        raw_propagator(self.theta, self.phi, off.fraction())
    }
}

/// Propagator for arbitrary real `theta`, bypassing pulse canonicalization.
///
/// The numeric oracle explores raw parameter space where a sign flip of
/// theta must mean exactly the inverse rotation, not the phase-advanced
/// pulse a spectrometer would substitute.
pub(crate) fn raw_propagator(theta: f64, phi: f64, f: f64) -> Rotation {
    let scale = (1.0 + f * f).sqrt();
    let axis = [phi.cos() / scale, phi.sin() / scale, f / scale];
    Rotation::from_unit_axis_angle(axis, theta * scale)
}

/// Propagator of the ideal (resonant) rotation by `theta` about the
/// equatorial axis at angle `phi`.
pub fn ideal_propagator(theta: f64, phi: f64) -> Rotation {
    raw_propagator(theta, phi, 0.0)
}

/// Off-resonance expressed as the dimensionless fraction
/// `f` = offset / nutation rate, optionally remembering the absolute
/// frequencies it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffResonance {
    f: f64,
    frequencies_hz: Option<(f64, f64)>,
}

impl OffResonance {
    pub fn from_fraction(f: f64) -> Self {
        OffResonance { f, frequencies_hz: None }
    }

    pub fn from_frequencies(offset_hz: f64, nu1_hz: f64) -> Result<Self, PulseModelError> {
        if nu1_hz <= 0.0 {
            return Err(PulseModelError::NonPositiveNutationRate { nu1_hz });
        }
        Ok(OffResonance { f: offset_hz / nu1_hz, frequencies_hz: Some((offset_hz, nu1_hz)) })
    }

    pub fn on_resonance() -> Self {
        Self::from_fraction(0.0)
    }

    pub fn fraction(&self) -> f64 {
        self.f
    }

    /// The `(offset_hz, nu1_hz)` pair when built from frequencies.
    pub fn frequencies_hz(&self) -> Option<(f64, f64)> {
        self.frequencies_hz
    }

    /// Tilt of the rotation axis from +z, `atan2(1, f)`: pi/2 on resonance,
    /// approaching 0 (or pi) as f goes to +inf (or -inf).
    pub fn tilt_angle(&self) -> f64 {
        1.0_f64.atan2(self.f)
    }
}

/// The rotation a sequence is meant to realize: flip angle `theta` about the
/// equatorial axis at phase `phi`, both radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub theta: f64,
    pub phi: f64,
}

impl Target {
    pub fn new(theta: f64, phi: f64) -> Self {
        Target { theta, phi }
    }

    /// The ideal propagator of this target.
    pub fn propagator(&self) -> Rotation {
        ideal_propagator(self.theta, self.phi)
    }
}

/// Three back-to-back pulses with the offset fraction they were tailored for
/// and the rotation they are meant to realize.
///
/// Synthesized sequences always satisfy `pulses[0] == pulses[2]` (the
/// symmetric family); the type itself accepts any triple so that numeric
/// search results and hand-edited files can be represented and reported on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeSequence {
    pulses: [Pulse; 3],
    f_star: f64,
    target: Target,
}

impl CompositeSequence {
    pub fn new(pulses: [Pulse; 3], f_star: f64, target: Target) -> Self {
        CompositeSequence { pulses, f_star, target }
    }

    pub fn pulses(&self) -> &[Pulse; 3] {
        &self.pulses
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// Overall propagator `U3 U2 U1` at the given off-resonance.
    pub fn propagator(&self, off: OffResonance) -> Rotation {
        let [p1, p2, p3] = self.pulses;
        p3.propagator(off) * p2.propagator(off) * p1.propagator(off)
    }

    /// Whether first and last pulse agree field-wise within `tol` (phases
    /// compared as angles, so 2 pi wraps do not count as differences).
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let (a, b) = (self.pulses[0], self.pulses[2]);
        (a.theta() - b.theta()).abs() <= tol && angular_gap(a.phi(), b.phi()) <= tol
    }

    /// Serializes to the sequence document body (JSON, degrees).
    pub fn to_document(&self) -> String {
        let doc = SequenceDoc {
            target: AngleDoc {
                theta_deg: self.target.theta.to_degrees(),
                phi_deg: self.target.phi.to_degrees(),
            },
            f_star: self.f_star,
            pulses: self
                .pulses
                .iter()
                .map(|p| AngleDoc { theta_deg: p.theta().to_degrees(), phi_deg: p.phi().to_degrees() })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("document serialization");
        text.push('\n');
        text
    }

    /// Parses a sequence document, skipping leading or interleaved lines that
    /// start with '#' (the invocation header written by the CLI).
    pub fn from_document(text: &str) -> Result<Self, PulseModelError> {
        let body: String = text
            .lines()
            .filter(|line| !line.trim_start().starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n");
        let doc: SequenceDoc = serde_json::from_str(&body)?;
        if doc.pulses.len() != 3 {
            return Err(PulseModelError::WrongPulseCount { found: doc.pulses.len() });
        }
        let p = |d: &AngleDoc| Pulse::new(d.theta_deg.to_radians(), d.phi_deg.to_radians());
        Ok(CompositeSequence {
            pulses: [p(&doc.pulses[0]), p(&doc.pulses[1]), p(&doc.pulses[2])],
            f_star: doc.f_star,
            target: Target::new(doc.target.theta_deg.to_radians(), doc.target.phi_deg.to_radians()),
        })
    }
}

/// Smallest separation between two angles on the circle.
pub(crate) fn angular_gap(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

#[derive(Serialize, Deserialize)]
struct SequenceDoc {
    target: AngleDoc,
    f_star: f64,
    pulses: Vec<AngleDoc>,
}

#[derive(Serialize, Deserialize)]
struct AngleDoc {
    theta_deg: f64,
    phi_deg: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    const SQRT3: f64 = 1.732050807568877293527446341505872367_f64;

    #[test]
    fn off_resonant_quarter_pulse_is_tilted_half_turn() {
        // theta = pi/2 at f = sqrt(3): angle pi about (1/2, 0, sqrt(3)/2).
        let p = Pulse::new(FRAC_PI_2, 0.0);
        let u = p.propagator(OffResonance::from_fraction(SQRT3));
        assert!((u.angle() - PI).abs() < 1e-12, "angle {}", u.angle());
        let axis = u.axis().unwrap();
        assert!((axis[0] - 0.5).abs() < 1e-12);
        assert!(axis[1].abs() < 1e-12);
        assert!((axis[2] - SQRT3 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn on_resonance_reduces_to_ideal() {
        let p = Pulse::new(1.23, 0.77);
        let u = p.propagator(OffResonance::on_resonance());
        assert!(u.distance_up_to_phase(&ideal_propagator(1.23, 0.77)) < 1e-12);
    }

    #[test]
    fn stretched_angle_law() {
        let p = Pulse::new(0.9, 2.1);
        let f = -0.8;
        let u = p.propagator(OffResonance::from_fraction(f));
        let expect = 0.9 * (1.0 + f * f).sqrt();
        assert!((u.angle() - expect).abs() < 1e-12);
    }

    #[test]
    fn negative_angle_canonicalizes_to_phase_advance() {
        let p = Pulse::new(-1.0, 0.25);
        assert!((p.theta() - 1.0).abs() < 1e-15);
        assert!((p.phi() - (0.25 + PI)).abs() < 1e-15);
        let q = Pulse::new(2.0, -0.5);
        assert!((q.phi() - (TAU - 0.5)).abs() < 1e-15, "phi wraps into [0, 2 pi)");
    }

    #[test]
    fn off_resonance_from_frequencies() {
        let off = OffResonance::from_frequencies(9240.0, 9240.0 / SQRT3).unwrap();
        assert!((off.fraction() - SQRT3).abs() < 1e-12);
        assert_eq!(off.frequencies_hz(), Some((9240.0, 9240.0 / SQRT3)));
        assert!(OffResonance::from_frequencies(100.0, 0.0).is_err());
        assert!(OffResonance::from_frequencies(100.0, -5.0).is_err());
    }

    #[test]
    fn tilt_angle_conventions() {
        assert!((OffResonance::on_resonance().tilt_angle() - FRAC_PI_2).abs() < 1e-15);
        assert!(OffResonance::from_fraction(10.0).tilt_angle() < 0.1);
        assert!(OffResonance::from_fraction(-10.0).tilt_angle() > PI - 0.1);
    }

    #[test]
    fn sequence_propagator_applies_first_pulse_first() {
        // 90x then 90z, from z: z -> -y -> +x. The flipped order would give
        // z -> z -> -y, so this pins the composition order.
        let p1 = Pulse::new(FRAC_PI_2, 0.0);
        let u1 = p1.propagator(OffResonance::on_resonance());
        let uz = Rotation::from_axis_angle([0.0, 0.0, 1.0], FRAC_PI_2).unwrap();
        let both = uz * u1;
        let v = both.apply(crate::rotor::BlochVector::Z);
        assert!((v.x - 1.0).abs() < 1e-12, "got ({}, {}, {})", v.x, v.y, v.z);
    }

    #[test]
    fn document_roundtrip_with_comment_header() {
        let seq = CompositeSequence::new(
            [Pulse::new(FRAC_PI_2, 0.0), Pulse::new(PI / 4.0, PI), Pulse::new(FRAC_PI_2, 0.0)],
            SQRT3,
            Target::new(FRAC_PI_2, 0.0),
        );
        let text = format!("# invocation: synth 90 0 sqrt3\n# tool: test\n{}", seq.to_document());
        let back = CompositeSequence::from_document(&text).unwrap();
        assert!((back.f_star() - seq.f_star()).abs() < 1e-15);
        for k in 0..3 {
            assert!((back.pulses()[k].theta() - seq.pulses()[k].theta()).abs() < 1e-12);
            assert!(angular_gap(back.pulses()[k].phi(), seq.pulses()[k].phi()) < 1e-12);
        }
    }

    #[test]
    fn document_with_wrong_pulse_count_is_rejected() {
        let text = r#"{"target":{"theta_deg":90.0,"phi_deg":0.0},"f_star":1.0,
                       "pulses":[{"theta_deg":90.0,"phi_deg":0.0}]}"#;
        match CompositeSequence::from_document(text) {
            Err(PulseModelError::WrongPulseCount { found: 1 }) => {}
            other => panic!("expected WrongPulseCount, got {other:?}"),
        }
    }

    #[test]
    fn malformed_document_reports_parse_error() {
        assert!(matches!(
            CompositeSequence::from_document("{ not json"),
            Err(PulseModelError::Parse(_))
        ));
    }

    #[test]
    fn symmetric_detection_sees_through_phase_wraps() {
        let seq = CompositeSequence::new(
            [Pulse::new(1.0, 1e-13), Pulse::new(0.5, 1.0), Pulse::new(1.0, TAU - 1e-13)],
            1.0,
            Target::new(1.0, 0.0),
        );
        assert!(seq.is_symmetric(1e-12));
        let asym = CompositeSequence::new(
            [Pulse::new(1.0, 0.0), Pulse::new(0.5, 1.0), Pulse::new(1.1, 0.0)],
            1.0,
            Target::new(1.0, 0.0),
        );
        assert!(!asym.is_symmetric(1e-12));
    }
}
