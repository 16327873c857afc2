//! Rotor fidelity and fidelity-versus-offset scans.
//!
//! Fidelity between an achieved propagator A and a target T is the
//! global-phase-invariant overlap `lambda = |Tr(T^dag A)| / 2`, which on unit
//! quaternions is just the absolute dot product, i.e.
//! `1 - distance_up_to_phase`. It is 1 exactly when the rotations coincide
//! and 0 when they are maximally distinguishable.

use std::io::{self, Write};

use thiserror::Error;

use crate::pulse::{OffResonance, Pulse, Target};
use crate::rotor::Rotation;
use crate::synthesis::{synthesize, SynthesisError, SynthesisRequest};

/// Overlap `|Tr(T^dag A)| / 2` in `[0, 1]`.
pub fn rotor_fidelity(actual: &Rotation, target: &Rotation) -> f64 {
    (1.0 - actual.distance_up_to_phase(target)).clamp(0.0, 1.0)
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error("scan needs at least 2 grid points, got {points}")]
    TooFewPoints { points: usize },
    #[error("scan range is empty: f_min {f_min} is not below f_max {f_max}")]
    EmptyRange { f_min: f64, f_max: f64 },
}

/// Fidelity of the bare pulse and of the tailored sequence across an offset
/// grid, column-aligned with `f`.
#[derive(Debug, Clone)]
pub struct FidelityScan {
    pub target: Target,
    pub f_star: f64,
    pub f: Vec<f64>,
    pub lambda_simple: Vec<f64>,
    pub lambda_composite: Vec<f64>,
}

/// Scans fidelity over `points` offsets uniformly spanning
/// `[f_min, f_max]`.
///
/// Rows at exactly `-f*`, `0`, and `+f*` are always present when they fall in
/// range: grid points within 1e-9 of one of those anchors are snapped onto
/// it, and missing anchors are inserted, so exported files carry the tailored
/// offsets exactly rather than the nearest grid neighbour.
pub fn scan(
    target: Target,
    f_star: f64,
    f_min: f64,
    f_max: f64,
    points: usize,
) -> Result<FidelityScan, ScanError> {
    if points < 2 {
        return Err(ScanError::TooFewPoints { points });
    }
    if !(f_min < f_max) {
        return Err(ScanError::EmptyRange { f_min, f_max });
    }
    let seq = synthesize(&SynthesisRequest::new(target.theta, target.phi, f_star))?;
    let simple = Pulse::new(target.theta, target.phi);
    let ideal = target.propagator();

    let span = f_max - f_min;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| f_min + span * i as f64 / (points - 1) as f64)
        .collect();
    let mut anchors = vec![0.0];
    if seq.f_star() > 0.0 {
        anchors.push(seq.f_star());
        anchors.push(-seq.f_star());
    }
    for anchor in anchors {
        if anchor < f_min || anchor > f_max {
            continue;
        }
        match grid.iter_mut().find(|g| (**g - anchor).abs() < 1e-9) {
            Some(g) => *g = anchor,
            None => grid.push(anchor),
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut out = FidelityScan {
        target,
        f_star: seq.f_star(),
        f: Vec::with_capacity(grid.len()),
        lambda_simple: Vec::with_capacity(grid.len()),
        lambda_composite: Vec::with_capacity(grid.len()),
    };
    for f in grid {
        let off = OffResonance::from_fraction(f);
        out.f.push(f);
        out.lambda_simple.push(rotor_fidelity(&simple.propagator(off), &ideal));
        out.lambda_composite.push(rotor_fidelity(&seq.propagator(off), &ideal));
    }
    Ok(out)
}

impl FidelityScan {
    /// Row index whose offset equals `f` exactly, if any.
    pub fn row_at(&self, f: f64) -> Option<usize> {
        self.f.iter().position(|g| *g == f)
    }

    /// Writes `# `-prefixed header lines, a column header, then one
    /// full-precision row per grid point.
    pub fn write_csv(&self, w: &mut impl Write, header: &[String]) -> io::Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "f,lambda_simple,lambda_composite")?;
        for i in 0..self.f.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.f[i], self.lambda_simple[i], self.lambda_composite[i]
            )?;
        }
        Ok(())
    }
}
