//! Bloch-sphere trajectories under pulse sequences.
//!
//! Each hard pulse rotates the magnetization about one fixed tilted axis, so
//! the path during a pulse is an exact circular arc: the vector at progress
//! fraction `s` through pulse j is `R(axis_j, s theta_j sqrt(1 + f^2))`
//! applied to the vector entering that pulse. Sampling evaluates that exact
//! rotation at each fraction; nothing is integrated, and refining the
//! sampling never moves existing samples.

use std::io::{self, Write};

use crate::pulse::{OffResonance, Pulse};
use crate::rotor::{BlochVector, Rotation};

/// One trajectory sample: cumulative nominal flip angle (radians) and the
/// magnetization vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub progress: f64,
    pub v: BlochVector,
}

/// Sampled path of the magnetization through a pulse sequence.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
    /// Sample index at which each pulse ends.
    boundaries: Vec<usize>,
}

/// Traces `initial` through the pulses at a fixed off-resonance, taking
/// `samples_per_pulse` (>= 2) points inside every pulse plus the shared
/// start point.
pub fn trace(
    pulses: &[Pulse],
    off: OffResonance,
    initial: BlochVector,
    samples_per_pulse: usize,
) -> Trajectory {
    debug_assert!(samples_per_pulse >= 2, "need at least two samples per pulse");
    debug_assert!(initial.norm() > 0.0 && initial.norm() <= 1.0 + 1e-9);
    let f = off.fraction();
    let scale = (1.0 + f * f).sqrt();
    let mut samples = vec![TrajectorySample { progress: 0.0, v: initial }];
    let mut boundaries = Vec::with_capacity(pulses.len());
    let mut entry = initial;
    let mut progress = 0.0;
    for pulse in pulses {
        let axis = [pulse.phi().cos() / scale, pulse.phi().sin() / scale, f / scale];
        for k in 1..=samples_per_pulse {
            let s = k as f64 / samples_per_pulse as f64;
            let r = Rotation::from_unit_axis_angle(axis, s * pulse.theta() * scale);
            samples.push(TrajectorySample { progress: progress + s * pulse.theta(), v: r.apply(entry) });
        }
        entry = samples.last().unwrap().v;
        progress += pulse.theta();
        boundaries.push(samples.len() - 1);
    }
    Trajectory { samples, boundaries }
}

impl Trajectory {
    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    /// Sample indices at which pulses end.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn endpoint(&self) -> BlochVector {
        self.samples.last().unwrap().v
    }

    /// Writes `# `-prefixed header lines then `progress,vx,vy,vz` rows at
    /// full precision.
    pub fn write_samples_csv(&self, w: &mut impl Write, header: &[String]) -> io::Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "progress,vx,vy,vz")?;
        for s in &self.samples {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", s.progress, s.v.x, s.v.y, s.v.z)?;
        }
        Ok(())
    }

    /// Writes one orthographic projection as a standalone SVG drawing: unit
    /// circle, axis labels, the path with one color per pulse, an open
    /// circle at the start and a filled one at the end.
    pub fn write_svg(
        &self,
        projection: Projection,
        w: &mut impl Write,
        header: &[String],
    ) -> io::Result<()> {
        const SIZE: f64 = 420.0;
        const RADIUS: f64 = 180.0;
        const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];
        let c = SIZE / 2.0;
        let px = |v: &BlochVector| {
            let (h, vv) = projection.project(v);
            (c + RADIUS * h, c - RADIUS * vv)
        };
        for line in header {
            writeln!(w, "<!-- {line} -->")?;
        }
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        )?;
        writeln!(w, r#"  <rect width="{SIZE}" height="{SIZE}" fill="white"/>"#)?;
        writeln!(
            w,
            r##"  <circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="#bbbbbb" stroke-width="1"/>"##
        )?;
        let (hl, vl) = projection.axis_labels();
        writeln!(
            w,
            r#"  <text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14">{hl}</text>"#,
            c + RADIUS + 8.0,
            c + 5.0
        )?;
        writeln!(
            w,
            r#"  <text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14">{vl}</text>"#,
            c - 4.0,
            c - RADIUS - 8.0
        )?;
        let mut start = 0usize;
        for (j, &end) in self.boundaries.iter().enumerate() {
            let pts: Vec<String> = self.samples[start..=end]
                .iter()
                .map(|s| {
                    let (x, y) = px(&s.v);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            writeln!(
                w,
                r#"  <polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                pts.join(" "),
                COLORS[j % COLORS.len()]
            )?;
            start = end;
        }
        let (sx, sy) = px(&self.samples[0].v);
        let (ex, ey) = px(&self.endpoint());
        writeln!(
            w,
            r#"  <circle cx="{sx:.3}" cy="{sy:.3}" r="4" fill="white" stroke="black" stroke-width="1.5"/>"#
        )?;
        writeln!(w, r#"  <circle cx="{ex:.3}" cy="{ey:.3}" r="4" fill="black"/>"#)?;
        writeln!(w, "</svg>")
    }
}

/// Orthographic projection planes for the SVG drawings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Xy,
    Xz,
    Yz,
}

impl Projection {
    fn project(&self, v: &BlochVector) -> (f64, f64) {
        match self {
            Projection::Xy => (v.x, v.y),
            Projection::Xz => (v.x, v.z),
            Projection::Yz => (v.y, v.z),
        }
    }

    fn axis_labels(&self) -> (&'static str, &'static str) {
        match self {
            Projection::Xy => ("x", "y"),
            Projection::Xz => ("x", "z"),
            Projection::Yz => ("y", "z"),
        }
    }

    pub const ALL: [Projection; 3] = [Projection::Xy, Projection::Xz, Projection::Yz];

    /// Lowercase tag used in output file names.
    pub fn tag(&self) -> &'static str {
        match self {
            Projection::Xy => "xy",
            Projection::Xz => "xz",
            Projection::Yz => "yz",
        }
    }
}
