//! Command-line front end for offset-tailored composite pulses: synthesis,
//! fidelity scans, Bloch trajectories, excitation spectra, and verification
//! against the derivative-free numeric solver.
//!
//! Angles cross this boundary in degrees and are converted to radians on
//! entry. Off-resonance fractions accept decimals or the exact tokens
//! `sqrt3` and `-sqrt3`. Every output file starts with a `#` comment header
//! echoing the invocation, so a rerun with the same arguments reproduces the
//! file byte for byte.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rotten_core::oracle::{solve, OptimizationProblem, Parameterization};
use rotten_core::spectrum::{acquire, excite, ExcitationMode, SpinSystem};
use rotten_core::trajectory::{trace, Projection};
use rotten_core::{
    fidelity, synthesize, verify, BlochVector, CompositeSequence, OffResonance, Pulse,
    SynthesisRequest, Target, VerifyReport,
};

#[derive(Parser)]
#[command(name = "rotten", version, about = "Offset-tailored composite pulse toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the three-pulse sequence realizing a rotation exactly at +-f*
    Synth {
        /// Target flip angle, degrees
        #[arg(allow_hyphen_values = true)]
        theta_deg: f64,
        /// Target phase, degrees
        #[arg(allow_hyphen_values = true)]
        phi_deg: f64,
        /// Tailored offset fraction: decimal, `sqrt3`, or `-sqrt3`
        #[arg(allow_hyphen_values = true)]
        f_star: Offset,
        /// Sequence document to write
        #[arg(long, default_value = "sequence.seq")]
        out: PathBuf,
    },
    /// Scan rotor fidelity of the bare pulse and the tailored sequence over f
    Scan {
        /// Target flip angle, degrees
        #[arg(allow_hyphen_values = true)]
        theta_deg: f64,
        /// Target phase, degrees
        #[arg(allow_hyphen_values = true)]
        phi_deg: f64,
        /// Tailored offset fraction: decimal, `sqrt3`, or `-sqrt3`
        #[arg(allow_hyphen_values = true)]
        f_star: Offset,
        /// Lower end of the scanned offset range
        #[arg(allow_hyphen_values = true)]
        f_min: f64,
        /// Upper end of the scanned offset range
        #[arg(allow_hyphen_values = true)]
        f_max: f64,
        /// Number of uniform grid points (anchor rows at 0 and +-f* are added)
        points: usize,
        /// Scan table to write
        #[arg(long, default_value = "scan.csv")]
        out: PathBuf,
    },
    /// Trace a magnetization trajectory and draw its Bloch projections
    Trajectory {
        /// Excitation to trace
        mode: PulseMode,
        /// Nominal flip angle, degrees
        #[arg(allow_hyphen_values = true)]
        theta_deg: f64,
        /// Pulse phase, degrees
        #[arg(allow_hyphen_values = true)]
        phi_deg: f64,
        /// Tailored offset fraction for rotten mode; `-` for simple mode
        #[arg(allow_hyphen_values = true)]
        f_star: OffsetOrDash,
        /// Off-resonance fraction the trajectory is evaluated at
        #[arg(allow_hyphen_values = true)]
        f_eval: Offset,
        /// Starting magnetization
        initial: InitialState,
        /// Samples inside every pulse
        #[arg(long, default_value_t = 96)]
        samples_per_pulse: usize,
        /// Prefix for the three SVG drawings and the sample table
        #[arg(long, default_value = "trajectory")]
        out_prefix: String,
    },
    /// Simulate the excitation spectrum of a spin system
    Spectrum {
        /// Excitation to apply
        mode: PulseMode,
        /// Spin-system document; the built-in glycine-like pair when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Nominal excitation flip angle, degrees
        #[arg(long, default_value_t = 90.0, allow_hyphen_values = true)]
        theta_deg: f64,
        /// Spectrum table to write
        #[arg(long, default_value = "spectrum.csv")]
        out: PathBuf,
    },
    /// Re-simulate a sequence file and report how exact it is
    Verify {
        /// Sequence document to check
        sequence: PathBuf,
        /// Also run the numeric solver on the file's target and compare
        /// propagators
        #[arg(long)]
        numeric: bool,
        /// Random seed for the numeric solver
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Objective-evaluation budget for the numeric solver (at least 1000)
        #[arg(long, default_value_t = 40_000)]
        budget: u64,
    },
}

/// Off-resonance value as typed; keeps the original spelling so provenance
/// headers echo `sqrt3` rather than a truncated decimal.
#[derive(Clone, Debug)]
struct Offset {
    text: String,
    value: f64,
}

impl FromStr for Offset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value = match s {
            "sqrt3" => 3.0_f64.sqrt(),
            "-sqrt3" => -(3.0_f64.sqrt()),
            _ => s
                .parse::<f64>()
                .map_err(|_| format!("expected a decimal, `sqrt3`, or `-sqrt3`, got `{s}`"))?,
        };
        if !value.is_finite() {
            return Err(format!("off-resonance value `{s}` is not finite"));
        }
        Ok(Offset { text: s.to_string(), value })
    }
}

/// An [`Offset`] or the placeholder `-` where no tailoring applies.
#[derive(Clone, Debug)]
struct OffsetOrDash {
    text: String,
    value: Option<f64>,
}

impl FromStr for OffsetOrDash {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" {
            return Ok(OffsetOrDash { text: s.to_string(), value: None });
        }
        let offset = Offset::from_str(s)?;
        Ok(OffsetOrDash { text: offset.text, value: Some(offset.value) })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PulseMode {
    Simple,
    Rotten,
}

impl PulseMode {
    fn token(self) -> &'static str {
        match self {
            PulseMode::Simple => "simple",
            PulseMode::Rotten => "rotten",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitialState {
    #[value(name = "Ix", alias = "ix")]
    Ix,
    #[value(name = "Iy", alias = "iy")]
    Iy,
    #[value(name = "Iz", alias = "iz")]
    Iz,
}

impl InitialState {
    fn vector(self) -> BlochVector {
        match self {
            InitialState::Ix => BlochVector::X,
            InitialState::Iy => BlochVector::Y,
            InitialState::Iz => BlochVector::Z,
        }
    }

    fn token(self) -> &'static str {
        match self {
            InitialState::Ix => "Ix",
            InitialState::Iy => "Iy",
            InitialState::Iz => "Iz",
        }
    }
}

/// Exit-code classes: usage and domain problems leave with 2, failures of
/// the machinery itself with 1.
enum Failure {
    Usage(String),
    Internal(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synth { theta_deg, phi_deg, f_star, out } => {
            cmd_synth(theta_deg, phi_deg, &f_star, &out)
        }
        Command::Scan { theta_deg, phi_deg, f_star, f_min, f_max, points, out } => {
            cmd_scan(theta_deg, phi_deg, &f_star, f_min, f_max, points, &out)
        }
        Command::Trajectory {
            mode,
            theta_deg,
            phi_deg,
            f_star,
            f_eval,
            initial,
            samples_per_pulse,
            out_prefix,
        } => cmd_trajectory(
            mode,
            theta_deg,
            phi_deg,
            &f_star,
            &f_eval,
            initial,
            samples_per_pulse,
            &out_prefix,
        ),
        Command::Spectrum { mode, config, theta_deg, out } => {
            cmd_spectrum(mode, config.as_deref(), theta_deg, &out)
        }
        Command::Verify { sequence, numeric, seed, budget } => {
            cmd_verify(&sequence, numeric, seed, budget)
        }
    }
}

fn cmd_synth(theta_deg: f64, phi_deg: f64, f_star: &Offset, out: &Path) -> Result<(), Failure> {
    let request =
        SynthesisRequest::new(theta_deg.to_radians(), phi_deg.to_radians(), f_star.value);
    let seq = synthesize(&request).map_err(usage)?;
    let invocation =
        format!("rotten synth {theta_deg} {phi_deg} {} --out {}", f_star.text, out.display());
    write_file(out, |w| {
        writeln!(w, "# {invocation}")?;
        w.write_all(seq.to_document().as_bytes())
    })?;

    println!("pulse     theta_deg       phi_deg");
    for (i, p) in seq.pulses().iter().enumerate() {
        println!("{}     {:>13.6} {:>13.6}", i + 1, p.theta().to_degrees(), p.phi().to_degrees());
    }
    println!("f* = {}", seq.f_star());
    print_report(&verify(&seq));
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_scan(
    theta_deg: f64,
    phi_deg: f64,
    f_star: &Offset,
    f_min: f64,
    f_max: f64,
    points: usize,
    out: &Path,
) -> Result<(), Failure> {
    let target = Target::new(theta_deg.to_radians(), phi_deg.to_radians());
    let scan = fidelity::scan(target, f_star.value, f_min, f_max, points).map_err(usage)?;
    let invocation = format!(
        "rotten scan {theta_deg} {phi_deg} {} {f_min} {f_max} {points} --out {}",
        f_star.text,
        out.display()
    );
    write_file(out, |w| scan.write_csv(w, &[invocation]))?;

    let mut anchors = vec![0.0];
    if scan.f_star > 0.0 {
        anchors.push(scan.f_star);
        anchors.push(-scan.f_star);
    }
    for anchor in anchors {
        if let Some(row) = scan.row_at(anchor) {
            println!(
                "f = {anchor}: lambda_simple = {:.12}, lambda_composite = {:.12}",
                scan.lambda_simple[row], scan.lambda_composite[row]
            );
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_trajectory(
    mode: PulseMode,
    theta_deg: f64,
    phi_deg: f64,
    f_star: &OffsetOrDash,
    f_eval: &Offset,
    initial: InitialState,
    samples_per_pulse: usize,
    out_prefix: &str,
) -> Result<(), Failure> {
    if samples_per_pulse < 2 {
        return Err(Failure::Usage(format!(
            "need at least 2 samples per pulse, got {samples_per_pulse}"
        )));
    }
    let theta = theta_deg.to_radians();
    let phi = phi_deg.to_radians();
    let pulses: Vec<Pulse> = match (mode, f_star.value) {
        (PulseMode::Simple, None) => vec![Pulse::new(theta, phi)],
        (PulseMode::Simple, Some(_)) => {
            return Err(Failure::Usage(
                "simple mode takes `-` for f_star; only rotten mode tailors".into(),
            ))
        }
        (PulseMode::Rotten, Some(value)) => {
            synthesize(&SynthesisRequest::new(theta, phi, value)).map_err(usage)?.pulses().to_vec()
        }
        (PulseMode::Rotten, None) => {
            return Err(Failure::Usage(
                "rotten mode needs a tailored offset fraction, not `-`".into(),
            ))
        }
    };

    let trajectory = trace(
        &pulses,
        OffResonance::from_fraction(f_eval.value),
        initial.vector(),
        samples_per_pulse,
    );
    let invocation = format!(
        "rotten trajectory {} {theta_deg} {phi_deg} {} {} {} --samples-per-pulse \
         {samples_per_pulse} --out-prefix {out_prefix}",
        mode.token(),
        f_star.text,
        f_eval.text,
        initial.token()
    );
    let header = [invocation];
    for projection in Projection::ALL {
        let path = PathBuf::from(format!("{out_prefix}_{}.svg", projection.tag()));
        write_file(&path, |w| trajectory.write_svg(projection, w, &header))?;
        println!("wrote {}", path.display());
    }
    let samples_path = PathBuf::from(format!("{out_prefix}_samples.csv"));
    write_file(&samples_path, |w| trajectory.write_samples_csv(w, &header))?;
    println!("wrote {}", samples_path.display());

    let end = trajectory.endpoint();
    // round at display precision first so values like -1e-17 do not show
    // up as -0.0000
    let clean = |v: f64| (v * 1e4).round() / 1e4 + 0.0;
    println!("endpoint: ({:.4}, {:.4}, {:.4})", clean(end.x), clean(end.y), clean(end.z));
    Ok(())
}

fn cmd_spectrum(
    mode: PulseMode,
    config: Option<&Path>,
    theta_deg: f64,
    out: &Path,
) -> Result<(), Failure> {
    let sys = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            SpinSystem::from_document(&text).map_err(usage)?
        }
        None => SpinSystem::glycine_like(),
    };
    sys.validate().map_err(usage)?;

    let excitation = match mode {
        PulseMode::Simple => ExcitationMode::Simple,
        PulseMode::Rotten => ExcitationMode::Rotten,
    };
    let vectors = excite(&sys, excitation, theta_deg.to_radians()).map_err(usage)?;
    let spectrum = acquire(&sys, &vectors).map_err(usage)?;

    let mut invocation =
        format!("rotten spectrum {} --theta-deg {theta_deg}", mode.token());
    if let Some(path) = config {
        invocation.push_str(&format!(" --config {}", path.display()));
    }
    invocation.push_str(&format!(" --out {}", out.display()));
    let system_line = format!(
        "spin system: {} lines, nu1_hz = {}, t2_s = {}, dwell_s = {}, points = {}",
        sys.lines.len(),
        sys.nu1_hz,
        sys.t2_s,
        sys.dwell_s,
        sys.points
    );
    write_file(out, |w| spectrum.write_csv(w, &[invocation, system_line]))?;

    for (k, reading) in spectrum.line_readings().iter().enumerate() {
        match reading.phase_deg {
            Some(phase) => println!(
                "line {} at {} Hz: phase {phase:+.3} deg",
                k + 1,
                reading.offset_hz
            ),
            None => println!(
                "line {} at {} Hz: empty bin, phase undefined",
                k + 1,
                reading.offset_hz
            ),
        }
    }
    if let Some(warning) = sys.coverage_warning() {
        eprintln!("warning: {warning}");
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_verify(sequence: &Path, numeric: bool, seed: u64, budget: u64) -> Result<(), Failure> {
    if numeric && budget < 1000 {
        return Err(Failure::Usage(format!("budget must be at least 1000, got {budget}")));
    }
    let text = fs::read_to_string(sequence)
        .map_err(|e| usage(format!("cannot read {}: {e}", sequence.display())))?;
    let seq = CompositeSequence::from_document(&text).map_err(usage)?;

    let target = seq.target();
    println!(
        "target: theta {} deg, phi {} deg",
        target.theta.to_degrees(),
        target.phi.to_degrees()
    );
    println!("f* = {}", seq.f_star());
    println!("symmetric outer pulses: {}", if seq.is_symmetric(1e-9) { "yes" } else { "no" });
    print_report(&verify(&seq));

    if numeric {
        let problem =
            OptimizationProblem::new(target, seq.f_star(), Parameterization::Symmetric);
        let result = solve(&problem, seed, budget);
        println!(
            "numeric solver: J = {:.3e}, converged = {}, evaluations = {}, restarts = {}",
            result.objective, result.converged, result.evaluations, result.restarts_used
        );
        for (label, f) in [("+f*", seq.f_star()), ("-f*", -seq.f_star())] {
            let off = OffResonance::from_fraction(f);
            let d = result.sequence.propagator(off).distance_up_to_phase(&seq.propagator(off));
            println!("propagator agreement at {label}: {d:.3e}");
        }
    }
    Ok(())
}

fn print_report(report: &VerifyReport) {
    println!("distance at +f*: {:.3e}", report.distance_at_plus_f);
    println!("distance at -f*: {:.3e}", report.distance_at_minus_f);
    println!("phase identity residual: {:.3e}", report.phase_identity_residual);
}

/// Creates `path` and runs `build` against a buffered writer; creation and
/// write problems are internal failures, not usage errors.
fn write_file(
    path: &Path,
    build: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
) -> Result<(), Failure> {
    let file = fs::File::create(path)
        .map_err(|e| Failure::Internal(format!("cannot create {}: {e}", path.display())))?;
    let mut w = io::BufWriter::new(file);
    build(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| Failure::Internal(format!("writing {}: {e}", path.display())))
}
