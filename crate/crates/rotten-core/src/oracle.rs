//! Derivative-free numeric search for tailored sequences.
//!
//! An independent check on the closed-form synthesis: parameterize a
//! three-pulse sequence by raw angles, score it by how far its propagator
//! sits from the ideal target at both tailored offsets,
//!
//! ```text
//! J(p) = d(U(+f*), V)^2 + d(U(-f*), V)^2
//! ```
//!
//! with `d` the global-phase-invariant rotor distance, and minimize J with
//! multi-start Nelder-Mead: a coarse lattice over angle space plus seeded
//! random candidates are ranked by J, and the best few seed independent
//! simplex descents. Everything is deterministic for a given
//! `(problem, seed, budget)`; the solver never peeks at the closed form, so
//! agreement is always judged at the propagator level, not by comparing
//! parameters.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::pulse::{raw_propagator, CompositeSequence, Pulse, Target};
use crate::rotor::Rotation;

use std::f64::consts::TAU;

/// How the three pulses map onto the parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameterization {
    /// `[theta1, theta2, phi1, phi2]`, third pulse tied to the first.
    Symmetric,
    /// `[theta1, phi1, theta2, phi2, theta3, phi3]`, all six free.
    General,
}

impl Parameterization {
    pub fn dimension(&self) -> usize {
        match self {
            Parameterization::Symmetric => 4,
            Parameterization::General => 6,
        }
    }

    /// Pulse angle/phase triplets `(theta, phi)` from a parameter vector.
    fn pulse_angles(&self, p: &[f64]) -> [(f64, f64); 3] {
        match self {
            Parameterization::Symmetric => [(p[0], p[2]), (p[1], p[3]), (p[0], p[2])],
            Parameterization::General => [(p[0], p[1]), (p[2], p[3]), (p[4], p[5])],
        }
    }

    /// Whether parameter index `i` is a flip angle (as opposed to a phase).
    fn is_flip_angle(&self, i: usize) -> bool {
        match self {
            Parameterization::Symmetric => i < 2,
            Parameterization::General => i % 2 == 0,
        }
    }
}

/// Sequence-search problem: reach `target` at both `+-f_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationProblem {
    pub target: Target,
    pub f_star: f64,
    pub parameterization: Parameterization,
}

impl OptimizationProblem {
    pub fn new(target: Target, f_star: f64, parameterization: Parameterization) -> Self {
        OptimizationProblem { target, f_star, parameterization }
    }

    /// Sequence propagator at one offset fraction for raw parameters.
    fn propagator_at(&self, p: &[f64], f: f64) -> Rotation {
        let [(t1, p1), (t2, p2), (t3, p3)] = self.parameterization.pulse_angles(p);
        raw_propagator(t3, p3, f)
            * raw_propagator(t2, p2, f)
            * raw_propagator(t1, p1, f)
    }

    /// The objective J; exposed so tests can probe the landscape directly.
    pub fn objective(&self, p: &[f64]) -> f64 {
        let ideal = self.target.propagator();
        let dp = self.propagator_at(p, self.f_star).distance_up_to_phase(&ideal);
        let dm = self.propagator_at(p, -self.f_star).distance_up_to_phase(&ideal);
        dp * dp + dm * dm
    }

    /// Builds the canonical sequence a parameter vector describes.
    pub fn sequence_from(&self, p: &[f64]) -> CompositeSequence {
        let [(t1, p1), (t2, p2), (t3, p3)] = self.parameterization.pulse_angles(p);
        CompositeSequence::new(
            [Pulse::new(t1, p1), Pulse::new(t2, p2), Pulse::new(t3, p3)],
            self.f_star.abs(),
            self.target,
        )
    }
}

/// Solver knobs; the defaults are what `solve` uses.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Simplex descents launched from the best-ranked candidates.
    pub restarts: usize,
    /// Extra random candidates mixed into the coarse lattice.
    pub random_candidates: usize,
    /// Nelder-Mead coefficients: reflection, expansion, contraction, shrink.
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
    /// Initial simplex edge length, radians.
    pub initial_step: f64,
    /// J below which the result counts as converged.
    pub convergence: f64,
    /// J below which the search stops early (already well past converged).
    pub stop_objective: f64,
    /// Simplex value spread below which a descent is considered stalled.
    pub spread_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 32,
            random_candidates: 64,
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
            initial_step: 0.25,
            convergence: 1e-9,
            stop_objective: 1e-14,
            spread_tolerance: 1e-16,
        }
    }
}

/// Outcome of a search; `sequence` is built from the folded `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub params: Vec<f64>,
    pub sequence: CompositeSequence,
    pub objective: f64,
    /// Objective evaluations consumed (the quantity `budget` caps).
    pub evaluations: u64,
    /// Simplex descents actually launched.
    pub restarts_used: usize,
    /// True when the final objective is below the convergence threshold.
    pub converged: bool,
}

/// Runs the search with default configuration. Identical
/// `(problem, seed, budget)` give bit-identical results; `budget` caps
/// objective evaluations and should be at least 1000.
pub fn solve(problem: &OptimizationProblem, seed: u64, budget: u64) -> OptimizationResult {
    solve_with(problem, seed, budget, &SolverConfig::default())
}

pub fn solve_with(
    problem: &OptimizationProblem,
    seed: u64,
    budget: u64,
    cfg: &SolverConfig,
) -> OptimizationResult {
    let dim = problem.parameterization.dimension();
    let ideal = problem.target.propagator();
    let mut evals: u64 = 0;
    // the hot path caches the ideal rotor instead of rebuilding it per call
    let mut score = |p: &[f64], evals: &mut u64| -> f64 {
        *evals += 1;
        let dp = problem.propagator_at(p, problem.f_star).distance_up_to_phase(&ideal);
        let dm = problem.propagator_at(p, -problem.f_star).distance_up_to_phase(&ideal);
        dp * dp + dm * dm
    };

    // coarse candidates: a lattice over angle space plus seeded random points
    let lattice: &[f64] = if dim <= 4 {
        &[0.25 * TAU / 2.0, 0.75 * TAU / 2.0, 1.25 * TAU / 2.0, 1.75 * TAU / 2.0]
    } else {
        &[0.25 * TAU, 0.5 * TAU, 0.75 * TAU]
    };
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let mut point = vec![0usize; dim];
    'lattice: loop {
        candidates.push(point.iter().map(|&i| lattice[i]).collect());
        for d in 0..dim {
            point[d] += 1;
            if point[d] < lattice.len() {
                continue 'lattice;
            }
            point[d] = 0;
        }
        break;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.random_candidates {
        candidates.push((0..dim).map(|_| rng.random_range(0.0..TAU)).collect());
    }

    let mut ranked: Vec<(f64, usize)> = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        if evals >= budget {
            break;
        }
        ranked.push((score(c, &mut evals), i));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best_params: Vec<f64> = candidates[ranked[0].1].clone();
    let mut best_value = ranked[0].0;
    let mut restarts_used = 0;
    for &(_, idx) in ranked.iter().take(cfg.restarts) {
        if evals >= budget || best_value < cfg.stop_objective {
            break;
        }
        restarts_used += 1;
        let (p, v) = nelder_mead(&mut score, &mut evals, budget, &candidates[idx], dim, cfg);
        if v < best_value {
            best_value = v;
            best_params = p;
        }
    }

    // fold into canonical ranges without touching the physics: flip angles
    // are periodic mod 2 pi / sqrt(1 + f*^2) at the tailored offsets (up to
    // global phase), phases mod 2 pi
    let period = TAU / (1.0 + problem.f_star * problem.f_star).sqrt();
    for (i, p) in best_params.iter_mut().enumerate() {
        if problem.parameterization.is_flip_angle(i) {
            *p = p.rem_euclid(period);
        } else {
            *p = crate::pulse::wrap_angle(*p);
        }
    }
    let folded_value = score(&best_params, &mut evals);

    OptimizationResult {
        sequence: problem.sequence_from(&best_params),
        params: best_params,
        objective: folded_value,
        evaluations: evals,
        restarts_used,
        converged: folded_value < cfg.convergence,
    }
}

/// One Nelder-Mead descent; returns the best vertex found and its value.
fn nelder_mead(
    score: &mut impl FnMut(&[f64], &mut u64) -> f64,
    evals: &mut u64,
    budget: u64,
    start: &[f64],
    dim: usize,
    cfg: &SolverConfig,
) -> (Vec<f64>, f64) {
    let mut xs: Vec<Vec<f64>> = vec![start.to_vec()];
    for d in 0..dim {
        let mut v = start.to_vec();
        v[d] += cfg.initial_step;
        xs.push(v);
    }
    let mut fs: Vec<f64> = Vec::with_capacity(dim + 1);
    for x in &xs {
        if *evals >= budget {
            return (x.clone(), f64::INFINITY);
        }
        fs.push(score(x, evals));
    }

    loop {
        // order best..worst
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];
        if fs[best] < cfg.stop_objective
            || (fs[worst] - fs[best]).abs() < cfg.spread_tolerance
            || *evals >= budget
        {
            return (xs[best].clone(), fs[best]);
        }

        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += xs[i][d];
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let blend = |a: f64| -> Vec<f64> {
            (0..dim).map(|d| centroid[d] + a * (centroid[d] - xs[worst][d])).collect()
        };
        let reflected = blend(cfg.reflect);
        let fr = score(&reflected, evals);
        if fr < fs[best] {
            let expanded = blend(cfg.reflect * cfg.expand);
            let fe = score(&expanded, evals);
            if fe < fr {
                xs[worst] = expanded;
                fs[worst] = fe;
            } else {
                xs[worst] = reflected;
                fs[worst] = fr;
            }
        } else if fr < fs[second_worst] {
            xs[worst] = reflected;
            fs[worst] = fr;
        } else {
            let (contracted, fc) = if fr < fs[worst] {
                let c = blend(cfg.reflect * cfg.contract);
                let f = score(&c, evals);
                (c, f)
            } else {
                let c = blend(-cfg.contract);
                let f = score(&c, evals);
                (c, f)
            };
            if fc < fs[worst].min(fr) {
                xs[worst] = contracted;
                fs[worst] = fc;
            } else {
                // shrink toward the best vertex
                let anchor = xs[best].clone();
                for i in 0..xs.len() {
                    if i == best {
                        continue;
                    }
                    for d in 0..dim {
                        xs[i][d] = anchor[d] + cfg.shrink * (xs[i][d] - anchor[d]);
                    }
                    if *evals >= budget {
                        let mut order: Vec<usize> = (0..xs.len()).collect();
                        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
                        return (xs[order[0]].clone(), fs[order[0]]);
                    }
                    fs[i] = score(&xs[i], evals);
                }
            }
        }
    }
}
