//! Newton refinement from the identity vector toward a target unitary.
//!
//! The 8x8 complex system `sum_k dU/dC_k dC_k = R` is flattened into 128 real
//! equations in 64 unknowns and solved in the least-squares sense through an
//! SVD; the minimum-norm solution is taken. The target is only needed up to a
//! global phase, so the phase direction is removed from the system. Large
//! rotations are split into `n*` equal steps and the solved step is repeated.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::identity::IdentitySeed;
use crate::cell_model::{HamiltonianTriple, INTERVALS};
use crate::error::{Error, Result};
use crate::linalg::{
    c, check_hermitian, frobenius, phase_invariant_infidelity, power, CellMatrix, CELL_DIM,
};
use crate::propagator::{
    linearize, sequence_unitary, step_unitary, ControlVector, Linearization, Spectral,
};

/// `U_target = exp(-i generator epsilon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisTarget {
    pub name: String,
    pub generator: CellMatrix,
    pub epsilon: f64,
}

impl SynthesisTarget {
    pub fn new(name: impl Into<String>, generator: CellMatrix, epsilon: f64) -> Result<Self> {
        check_hermitian(&generator)?;
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::Format(format!(
                "epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        Ok(SynthesisTarget {
            name: name.into(),
            generator,
            epsilon,
        })
    }

    pub fn identity() -> Self {
        SynthesisTarget {
            name: "identity".into(),
            generator: CellMatrix::zeros(),
            epsilon: 0.0,
        }
    }

    pub fn unitary(&self) -> CellMatrix {
        self.step_unitary(1)
    }

    /// `exp(-i generator epsilon / n)`.
    pub fn step_unitary(&self, n: usize) -> CellMatrix {
        step_unitary(&self.generator, self.epsilon / n as f64)
            .expect("generator checked at construction")
    }

    /// Spectral norm of the generator.
    pub fn generator_norm(&self) -> f64 {
        let spectral = Spectral::new(&self.generator).expect("generator checked at construction");
        spectral.values.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }

    pub fn is_trivial(&self) -> bool {
        self.epsilon == 0.0 || self.generator.iter().all(|z| z.norm() == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    /// Accept when the phase-invariant infidelity of `U(C)^{n*}` is at most this.
    pub tol: f64,
    /// Fixed repetition count; disables automatic escalation.
    pub n_star: Option<usize>,
    /// Largest rotation `epsilon ||H|| / n*` attempted in one step.
    pub theta_max: f64,
    /// How many times `n*` may be doubled when Newton stalls.
    pub max_escalations: usize,
    pub max_iterations: usize,
    /// Newton stops once the Frobenius residual of the step drops below this.
    pub residual_tol: f64,
    /// Smallest allowed ratio of extreme singular values in the Newton system.
    pub conditioning_threshold: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            tol: 1e-6,
            n_star: None,
            theta_max: std::f64::consts::PI / 8.0,
            max_escalations: 2,
            max_iterations: 120,
            residual_tol: 1e-12,
            conditioning_threshold: 1e-8,
        }
    }
}

/// Solved controls for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub target_name: String,
    pub n_star: usize,
    #[serde(rename = "base_controls")]
    pub base: ControlVector,
    /// Global phase of `U(C)^{n*}` relative to the target.
    pub phase_theta: f64,
    /// Phase-invariant infidelity of `U(C)^{n*}` against the target.
    pub residual: f64,
    pub iterations: usize,
    pub cell_params_hash: String,
    /// Frobenius residual of the step after each accepted Newton iteration.
    #[serde(default)]
    pub residual_history: Vec<f64>,
}

impl ControlSchedule {
    /// `U(C)^{n*}`.
    pub fn realized_unitary(&self, triple: &HamiltonianTriple, tau: f64) -> Result<CellMatrix> {
        Ok(power(
            &sequence_unitary(triple, &self.base, tau)?,
            self.n_star,
        ))
    }
}

/// Smallest `n*` with `epsilon ||H|| / n* <= theta_max`, or the override.
pub fn choose_repetitions(target: &SynthesisTarget, options: &SynthesisOptions) -> usize {
    if let Some(n) = options.n_star {
        return n.max(1);
    }
    let angle = target.epsilon * target.generator_norm();
    ((angle / options.theta_max - 1e-9).ceil() as usize).max(1)
}

/// Right-hand side of one Newton solve.
#[derive(Debug, Clone)]
pub enum NewtonRhs {
    /// `-i H epsilon U(C)`: the first-order move along the generator.
    FirstOrder { generator: CellMatrix, epsilon: f64 },
    /// `e^{i phi} T - U(C)` with `phi` aligning the target to the current unitary.
    Residual { target: CellMatrix },
}

impl NewtonRhs {
    fn evaluate(&self, current: &CellMatrix) -> CellMatrix {
        match self {
            NewtonRhs::FirstOrder { generator, epsilon } => generator * current * c(0.0, -epsilon),
            NewtonRhs::Residual { target } => aligned_residual(target, current),
        }
    }
}

/// `e^{i phi} target - current`, with the phase chosen to minimize the norm.
pub fn aligned_residual(target: &CellMatrix, current: &CellMatrix) -> CellMatrix {
    let overlap = (target.adjoint() * current).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    target * phase - current
}

fn flatten(m: &CellMatrix) -> DVector<f64> {
    let mut v = DVector::zeros(2 * CELL_DIM * CELL_DIM);
    for (idx, z) in m.iter().enumerate() {
        v[idx] = z.re;
        v[idx + CELL_DIM * CELL_DIM] = z.im;
    }
    v
}

/// SVD of the flattened Jacobian with the global-phase direction `iU`
/// projected out of its range, reused across damping trials.
///
/// Phase changes are not penalized by the residual, so only the 63 leading
/// singular directions take part in the solve.
pub struct NewtonSystem {
    u_t: DMatrix<f64>,
    singular: DVector<f64>,
    v: DMatrix<f64>,
}

const ACTIVE: usize = INTERVALS - 1;

impl NewtonSystem {
    pub fn new(lin: &Linearization, conditioning_threshold: f64) -> Result<Self> {
        let rows = 2 * CELL_DIM * CELL_DIM;
        let phase_dir = flatten(&(lin.unitary * c(0.0, 1.0)));
        let phase_dir = &phase_dir / phase_dir.norm();
        let mut jac = DMatrix::zeros(rows, INTERVALS);
        for (k, d) in lin.derivatives.iter().enumerate() {
            let col = flatten(d);
            let along = phase_dir.dot(&col);
            jac.set_column(k, &(col - &phase_dir * along));
        }
        let svd = jac.svd(true, true);
        let mut order: Vec<usize> = (0..INTERVALS).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        order.truncate(ACTIVE);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        let system = NewtonSystem {
            u_t: DMatrix::from_fn(ACTIVE, rows, |i, j| u[(j, order[i])]),
            singular: DVector::from_fn(ACTIVE, |i, _| svd.singular_values[order[i]]),
            v: DMatrix::from_fn(INTERVALS, ACTIVE, |i, j| v_t[(order[j], i)]),
        };
        let ratio = system.condition_ratio();
        if ratio.is_nan() || ratio < conditioning_threshold {
            return Err(Error::IllConditioned { ratio });
        }
        Ok(system)
    }

    /// Smallest over largest of the retained singular values.
    pub fn condition_ratio(&self) -> f64 {
        let largest = self.singular[0];
        if largest > 0.0 {
            self.singular[ACTIVE - 1] / largest
        } else {
            0.0
        }
    }

    /// Minimum-norm least-squares solution with Tikhonov damping
    /// `lambda * sigma_max^2`; `lambda = 0` is the plain Newton step.
    pub fn solve(&self, rhs: &CellMatrix, lambda: f64) -> Vec<f64> {
        let projected = &self.u_t * flatten(rhs);
        let shift = lambda * self.singular[0].powi(2);
        let weights = DVector::from_fn(ACTIVE, |i, _| {
            let s = self.singular[i];
            projected[i] * s / (s * s + shift)
        });
        (&self.v * weights).iter().copied().collect()
    }
}

/// Condition ratio of the phase-projected Newton system at `controls`.
pub fn control_conditioning(
    triple: &HamiltonianTriple,
    controls: &ControlVector,
    tau: f64,
) -> Result<f64> {
    let lin = linearize(triple, controls, tau)?;
    Ok(NewtonSystem::new(&lin, 0.0)?.condition_ratio())
}

/// One undamped Newton solve at `controls`.
pub fn newton_step(
    triple: &HamiltonianTriple,
    controls: &ControlVector,
    rhs: &NewtonRhs,
    tau: f64,
    conditioning_threshold: f64,
) -> Result<Vec<f64>> {
    let lin = linearize(triple, controls, tau)?;
    let system = NewtonSystem::new(&lin, conditioning_threshold)?;
    Ok(system.solve(&rhs.evaluate(&lin.unitary), 0.0))
}

fn shifted(controls: &ControlVector, delta: &[f64], scale: f64) -> ControlVector {
    let mut out = controls.clone();
    for (v, d) in out.values_mut().iter_mut().zip(delta) {
        *v += scale * d;
    }
    out
}

struct NewtonRun {
    controls: ControlVector,
    history: Vec<f64>,
    iterations: usize,
}

const DAMPING: [f64; 5] = [0.0, 1e-6, 1e-4, 1e-2, 1.0];

/// Iteration cap and Frobenius residual at which Newton stops.
#[derive(Debug, Clone, Copy)]
struct Budget {
    iterations: usize,
    stop: f64,
}

/// Newton iteration toward `target_step` (up to phase). Each iteration tries
/// the full step, then halved steps, then increasingly damped steps; it stops
/// on convergence or when nothing reduces the residual.
fn refine(
    triple: &HamiltonianTriple,
    start: &ControlVector,
    target_step: &CellMatrix,
    first: NewtonRhs,
    tau: f64,
    options: &SynthesisOptions,
    budget: Budget,
) -> Result<NewtonRun> {
    let mut controls = start.clone();
    let mut lin = linearize(triple, &controls, tau)?;
    let mut residual = frobenius(&aligned_residual(target_step, &lin.unitary));
    let mut history = vec![residual];
    let mut rhs = first;
    let mut iterations = 0;

    while iterations < budget.iterations && residual > budget.stop {
        let system = NewtonSystem::new(&lin, options.conditioning_threshold)?;
        let b = rhs.evaluate(&lin.unitary);
        let mut accepted = None;
        'search: for &lambda in &DAMPING {
            let delta = system.solve(&b, lambda);
            let mut scale = 1.0;
            while scale >= 1.0 / 64.0 {
                let trial = shifted(&controls, &delta, scale);
                let u = sequence_unitary(triple, &trial, tau)?;
                let r = frobenius(&aligned_residual(target_step, &u));
                if r < residual {
                    accepted = Some((trial, r));
                    break 'search;
                }
                scale *= 0.5;
            }
        }
        let Some((trial, r)) = accepted else {
            break;
        };
        controls = trial;
        residual = r;
        history.push(r);
        iterations += 1;
        lin = linearize(triple, &controls, tau)?;
        rhs = NewtonRhs::Residual {
            target: *target_step,
        };
    }
    Ok(NewtonRun {
        controls,
        history,
        iterations,
    })
}

/// Path-following fallback: walks `exp(-i H epsilon s / n*)` from `s = 0` to
/// `s = 1`, solving each intermediate target loosely from the previous one
/// and shrinking the increment when a solve fails.
fn continuation(
    triple: &HamiltonianTriple,
    start: &ControlVector,
    target: &SynthesisTarget,
    n_star: usize,
    tau: f64,
    options: &SynthesisOptions,
) -> Result<Option<NewtonRun>> {
    const LOOSE: f64 = 1e-6;
    const INNER: usize = 8;
    const MIN_INCREMENT: f64 = 1e-3;
    let mut controls = start.clone();
    let mut iterations = 0;
    let (mut s, mut ds) = (0.0f64, 0.25f64);
    while s < 1.0 {
        let next = (s + ds).min(1.0);
        let angle = target.epsilon * next / n_star as f64;
        let step = step_unitary(&target.generator, angle)?;
        let rhs = NewtonRhs::Residual { target: step };
        let last = next >= 1.0;
        let budget = if last {
            Budget {
                iterations: options.max_iterations,
                stop: options.residual_tol,
            }
        } else {
            Budget {
                iterations: INNER,
                stop: LOOSE,
            }
        };
        let run = match refine(triple, &controls, &step, rhs, tau, options, budget) {
            Ok(run) => Some(run),
            Err(Error::IllConditioned { .. }) => None,
            Err(e) => return Err(e),
        };
        iterations += run.as_ref().map_or(0, |r| r.iterations);
        let reached = run.as_ref().is_some_and(|r| {
            let end = *r
                .history
                .last()
                .expect("history starts with the initial residual");
            if last {
                end <= options.residual_tol.max(1e-10)
            } else {
                end <= LOOSE
            }
        });
        match run {
            Some(run) if reached => {
                if last {
                    return Ok(Some(NewtonRun { iterations, ..run }));
                }
                controls = run.controls;
                s = next;
                ds = (ds * 1.5).min(0.5);
            }
            _ => {
                ds *= 0.5;
                if ds < MIN_INCREMENT {
                    return Ok(None);
                }
            }
        }
    }
    Ok(None)
}

/// Controls realizing `target` up to a global phase.
///
/// Starts from the identity vector, chooses `n*` with [`choose_repetitions`]
/// and refines by Newton iteration toward the `n*`-th root of the target.
/// When direct iteration stalls, the step is approached by continuation
/// along `exp(-i H epsilon s / n*)`. If that fails too and `n*` was not fixed
/// by the caller, `n*` is doubled up to `max_escalations` times. The result is accepted only on the
/// infidelity of `U(C)^{n*}` recomputed from scratch.
pub fn synthesize(
    triple: &HamiltonianTriple,
    tau: f64,
    identity: &IdentitySeed,
    target: &SynthesisTarget,
    cell_params_hash: &str,
    options: &SynthesisOptions,
) -> Result<ControlSchedule> {
    let full = target.unitary();
    let finish = |controls: ControlVector,
                  n_star: usize,
                  iterations: usize,
                  history: Vec<f64>|
     -> Result<ControlSchedule> {
        let realized = power(&sequence_unitary(triple, &controls, tau)?, n_star);
        let overlap = (full.adjoint() * realized).trace();
        Ok(ControlSchedule {
            target_name: target.name.clone(),
            n_star,
            base: controls,
            phase_theta: overlap.arg(),
            residual: phase_invariant_infidelity(&full, &realized).max(0.0),
            iterations,
            cell_params_hash: cell_params_hash.to_owned(),
            residual_history: history,
        })
    };

    if target.is_trivial() {
        let schedule = finish(identity.controls.clone(), 1, 0, Vec::new())?;
        if schedule.residual <= options.tol {
            return Ok(schedule);
        }
        return Err(Error::NoConvergence {
            best: schedule.residual,
        });
    }

    let first_n = choose_repetitions(target, options);
    let escalations = if options.n_star.is_some() {
        0
    } else {
        options.max_escalations
    };
    let mut best = f64::INFINITY;
    let mut last_err = None;
    for n_star in (0..=escalations).map(|e| first_n << e) {
        let step = target.step_unitary(n_star);
        let first = NewtonRhs::FirstOrder {
            generator: target.generator,
            epsilon: target.epsilon / n_star as f64,
        };
        let direct = refine(
            triple,
            &identity.controls,
            &step,
            first,
            tau,
            options,
            Budget {
                iterations: options.max_iterations,
                stop: options.residual_tol,
            },
        );
        match direct {
            Ok(run) => {
                let schedule = finish(run.controls, n_star, run.iterations, run.history)?;
                log::info!(
                    "{}: n* = {n_star}, {} iterations, infidelity {:.3e}",
                    target.name,
                    schedule.iterations,
                    schedule.residual
                );
                if schedule.residual <= options.tol {
                    return Ok(schedule);
                }
                best = best.min(schedule.residual);
            }
            Err(e @ Error::IllConditioned { .. }) => {
                log::warn!("{}: n* = {n_star} hit {e}", target.name);
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
        if let Some(run) = continuation(triple, &identity.controls, target, n_star, tau, options)? {
            let schedule = finish(run.controls, n_star, run.iterations, run.history)?;
            log::info!(
                "{}: n* = {n_star} by continuation, infidelity {:.3e}",
                target.name,
                schedule.residual
            );
            if schedule.residual <= options.tol {
                return Ok(schedule);
            }
            best = best.min(schedule.residual);
        }
    }
    match last_err {
        Some(e) if best.is_infinite() => Err(e),
        _ => Err(Error::NoConvergence { best }),
    }
}
