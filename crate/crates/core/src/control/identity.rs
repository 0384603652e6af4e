//! Search for the eight-interval block whose eighth power is the identity.
//!
//! For a unitary product `W` the coefficients satisfy `|a_8| = |a_0| = 1`, so
//! `sum_j |a_j|^2 >= 2` with equality exactly when `det(lambda - W) =
//! lambda^8 + a_0`. Then the eigenvalues of `W` are the eight distinct eighth
//! roots of `-a_0` and `W^8 = -a_0 I`. The search drives `a_1 .. a_7` to zero
//! by Levenberg-Marquardt from many random starting points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::charpoly::{char_poly, CharPolyCoefficients};
use super::synthesis::control_conditioning;
use crate::cell_model::{CellParams, HamiltonianTriple};
use crate::error::{Error, Result};
use crate::propagator::{seed_product, ControlVector, SeedVector, SEED_LEN};

pub const DEFAULT_RNG_SEED: u64 = 20_040_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub rng_seed: u64,
    /// Box for the uniformly drawn starting strengths.
    pub bounds: (f64, f64),
    /// Accept when `functional <= 2 + tolerance`.
    pub tolerance: f64,
    /// Levenberg-Marquardt iterations per restart.
    pub max_iterations: usize,
    /// Weight of the optional `|a_0 + 1|^2` term that pins the phase to zero.
    pub phase_penalty: f64,
    #[serde(default)]
    pub selection: SeedSelection,
}

/// Rule for picking among restarts that reached the tolerance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSelection {
    /// Smallest functional.
    LowestFunctional,
    /// Best-conditioned Newton system at the expanded vector. Newton
    /// synthesis from a well-conditioned identity point converges far more
    /// reliably.
    #[default]
    BestConditioned,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 32,
            rng_seed: DEFAULT_RNG_SEED,
            bounds: (0.2, 2.0),
            tolerance: 1e-9,
            max_iterations: 300,
            phase_penalty: 0.0,
            selection: SeedSelection::default(),
        }
    }
}

/// A solved identity block and its expansion to a full period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySeed {
    pub seed: SeedVector,
    pub controls: ControlVector,
    /// `U(C0) = exp(i phase_theta) I`.
    pub phase_theta: f64,
    pub functional: f64,
    pub restart: usize,
    /// Condition ratio of the Newton system at `controls`.
    #[serde(default)]
    pub conditioning: f64,
}

impl IdentitySeed {
    /// `exp(i theta)`.
    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase_theta)
    }
}

/// `sum_{j=0}^{8} |a_j|^2` for the seed product.
pub fn identity_functional(triple: &HamiltonianTriple, seed: &SeedVector, tau: f64) -> Result<f64> {
    Ok(char_poly(&seed_product(triple, seed, tau)?).squared_norm())
}

fn seed_coefficients(
    triple: &HamiltonianTriple,
    c: &[f64],
    tau: f64,
) -> Result<CharPolyCoefficients> {
    let mut values = [0.0; SEED_LEN];
    values.copy_from_slice(c);
    Ok(char_poly(&seed_product(triple, &SeedVector(values), tau)?))
}

/// Real residuals whose squared sum is `functional - 2` (plus the optional
/// phase penalty).
fn residuals(
    triple: &HamiltonianTriple,
    c: &[f64],
    tau: f64,
    penalty: f64,
) -> Result<DVector<f64>> {
    let a = seed_coefficients(triple, c, tau)?;
    let extra = if penalty > 0.0 { 2 } else { 0 };
    let mut r = DVector::zeros(14 + extra);
    for j in 1..8 {
        r[j - 1] = a.coefficient(j).re;
        r[j + 6] = a.coefficient(j).im;
    }
    if penalty > 0.0 {
        let w = penalty.sqrt();
        r[14] = w * (a.coefficient(0).re + 1.0);
        r[15] = w * a.coefficient(0).im;
    }
    Ok(r)
}

fn jacobian(
    triple: &HamiltonianTriple,
    c: &[f64],
    tau: f64,
    penalty: f64,
    rows: usize,
) -> Result<DMatrix<f64>> {
    const H: f64 = 1e-6;
    let mut jac = DMatrix::zeros(rows, SEED_LEN);
    let mut probe = c.to_vec();
    for k in 0..SEED_LEN {
        probe[k] = c[k] + H;
        let plus = residuals(triple, &probe, tau, penalty)?;
        probe[k] = c[k] - H;
        let minus = residuals(triple, &probe, tau, penalty)?;
        probe[k] = c[k];
        jac.set_column(k, &((plus - minus) / (2.0 * H)));
    }
    Ok(jac)
}

/// Levenberg-Marquardt on the residuals; returns the final point and its
/// squared residual norm.
fn levenberg_marquardt(
    triple: &HamiltonianTriple,
    start: [f64; SEED_LEN],
    tau: f64,
    config: &SearchConfig,
) -> Result<([f64; SEED_LEN], f64)> {
    let mut c = start;
    let mut r = residuals(triple, &c, tau, config.phase_penalty)?;
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..config.max_iterations {
        if cost < 1e-28 {
            break;
        }
        let jac = jacobian(triple, &c, tau, config.phase_penalty, r.len())?;
        let normal = jac.transpose() * &jac;
        let gradient = jac.transpose() * &r;
        let scale = normal.diagonal().max().max(1e-300);
        let mut improved = false;
        while lambda < 1e12 {
            let damped = &normal + DMatrix::identity(SEED_LEN, SEED_LEN) * (lambda * scale);
            let Some(chol) = damped.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&gradient));
            let mut trial = c;
            for (t, s) in trial.iter_mut().zip(step.iter()) {
                *t += s;
            }
            let trial_r = residuals(triple, &trial, tau, config.phase_penalty)?;
            let trial_cost = trial_r.norm_squared();
            if trial_cost < cost {
                c = trial;
                r = trial_r;
                cost = trial_cost;
                lambda = (lambda / 5.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Ok((c, cost))
}

/// Multi-start search for the identity block.
///
/// Restarts are independent and run in parallel. Among the restarts that
/// reach the tolerance the one preferred by `config.selection` wins, ties
/// going to the lowest restart index, so the outcome does not depend on
/// scheduling.
pub fn solve_identity_seed(
    triple: &HamiltonianTriple,
    tau: f64,
    config: &SearchConfig,
) -> Result<IdentitySeed> {
    let (lo, hi) = config.bounds;
    let starts: Vec<[f64; SEED_LEN]> = (0..config.restarts)
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(restart as u64);
            std::array::from_fn(|_| rng.gen_range(lo..=hi))
        })
        .collect();

    let threshold = 2.0 + config.tolerance;
    let outcomes = starts
        .par_iter()
        .map(|start| {
            let (c, _) = levenberg_marquardt(triple, *start, tau, config)?;
            let seed = SeedVector(c);
            let functional = identity_functional(triple, &seed, tau)?;
            let conditioning = if functional <= threshold {
                control_conditioning(triple, &ControlVector::from_seed(&seed), tau)?
            } else {
                0.0
            };
            Ok((seed, functional, conditioning))
        })
        .collect::<Result<Vec<_>>>()?;

    let lowest = outcomes.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
    let mut best: Option<(usize, SeedVector, f64, f64)> = None;
    for (restart, (seed, functional, conditioning)) in outcomes.into_iter().enumerate() {
        log::debug!("identity restart {restart}: functional {functional:.3e}, conditioning {conditioning:.3e}");
        if functional.is_nan() || functional > threshold {
            continue;
        }
        let better = match (&best, config.selection) {
            (None, _) => true,
            (Some((_, _, f, _)), SeedSelection::LowestFunctional) => functional < *f,
            (Some((_, _, _, k)), SeedSelection::BestConditioned) => conditioning > *k,
        };
        if better {
            best = Some((restart, seed, functional, conditioning));
        }
    }
    let Some((restart, seed, functional, conditioning)) = best else {
        return Err(Error::NoConvergence { best: lowest });
    };
    let a0 = char_poly(&seed_product(triple, &seed, tau)?).coefficient(0);
    Ok(IdentitySeed {
        seed,
        controls: ControlVector::from_seed(&seed),
        phase_theta: (-a0).arg(),
        functional,
        restart,
        conditioning,
    })
}

/// Solves the identity block for `params` with the default search settings.
pub fn default_identity_seed(params: &CellParams) -> Result<IdentitySeed> {
    solve_identity_seed(&params.hamiltonians(), params.tau, &SearchConfig::default())
}
