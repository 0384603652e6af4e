//! Piecewise-constant evolution over the control intervals.
//!
//! Ordering convention: interval `k = 1` acts first on the state, so it is
//! the rightmost factor of every product. Derivatives use the same order.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cell_model::{HamiltonianTriple, Perturbation, INTERVALS};
use crate::error::{Error, Result};
use crate::linalg::{c, check_hermitian, hermitize, CellMatrix, CELL_DIM};

/// Number of distinct strengths in the repeated seed block.
pub const SEED_LEN: usize = 8;

/// Strengths `C_1 .. C_64` for one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ControlVector(Vec<f64>);

impl ControlVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != INTERVALS {
            return Err(Error::Format(format!(
                "control vector needs {INTERVALS} entries, got {}",
                values.len()
            )));
        }
        Ok(ControlVector(values))
    }

    pub fn zeros() -> Self {
        ControlVector(vec![0.0; INTERVALS])
    }

    /// Repeats an 8-entry seed eight times.
    pub fn from_seed(seed: &SeedVector) -> Self {
        ControlVector(seed.0.iter().copied().cycle().take(INTERVALS).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// Perturbation driving the 1-based interval `k`.
    pub fn kind(k: usize) -> Perturbation {
        Perturbation::of_interval(k)
    }
}

impl TryFrom<Vec<f64>> for ControlVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ControlVector::new(v)
    }
}

impl From<ControlVector> for Vec<f64> {
    fn from(c: ControlVector) -> Self {
        c.0
    }
}

/// The eight strengths whose eightfold repetition is the identity vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedVector(pub [f64; SEED_LEN]);

impl SeedVector {
    pub fn values(&self) -> &[f64; SEED_LEN] {
        &self.0
    }
}

/// Eigendecomposition of a Hermitian generator, reused for the exponential
/// and its directional derivative.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: [f64; CELL_DIM],
    pub vectors: CellMatrix,
}

impl Spectral {
    pub fn new(h: &CellMatrix) -> Result<Self> {
        check_hermitian(h)?;
        let eig = SymmetricEigen::new(hermitize(h));
        let mut values = [0.0; CELL_DIM];
        values.copy_from_slice(eig.eigenvalues.as_slice());
        Ok(Spectral {
            values,
            vectors: eig.eigenvectors,
        })
    }

    fn phases(&self, t: f64) -> [Complex64; CELL_DIM] {
        self.values.map(|w| Complex64::from_polar(1.0, -w * t))
    }

    /// `exp(-i h t)`.
    pub fn exp(&self, t: f64) -> CellMatrix {
        let phases = self.phases(t);
        let mut scaled = self.vectors;
        for (j, p) in phases.iter().enumerate() {
            for i in 0..CELL_DIM {
                scaled[(i, j)] *= p;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Derivative of `exp(-i (h + s E) t)` with respect to `s` at `s = 0`.
    ///
    /// In the eigenbasis this is the Hadamard product of `V^dagger E V` with
    /// the divided differences of `w -> exp(-i w t)`, written through a sinc
    /// so nearly degenerate pairs stay accurate.
    pub fn exp_derivative(&self, t: f64, direction: &CellMatrix) -> CellMatrix {
        let rotated = self.vectors.adjoint() * direction * self.vectors;
        let kernel = CellMatrix::from_fn(|a, b| {
            let (wa, wb) = (self.values[a], self.values[b]);
            let half = 0.5 * t * (wa - wb);
            let sinc = if half.abs() < 1e-8 {
                1.0 - half * half / 6.0
            } else {
                half.sin() / half
            };
            Complex64::from_polar(1.0, -0.5 * t * (wa + wb)) * c(0.0, -t * sinc)
        });
        self.vectors * rotated.component_mul(&kernel) * self.vectors.adjoint()
    }
}

/// `exp(-i h t)` for Hermitian `h`.
pub fn step_unitary(h: &CellMatrix, t: f64) -> Result<CellMatrix> {
    Ok(Spectral::new(h)?.exp(t))
}

/// Ordered product over consecutive intervals starting at the 1-based index
/// `first_interval`; the first listed strength acts first.
pub fn interval_product(
    triple: &HamiltonianTriple,
    strengths: &[f64],
    first_interval: usize,
    tau: f64,
) -> Result<CellMatrix> {
    let mut acc = CellMatrix::identity();
    for (offset, &strength) in strengths.iter().enumerate() {
        let h = triple.interval_hamiltonian(first_interval + offset, strength);
        acc = step_unitary(&h, tau)? * acc;
    }
    Ok(acc)
}

/// `U(C)`, the evolution over all 64 intervals.
pub fn sequence_unitary(
    triple: &HamiltonianTriple,
    controls: &ControlVector,
    tau: f64,
) -> Result<CellMatrix> {
    interval_product(triple, controls.values(), 1, tau)
}

/// The eight-interval product whose eighth power should be the identity.
pub fn seed_product(triple: &HamiltonianTriple, seed: &SeedVector, tau: f64) -> Result<CellMatrix> {
    interval_product(triple, seed.values(), 1, tau)
}

/// `U(C)` together with `dU/dC_k` for every interval.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub unitary: CellMatrix,
    pub derivatives: Vec<CellMatrix>,
}

/// Exact derivatives by the product rule: for interval `k`,
/// `dU/dC_k = L_k * D_k * R_k` where `R_k` is the product of the earlier
/// factors, `L_k` of the later ones, and `D_k` the directional derivative of
/// the `k`-th exponential along `P_k`.
pub fn linearize(
    triple: &HamiltonianTriple,
    controls: &ControlVector,
    tau: f64,
) -> Result<Linearization> {
    let spectra = controls
        .values()
        .iter()
        .enumerate()
        .map(|(i, &s)| Spectral::new(&triple.interval_hamiltonian(i + 1, s)))
        .collect::<Result<Vec<_>>>()?;
    let factors: Vec<CellMatrix> = spectra.iter().map(|s| s.exp(tau)).collect();

    // before[k] = F_{k-1} ... F_0
    let mut before = Vec::with_capacity(INTERVALS + 1);
    before.push(CellMatrix::identity());
    for f in &factors {
        let last = *before.last().unwrap();
        before.push(f * last);
    }
    // after[k] = F_{n-1} ... F_{k+1}
    let mut after = vec![CellMatrix::identity(); INTERVALS];
    let mut acc = CellMatrix::identity();
    for k in (0..INTERVALS).rev() {
        after[k] = acc;
        acc *= factors[k];
    }

    let derivatives = (0..INTERVALS)
        .map(|k| {
            let direction = triple.perturbation(Perturbation::of_interval(k + 1));
            after[k] * spectra[k].exp_derivative(tau, direction) * before[k]
        })
        .collect();
    Ok(Linearization {
        unitary: before[INTERVALS],
        derivatives,
    })
}

/// `dU/dC_k` for k = 1..64.
pub fn unitary_derivatives(
    triple: &HamiltonianTriple,
    controls: &ControlVector,
    tau: f64,
) -> Result<Vec<CellMatrix>> {
    Ok(linearize(triple, controls, tau)?.derivatives)
}
