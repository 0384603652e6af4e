//! Small dense helpers shared by the propagator, solver and device code.

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Operators on one three-atom cell.
pub type CellMatrix = SMatrix<Complex64, 8, 8>;

pub const CELL_DIM: usize = 8;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry of `|m - m^dagger|`.
pub fn hermitian_asymmetry(m: &CellMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..CELL_DIM {
        for j in i..CELL_DIM {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Accepts `m` if it is Hermitian to `1e-12` relative to its largest entry.
pub fn check_hermitian(m: &CellMatrix) -> Result<()> {
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > 1e-12 * scale {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

pub fn hermitize(m: &CellMatrix) -> CellMatrix {
    (m + m.adjoint()) * real(0.5)
}

pub fn frobenius(m: &CellMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_dyn(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// `1 - |tr(target^dagger u)| / N`, insensitive to a global phase.
pub fn phase_invariant_infidelity(target: &CellMatrix, u: &CellMatrix) -> f64 {
    let overlap = (target.adjoint() * u).trace();
    1.0 - overlap.norm() / CELL_DIM as f64
}

pub fn phase_invariant_infidelity_dyn(target: &DMatrix<Complex64>, u: &DMatrix<Complex64>) -> f64 {
    let overlap = (target.adjoint() * u).trace();
    1.0 - overlap.norm() / target.nrows() as f64
}

/// `‖u^dagger u - I‖_F`.
pub fn unitarity_defect(u: &CellMatrix) -> f64 {
    frobenius(&(u.adjoint() * u - CellMatrix::identity()))
}

/// Integer power by repeated left multiplication, in a fixed order.
pub fn power(u: &CellMatrix, n: usize) -> CellMatrix {
    let mut acc = CellMatrix::identity();
    for _ in 0..n {
        acc = u * acc;
    }
    acc
}

pub fn to_dynamic(m: &CellMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(CELL_DIM, CELL_DIM, |i, j| m[(i, j)])
}

/// Converts a dynamically sized 8x8 matrix; `None` for any other shape.
pub fn to_cell(m: &DMatrix<Complex64>) -> Option<CellMatrix> {
    if m.shape() != (CELL_DIM, CELL_DIM) {
        return None;
    }
    Some(CellMatrix::from_fn(|i, j| m[(i, j)]))
}
