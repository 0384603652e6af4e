use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{real, CellMatrix, CELL_DIM};

/// Coefficients `a_0 .. a_8` of `det(lambda I - M) = sum_j a_j lambda^j`; `a_8 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPolyCoefficients(pub [Complex64; CELL_DIM + 1]);

impl CharPolyCoefficients {
    pub fn coefficient(&self, j: usize) -> Complex64 {
        self.0[j]
    }

    /// `sum_j |a_j|^2`.
    pub fn squared_norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Faddeev-LeVerrier recursion: `M_k = A M_{k-1} + a_{n-k+1} I`,
/// `a_{n-k} = -tr(A M_k) / k`.
pub fn char_poly(m: &CellMatrix) -> CharPolyCoefficients {
    let n = CELL_DIM;
    let mut a = [Complex64::new(0.0, 0.0); CELL_DIM + 1];
    a[n] = real(1.0);
    let mut aux = CellMatrix::zeros();
    for k in 1..=n {
        aux = m * aux + CellMatrix::identity() * a[n - k + 1];
        a[n - k] = -(m * aux).trace() / k as f64;
    }
    CharPolyCoefficients(a)
}
