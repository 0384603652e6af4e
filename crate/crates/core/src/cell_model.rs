//! The three-atom unit cell: physical parameters, the principal Hamiltonian
//! and the two control perturbations, all in the computational basis
//! `|x2 x1 x0>` where atom `i` (1-based) holds binary digit `i - 1`.
//!
//! Units: energies in `E_u`, times in `hbar / E_u`, `hbar = 1`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{real, CellMatrix, CELL_DIM};

/// Number of piecewise-constant control intervals in one period.
pub const INTERVALS: usize = 64;

/// Physical description of one cell.
///
/// Control strengths multiply `stark_shifts_unit` and `em_couplings_unit`, so
/// a strength of 1 reproduces the listed shifts and couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CellParamsFile", into = "CellParamsFile")]
pub struct CellParams {
    /// `[D12, D23, D13]`.
    pub dipole_couplings: [f64; 3],
    /// `[A1, A2, A3]`.
    pub detunings: [f64; 3],
    /// `[Delta1, Delta2, Delta3]` at unit static-field strength.
    pub stark_shifts_unit: [f64; 3],
    /// `[V1, V2, V3]` at unit microwave-field strength.
    pub em_couplings_unit: [f64; 3],
    /// Length of one control interval; the period is `64 * tau`.
    pub tau: f64,
}

/// On-disk layout of [`CellParams`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CellParamsFile {
    #[serde(rename = "D")]
    d: [f64; 3],
    #[serde(rename = "A")]
    a: [f64; 3],
    #[serde(rename = "Delta")]
    delta: [f64; 3],
    #[serde(rename = "V")]
    v: [f64; 3],
    #[serde(rename = "T")]
    t: f64,
}

impl TryFrom<CellParamsFile> for CellParams {
    type Error = Error;

    fn try_from(file: CellParamsFile) -> Result<Self> {
        CellParams::new(
            file.d,
            file.a,
            file.delta,
            file.v,
            file.t / INTERVALS as f64,
        )
    }
}

impl From<CellParams> for CellParamsFile {
    fn from(p: CellParams) -> Self {
        CellParamsFile {
            d: p.dipole_couplings,
            a: p.detunings,
            delta: p.stark_shifts_unit,
            v: p.em_couplings_unit,
            t: p.period(),
        }
    }
}

impl Default for CellParams {
    /// D = (1.1, 0.946, 0.86), Delta = (0.1, 0.11, 0.312), V = (0.3, 0.33, 0.24),
    /// all detunings zero and T = 250.
    fn default() -> Self {
        CellParams {
            dipole_couplings: [1.1, 0.946, 0.86],
            detunings: [0.0; 3],
            stark_shifts_unit: [0.1, 0.11, 0.312],
            em_couplings_unit: [0.3, 0.33, 0.24],
            tau: 250.0 / INTERVALS as f64,
        }
    }
}

impl CellParams {
    pub fn new(
        dipole_couplings: [f64; 3],
        detunings: [f64; 3],
        stark_shifts_unit: [f64; 3],
        em_couplings_unit: [f64; 3],
        tau: f64,
    ) -> Result<Self> {
        let p = CellParams {
            dipole_couplings,
            detunings,
            stark_shifts_unit,
            em_couplings_unit,
            tau,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .dipole_couplings
            .iter()
            .chain(&self.detunings)
            .chain(&self.stark_shifts_unit)
            .chain(&self.em_couplings_unit);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite coupling".into()));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.tau * INTERVALS as f64
    }

    /// Dipole-dipole coupling between atoms `i` and `j` (1-based, symmetric).
    pub fn dipole(&self, i: usize, j: usize) -> f64 {
        let [d12, d23, d13] = self.dipole_couplings;
        match (i.min(j), i.max(j)) {
            (1, 2) => d12,
            (2, 3) => d23,
            (1, 3) => d13,
            _ => panic!("no dipole coupling between atoms {i} and {j}"),
        }
    }

    /// Summed detuning of the excited atoms in basis state `x`, i.e.
    /// `A_i`, `A_ij = A_i + A_j` or `A_sigma`.
    pub fn detuning_of(&self, x: usize) -> f64 {
        excited_sum(&self.detunings, x)
    }

    /// Stark shift of basis state `x` at unit strength (`Delta_i`, `Delta_ij`, `Delta_sigma`).
    pub fn stark_shift_of(&self, x: usize) -> f64 {
        excited_sum(&self.stark_shifts_unit, x)
    }

    /// Hex SHA-256 of the canonical JSON form; ties seeds and schedules to a cell.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("cell params always serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Builds the Hamiltonian triple for these parameters.
    pub fn hamiltonians(&self) -> HamiltonianTriple {
        HamiltonianTriple {
            h0: build_h0(self),
            p_s: build_p_s(self),
            p_omega: build_p_omega(self),
        }
    }
}

fn excited_sum(per_atom: &[f64; 3], x: usize) -> f64 {
    (0..3)
        .filter(|&b| x >> b & 1 == 1)
        .map(|b| per_atom[b])
        .sum()
}

/// Which perturbation drives an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Perturbation {
    /// Static (Stark) field; odd intervals.
    #[serde(rename = "S")]
    Stark,
    /// Microwave field; even intervals.
    #[serde(rename = "omega")]
    Microwave,
}

impl Perturbation {
    /// Kind of the 1-based interval `k`.
    pub fn of_interval(k: usize) -> Self {
        if k % 2 == 1 {
            Perturbation::Stark
        } else {
            Perturbation::Microwave
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Perturbation::Stark => "S",
            Perturbation::Microwave => "omega",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTriple {
    pub h0: CellMatrix,
    pub p_s: CellMatrix,
    pub p_omega: CellMatrix,
}

impl HamiltonianTriple {
    pub fn perturbation(&self, kind: Perturbation) -> &CellMatrix {
        match kind {
            Perturbation::Stark => &self.p_s,
            Perturbation::Microwave => &self.p_omega,
        }
    }

    /// `H0 + c P_k` for the 1-based interval `k`.
    pub fn interval_hamiltonian(&self, k: usize, strength: f64) -> CellMatrix {
        self.h0 + self.perturbation(Perturbation::of_interval(k)) * real(strength)
    }
}

/// Principal Hamiltonian: detunings on the diagonal, dipole-dipole exchange
/// between states that differ by moving one excitation.
pub fn build_h0(params: &CellParams) -> CellMatrix {
    let mut h = CellMatrix::zeros();
    for x in 0..CELL_DIM {
        h[(x, x)] = real(params.detuning_of(x));
        for from in 0..3 {
            for to in 0..3 {
                if from == to || x >> from & 1 == 0 || x >> to & 1 == 1 {
                    continue;
                }
                let y = x ^ (1 << from) ^ (1 << to);
                h[(y, x)] = real(params.dipole(from + 1, to + 1));
            }
        }
    }
    h
}

/// Diagonal Stark perturbation at unit field strength.
pub fn build_p_s(params: &CellParams) -> CellMatrix {
    let mut p = CellMatrix::zeros();
    for x in 0..CELL_DIM {
        p[(x, x)] = real(params.stark_shift_of(x));
    }
    p
}

/// Microwave perturbation: `V_i` couples states differing only in atom `i`.
pub fn build_p_omega(params: &CellParams) -> CellMatrix {
    let mut p = CellMatrix::zeros();
    for x in 0..CELL_DIM {
        for (bit, &v) in params.em_couplings_unit.iter().enumerate() {
            p[(x, x ^ (1 << bit))] = real(v);
        }
    }
    p
}

/// Basis index of `|x2 x1 x0>`.
pub fn basis_index(x2: u8, x1: u8, x0: u8) -> usize {
    assert!(x2 <= 1 && x1 <= 1 && x0 <= 1, "basis digits must be bits");
    (x0 as usize) | (x1 as usize) << 1 | (x2 as usize) << 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_asymmetry;
    use proptest::prelude::*;

    fn params_with(d: [f64; 3], a: [f64; 3], delta: [f64; 3], v: [f64; 3]) -> CellParams {
        CellParams::new(d, a, delta, v, 1.0).unwrap()
    }

    #[test]
    fn h0_matches_literal_layout() {
        let p = params_with([1.1, 0.946, 0.86], [0.2, 0.3, 0.5], [0.0; 3], [0.0; 3]);
        let h = build_h0(&p);
        let (d12, d23, d13) = (1.1, 0.946, 0.86);
        let (a1, a2, a3) = (0.2, 0.3, 0.5);
        #[rustfmt::skip]
        let literal = [
            [0.0, 0.0, 0.0, 0.0,     0.0, 0.0,     0.0,     0.0],
            [0.0, a1,  d12, 0.0,     d13, 0.0,     0.0,     0.0],
            [0.0, d12, a2,  0.0,     d23, 0.0,     0.0,     0.0],
            [0.0, 0.0, 0.0, a1 + a2, 0.0, d23,     d13,     0.0],
            [0.0, d13, d23, 0.0,     a3,  0.0,     0.0,     0.0],
            [0.0, 0.0, 0.0, d23,     0.0, a1 + a3, d12,     0.0],
            [0.0, 0.0, 0.0, d13,     0.0, d12,     a2 + a3, 0.0],
            [0.0, 0.0, 0.0, 0.0,     0.0, 0.0,     0.0,     a1 + a2 + a3],
        ];
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(h[(i, j)], real(literal[i][j]), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn h0_default_entries() {
        let h = build_h0(&CellParams::default());
        assert_eq!(h[(1, 2)].re, 1.1);
        assert_eq!(h[(1, 4)].re, 0.86);
        assert_eq!(h[(2, 4)].re, 0.946);
        assert!((0..8).all(|i| h[(i, i)].re == 0.0));
        assert!((0..8).all(|i| h[(0, i)].re == 0.0 && h[(i, 0)].re == 0.0));
    }

    #[test]
    fn decoupled_h0_is_diagonal_detuning() {
        let h = build_h0(&params_with([0.0; 3], [0.5, 0.25, 2.0], [0.0; 3], [0.0; 3]));
        let expected = [0.0, 0.5, 0.25, 0.75, 2.0, 2.5, 2.25, 2.75];
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { expected[i] } else { 0.0 };
                assert_eq!(h[(i, j)].re, want);
            }
        }
    }

    #[test]
    fn p_s_default_diagonal() {
        let p = build_p_s(&CellParams::default());
        let expected = [0.0, 0.1, 0.11, 0.21, 0.312, 0.412, 0.422, 0.522];
        for (i, e) in expected.iter().enumerate() {
            assert!((p[(i, i)].re - e).abs() < 1e-15, "diag {i}");
        }
        assert!((p.trace().re - 4.0 * (0.1 + 0.11 + 0.312)).abs() < 1e-14);
    }

    #[test]
    fn p_omega_default_entries() {
        let p = build_p_omega(&CellParams::default());
        assert_eq!(p[(0, 1)].re, 0.3);
        assert_eq!(p[(0, 2)].re, 0.33);
        assert_eq!(p[(0, 4)].re, 0.24);
        assert_eq!(p[(3, 7)].re, 0.24);
        assert_eq!(p.trace().re, 0.0);
        for x in 0..8 {
            let row: Vec<f64> = (0..8).map(|y| p[(x, y)].re).filter(|v| *v != 0.0).collect();
            assert_eq!(row.len(), 3);
            let mut sorted = row.clone();
            sorted.sort_by(f64::total_cmp);
            assert_eq!(sorted, vec![0.24, 0.3, 0.33]);
        }
    }

    #[test]
    fn zero_fields_give_zero_perturbations() {
        let p = params_with([1.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
        assert_eq!(build_p_s(&p), CellMatrix::zeros());
        assert_eq!(build_p_omega(&p), CellMatrix::zeros());
    }

    #[test]
    fn basis_indexing() {
        assert_eq!(basis_index(0, 0, 0), 0);
        assert_eq!(basis_index(1, 1, 1), 7);
        assert_eq!(basis_index(0, 1, 1), 3);
        assert_eq!(basis_index(1, 0, 0), 4);
    }

    #[test]
    fn interval_parity() {
        assert_eq!(Perturbation::of_interval(1), Perturbation::Stark);
        assert_eq!(Perturbation::of_interval(2), Perturbation::Microwave);
        assert_eq!(Perturbation::of_interval(64), Perturbation::Microwave);
    }

    #[test]
    fn rejects_bad_tau() {
        assert!(CellParams::new([1.0; 3], [0.0; 3], [0.0; 3], [0.0; 3], 0.0).is_err());
        assert!(CellParams::new([f64::NAN, 1.0, 1.0], [0.0; 3], [0.0; 3], [0.0; 3], 1.0).is_err());
    }

    #[test]
    fn json_layout_and_fingerprint() {
        let text = r#"{"D":[1.1,0.946,0.86],"A":[0,0,0],"Delta":[0.1,0.11,0.312],"V":[0.3,0.33,0.24],"T":250}"#;
        let p: CellParams = serde_json::from_str(text).unwrap();
        assert_eq!(p, CellParams::default());
        assert_eq!(p.fingerprint(), CellParams::default().fingerprint());
        let mut other = p.clone();
        other.dipole_couplings[0] = 1.2;
        assert_ne!(p.fingerprint(), other.fingerprint());
        let bad = r#"{"D":[1,1,1],"A":[0,0,0],"Delta":[0,0,0],"V":[0,0,0],"T":-1}"#;
        assert!(serde_json::from_str::<CellParams>(bad).is_err());
    }

    proptest! {
        #[test]
        fn matrices_are_exactly_hermitian(
            d in prop::array::uniform3(-3.0f64..3.0),
            a in prop::array::uniform3(-3.0f64..3.0),
            delta in prop::array::uniform3(-3.0f64..3.0),
            v in prop::array::uniform3(-3.0f64..3.0),
        ) {
            let t = params_with(d, a, delta, v).hamiltonians();
            prop_assert_eq!(hermitian_asymmetry(&t.h0), 0.0);
            prop_assert_eq!(hermitian_asymmetry(&t.p_s), 0.0);
            prop_assert_eq!(hermitian_asymmetry(&t.p_omega), 0.0);
        }

        #[test]
        fn stark_shifts_are_additive(delta in prop::array::uniform3(-3.0f64..3.0)) {
            let p = build_p_s(&params_with([0.0; 3], [0.0; 3], delta, [0.0; 3]));
            let d = |x: usize| p[(x, x)].re;
            prop_assert_eq!(d(0), 0.0);
            prop_assert_eq!(d(3), d(1) + d(2));
            prop_assert_eq!(d(5), d(1) + d(4));
            prop_assert_eq!(d(6), d(2) + d(4));
            prop_assert!((d(7) - (delta[0] + delta[1] + delta[2])).abs() < 1e-12);
            for x in 0..8 { for y in 0..8 { if x != y { prop_assert_eq!(p[(x, y)].re, 0.0); } } }
        }

        #[test]
        fn microwave_only_flips_single_atoms(v in prop::array::uniform3(0.01f64..3.0)) {
            let p = build_p_omega(&params_with([0.0; 3], [0.0; 3], [0.0; 3], v));
            for x in 0..8usize {
                for y in 0..8usize {
                    let single_flip = (x ^ y).count_ones() == 1;
                    prop_assert_eq!(p[(x, y)].re != 0.0, single_flip);
                }
            }
        }
    }
}
