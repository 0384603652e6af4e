use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::program::CompiledProgram;
use super::topology::{CellId, DeviceTopology};
use crate::cell_model::HamiltonianTriple;
use crate::control::ControlSchedule;
use crate::error::{Error, Result};
use crate::linalg::CellMatrix;

pub const REGISTER_DIM: usize = 512;

/// Nine-qubit state; qubit `i` is binary digit `i - 1` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    amplitudes: Vec<Complex64>,
}

impl RegisterState {
    /// Requires 512 amplitudes with unit norm to `1e-9`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != REGISTER_DIM {
            return Err(Error::Format(format!(
                "state needs {REGISTER_DIM} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let state = RegisterState { amplitudes };
        let norm = state.norm();
        if norm.is_nan() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Format(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn basis(x: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); REGISTER_DIM];
        amplitudes[x] = Complex64::new(1.0, 0.0);
        RegisterState { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &RegisterState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|`.
    pub fn fidelity(&self, other: &RegisterState) -> f64 {
        self.inner(other).norm()
    }

    /// `matrix |self>` for a 512x512 operator.
    pub fn transformed(&self, matrix: &DMatrix<Complex64>) -> RegisterState {
        RegisterState {
            amplitudes: (0..REGISTER_DIM)
                .map(|y| {
                    (0..REGISTER_DIM)
                        .map(|x| matrix[(y, x)] * self.amplitudes[x])
                        .sum()
                })
                .collect(),
        }
    }
}

/// `F[y, x] = exp(2 pi i x y / n) / sqrt n`.
pub fn dft_reference(n: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |y, x| {
        let k = ((x as u128 * y as u128) % n as u128) as f64;
        Complex64::from_polar(scale, 2.0 * PI * k / n as f64)
    })
}

/// Largest entry of `|e^{-i phi} a - b|` with `phi = arg tr(b^dagger a)`.
pub fn aligned_max_deviation(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        (overlap / overlap.norm()).conj()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x * phase - y).norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    Physical,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ideal => "ideal",
            Mode::Physical => "physical",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Mode::Ideal),
            "physical" => Ok(Mode::Physical),
            other => Err(Error::Format(format!("unknown mode `{other}`"))),
        }
    }
}

/// Realized pulse unitaries `U(C)^{n*}` for named gates, plus the identity
/// schedule run on idle cells. Every cell uses the same Hamiltonians.
#[derive(Debug, Clone)]
pub struct ScheduleBook {
    idle: (CellMatrix, f64),
    gates: BTreeMap<String, (CellMatrix, f64)>,
}

impl ScheduleBook {
    /// All schedules must carry `cell_params_hash`.
    pub fn new(
        triple: &HamiltonianTriple,
        tau: f64,
        cell_params_hash: &str,
        identity: &ControlSchedule,
        schedules: impl IntoIterator<Item = ControlSchedule>,
    ) -> Result<Self> {
        let realize = |s: &ControlSchedule| -> Result<(CellMatrix, f64)> {
            if s.cell_params_hash != cell_params_hash {
                return Err(Error::HashMismatch {
                    expected: cell_params_hash.to_owned(),
                    found: s.cell_params_hash.clone(),
                });
            }
            Ok((s.realized_unitary(triple, tau)?, s.phase_theta))
        };
        let idle = realize(identity)?;
        let mut gates = BTreeMap::new();
        for s in schedules {
            let realized = realize(&s)?;
            gates.insert(s.target_name, realized);
        }
        Ok(ScheduleBook { idle, gates })
    }

    pub fn contains(&self, gate: &str) -> bool {
        self.gates.contains_key(gate)
    }

    /// Fails on the first op without a schedule.
    pub fn check(&self, program: &CompiledProgram) -> Result<()> {
        for op in &program.ops {
            match &op.gate_name {
                Some(name) if self.contains(name) => {}
                other => {
                    return Err(Error::MissingSchedule {
                        gate: other.clone().unwrap_or_else(|| op.label.clone()),
                        cell: op.cell.to_string(),
                    })
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Backend<'a> {
    /// Exact catalog unitaries.
    Ideal,
    /// Pulse unitaries on the acting cell and the identity pulse on every
    /// cell that shares no atom with it.
    Physical(&'a ScheduleBook),
}

impl Backend<'_> {
    pub fn mode(&self) -> Mode {
        match self {
            Backend::Ideal => Mode::Ideal,
            Backend::Physical(_) => Mode::Physical,
        }
    }
}

fn apply_cell(amplitudes: &mut [Complex64], atoms: [usize; 3], m: &CellMatrix) {
    let bits = atoms.map(|a| 1usize << (a - 1));
    let mask = bits.iter().fold(0, |acc, b| acc | b);
    let offsets: [usize; 8] = std::array::from_fn(|l| {
        (0..3).fold(
            0,
            |acc, i| if l >> i & 1 == 1 { acc | bits[i] } else { acc },
        )
    });
    let mut local = [Complex64::new(0.0, 0.0); 8];
    for base in (0..amplitudes.len()).filter(|x| x & mask == 0) {
        for (l, off) in offsets.iter().enumerate() {
            local[l] = amplitudes[base | off];
        }
        for (row, off) in offsets.iter().enumerate() {
            amplitudes[base | off] = (0..8).map(|col| m[(row, col)] * local[col]).sum();
        }
    }
}

struct Resolved<'p> {
    acting: &'p CellMatrix,
    phase: f64,
    idle: Vec<CellId>,
}

fn resolve<'p>(
    topology: &DeviceTopology,
    program: &'p CompiledProgram,
    backend: Backend<'p>,
) -> Result<Vec<Resolved<'p>>> {
    match backend {
        Backend::Ideal => Ok(program
            .ops
            .iter()
            .map(|op| Resolved {
                acting: &op.unitary,
                phase: 0.0,
                idle: Vec::new(),
            })
            .collect()),
        Backend::Physical(book) => {
            book.check(program)?;
            Ok(program
                .ops
                .iter()
                .map(|op| {
                    let name = op.gate_name.as_deref().expect("checked");
                    let (u, phase) = &book.gates[name];
                    let idle: Vec<CellId> = CellId::ALL
                        .into_iter()
                        .filter(|&c| !topology.overlaps(c, op.cell))
                        .collect();
                    Resolved {
                        acting: u,
                        phase: phase + book.idle.1 * idle.len() as f64,
                        idle,
                    }
                })
                .collect())
        }
    }
}

fn run(
    topology: &DeviceTopology,
    program: &CompiledProgram,
    resolved: &[Resolved<'_>],
    book: Option<&ScheduleBook>,
    amplitudes: &mut [Complex64],
) {
    for (op, r) in program.ops.iter().zip(resolved) {
        apply_cell(amplitudes, topology.atoms(op.cell), r.acting);
        if let Some(book) = book {
            for &cell in &r.idle {
                apply_cell(amplitudes, topology.atoms(cell), &book.idle.0);
            }
        }
    }
}

fn wrap(phase: f64) -> f64 {
    let w = phase.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Runs `program` on `state`. Returns the final state and the global phase
/// accumulated by the pulse schedules (zero in ideal mode), in `(-pi, pi]`.
pub fn apply_program(
    topology: &DeviceTopology,
    state: &RegisterState,
    program: &CompiledProgram,
    backend: Backend<'_>,
) -> Result<(RegisterState, f64)> {
    let resolved = resolve(topology, program, backend)?;
    let book = match backend {
        Backend::Physical(book) => Some(book),
        Backend::Ideal => None,
    };
    let mut amplitudes = state.amplitudes.clone();
    run(topology, program, &resolved, book, &mut amplitudes);
    let phase = wrap(resolved.iter().map(|r| r.phase).sum());
    Ok((RegisterState { amplitudes }, phase))
}

/// The 512x512 matrix of `program`, built column by column, and its tracked
/// global phase.
pub fn program_unitary(
    topology: &DeviceTopology,
    program: &CompiledProgram,
    backend: Backend<'_>,
) -> Result<(DMatrix<Complex64>, f64)> {
    let resolved = resolve(topology, program, backend)?;
    let book = match backend {
        Backend::Physical(book) => Some(book),
        Backend::Ideal => None,
    };
    let columns: Vec<Vec<Complex64>> = (0..REGISTER_DIM)
        .into_par_iter()
        .map(|x| {
            let mut col = RegisterState::basis(x).amplitudes;
            run(topology, program, &resolved, book, &mut col);
            col
        })
        .collect();
    let matrix = DMatrix::from_fn(REGISTER_DIM, REGISTER_DIM, |y, x| columns[x][y]);
    let phase = wrap(resolved.iter().map(|r| r.phase).sum());
    Ok((matrix, phase))
}
