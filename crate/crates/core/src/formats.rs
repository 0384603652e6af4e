//! On-disk formats: seed, schedule, pulse CSV, register state, program and
//! report files. Complex numbers are `[re, im]` pairs; floats are written
//! with round-trip precision.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cell_model::Perturbation;
use crate::control::{ControlSchedule, IdentitySeed};
use crate::device::{CellId, CellOp, CompiledProgram, Mode, RegisterState};
use crate::error::{Error, Result};
use crate::gates::GateSpec;
use crate::linalg::CellMatrix;
use crate::propagator::{ControlVector, SeedVector};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty-printed with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub type ComplexPair = [f64; 2];

pub fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

pub fn unpair(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// A solved identity block with the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFile {
    pub seed: [f64; 8],
    pub controls: Vec<f64>,
    pub phase_theta: f64,
    pub functional: f64,
    pub restart: usize,
    pub conditioning: f64,
    pub rng_seed: u64,
    pub cell_params_hash: String,
}

impl SeedFile {
    pub fn new(seed: &IdentitySeed, rng_seed: u64, cell_params_hash: &str) -> Self {
        SeedFile {
            seed: seed.seed.0,
            controls: seed.controls.values().to_vec(),
            phase_theta: seed.phase_theta,
            functional: seed.functional,
            restart: seed.restart,
            conditioning: seed.conditioning,
            rng_seed,
            cell_params_hash: cell_params_hash.to_owned(),
        }
    }

    /// Fails when the stored hash differs from `expected_hash`, or when the
    /// stored controls are not the expansion of the stored block.
    pub fn identity(&self, expected_hash: &str) -> Result<IdentitySeed> {
        if self.cell_params_hash != expected_hash {
            return Err(Error::HashMismatch {
                expected: expected_hash.to_owned(),
                found: self.cell_params_hash.clone(),
            });
        }
        let seed = SeedVector(self.seed);
        let controls = ControlVector::new(self.controls.clone())?;
        if controls != ControlVector::from_seed(&seed) {
            return Err(Error::Format(
                "seed controls are not the repeated block".into(),
            ));
        }
        Ok(IdentitySeed {
            seed,
            controls,
            phase_theta: self.phase_theta,
            functional: self.functional,
            restart: self.restart,
            conditioning: self.conditioning,
        })
    }
}

/// One row of the pulse export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseRow {
    pub k: usize,
    pub kind: String,
    #[serde(rename = "C_k")]
    pub c_k: f64,
    /// Offset from the identity vector.
    #[serde(rename = "delta_C_k")]
    pub delta_c_k: f64,
}

pub fn pulse_rows(schedule: &ControlSchedule, identity: &ControlVector) -> Vec<PulseRow> {
    schedule
        .base
        .values()
        .iter()
        .zip(identity.values())
        .enumerate()
        .map(|(i, (&value, &reference))| PulseRow {
            k: i + 1,
            kind: Perturbation::of_interval(i + 1).label().to_owned(),
            c_k: value,
            delta_c_k: value - reference,
        })
        .collect()
}

pub fn write_pulse_csv(path: &Path, rows: &[PulseRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_pulse_csv(path: &Path) -> Result<Vec<PulseRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    reader
        .deserialize()
        .map(|row| row.map_err(csv_error))
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("csv: {other:?}")),
    }
}

pub fn read_state(path: &Path) -> Result<RegisterState> {
    let pairs: Vec<ComplexPair> = read_json(path)?;
    RegisterState::new(pairs.into_iter().map(unpair).collect())
}

pub fn write_state(path: &Path, state: &RegisterState) -> Result<()> {
    let pairs: Vec<ComplexPair> = state.amplitudes().iter().copied().map(pair).collect();
    write_json(path, &pairs)
}

/// One op of a program file: either a catalog gate name or an explicit
/// 8x8 matrix given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramEntry {
    pub cell: CellId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexPair>>>,
    pub label: String,
}

impl ProgramEntry {
    pub fn from_op(op: &CellOp) -> Self {
        let matrix = match op.gate_name {
            Some(_) => None,
            None => Some(
                (0..8)
                    .map(|i| (0..8).map(|j| pair(op.unitary[(i, j)])).collect())
                    .collect(),
            ),
        };
        ProgramEntry {
            cell: op.cell,
            gate_name: op.gate_name.clone(),
            matrix,
            label: op.label.clone(),
        }
    }

    pub fn to_op(&self) -> Result<CellOp> {
        match (&self.gate_name, &self.matrix) {
            (Some(name), None) => {
                let spec: GateSpec = name.parse()?;
                Ok(CellOp::named(self.cell, &spec, self.label.clone()))
            }
            (None, Some(rows)) => {
                if rows.len() != 8 || rows.iter().any(|r| r.len() != 8) {
                    return Err(Error::Format(format!(
                        "op `{}` needs an 8x8 matrix",
                        self.label
                    )));
                }
                let m = CellMatrix::from_fn(|i, j| unpair(rows[i][j]));
                CellOp::from_matrix(self.cell, m, self.label.clone())
            }
            _ => Err(Error::Format(format!(
                "op `{}` needs exactly one of gate_name and matrix",
                self.label
            ))),
        }
    }
}

pub fn program_entries(program: &CompiledProgram) -> Vec<ProgramEntry> {
    program.ops.iter().map(ProgramEntry::from_op).collect()
}

/// A program file becomes a single unlabelled step.
pub fn program_from_entries(entries: &[ProgramEntry]) -> Result<CompiledProgram> {
    let ops = entries
        .iter()
        .map(ProgramEntry::to_op)
        .collect::<Result<Vec<_>>>()?;
    let mut program = CompiledProgram::default();
    program.push_step("program", ops);
    Ok(program)
}

/// Outcome of running a program against the Fourier oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub fidelity: f64,
    pub phase: f64,
    pub op_count: usize,
    pub mode: Mode,
}

/// File name for a schedule: the gate name with anything outside
/// `[A-Za-z0-9_-]` replaced by `_`.
pub fn schedule_file_name(gate_name: &str) -> String {
    let stem: String = gate_name
        .chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || ch == '-' {
                ch
            } else {
                '_'
            }
        })
        .collect();
    format!("{stem}.json")
}

/// Every `*.json` schedule in `dir`, sorted by file name.
pub fn read_schedule_dir(dir: &Path) -> Result<Vec<ControlSchedule>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths.iter().map(|p| read_json(p)).collect()
}
