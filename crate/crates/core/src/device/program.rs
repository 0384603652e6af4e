use std::collections::BTreeSet;
use std::ops::Range;

use super::routing::routed_gate;
use super::topology::{CellId, DeviceTopology};
use crate::error::{Error, Result};
use crate::gates::{Angle, GateKind, GateSpec};
use crate::linalg::{to_cell, unitarity_defect, CellMatrix};

/// One 8x8 unitary on the three atoms of a cell, lowest atom least
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOp {
    pub cell: CellId,
    /// Catalog name when the op came from a named gate; physical simulation
    /// looks schedules up by this name.
    pub gate_name: Option<String>,
    pub unitary: CellMatrix,
    pub label: String,
}

impl CellOp {
    pub fn named(cell: CellId, spec: &GateSpec, label: String) -> Self {
        CellOp {
            cell,
            gate_name: Some(spec.name()),
            unitary: to_cell(&spec.cell_unitary()).expect("cell gates are 8x8"),
            label,
        }
    }

    /// An op given only by its matrix; rejected unless unitary to `1e-10`.
    pub fn from_matrix(cell: CellId, unitary: CellMatrix, label: String) -> Result<Self> {
        let defect = unitarity_defect(&unitary);
        if defect.is_nan() || defect > 1e-10 {
            return Err(Error::Format(format!(
                "op `{label}` is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(CellOp {
            cell,
            gate_name: None,
            unitary,
            label,
        })
    }
}

/// A labelled run of consecutive ops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub label: String,
    pub ops: Range<usize>,
}

/// Ops in execution order, grouped into algorithm steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompiledProgram {
    pub ops: Vec<CellOp>,
    pub steps: Vec<Step>,
}

impl CompiledProgram {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push_step(&mut self, label: impl Into<String>, ops: Vec<CellOp>) {
        let start = self.ops.len();
        self.ops.extend(ops);
        self.steps.push(Step {
            label: label.into(),
            ops: start..self.ops.len(),
        });
    }

    pub fn append(&mut self, other: CompiledProgram) {
        let offset = self.ops.len();
        self.ops.extend(other.ops);
        self.steps.extend(other.steps.into_iter().map(|s| Step {
            label: s.label,
            ops: s.ops.start + offset..s.ops.end + offset,
        }));
    }

    /// Distinct catalog names used by the program.
    pub fn gate_names(&self) -> BTreeSet<String> {
        self.ops
            .iter()
            .filter_map(|op| op.gate_name.clone())
            .collect()
    }
}

const REVERSAL_PAIRS: [(usize, usize); 4] = [(1, 9), (2, 8), (3, 7), (4, 6)];

/// Reverses qubit order: the state of qubit `i` moves to qubit `10 - i`.
pub fn bit_reversal_program(topology: &DeviceTopology) -> CompiledProgram {
    let mut ops = Vec::new();
    for (a, b) in REVERSAL_PAIRS {
        let routed = routed_gate(
            topology,
            GateKind::Swap,
            a,
            b,
            &format!("reverse {a}<->{b}"),
        )
        .expect("reversal pairs are valid qubits");
        ops.extend(routed);
    }
    let mut program = CompiledProgram::default();
    program.push_step("bit reversal", ops);
    program
}

/// Bit reversal followed by nine steps; step `i` applies the conditional
/// phases `B(pi / 2^(i-j))` on qubits `(i, j)` for `j < i` and then the split
/// gate on qubit `i`.
pub fn qft_program(topology: &DeviceTopology) -> CompiledProgram {
    let mut program = bit_reversal_program(topology);
    for i in 1..=topology.n_qubits {
        let mut ops = Vec::new();
        for j in 1..i {
            let angle = Angle::pi_over(1 << (i - j));
            let label = format!("B({angle}) on {i},{j}");
            ops.extend(
                routed_gate(topology, GateKind::Phase(angle), i, j, &label)
                    .expect("distinct qubits"),
            );
        }
        let cell = topology.home_cell(i);
        let position = topology
            .position(cell, i)
            .expect("home cell holds the atom");
        let spec = GateSpec::new(GateKind::Split, vec![position]).expect("valid position");
        ops.push(CellOp::named(cell, &spec, format!("A on {i}")));
        program.push_step(format!("step {i}"), ops);
    }
    program
}
