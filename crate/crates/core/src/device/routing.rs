use super::program::CellOp;
use super::topology::{CellId, DeviceTopology};
use crate::error::{Error, Result};
use crate::gates::{GateKind, GateSpec};

/// Swaps the qubit states held by atoms `a` and `b` of `cell`.
pub fn exchange_op(topology: &DeviceTopology, cell: CellId, a: usize, b: usize) -> Result<CellOp> {
    let pa = topology.position(cell, a)?;
    let pb = topology.position(cell, b)?;
    let spec = GateSpec::new(GateKind::Swap, vec![pa, pb])?;
    Ok(CellOp::named(
        cell,
        &spec,
        format!("exchange {a}<->{b} in {cell}"),
    ))
}

/// Exchanges that bring two qubits into one cell, and their undoing.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub prologue: Vec<CellOp>,
    pub host: CellId,
    /// Positions in `host` now holding qubits `i` and `j`, in that order.
    pub host_positions: [usize; 2],
    pub epilogue: Vec<CellOp>,
}

/// Qubits of one child cell meet there; otherwise each is exchanged onto
/// its cell's joint atom and they meet in the parent.
pub fn route_pair(topology: &DeviceTopology, i: usize, j: usize) -> Result<Route> {
    let n = topology.n_qubits;
    if i == j || !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::BadPositions {
            positions: vec![i, j],
            n,
            arity: 2,
        });
    }
    let (ci, cj) = (topology.home_cell(i), topology.home_cell(j));
    if ci == cj {
        return Ok(Route {
            prologue: Vec::new(),
            host: ci,
            host_positions: [topology.position(ci, i)?, topology.position(ci, j)?],
            epilogue: Vec::new(),
        });
    }
    let mut prologue = Vec::new();
    let mut carriers = [0; 2];
    for (slot, (qubit, cell)) in [(i, ci), (j, cj)].into_iter().enumerate() {
        let joint = topology.joint_atom(cell);
        if qubit != joint {
            prologue.push(exchange_op(topology, cell, qubit, joint)?);
        }
        carriers[slot] = joint;
    }
    let epilogue = prologue.iter().rev().cloned().collect();
    Ok(Route {
        prologue,
        host: CellId::P,
        host_positions: [
            topology.position(CellId::P, carriers[0])?,
            topology.position(CellId::P, carriers[1])?,
        ],
        epilogue,
    })
}

/// A two-qubit catalog gate on logical qubits `i` and `j`, wrapped in its
/// routing exchanges.
pub fn routed_gate(
    topology: &DeviceTopology,
    kind: GateKind,
    i: usize,
    j: usize,
    label: &str,
) -> Result<Vec<CellOp>> {
    let route = route_pair(topology, i, j)?;
    let spec = GateSpec::new(kind, route.host_positions.to_vec())?;
    let mut ops = route.prologue;
    ops.push(CellOp::named(route.host, &spec, label.to_owned()));
    ops.extend(route.epilogue);
    Ok(ops)
}
