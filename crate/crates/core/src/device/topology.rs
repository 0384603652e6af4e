use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four cells of the toy device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellId {
    C1,
    C2,
    C3,
    /// The parent joint formed by one atom of each child cell.
    P,
}

impl CellId {
    pub const ALL: [CellId; 4] = [CellId::C1, CellId::C2, CellId::C3, CellId::P];
    pub const CHILDREN: [CellId; 3] = [CellId::C1, CellId::C2, CellId::C3];
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CellId::C1 => "C1",
            CellId::C2 => "C2",
            CellId::C3 => "C3",
            CellId::P => "P",
        };
        f.write_str(s)
    }
}

impl FromStr for CellId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C1" => Ok(CellId::C1),
            "C2" => Ok(CellId::C2),
            "C3" => Ok(CellId::C3),
            "P" => Ok(CellId::P),
            other => Err(Error::Format(format!("unknown cell `{other}`"))),
        }
    }
}

/// Three child triads under one parent triad. Atom `i` holds qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceTopology {
    pub child_cells: [[usize; 3]; 3],
    pub parent_cell: [usize; 3],
    pub n_qubits: usize,
}

impl Default for DeviceTopology {
    fn default() -> Self {
        DeviceTopology::new([[1, 2, 3], [4, 5, 6], [7, 8, 9]], [3, 6, 7])
            .expect("toy layout is valid")
    }
}

impl DeviceTopology {
    /// Atoms inside each triad are stored in ascending order, which is also
    /// their significance order within the cell.
    pub fn new(mut child_cells: [[usize; 3]; 3], mut parent_cell: [usize; 3]) -> Result<Self> {
        for cell in child_cells.iter_mut() {
            cell.sort_unstable();
        }
        parent_cell.sort_unstable();
        let n_qubits = 9;
        let mut count = [0usize; 10];
        for &a in child_cells.iter().flatten() {
            if !(1..=n_qubits).contains(&a) {
                return Err(Error::Format(format!("atom {a} out of range")));
            }
            count[a] += 1;
        }
        if count[1..].iter().any(|&c| c != 1) {
            return Err(Error::Format(
                "each atom must sit in exactly one child cell".into(),
            ));
        }
        for cell in &child_cells {
            if parent_cell.iter().filter(|a| cell.contains(a)).count() != 1 {
                return Err(Error::Format(
                    "parent cell needs exactly one atom per child".into(),
                ));
            }
        }
        Ok(DeviceTopology {
            child_cells,
            parent_cell,
            n_qubits,
        })
    }

    pub fn atoms(&self, cell: CellId) -> [usize; 3] {
        match cell {
            CellId::C1 => self.child_cells[0],
            CellId::C2 => self.child_cells[1],
            CellId::C3 => self.child_cells[2],
            CellId::P => self.parent_cell,
        }
    }

    /// The child cell holding `atom`.
    pub fn home_cell(&self, atom: usize) -> CellId {
        CellId::CHILDREN
            .into_iter()
            .find(|&c| self.atoms(c).contains(&atom))
            .unwrap_or_else(|| panic!("atom {atom} is not on the device"))
    }

    /// The atom a child cell shares with the parent.
    pub fn joint_atom(&self, child: CellId) -> usize {
        let atoms = self.atoms(child);
        *self
            .parent_cell
            .iter()
            .find(|a| atoms.contains(a))
            .expect("validated at construction")
    }

    /// 1-based significance of `atom` within `cell`.
    pub fn position(&self, cell: CellId, atom: usize) -> Result<usize> {
        self.atoms(cell)
            .iter()
            .position(|&a| a == atom)
            .map(|p| p + 1)
            .ok_or(Error::AtomNotInCell {
                atom,
                cell: cell.to_string(),
            })
    }

    pub fn overlaps(&self, a: CellId, b: CellId) -> bool {
        self.atoms(a).iter().any(|x| self.atoms(b).contains(x))
    }

    /// Upper bound on exchanges needed to bring two qubits together.
    pub fn exchange_bound(&self) -> f64 {
        6.0 * (self.n_qubits as f64).ln() / 3f64.ln()
    }
}
