//! Named gates with Hermitian generators, register embedding, and the
//! string catalog used by the CLI and the device compiler.
//!
//! Qubit `i` (1-based) holds binary digit `i - 1` of the basis index. When a
//! gate is embedded at `positions`, `positions[0]` carries the gate's least
//! significant qubit.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::control::SynthesisTarget;
use crate::error::{Error, Result};
use crate::linalg::{real, to_cell};

type Matrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub arity: usize,
    pub unitary: Matrix,
    /// Hermitian `H` with `unitary = exp(-i H epsilon)`.
    pub generator: Matrix,
    pub epsilon: f64,
}

impl Gate {
    pub fn dim(&self) -> usize {
        1 << self.arity
    }
}

fn permutation(dim: usize, swap: (usize, usize)) -> Matrix {
    let mut m = Matrix::identity(dim, dim);
    m.swap_rows(swap.0, swap.1);
    m
}

/// Flips qubit 1 when qubits 2 and 3 are set: basis states 6 and 7 trade places.
pub fn toffoli() -> Gate {
    let mut generator = Matrix::zeros(8, 8);
    generator[(6, 6)] = real(0.5);
    generator[(7, 7)] = real(0.5);
    generator[(6, 7)] = real(-0.5);
    generator[(7, 6)] = real(-0.5);
    Gate {
        name: "toffoli".into(),
        arity: 3,
        unitary: permutation(8, (6, 7)),
        generator,
        epsilon: PI,
    }
}

/// The one-qubit Hadamard map, `exp(-i pi M / sqrt 8)` with
/// `M = [[1 - sqrt 2, 1], [1, -1 - sqrt 2]]`.
pub fn split_gate() -> Gate {
    let s2 = 2f64.sqrt();
    let scale = 1.0 / 8f64.sqrt();
    let generator = Matrix::from_row_slice(
        2,
        2,
        &[
            real((1.0 - s2) * scale),
            real(scale),
            real(scale),
            real((-1.0 - s2) * scale),
        ],
    );
    let h = FRAC_1_SQRT_2;
    Gate {
        name: "split".into(),
        arity: 1,
        unitary: Matrix::from_row_slice(2, 2, &[real(h), real(h), real(h), real(-h)]),
        generator,
        epsilon: PI,
    }
}

/// Conditional phase `diag(1, 1, 1, e^{i phi})`.
pub fn phase_gate(phi: f64) -> Gate {
    let mut unitary = Matrix::identity(4, 4);
    unitary[(3, 3)] = Complex64::from_polar(1.0, phi);
    let mut generator = Matrix::zeros(4, 4);
    generator[(3, 3)] = real(-1.0);
    Gate {
        name: format!("phase({phi})"),
        arity: 2,
        unitary,
        generator,
        epsilon: phi,
    }
}

/// Exchange of two qubits, `|01> <-> |10>`.
pub fn swap_gate() -> Gate {
    let unitary = permutation(4, (1, 2));
    let generator = generator_of(&unitary).expect("swap has a single -1 eigenvalue");
    Gate {
        name: "swap".into(),
        arity: 2,
        unitary,
        generator,
        epsilon: 1.0,
    }
}

pub fn identity_gate(arity: usize) -> Gate {
    let dim = 1 << arity;
    Gate {
        name: "identity".into(),
        arity,
        unitary: Matrix::identity(dim, dim),
        generator: Matrix::zeros(dim, dim),
        epsilon: 0.0,
    }
}

/// Embeds a `2^k x 2^k` operator into an `n`-qubit register at `positions`
/// (1-based), acting as the identity on the remaining qubits.
pub fn embed_matrix(m: &Matrix, positions: &[usize], n: usize) -> Result<Matrix> {
    let arity = positions.len();
    let bad = || Error::BadPositions {
        positions: positions.to_vec(),
        n,
        arity: m.nrows().trailing_zeros() as usize,
    };
    if !m.is_square() || m.nrows() != 1 << arity || arity > n {
        return Err(bad());
    }
    let mut seen = 0usize;
    for &p in positions {
        if p == 0 || p > n || seen >> (p - 1) & 1 == 1 {
            return Err(bad());
        }
        seen |= 1 << (p - 1);
    }

    let dim = 1usize << n;
    let local_dim = 1usize << arity;
    let scatter = |x: usize, local: usize| {
        positions
            .iter()
            .enumerate()
            .fold(x & !seen, |acc, (i, &p)| acc | (local >> i & 1) << (p - 1))
    };
    let gather = |x: usize| {
        positions
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &p)| acc | (x >> (p - 1) & 1) << i)
    };
    let mut out = Matrix::zeros(dim, dim);
    for x in 0..dim {
        let lx = gather(x);
        for ly in 0..local_dim {
            let value = m[(ly, lx)];
            if value != Complex64::new(0.0, 0.0) {
                out[(scatter(x, ly), x)] = value;
            }
        }
    }
    Ok(out)
}

pub fn embed(gate: &Gate, positions: &[usize], n: usize) -> Result<Matrix> {
    if positions.len() != gate.arity {
        return Err(Error::BadPositions {
            positions: positions.to_vec(),
            n,
            arity: gate.arity,
        });
    }
    embed_matrix(&gate.unitary, positions, n)
}

const BRANCH_WINDOW: f64 = 1e-6;
const DEGENERACY: f64 = 1e-9;

/// Principal-branch generator: Hermitian `H` with `exp(-i H) = u` and the
/// eigenphases of `u` taken in `(-pi, pi]`.
///
/// Eigenvalues at `-1` map to phase `pi`. Several eigenvalues near `-1` that
/// are not numerically degenerate and fall on both sides of the cut make the
/// branch choice ambiguous and are rejected.
pub fn generator_of(u: &Matrix) -> Result<Matrix> {
    let n = u.nrows();
    let defect = (u.adjoint() * u - Matrix::identity(n, n))
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if !u.is_square() || defect > 1e-8 {
        return Err(Error::Format(format!(
            "generator_of needs a unitary matrix (defect {defect:.3e})"
        )));
    }
    let (q, t) = u.clone().schur().unpack();
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)] / t[(i, i)].norm()).collect();

    let near_cut: Vec<Complex64> = eigenvalues
        .iter()
        .copied()
        .filter(|z| (z + 1.0).norm() < BRANCH_WINDOW)
        .collect();
    if near_cut.len() > 1 {
        let spread = near_cut
            .iter()
            .flat_map(|a| near_cut.iter().map(move |b| (a - b).norm()))
            .fold(0.0f64, f64::max);
        let straddles = near_cut.iter().any(|z| z.im > 0.0) && near_cut.iter().any(|z| z.im < 0.0);
        if spread > DEGENERACY && straddles {
            return Err(Error::BranchAmbiguity {
                eigenvalues: near_cut.iter().map(|z| (z.re, z.im)).collect(),
            });
        }
    }

    let phases: Vec<f64> = eigenvalues
        .iter()
        .map(|z| {
            if (z + 1.0).norm() < DEGENERACY {
                PI
            } else {
                z.arg()
            }
        })
        .collect();
    let diag = Matrix::from_fn(
        n,
        n,
        |i, j| if i == j { real(-phases[i]) } else { real(0.0) },
    );
    let h = &q * diag * q.adjoint();
    Ok((&h + h.adjoint()) * real(0.5))
}

/// An angle kept as a rational multiple of pi when possible, so catalog
/// names round-trip exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    PiFraction { numerator: i64, denominator: u64 },
    Radians(f64),
}

impl Angle {
    pub fn pi_over(denominator: u64) -> Self {
        Angle::PiFraction {
            numerator: 1,
            denominator,
        }
    }

    pub fn radians(&self) -> f64 {
        match *self {
            Angle::PiFraction {
                numerator,
                denominator,
            } => PI * numerator as f64 / denominator as f64,
            Angle::Radians(r) => r,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::Radians(r) => write!(f, "{r}"),
            Angle::PiFraction {
                numerator,
                denominator,
            } => {
                match numerator {
                    1 => write!(f, "pi")?,
                    -1 => write!(f, "-pi")?,
                    k => write!(f, "{k}*pi")?,
                }
                if denominator != 1 {
                    write!(f, "/{denominator}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::UnknownGate(format!("phase({s})"));
        if !text.contains("pi") {
            return text.parse::<f64>().map(Angle::Radians).map_err(|_| bad());
        }
        let (head, denominator) = match text.split_once('/') {
            Some((h, d)) => (h, d.parse::<u64>().map_err(|_| bad())?),
            None => (text.as_str(), 1),
        };
        let numerator = match head {
            "pi" => 1,
            "-pi" => -1,
            other => other
                .strip_suffix("*pi")
                .and_then(|k| k.parse::<i64>().ok())
                .ok_or_else(bad)?,
        };
        if denominator == 0 {
            return Err(bad());
        }
        Ok(Angle::PiFraction {
            numerator,
            denominator,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    Identity,
    Toffoli,
    Split,
    Swap,
    Phase(Angle),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Identity | GateKind::Toffoli => 3,
            GateKind::Split => 1,
            GateKind::Swap | GateKind::Phase(_) => 2,
        }
    }

    fn default_positions(&self) -> Vec<usize> {
        match self.arity() {
            1 => vec![1],
            2 => vec![1, 2],
            _ => vec![1, 2, 3],
        }
    }

    fn symmetric(&self) -> bool {
        matches!(
            self,
            GateKind::Swap | GateKind::Phase(_) | GateKind::Identity
        )
    }

    pub fn gate(&self) -> Gate {
        match *self {
            GateKind::Identity => identity_gate(3),
            GateKind::Toffoli => toffoli(),
            GateKind::Split => split_gate(),
            GateKind::Swap => swap_gate(),
            GateKind::Phase(angle) => Gate {
                name: format!("phase({angle})"),
                ..phase_gate(angle.radians())
            },
        }
    }
}

/// A catalog gate placed on qubits of one three-qubit cell.
///
/// Names: `identity`, `toffoli`, `split`, `swap`, `phase(<angle>)`, with an
/// optional `@i,j,..` position suffix, plus the aliases `p12`, `p23`, `p13`
/// for cell permutations. Angles are decimals or `pi`, `k*pi`, `pi/n`, `k*pi/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    /// 1-based cell positions; sorted for gates symmetric under qubit exchange.
    pub positions: Vec<usize>,
}

impl GateSpec {
    pub fn new(kind: GateKind, positions: Vec<usize>) -> Result<Self> {
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        let valid = positions.len() == kind.arity()
            && positions.iter().all(|&p| (1..=3).contains(&p))
            && sorted.windows(2).all(|w| w[0] != w[1]);
        if !valid {
            return Err(Error::BadPositions {
                positions,
                n: 3,
                arity: kind.arity(),
            });
        }
        let positions = if kind.symmetric() { sorted } else { positions };
        Ok(GateSpec { kind, positions })
    }

    pub fn on_default_positions(kind: GateKind) -> Self {
        let positions = kind.default_positions();
        GateSpec { kind, positions }
    }

    /// Canonical catalog name; parsing it gives back an equal spec.
    pub fn name(&self) -> String {
        let base = match self.kind {
            GateKind::Identity => return "identity".into(),
            GateKind::Toffoli => "toffoli".to_string(),
            GateKind::Split => "split".to_string(),
            GateKind::Swap => "swap".to_string(),
            GateKind::Phase(angle) => format!("phase({angle})"),
        };
        if self.positions == self.kind.default_positions() {
            base
        } else {
            let list: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
            format!("{base}@{}", list.join(","))
        }
    }

    pub fn gate(&self) -> Gate {
        self.kind.gate()
    }

    /// The gate acting on the full cell.
    pub fn cell_unitary(&self) -> Matrix {
        embed(&self.gate(), &self.positions, 3).expect("positions validated")
    }

    /// Synthesis target on the cell: the embedded generator and its epsilon.
    pub fn cell_target(&self) -> SynthesisTarget {
        let gate = self.gate();
        let generator =
            embed_matrix(&gate.generator, &self.positions, 3).expect("positions validated");
        SynthesisTarget::new(self.name(), to_cell(&generator).expect("8x8"), gate.epsilon)
            .expect("catalog generators are Hermitian")
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for GateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "p12" => return GateSpec::new(GateKind::Swap, vec![1, 2]),
            "p23" => return GateSpec::new(GateKind::Swap, vec![2, 3]),
            "p13" => return GateSpec::new(GateKind::Swap, vec![1, 3]),
            _ => {}
        }
        let (head, positions) = match s.rsplit_once('@') {
            Some((h, p)) => {
                let parsed = p
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::UnknownGate(s.into()))?;
                (h, Some(parsed))
            }
            None => (s, None),
        };
        let kind = match head {
            "identity" => GateKind::Identity,
            "toffoli" => GateKind::Toffoli,
            "split" => GateKind::Split,
            "swap" => GateKind::Swap,
            other => {
                let inner = other
                    .strip_prefix("phase(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::UnknownGate(s.into()))?;
                GateKind::Phase(inner.parse()?)
            }
        };
        match positions {
            Some(p) => GateSpec::new(kind, p),
            None => Ok(GateSpec::on_default_positions(kind)),
        }
    }
}
