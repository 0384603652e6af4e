//! Reference implementations written independently of the library code.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;

pub fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `exp(a)` by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &M) -> M {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / cz(2f64.powi(squarings as i32), 0.0);
    let mut term = M::identity(n, n);
    let mut sum = M::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled / cz(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i h t)`.
pub fn evolve(h: &M, t: f64) -> M {
    expm(&(h * cz(0.0, -t)))
}

pub fn kron(a: &M, b: &M) -> M {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    M::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Cell Hamiltonians from the physical description: basis `|x3 x2 x1>` with
/// atom `i` on bit `i - 1`; an excitation hops from atom `i` to atom `j`
/// with amplitude `D_ij`; detunings and Stark shifts add over excited atoms;
/// the microwave field flips atom `i` with amplitude `V_i`.
pub struct CellOracle {
    pub h0: M,
    pub p_s: M,
    pub p_omega: M,
}

pub fn cell_oracle(
    d12: f64,
    d23: f64,
    d13: f64,
    a: [f64; 3],
    delta: [f64; 3],
    v: [f64; 3],
) -> CellOracle {
    let excited = |x: usize, atom: usize| x & (1 << (atom - 1)) != 0;
    let mut h0 = M::zeros(8, 8);
    let mut p_s = M::zeros(8, 8);
    let mut p_omega = M::zeros(8, 8);
    for x in 0..8 {
        for atom in 1..=3 {
            if excited(x, atom) {
                h0[(x, x)] += cz(a[atom - 1], 0.0);
                p_s[(x, x)] += cz(delta[atom - 1], 0.0);
            }
            p_omega[(x ^ (1 << (atom - 1)), x)] = cz(v[atom - 1], 0.0);
        }
        for (i, j, d) in [(1, 2, d12), (2, 3, d23), (1, 3, d13)] {
            if excited(x, i) != excited(x, j) {
                let y = x ^ (1 << (i - 1)) ^ (1 << (j - 1));
                h0[(y, x)] = cz(d, 0.0);
            }
        }
    }
    CellOracle { h0, p_s, p_omega }
}

pub fn default_cell_oracle() -> CellOracle {
    cell_oracle(
        1.1,
        0.946,
        0.86,
        [0.0; 3],
        [0.1, 0.11, 0.312],
        [0.3, 0.33, 0.24],
    )
}

/// Product of 64 interval propagators, interval 1 acting first; odd
/// intervals use the Stark field, even ones the microwave field.
pub fn oracle_sequence(cell: &CellOracle, controls: &[f64], tau: f64) -> M {
    let mut u = M::identity(8, 8);
    for (idx, &c) in controls.iter().enumerate() {
        let k = idx + 1;
        let p = if k % 2 == 1 { &cell.p_s } else { &cell.p_omega };
        let h = &cell.h0 + p * cz(c, 0.0);
        u = evolve(&h, tau) * u;
    }
    u
}

/// `F[y, x] = exp(2 pi i x y / n) / sqrt n`, computed with exact integer
/// phase reduction.
pub fn dft(n: usize) -> M {
    M::from_fn(n, n, |y, x| {
        let k = (x * y) % n;
        Complex64::from_polar(
            1.0 / (n as f64).sqrt(),
            2.0 * std::f64::consts::PI * k as f64 / n as f64,
        )
    })
}

/// Phase-invariant infidelity `1 - |tr(a^dagger b)| / n`.
pub fn infidelity(a: &M, b: &M) -> f64 {
    1.0 - (a.adjoint() * b).trace().norm() / a.nrows() as f64
}
