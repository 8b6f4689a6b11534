//! Amplitude encoding of a prepared matrix with separate real/imaginary labels
//! and a slack branch, plus the inverse readout.
//!
//! For a block with subsystems `(M, R, C, K)` the encoded state is
//!
//! ```text
//! (b_0|0>_M + b_1|1>_M)|0>_R|0>_C|0>_K
//!   + sum_jk (a_jk0|0>_M + a_jk1|1>_M)|j>_R|k>_C|1>_K
//! ```
//!
//! where `x_0`, `x_1` are real and imaginary parts. Every other qubit of the
//! register (a "spectator") sits at a fixed basis value recorded in the block.

use std::ops::Range;

use num_complex::Complex64;

use crate::complexmat::{ComplexMatrix, PreparedMatrix};
use crate::error::{Error, Result};
use crate::registers::{RegisterLayout, Subsystem};
use crate::statevector::{StateVector, NORM_TOLERANCE};

/// Which matrix of the product a block belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockRole {
    Side(Side),
    /// `(M1, R1, C2, K1)`: where the product lands after the measurement.
    Output,
    /// A register holding one encoded matrix and nothing else.
    Standalone,
}

/// Where one encoded matrix lives inside a register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlock {
    role: BlockRole,
    n: usize,
    total_qubits: usize,
    m: usize,
    r: Range<usize>,
    c: Range<usize>,
    k: usize,
    fixed: usize,
}

impl EncodedBlock {
    /// A `2n + 2` qubit register laid out as `M, R, C, K` from qubit 0.
    pub fn standalone(n: usize) -> Result<Self> {
        if n < 1 || n > 16 {
            return Err(Error::Layout(format!("unsupported register width n = {n}")));
        }
        Ok(Self {
            role: BlockRole::Standalone,
            n,
            total_qubits: 2 * n + 2,
            m: 0,
            r: 1..n + 1,
            c: n + 1..2 * n + 1,
            k: 2 * n + 1,
            fixed: 0,
        })
    }

    /// The input block of one side of the multiplication register.
    pub fn side(layout: &RegisterLayout, side: Side) -> Result<Self> {
        let names = match side {
            Side::First => [Subsystem::M1, Subsystem::R1, Subsystem::C1, Subsystem::K1],
            Side::Second => [Subsystem::M2, Subsystem::R2, Subsystem::C2, Subsystem::K2],
        };
        Self::from_names(layout, BlockRole::Side(side), names)
    }

    /// The output block `(M1, R1, C2, K1)` with `B = BT = 1`, all other
    /// spectators at 0. Use [`EncodedBlock::with_fixed`] for control flags.
    pub fn output(layout: &RegisterLayout) -> Result<Self> {
        let names = [Subsystem::M1, Subsystem::R1, Subsystem::C2, Subsystem::K1];
        Self::from_names(layout, BlockRole::Output, names)?
            .with_fixed(layout, Subsystem::B, 1)?
            .with_fixed(layout, Subsystem::BT, 1)
    }

    fn from_names(layout: &RegisterLayout, role: BlockRole, names: [Subsystem; 4]) -> Result<Self> {
        let [m, r, c, k] = names;
        Ok(Self {
            role,
            n: layout.n(),
            total_qubits: layout.total_qubits(),
            m: layout.qubit(m)?,
            r: layout.range(r)?,
            c: layout.range(c)?,
            k: layout.qubit(k)?,
            fixed: 0,
        })
    }

    /// Pins a spectator subsystem to `value`.
    pub fn with_fixed(mut self, layout: &RegisterLayout, s: Subsystem, value: usize) -> Result<Self> {
        let range = layout.range(s)?;
        let mask = ((1usize << range.len()) - 1) << range.start;
        if mask & !self.spectator_mask() != 0 {
            return Err(Error::Layout(format!("{s} is part of the encoded block")));
        }
        let bits = layout.basis_index(&[(s, value)])?;
        self.fixed = (self.fixed & !mask) | bits;
        Ok(self)
    }

    pub fn role(&self) -> BlockRole {
        self.role
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn m_qubit(&self) -> usize {
        self.m
    }

    pub fn k_qubit(&self) -> usize {
        self.k
    }

    pub fn row_qubits(&self) -> Range<usize> {
        self.r.clone()
    }

    pub fn col_qubits(&self) -> Range<usize> {
        self.c.clone()
    }

    /// Amplitude index of `|m>_M |row>_R |col>_C |k>_K` with spectators fixed.
    pub fn index(&self, m: usize, row: usize, col: usize, k: usize) -> usize {
        self.fixed | m << self.m | row << self.r.start | col << self.c.start | k << self.k
    }

    fn block_mask(&self) -> usize {
        let width = self.n;
        1 << self.m | 1 << self.k | ((1 << width) - 1) << self.r.start | ((1 << width) - 1) << self.c.start
    }

    fn spectator_mask(&self) -> usize {
        let all = if self.total_qubits >= usize::BITS as usize {
            usize::MAX
        } else {
            (1 << self.total_qubits) - 1
        };
        all & !self.block_mask()
    }

    fn in_support(&self, index: usize) -> bool {
        if index & self.spectator_mask() != self.fixed {
            return false;
        }
        if (index >> self.k) & 1 == 1 {
            return true;
        }
        let row_col = ((1usize << self.n) - 1) << self.r.start | ((1usize << self.n) - 1) << self.c.start;
        index & row_col == 0
    }
}

/// Nonzero-capable amplitudes of an encoding as `(m, row, col, k, value)`.
pub(crate) fn encoding_terms(pm: &PreparedMatrix) -> Vec<(usize, usize, usize, usize, f64)> {
    let a = pm.matrix();
    let dim = a.dim();
    let b = pm.b();
    let mut terms = Vec::with_capacity(2 * dim * dim + 2);
    terms.push((0, 0, 0, 0, b.re));
    terms.push((1, 0, 0, 0, b.im));
    for j in 0..dim {
        for k in 0..dim {
            let x = a[(j, k)];
            terms.push((0, j, k, 1, x.re));
            terms.push((1, j, k, 1, x.im));
        }
    }
    terms
}

/// Writes `pm` into a fresh register described by `block`.
pub fn encode(pm: &PreparedMatrix, block: &EncodedBlock) -> Result<StateVector> {
    if pm.n() != block.n() {
        return Err(Error::Dimension(format!(
            "matrix has n = {}, block expects n = {}",
            pm.n(),
            block.n()
        )));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << block.total_qubits()];
    for (m, j, k, flag, value) in encoding_terms(pm) {
        amps[block.index(m, j, k, flag)] = Complex64::new(value, 0.0);
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Validation(format!(
            "encoded state norm {norm} is not 1"
        )));
    }
    StateVector::from_amplitudes(block.total_qubits(), amps)
}

/// Matrix, slack amplitude and off-support weight read back from a state.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub matrix: ComplexMatrix,
    pub b: Complex64,
    /// Squared weight outside the encoding support.
    pub residual: f64,
}

/// Reads the encoded matrix out of `state`. Never fails on malformed input;
/// the `residual` reports how much weight sits outside the encoding.
pub fn decode(state: &StateVector, block: &EncodedBlock) -> Result<Decoded> {
    if state.num_qubits() != block.total_qubits() {
        return Err(Error::Dimension(format!(
            "state has {} qubits, block expects {}",
            state.num_qubits(),
            block.total_qubits()
        )));
    }
    let i = Complex64::i();
    let read = |j, k, flag| state.amplitude(block.index(0, j, k, flag)) + i * state.amplitude(block.index(1, j, k, flag));
    let dim = 1 << block.n();
    let mut matrix = ComplexMatrix::zeros(block.n())?;
    for j in 0..dim {
        for k in 0..dim {
            matrix[(j, k)] = read(j, k, 1);
        }
    }
    let b = read(0, 0, 0);
    let residual = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(idx, _)| !block.in_support(*idx))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok(Decoded {
        matrix,
        b,
        residual,
    })
}
