//! Hermitian conjugation of an encoded matrix and the input manipulations of
//! the multiplication circuit.
//!
//! Conjugation is `SWAP(R, C)` qubit by qubit followed by `Z` on the label
//! qubit `M`: the swap transposes, the phase flip negates every imaginary part.

use crate::encoder::EncodedBlock;
use crate::error::{Error, Result};
use crate::registers::{RegisterLayout, Subsystem};
use crate::statevector::{Gate, StateVector};

/// Gate sequence conjugating the matrix held by `block`.
pub fn conjugation_gates(block: &EncodedBlock) -> Vec<Gate> {
    block
        .row_qubits()
        .zip(block.col_qubits())
        .map(|(r, c)| Gate::swap(r, c))
        .chain(std::iter::once(Gate::z(block.m_qubit())))
        .collect()
}

/// Replaces the encoded matrix `A` (and slack `b`) by `A†` (and `conj(b)`).
pub fn hermitian_conjugate(state: StateVector, block: &EncodedBlock) -> Result<StateVector> {
    if state.num_qubits() != block.total_qubits() {
        return Err(Error::Dimension(format!(
            "state has {} qubits, block expects {}",
            state.num_qubits(),
            block.total_qubits()
        )));
    }
    state.apply_all(&conjugation_gates(block))
}

/// The three input manipulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QOp {
    /// `SWAP(R1, C1) Z(M1)`: conjugate the first matrix.
    Q1,
    /// `SWAP(R2, C2) Z(M2)`: conjugate the second matrix.
    Q2,
    /// `SWAP(R1, C1) SWAP(R2, C2) SWAP(M1, M2)`: exchange the roles of the factors.
    Q3,
}

impl QOp {
    /// The flag qubit that controls this operator.
    pub fn flag(self) -> Subsystem {
        match self {
            QOp::Q1 => Subsystem::Q1,
            QOp::Q2 => Subsystem::Q2,
            QOp::Q3 => Subsystem::Q3,
        }
    }
}

impl TryFrom<u8> for QOp {
    type Error = Error;

    fn try_from(which: u8) -> Result<Self> {
        match which {
            1 => Ok(QOp::Q1),
            2 => Ok(QOp::Q2),
            3 => Ok(QOp::Q3),
            other => Err(Error::Manipulation(format!("no operator Q{other}; expected 1, 2 or 3"))),
        }
    }
}

fn register_swaps(layout: &RegisterLayout, a: Subsystem, b: Subsystem) -> Result<Vec<Gate>> {
    Ok(layout
        .range(a)?
        .zip(layout.range(b)?)
        .map(|(x, y)| Gate::swap(x, y))
        .collect())
}

/// Uncontrolled gate sequence of `which`.
pub fn q_gates(which: QOp, layout: &RegisterLayout) -> Result<Vec<Gate>> {
    use Subsystem::*;
    let gates = match which {
        QOp::Q1 => {
            let mut g = register_swaps(layout, R1, C1)?;
            g.push(Gate::z(layout.qubit(M1)?));
            g
        }
        QOp::Q2 => {
            let mut g = register_swaps(layout, R2, C2)?;
            g.push(Gate::z(layout.qubit(M2)?));
            g
        }
        QOp::Q3 => {
            let mut g = register_swaps(layout, R1, C1)?;
            g.extend(register_swaps(layout, R2, C2)?);
            g.push(Gate::swap(layout.qubit(M1)?, layout.qubit(M2)?));
            g
        }
    };
    Ok(gates)
}

/// Gate sequence of `which`, each gate controlled on its flag qubit being 1.
pub fn q_controlled_gates(which: QOp, layout: &RegisterLayout) -> Result<Vec<Gate>> {
    if !layout.control_flags_present() {
        return Err(Error::Layout(
            "controlled manipulations need a layout with control flags".into(),
        ));
    }
    let flag = layout.qubit(which.flag())?;
    Ok(q_gates(which, layout)?
        .into_iter()
        .map(|g| g.controlled(flag, true))
        .collect())
}

pub fn apply_q(state: StateVector, which: QOp, layout: &RegisterLayout) -> Result<StateVector> {
    state.apply_all(&q_gates(which, layout)?)
}

pub fn apply_q_controlled(state: StateVector, which: QOp, layout: &RegisterLayout) -> Result<StateVector> {
    state.apply_all(&q_controlled_gates(which, layout)?)
}
