//! The multiplication circuit.
//!
//! Two prepared matrices are encoded side by side, the contraction index is
//! selected with CNOTs and summed with Hadamards, the real/imaginary label
//! qubits are combined into complex products, garbage is flagged on two
//! ancillas, and a conditional measurement keeps the flagged branch. The
//! surviving state holds `A1 A2 / G` on `(M1, R1, C2, K1)`, where
//!
//! ```text
//! G^2 = |b1 b2|^2 + sum_jk |(A1 A2)_jk|^2
//! ```
//!
//! and the branch weight before the measurement is `G^2 / 2^(n+1)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::complexmat::{dagger_oracle, matmul_oracle, ComplexMatrix, PreparedMatrix};
use crate::conjugator::{q_controlled_gates, q_gates, QOp};
use crate::encoder::{decode, encoding_terms, EncodedBlock, Side};
use crate::error::{Error, Result};
use crate::registers::{RegisterLayout, Subsystem};
use crate::statevector::{Control, Gate, StateVector};

/// Which input manipulations run before the product circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Manipulations {
    /// Conjugate the first matrix (`Q1`).
    pub dagger_first: bool,
    /// Conjugate the second matrix (`Q2`).
    pub dagger_second: bool,
    /// Exchange the factors (`Q3`); the decoded output is transposed back.
    pub swap_order: bool,
}

impl Manipulations {
    pub const NONE: Self = Self {
        dagger_first: false,
        dagger_second: false,
        swap_order: false,
    };

    pub fn new(dagger_first: bool, dagger_second: bool, swap_order: bool) -> Self {
        Self {
            dagger_first,
            dagger_second,
            swap_order,
        }
    }

    /// All eight subsets.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..8u8).map(|bits| Self::new(bits & 1 != 0, bits & 2 != 0, bits & 4 != 0))
    }

    /// Operators in application order: `Q3`, then `Q2`, then `Q1`.
    pub fn operators(&self) -> Vec<QOp> {
        let mut ops = Vec::with_capacity(3);
        if self.swap_order {
            ops.push(QOp::Q3);
        }
        if self.dagger_second {
            ops.push(QOp::Q2);
        }
        if self.dagger_first {
            ops.push(QOp::Q1);
        }
        ops
    }

    /// Parses an explicit operator sequence. Only the order `Q3, Q2, Q1`
    /// (any subsequence of it) is accepted.
    pub fn from_sequence(ops: &[QOp]) -> Result<Self> {
        let mut out = Self::NONE;
        let mut last: Option<QOp> = None;
        for &op in ops {
            if let Some(prev) = last {
                if op >= prev {
                    return Err(Error::Manipulation(format!(
                        "{op:?} after {prev:?}: operators must run in the order Q3, Q2, Q1"
                    )));
                }
            }
            last = Some(op);
            match op {
                QOp::Q1 => out.dagger_first = true,
                QOp::Q2 => out.dagger_second = true,
                QOp::Q3 => out.swap_order = true,
            }
        }
        Ok(out)
    }

    pub fn is_active(&self, op: QOp) -> bool {
        match op {
            QOp::Q1 => self.dagger_first,
            QOp::Q2 => self.dagger_second,
            QOp::Q3 => self.swap_order,
        }
    }
}

/// Decoded product and its bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductResult {
    /// Product of the prepared matrices (manipulations applied), rescaled by `G`.
    pub matrix_hat: ComplexMatrix,
    pub b_hat: Complex64,
    pub g_exact: f64,
    /// Weight of the `B = BT = 1` branch before the measurement.
    pub branch_probability: f64,
    /// Largest entrywise deviation from [`expected_product`].
    pub oracle_error: f64,
    pub oracle_error_at: (usize, usize),
    /// `(s1 + c1)(s2 + c2)`: multiplies `matrix_hat` back to the unprepared scale.
    pub scale_back: f64,
    /// Weight left outside the output encoding after the measurement.
    pub residual: f64,
}

impl ProductResult {
    /// `matrix_hat` at the scale of the original, unprepared inputs.
    pub fn recovered(&self) -> ComplexMatrix {
        self.matrix_hat.scale(self.scale_back)
    }
}

/// Post-measurement state of one circuit run.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub state: StateVector,
    pub branch_probability: f64,
    pub output: EncodedBlock,
    pub manipulations: Manipulations,
}

fn check_pair(pm1: &PreparedMatrix, pm2: &PreparedMatrix, layout: &RegisterLayout) -> Result<()> {
    if pm1.n() != pm2.n() || pm1.n() != layout.n() {
        return Err(Error::Dimension(format!(
            "matrix widths n = {} and n = {} do not fit a layout for n = {}",
            pm1.n(),
            pm2.n(),
            layout.n()
        )));
    }
    Ok(())
}

/// Product of the two encodings over the full register, ancillas at 0.
pub fn build_initial(pm1: &PreparedMatrix, pm2: &PreparedMatrix, layout: &RegisterLayout) -> Result<StateVector> {
    check_pair(pm1, pm2, layout)?;
    let first = EncodedBlock::side(layout, Side::First)?;
    let second = EncodedBlock::side(layout, Side::Second)?;
    let t1 = encoding_terms(pm1);
    let t2 = encoding_terms(pm2);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << layout.total_qubits()];
    for &(m1, j1, k1, f1, x) in &t1 {
        let base = first.index(m1, j1, k1, f1);
        for &(m2, j2, k2, f2, y) in &t2 {
            amps[base | second.index(m2, j2, k2, f2)] = Complex64::new(x * y, 0.0);
        }
    }
    StateVector::from_amplitudes(layout.total_qubits(), amps)
}

/// CNOT from each `C1` qubit onto the matching `R2` qubit.
pub fn w0_gates(layout: &RegisterLayout) -> Result<Vec<Gate>> {
    Ok(layout
        .range(Subsystem::C1)?
        .zip(layout.range(Subsystem::R2)?)
        .map(|(c, r)| Gate::cnot(c, r))
        .collect())
}

/// Hadamard on every `C1` qubit.
pub fn w1_gates(layout: &RegisterLayout) -> Result<Vec<Gate>> {
    Ok(vec![Gate::new(
        crate::statevector::GateKind::H,
        layout.qubits(Subsystem::C1)?,
    )])
}

/// `XZ` on `M1` controlled by `M2`, `H` on `M2`, then CNOT `K1 -> K2`.
pub fn w2_gates(layout: &RegisterLayout) -> Result<Vec<Gate>> {
    let m1 = layout.qubit(Subsystem::M1)?;
    let m2 = layout.qubit(Subsystem::M2)?;
    Ok(vec![
        Gate::xz(m1).controlled(m2, true),
        Gate::h(m2),
        Gate::cnot(layout.qubit(Subsystem::K1)?, layout.qubit(Subsystem::K2)?),
    ])
}

/// `X` on both `B` and `BT` when all of `C1, R2, M2, K2` are zero.
pub fn w3_gates(layout: &RegisterLayout) -> Result<Vec<Gate>> {
    let mut controls = Vec::with_capacity(2 * layout.n() + 2);
    for s in [Subsystem::C1, Subsystem::R2, Subsystem::M2, Subsystem::K2] {
        controls.extend(layout.range(s)?.map(|qubit| Control {
            qubit,
            polarity: false,
        }));
    }
    Ok(vec![Gate::multi_controlled_x(
        vec![layout.qubit(Subsystem::B)?, layout.qubit(Subsystem::BT)?],
        controls,
    )])
}

pub fn apply_w0(state: StateVector, layout: &RegisterLayout) -> Result<StateVector> {
    state.apply_all(&w0_gates(layout)?)
}

pub fn apply_w1(state: StateVector, layout: &RegisterLayout) -> Result<StateVector> {
    state.apply_all(&w1_gates(layout)?)
}

pub fn apply_w2(state: StateVector, layout: &RegisterLayout) -> Result<StateVector> {
    state.apply_all(&w2_gates(layout)?)
}

pub fn apply_w3(state: StateVector, layout: &RegisterLayout) -> Result<StateVector> {
    state.apply_all(&w3_gates(layout)?)
}

/// Keeps the `BT = 1` branch. On this circuit `BT = 1` exactly when `B = 1`.
pub fn conditional_measure(state: StateVector, layout: &RegisterLayout) -> Result<(StateVector, f64)> {
    state.project_and_renormalize(layout.qubit(Subsystem::BT)?, true)
}

/// Runs the circuit and returns the post-measurement state.
///
/// With a control-flag layout the flags are set to the selected manipulations
/// and all three controlled operators are applied; otherwise only the selected
/// operators are applied.
pub fn run_circuit(
    pm1: &PreparedMatrix,
    pm2: &PreparedMatrix,
    manipulations: Manipulations,
    layout: &RegisterLayout,
) -> Result<PipelineRun> {
    let mut state = build_initial(pm1, pm2, layout)?;
    let mut output = EncodedBlock::output(layout)?;
    if layout.control_flags_present() {
        for op in [QOp::Q3, QOp::Q2, QOp::Q1] {
            if manipulations.is_active(op) {
                state.apply(&Gate::x(layout.qubit(op.flag())?))?;
                output = output.with_fixed(layout, op.flag(), 1)?;
            }
        }
        for op in [QOp::Q3, QOp::Q2, QOp::Q1] {
            state = state.apply_all(&q_controlled_gates(op, layout)?)?;
        }
    } else {
        for op in manipulations.operators() {
            state = state.apply_all(&q_gates(op, layout)?)?;
        }
    }
    let state = apply_w0(state, layout)?;
    let state = apply_w1(state, layout)?;
    let state = apply_w2(state, layout)?;
    let state = apply_w3(state, layout)?;
    let (state, branch_probability) = conditional_measure(state, layout)?;
    Ok(PipelineRun {
        state,
        branch_probability,
        output,
        manipulations,
    })
}

/// Runs the circuit, decodes the product and compares it with the classical
/// composition from [`expected_product`].
pub fn run_pipeline(
    pm1: &PreparedMatrix,
    pm2: &PreparedMatrix,
    manipulations: Manipulations,
    layout: &RegisterLayout,
) -> Result<ProductResult> {
    let run = run_circuit(pm1, pm2, manipulations, layout)?;
    let decoded = decode(&run.state, &run.output)?;
    let g_exact = (run.branch_probability * (1u64 << (layout.n() + 1)) as f64).sqrt();
    let mut matrix_hat = decoded.matrix.scale(g_exact);
    if manipulations.swap_order {
        matrix_hat = matrix_hat.transpose();
    }
    let (expected, _) = expected_product(pm1, pm2, manipulations)?;
    let (oracle_error, oracle_error_at) = matrix_hat.max_abs_diff(&expected)?;
    Ok(ProductResult {
        matrix_hat,
        b_hat: decoded.b * g_exact,
        g_exact,
        branch_probability: run.branch_probability,
        oracle_error,
        oracle_error_at,
        scale_back: pm1.scale_back() * pm2.scale_back(),
        residual: decoded.residual,
    })
}

fn conj_if(flag: bool, z: Complex64) -> Complex64 {
    if flag {
        z.conj()
    } else {
        z
    }
}

/// Classical value the circuit delivers for each manipulation set, as
/// `(matrix, b_hat)`, with the output transpose already applied when
/// `swap_order` is set.
///
/// Without `swap_order` this is `op1(A1) op2(A2)` with `op` either identity or
/// the conjugate transpose. With `swap_order` the index registers of both
/// inputs are transposed and the label qubits exchanged before `Q2`/`Q1` run,
/// so `Q2` conjugates the values of `A1` and `Q1` those of `A2`:
///
/// | flags                  | result          |
/// |------------------------|-----------------|
/// | swap                   | `A2 A1`         |
/// | swap, dagger1, dagger2 | `(A1 A2)†`      |
/// | swap, dagger1          | `conj(A2) A1^T` |
/// | swap, dagger2          | `A2^T conj(A1)` |
pub fn expected_product(
    pm1: &PreparedMatrix,
    pm2: &PreparedMatrix,
    m: Manipulations,
) -> Result<(ComplexMatrix, Complex64)> {
    let (a1, a2) = (pm1.matrix(), pm2.matrix());
    let (b1, b2) = (pm1.b(), pm2.b());
    if !m.swap_order {
        let f1 = if m.dagger_first { dagger_oracle(a1) } else { a1.clone() };
        let f2 = if m.dagger_second { dagger_oracle(a2) } else { a2.clone() };
        let b = conj_if(m.dagger_first, b1) * conj_if(m.dagger_second, b2);
        return Ok((matmul_oracle(&f1, &f2)?, b));
    }
    let mut f1 = if m.dagger_first { a1.clone() } else { a1.transpose() };
    if m.dagger_second {
        f1 = f1.conj();
    }
    let mut f2 = if m.dagger_second { a2.clone() } else { a2.transpose() };
    if m.dagger_first {
        f2 = f2.conj();
    }
    let b = conj_if(m.dagger_second, b1) * conj_if(m.dagger_first, b2);
    Ok((matmul_oracle(&f1, &f2)?.transpose(), b))
}

/// `sqrt(|b_hat|^2 + sum |a_hat|^2)` computed classically.
pub fn expected_g(pm1: &PreparedMatrix, pm2: &PreparedMatrix, m: Manipulations) -> Result<f64> {
    let (p, b) = expected_product(pm1, pm2, m)?;
    Ok((b.norm_sqr() + p.sum_sq()).sqrt())
}
