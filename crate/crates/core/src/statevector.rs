//! Dense statevector with controlled gates, projective measurement and shot
//! sampling.
//!
//! Qubit 0 is the least significant bit of the amplitude index. Controlled
//! gates are applied directly by bit-mask iteration; nothing is decomposed.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Norm tolerance enforced when a state is built from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Outcome weights below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-300;

// below this many amplitudes the kernels stay on the calling thread
const PARALLEL_MIN_LEN: usize = 1 << 14;
const PARALLEL_GRAIN: usize = 1 << 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Gate kinds understood by the engine.
///
/// Single-qubit kinds act on every listed target (a tensor power). Any kind
/// may carry controls; `CNOT` is `X` with one control and the multi-controlled
/// gate is `X` with several.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GateKind {
    X,
    Z,
    H,
    /// `sigma_x sigma_z`: maps `(a0, a1)` to `(-a1, a0)`.
    XZ,
    Swap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Control {
    pub qubit: usize,
    /// The gate fires when this qubit equals the polarity.
    pub polarity: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            controls: Vec::new(),
        }
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, vec![target])
    }

    pub fn z(target: usize) -> Self {
        Self::new(GateKind::Z, vec![target])
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, vec![target])
    }

    pub fn xz(target: usize) -> Self {
        Self::new(GateKind::XZ, vec![target])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::x(target).controlled(control, true)
    }

    /// `X` on every target, fired when each control matches its polarity.
    pub fn multi_controlled_x(targets: Vec<usize>, controls: Vec<Control>) -> Self {
        Self {
            kind: GateKind::X,
            targets,
            controls,
        }
    }

    pub fn controlled(mut self, qubit: usize, polarity: bool) -> Self {
        self.controls.push(Control { qubit, polarity });
        self
    }

    /// Checks index ranges, disjointness and arity for a `num_qubits` register.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::Qubit("gate has no targets".into()));
        }
        if self.kind == GateKind::Swap && self.targets.len() != 2 {
            return Err(Error::Qubit(format!(
                "SWAP needs exactly two targets, got {}",
                self.targets.len()
            )));
        }
        let mut seen = 0u128;
        let involved = self
            .targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.qubit));
        for q in involved {
            if q >= num_qubits {
                return Err(Error::Qubit(format!(
                    "qubit {q} out of range for {num_qubits} qubits"
                )));
            }
            if seen & (1 << q) != 0 {
                return Err(Error::Qubit(format!("qubit {q} used more than once")));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    fn control_masks(&self) -> (usize, usize) {
        self.controls.iter().fold((0, 0), |(mask, value), c| {
            (mask | 1 << c.qubit, value | (c.polarity as usize) << c.qubit)
        })
    }
}

/// Per-outcome counts from [`StateVector::sample_measure`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeasurementCounts {
    pub zeros: u64,
    pub ones: u64,
}

impl MeasurementCounts {
    pub fn shots(&self) -> u64 {
        self.zeros + self.ones
    }
}

/// `2^Q` complex amplitudes of a `Q`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state `|basis_index>`.
    pub fn init_basis(num_qubits: usize, basis_index: usize) -> Result<Self> {
        if num_qubits >= usize::BITS as usize - 1 || num_qubits > 40 {
            return Err(Error::Qubit(format!("{num_qubits} qubits is too many")));
        }
        let len = 1usize << num_qubits;
        if basis_index >= len {
            return Err(Error::Qubit(format!(
                "basis index {basis_index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; len];
        amplitudes[basis_index] = ONE;
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the length must be `2^num_qubits` and the norm one.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if num_qubits >= usize::BITS as usize - 1 || amplitudes.len() != 1 << num_qubits {
            return Err(Error::Dimension(format!(
                "{} amplitudes do not describe {num_qubits} qubits",
                amplitudes.len()
            )));
        }
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let defect = (state.norm_sqr() - 1.0).abs();
        if !(defect <= NORM_TOLERANCE) {
            return Err(Error::Validation(format!("state norm misses 1 by {defect:e}")));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ low`: `low` occupies the low-order qubits of the result.
    pub fn tensor(&self, low: &StateVector) -> StateVector {
        let mut amplitudes = Vec::with_capacity(self.len() * low.len());
        for hi in &self.amplitudes {
            amplitudes.extend(low.amplitudes.iter().map(|lo| hi * lo));
        }
        StateVector {
            num_qubits: self.num_qubits + low.num_qubits,
            amplitudes,
        }
    }

    /// Applies `gate` and hands the updated state back.
    pub fn apply_gate(mut self, gate: &Gate) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    /// Applies every gate in order.
    pub fn apply_all<'a>(mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<Self> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(self)
    }

    /// In-place form of [`StateVector::apply_gate`].
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let (cmask, cval) = gate.control_masks();
        let amps = &mut self.amplitudes;
        match gate.kind {
            GateKind::Swap => swap_kernel(amps, gate.targets[0], gate.targets[1], cmask, cval),
            kind => {
                for &t in &gate.targets {
                    match kind {
                        GateKind::X => pair_kernel(amps, t, cmask, cval, |a, b| {
                            std::mem::swap(a, b);
                        }),
                        GateKind::Z => pair_kernel(amps, t, cmask, cval, |_, b| *b = -*b),
                        GateKind::H => pair_kernel(amps, t, cmask, cval, |a, b| {
                            let s = std::f64::consts::FRAC_1_SQRT_2;
                            let (x, y) = (*a, *b);
                            *a = (x + y) * s;
                            *b = (x - y) * s;
                        }),
                        GateKind::XZ => pair_kernel(amps, t, cmask, cval, |a, b| {
                            let (x, y) = (*a, *b);
                            *a = -y;
                            *b = x;
                        }),
                        GateKind::Swap => unreachable!(),
                    }
                }
            }
        }
        Ok(())
    }

    /// Weight of the subspace where `qubit == outcome`.
    pub fn probability(&self, qubit: usize, outcome: bool) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let want = if outcome { bit } else { 0 };
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects onto `qubit == outcome`, renormalizes, and returns the
    /// pre-projection weight of that outcome.
    pub fn project_and_renormalize(mut self, qubit: usize, outcome: bool) -> Result<(Self, f64)> {
        let p = self.probability(qubit, outcome)?;
        if !(p > ZERO_PROBABILITY) {
            return Err(Error::Measurement {
                qubit,
                outcome: outcome as u8,
                probability: p,
            });
        }
        let bit = 1usize << qubit;
        let want = if outcome { bit } else { 0 };
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & bit == want {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok((self, p))
    }

    /// Draws `shots` independent measurements of `qubit` from the exact
    /// marginal. Deterministic for a given seed.
    pub fn sample_measure(&self, qubit: usize, seed: u64, shots: u64) -> Result<MeasurementCounts> {
        if shots == 0 {
            return Err(Error::Parameter("shots must be at least 1".into()));
        }
        let p1 = self.probability(qubit, true)?.clamp(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Binomial::new(shots, p1)
            .map_err(|e| Error::Parameter(format!("binomial({shots}, {p1}): {e}")))?;
        let ones = dist.sample(&mut rng);
        Ok(MeasurementCounts {
            zeros: shots - ones,
            ones,
        })
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::Qubit(format!(
                "qubit {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }
}

/// Inserts a zero bit at position `bit` of `k`.
#[inline]
fn insert_zero(k: usize, bit: usize) -> usize {
    let low = k & ((1 << bit) - 1);
    ((k >> bit) << (bit + 1)) | low
}

#[derive(Clone, Copy)]
struct SharedAmps(*mut Complex64);

// Each task touches a distinct amplitude pair, so writes never overlap.
unsafe impl Send for SharedAmps {}
unsafe impl Sync for SharedAmps {}

impl SharedAmps {
    /// # Safety
    /// `i` and `j` must be distinct, in bounds, and not touched concurrently.
    #[inline]
    unsafe fn pair<'a>(self, i: usize, j: usize) -> (&'a mut Complex64, &'a mut Complex64) {
        (&mut *self.0.add(i), &mut *self.0.add(j))
    }
}

fn for_each_index(count: usize, len: usize, f: impl Fn(usize) + Sync + Send) {
    if len >= PARALLEL_MIN_LEN {
        (0..count)
            .into_par_iter()
            .with_min_len(PARALLEL_GRAIN)
            .for_each(f);
    } else {
        (0..count).for_each(f);
    }
}

fn pair_kernel<F>(amps: &mut [Complex64], target: usize, cmask: usize, cval: usize, f: F)
where
    F: Fn(&mut Complex64, &mut Complex64) + Sync + Send,
{
    let len = amps.len();
    let bit = 1usize << target;
    let ptr = SharedAmps(amps.as_mut_ptr());
    for_each_index(len / 2, len, |k| {
        let i = insert_zero(k, target);
        if i & cmask == cval {
            // SAFETY: k -> (i, i | bit) is injective and i has the target bit clear.
            let (a, b) = unsafe { ptr.pair(i, i | bit) };
            f(a, b);
        }
    });
}

fn swap_kernel(amps: &mut [Complex64], qa: usize, qb: usize, cmask: usize, cval: usize) {
    let (lo, hi) = if qa < qb { (qa, qb) } else { (qb, qa) };
    let len = amps.len();
    let (bl, bh) = (1usize << lo, 1usize << hi);
    let ptr = SharedAmps(amps.as_mut_ptr());
    for_each_index(len / 4, len, |k| {
        let base = insert_zero(insert_zero(k, lo), hi);
        if base & cmask == cval {
            // SAFETY: base has both bits clear; the pair (base|bl, base|bh) is
            // unique to k.
            let (a, b) = unsafe { ptr.pair(base | bl, base | bh) };
            std::mem::swap(a, b);
        }
    });
}
