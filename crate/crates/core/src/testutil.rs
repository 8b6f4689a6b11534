//! Random fixtures shared by the unit tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complexmat::{prepare_with_phase, ComplexMatrix, PreparedMatrix};
use crate::statevector::StateVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut impl Rng) -> Complex64 {
    Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Entries uniform in the square `[-spread, spread]^2`.
pub fn random_matrix(r: &mut impl Rng, n: usize, spread: f64) -> ComplexMatrix {
    let dim = 1 << n;
    let entries = (0..dim * dim).map(|_| random_complex(r) * spread).collect();
    ComplexMatrix::new(n, entries).unwrap()
}

/// Prepared matrix with random entries, slack and slack phase.
pub fn random_prepared(r: &mut impl Rng, n: usize) -> PreparedMatrix {
    let spread = 10f64.powf(r.gen_range(-1.5..0.5));
    let a = random_matrix(r, n, spread);
    let c = r.gen_range(0.3..2.0);
    let phase = r.gen_range(-3.0..3.0);
    prepare_with_phase(&a, c, phase).unwrap()
}

pub fn random_state(r: &mut impl Rng, q: usize) -> StateVector {
    let mut amps: Vec<Complex64> = (0..1usize << q).map(|_| random_complex(r)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(q, amps).unwrap()
}
