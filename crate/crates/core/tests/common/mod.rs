#![allow(dead_code)]

use num_complex::Complex64;
use qamp::complexmat::{prepare_with_phase, ComplexMatrix, PreparedMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut impl Rng, n: usize, spread: f64) -> ComplexMatrix {
    let dim = 1 << n;
    let entries = (0..dim * dim)
        .map(|_| Complex64::new(r.gen_range(-spread..spread), r.gen_range(-spread..spread)))
        .collect();
    ComplexMatrix::new(n, entries).unwrap()
}

/// Random complex matrix, slack parameter and slack phase.
pub fn random_prepared(r: &mut impl Rng, n: usize) -> PreparedMatrix {
    let spread = 10f64.powf(r.gen_range(-1.5..0.5));
    let a = random_matrix(r, n, spread);
    let c = r.gen_range(0.3..2.0);
    let phase = r.gen_range(-3.0..3.0);
    prepare_with_phase(&a, c, phase).unwrap()
}

pub fn half_identity() -> PreparedMatrix {
    qamp::complexmat::prepare(&ComplexMatrix::identity(1).unwrap().scale(0.5), 0.5).unwrap()
}

/// Random matrix prepared so that its encoded weight `sum |a~|^2` equals `weight`.
pub fn prepared_with_weight(r: &mut impl Rng, n: usize, weight: f64) -> PreparedMatrix {
    let raw = random_matrix(r, n, 1.0);
    let s = r.gen_range(0.05..1.0);
    let a = raw.scale((s / raw.sum_sq()).sqrt());
    // s / (s + c)^2 = weight
    let c = (s / weight).sqrt() - s;
    prepare_with_phase(&a, c, r.gen_range(-3.0..3.0)).unwrap()
}
