//! Recovery of the normalization `G` from measurement statistics.
//!
//! After the conditional measurement the slack branch `K1 = 0` carries
//! weight `S1~ = |b1 b2|^2 / G^2`. The numerator `S1 = |b1 b2|^2` is known
//! from preparation, so measuring `K1` on repeated runs gives
//! `G = sqrt(S1 / S1~)`.

use serde::Serialize;

use crate::complexmat::PreparedMatrix;
use crate::error::{Error, Result};
use crate::multiplier::{run_circuit, Manipulations};
use crate::registers::{RegisterLayout, Subsystem};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GEstimate {
    /// `|b1 b2|^2`.
    pub s1: f64,
    /// Exact `K1 = 0` probability on the output state.
    pub s1_tilde_exact: f64,
    /// Observed `K1 = 0` frequency.
    pub s1_tilde_sampled: f64,
    pub k1_zero_count: u64,
    pub g_exact: f64,
    pub g_hat: f64,
    /// Binomial standard error of `s1_tilde_sampled` carried through to `g_hat`,
    /// using the Agresti-Coull adjusted proportion `(zeros + 2) / (shots + 4)`.
    pub stderr: f64,
    pub shots: u64,
    pub seed: u64,
    /// `shots + 1`: one extra run leaves the product state in the register.
    pub nominal_runs: u64,
}

/// Runs the circuit once and samples `shots` measurements of `K1` from the
/// exact output marginal.
pub fn estimate_g(
    pm1: &PreparedMatrix,
    pm2: &PreparedMatrix,
    manipulations: Manipulations,
    shots: u64,
    seed: u64,
) -> Result<GEstimate> {
    if shots == 0 {
        return Err(Error::Parameter("shots must be at least 1".into()));
    }
    let s1 = pm1.b().norm_sqr() * pm2.b().norm_sqr();
    if !(s1 > 0.0) {
        return Err(Error::MethodUndefined { s1 });
    }
    let layout = RegisterLayout::new(pm1.n(), false)?;
    let run = run_circuit(pm1, pm2, manipulations, &layout)?;
    let k1 = layout.qubit(Subsystem::K1)?;
    let s1_tilde_exact = run.state.probability(k1, false)?;
    let g_exact = (run.branch_probability * (1u64 << (layout.n() + 1)) as f64).sqrt();

    let counts = run.state.sample_measure(k1, seed, shots)?;
    if counts.zeros == 0 {
        return Err(Error::EstimateUnavailable { zeros: 0, shots });
    }
    let p = counts.zeros as f64 / shots as f64;
    let g_hat = (s1 / p).sqrt();
    // Agresti-Coull proportion keeps the variance positive when p = 1
    let p_adj = (counts.zeros as f64 + 2.0) / (shots as f64 + 4.0);
    let stderr = g_hat / (2.0 * p) * (p_adj * (1.0 - p_adj) / shots as f64).sqrt();
    Ok(GEstimate {
        s1,
        s1_tilde_exact,
        s1_tilde_sampled: p,
        k1_zero_count: counts.zeros,
        g_exact,
        g_hat,
        stderr,
        shots,
        seed,
        nominal_runs: shots + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexmat::{prepare, ComplexMatrix};
    use crate::multiplier::expected_g;
    use crate::testutil::{random_prepared, rng};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn half_identity() -> PreparedMatrix {
        prepare(&ComplexMatrix::identity(1).unwrap().scale(0.5), 0.5).unwrap()
    }

    #[test]
    fn desk_case() {
        let pm = half_identity();
        let e = estimate_g(&pm, &pm, Manipulations::NONE, 100_000, 7).unwrap();
        assert_abs_diff_eq!(e.s1, 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(e.s1_tilde_exact, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.g_exact, 0.375f64.sqrt(), epsilon = 1e-12);
        assert!((e.g_hat - e.g_exact).abs() <= 5.0 * e.stderr);
        assert_eq!(e.nominal_runs, 100_001);
    }

    #[test]
    fn deterministic_for_seed() {
        let pm = half_identity();
        let a = estimate_g(&pm, &pm, Manipulations::NONE, 1000, 3).unwrap();
        let b = estimate_g(&pm, &pm, Manipulations::NONE, 1000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_slack_is_undefined() {
        // weight just under 1 with b = 0 still satisfies both invariants
        let mut a = ComplexMatrix::zeros(1).unwrap();
        a[(0, 0)] = Complex64::new((1.0 - 1e-13f64).sqrt(), 0.0);
        let pm1 = PreparedMatrix::from_parts(a, Complex64::new(0.0, 0.0), 1.0, 1.0).unwrap();
        let pm2 = half_identity();
        assert!(matches!(
            estimate_g(&pm1, &pm2, Manipulations::NONE, 10, 0),
            Err(Error::MethodUndefined { .. })
        ));
    }

    #[test]
    fn stderr_stays_positive_when_all_shots_agree() {
        // tiny matrices leave nearly all weight on the slack branch
        let a = ComplexMatrix::identity(1).unwrap().scale(1e-4);
        let pm = prepare(&a, 1.0).unwrap();
        let e = estimate_g(&pm, &pm, Manipulations::NONE, 1000, 1).unwrap();
        assert_eq!(e.k1_zero_count, 1000);
        assert!(e.stderr > 0.0);
        assert!((e.g_hat - e.g_exact).abs() <= 5.0 * e.stderr);
    }

    #[test]
    fn stderr_matches_delta_method_in_the_interior() {
        let pm = half_identity();
        let e = estimate_g(&pm, &pm, Manipulations::NONE, 100_000, 11).unwrap();
        let p = e.s1_tilde_sampled;
        let plug_in = e.g_hat / (2.0 * p) * (p * (1.0 - p) / e.shots as f64).sqrt();
        assert!((e.stderr / plug_in - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_shots_rejected() {
        let pm = half_identity();
        assert!(matches!(estimate_g(&pm, &pm, Manipulations::NONE, 0, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn exact_identity_on_random_inputs() {
        let mut r = rng(51);
        for n in 1..=3 {
            for m in Manipulations::all() {
                let pm1 = random_prepared(&mut r, n);
                let pm2 = random_prepared(&mut r, n);
                let e = estimate_g(&pm1, &pm2, m, 10_000, 9).unwrap();
                let g = expected_g(&pm1, &pm2, m).unwrap();
                assert_abs_diff_eq!(e.g_exact, g, epsilon = 1e-10);
                assert_abs_diff_eq!(e.s1_tilde_exact * e.g_exact * e.g_exact, e.s1, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn estimate_within_five_standard_errors() {
        let mut r = rng(52);
        for seed in 0..10 {
            let pm1 = random_prepared(&mut r, 1);
            let pm2 = random_prepared(&mut r, 1);
            let e = estimate_g(&pm1, &pm2, Manipulations::NONE, 100_000, seed).unwrap();
            assert!((e.g_hat - e.g_exact).abs() <= 5.0 * e.stderr, "seed {seed}: {e:?}");
        }
    }
}
