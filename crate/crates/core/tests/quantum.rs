use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sta_core::quantum::{hamiltonian_from_field, spectral_decompose, su2_matrix, su2_step};
use sta_core::{Complex64, FieldVector, Mat2, PureState};

/// `exp(−iH dt)` by scaling and squaring of a 30-term Taylor series.
fn expm_oracle(h: &Mat2, dt: f64) -> Mat2 {
    let a = h.scale(Complex64::new(0.0, -dt));
    let squarings = (a.max_abs().max(1.0).log2().ceil() as i32 + 4).max(0);
    let a = a.scale_re(0.5f64.powi(squarings));
    let mut term = Mat2::identity();
    let mut sum = Mat2::identity();
    for k in 1..30 {
        term = (term * a).scale_re(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

fn random_field(rng: &mut ChaCha8Rng) -> FieldVector {
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    FieldVector::new(
        scale * rng.random_range(-1.0..1.0),
        scale * rng.random_range(-1.0..1.0),
        scale * rng.random_range(-1.0..1.0),
    )
}

#[test]
fn exact_step_matches_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let b = random_field(&mut rng);
        let dt = rng.random_range(0.001..2.0);
        let u = su2_matrix(&b, dt);
        let oracle = expm_oracle(&hamiltonian_from_field(&b).unwrap(), dt);
        assert!((u - oracle).max_abs() < 1e-12, "{b:?} dt={dt}");
        assert!((u.dagger() * u - Mat2::identity()).max_abs() < 1e-14);
    }
}

#[test]
fn norm_survives_a_million_steps() {
    let b = FieldVector::new(0.3, -0.7, 1.1);
    let mut s = PureState::normalized(Complex64::new(0.6, 0.1), Complex64::new(-0.2, 0.7)).unwrap();
    for _ in 0..1_000_000 {
        s = su2_step(&b, 0.005, &s).unwrap();
    }
    assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn hamiltonian_is_traceless_and_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let b = random_field(&mut rng);
        let h = hamiltonian_from_field(&b).unwrap();
        assert!(h.trace().norm() < 1e-15);
        assert!(h.hermiticity_error() < 1e-15);
        let (x, y, z) = h.pauli_components();
        assert!((x - 0.5 * b.bx).abs() + (y - 0.5 * b.by).abs() + (z - 0.5 * b.bz).abs() < 1e-15);
    }
}

proptest! {
    #[test]
    fn spectral_pairs_are_orthonormal_eigenvectors(
        bx in -5.0f64..5.0, by in -5.0f64..5.0, bz in -5.0f64..5.0,
    ) {
        let b = FieldVector::new(bx, by, bz);
        prop_assume!(b.norm() > 1e-6);
        let h = hamiltonian_from_field(&b).unwrap();
        let sd = spectral_decompose(&h).unwrap();
        prop_assert!((sd.e_plus - 0.5 * b.norm()).abs() < 1e-12 * b.norm().max(1.0));
        prop_assert!((sd.e_plus + sd.e_minus).abs() < 1e-12);
        for (e, v) in [(sd.e_plus, sd.psi_plus), (sd.e_minus, sd.psi_minus)] {
            let (a, c) = h.apply(&v);
            prop_assert!((a - v.up * e).norm() + (c - v.down * e).norm() < 1e-11 * b.norm().max(1.0));
            // gauge: the dominant component is real and non-negative
            let big = if v.up.norm() >= v.down.norm() - 1e-12 { v.up } else { v.down };
            prop_assert!(big.im.abs() < 1e-12 && big.re >= 0.0);
        }
        prop_assert!(sd.psi_plus.inner(&sd.psi_minus).norm() < 1e-12);
    }
}
