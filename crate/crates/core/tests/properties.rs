use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybrid_tsac::channel::{generate_channel, steering_vector, ArrayGeometry, ChannelParams};
use hybrid_tsac::combiners::{
    arv_only, arv_tsac, dft_matrix, svd_combiner, svd_dft_combiner, theorem_combiner, AngleCodebook,
};
use hybrid_tsac::linalg::{random_semi_unitary, semi_unitary_defect, CMat};
use hybrid_tsac::metrics::{
    general_upper_bound, mutual_information, rate_theorem_form, svd_upper_bound, MiContext,
    SingularProfile,
};
use hybrid_tsac::AdcModel;

fn channel(n_r: usize, n_u: usize, mean_paths: f64, seed: u64) -> CMat {
    let g = ArrayGeometry::half_wavelength(n_r).unwrap();
    let params = ChannelParams::new(n_u, mean_paths, g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_channel(&params, &mut rng).matrix().clone()
}

/// `(n_r, n_u, n_rf)` with `n_u <= n_rf < n_r`.
fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (4usize..=32).prop_flat_map(|n_r| {
        (1usize..=(n_r / 2).min(6))
            .prop_flat_map(move |n_u| (n_u..n_r).prop_map(move |n_rf| (n_r, n_u, n_rf)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_vectors_have_unit_norm(n in 1usize..200, theta in -1.0f64..=1.0) {
        let g = ArrayGeometry::half_wavelength(n).unwrap();
        let a = steering_vector(&g, theta).unwrap();
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn every_design_is_semi_unitary(
        (n_r, n_u, n_rf) in dims(),
        seed in any::<u64>(),
    ) {
        let h = channel(n_r, n_u, 3.0, seed);
        let g = ArrayGeometry::half_wavelength(n_r).unwrap();
        let book = AngleCodebook::new(&g, n_r).unwrap();
        for c in [
            arv_tsac(&h, n_rf, &book).unwrap(),
            arv_only(&h, n_rf, &book).unwrap(),
            svd_combiner(&h, n_rf).unwrap(),
            svd_dft_combiner(&h, n_rf).unwrap(),
        ] {
            prop_assert!(semi_unitary_defect(c.effective()) < 1e-10, "{}", c.design());
        }
    }

    #[test]
    fn mi_never_exceeds_general_bound(
        (n_r, n_u, n_rf) in dims(),
        bits in 1u32..=6,
        snr_db in -20.0f64..40.0,
        seed in any::<u64>(),
    ) {
        let h = channel(n_r, n_u, 3.0, seed);
        let adc = AdcModel::new(bits).unwrap();
        let ctx = MiContext::new(10f64.powf(snr_db / 10.0), adc).unwrap();
        let bound = general_upper_bound(n_u, n_rf, &adc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let w = random_semi_unitary(n_r, n_rf, &mut rng);
        for w in [w, theorem_combiner(&h, n_rf, n_u).unwrap().effective().clone()] {
            let mi = mutual_information(&h, &w, &ctx).unwrap();
            prop_assert!(mi >= -1e-12 && mi <= bound + 1e-9, "mi={mi} bound={bound}");
        }
    }

    #[test]
    fn svd_design_stays_below_its_bound(
        (n_r, n_u, n_rf) in dims(),
        bits in 1u32..=5,
        snr_db in -10.0f64..60.0,
        seed in any::<u64>(),
    ) {
        let h = channel(n_r, n_u, 3.0, seed);
        let adc = AdcModel::new(bits).unwrap();
        let ctx = MiContext::new(10f64.powf(snr_db / 10.0), adc).unwrap();
        let mi = mutual_information(&h, svd_combiner(&h, n_rf).unwrap().effective(), &ctx).unwrap();
        prop_assert!(mi < svd_upper_bound(n_u, &adc).unwrap());
    }

    #[test]
    fn two_stage_matrix_mi_matches_closed_form(
        (n_r, n_u, n_rf) in dims(),
        bits in 1u32..=4,
        snr_db in -10.0f64..30.0,
        seed in any::<u64>(),
    ) {
        let h = channel(n_r, n_u, 3.0, seed);
        let ctx = MiContext::new(10f64.powf(snr_db / 10.0), AdcModel::new(bits).unwrap()).unwrap();
        let w = theorem_combiner(&h, n_rf, n_u).unwrap();
        let matrix = mutual_information(&h, w.effective(), &ctx).unwrap();
        let closed = rate_theorem_form(&SingularProfile::from_channel(&h, n_rf), &ctx);
        prop_assert!((matrix - closed).abs() < 1e-8 * closed.max(1.0));
    }

    #[test]
    fn unquantized_mi_is_invariant_to_unitary_second_stage(
        (n_r, n_u, n_rf) in dims(),
        seed in any::<u64>(),
    ) {
        let h = channel(n_r, n_u, 3.0, seed);
        let ctx = MiContext::new(2.0, AdcModel::unquantized()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let w1 = random_semi_unitary(n_r, n_rf, &mut rng);
        let q = random_semi_unitary(n_rf, n_rf, &mut rng);
        let a = mutual_information(&h, &w1, &ctx).unwrap();
        let b = mutual_information(&h, &(&w1 * &q), &ctx).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }
}

#[test]
fn dft_matrix_is_unitary_and_constant_modulus() {
    for n in [1usize, 2, 7, 22, 64] {
        let f = dft_matrix(n);
        assert!(semi_unitary_defect(&f) < 1e-12);
        let m = 1.0 / (n as f64).sqrt();
        assert!(f.iter().all(|z: &Complex64| (z.norm() - m).abs() < 1e-12));
    }
}

#[test]
fn spreading_helps_svd_in_almost_every_channel() {
    let adc = AdcModel::new(2).unwrap();
    let ctx = MiContext::new(1.0, adc).unwrap();
    let wins = (0..100)
        .filter(|&s| {
            let h = channel(64, 4, 3.0, s);
            let dft = mutual_information(&h, svd_dft_combiner(&h, 16).unwrap().effective(), &ctx);
            let svd = mutual_information(&h, svd_combiner(&h, 16).unwrap().effective(), &ctx);
            dft.unwrap() >= svd.unwrap()
        })
        .count();
    assert!(wins >= 95, "SVD_DFT won {wins}/100");
}

#[test]
fn theorem_combiner_matches_closed_form_over_many_draws() {
    let adc = AdcModel::new(3).unwrap();
    let ctx = MiContext::new(3.0, adc).unwrap();
    let mut worst = 0.0_f64;
    for s in 0..1000 {
        let h = channel(24, 3, 2.0, 10_000 + s);
        let w = theorem_combiner(&h, 10, 3).unwrap();
        let matrix = mutual_information(&h, w.effective(), &ctx).unwrap();
        let closed = rate_theorem_form(&SingularProfile::from_channel(&h, 10), &ctx);
        worst = worst.max((matrix - closed).abs());
    }
    assert!(worst < 1e-8, "worst={worst}");
}
