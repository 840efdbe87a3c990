mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use sepavg::averaging::{ensemble_analytic_curve, mode_grid, AveragingMode};
use sepavg::criteria::{
    band_check, chsh_optimize, check_all, diagonal_sum_photon, diagonal_sum_spin, ppt_check, pure_state_check,
    TSIRELSON_BOUND,
};
use sepavg::states::{ensemble_density, werner_state, DensityMatrix, EnsembleSpec, NamedState, QubitParams, WernerParams};
use sepavg::{Status, UnitVector3};

fn random_pure<R: Rng>(rng: &mut R, product: bool) -> DensityMatrix {
    let mut c = || num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let v = if product {
        let (a, b, x, y) = (c(), c(), c(), c());
        [a * x, a * y, b * x, b * y]
    } else {
        [c(), c(), c(), c()]
    };
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    DensityMatrix::from_pure(&v.map(|z| z / n)).unwrap()
}

#[test]
fn pure_state_test_agrees_with_ppt() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    for k in 0..1000 {
        let rho = random_pure(&mut rng, k % 2 == 0);
        let g = pure_state_check(&rho, 200, k as u64).unwrap();
        let p = ppt_check(&rho).unwrap();
        assert_eq!(g.status, p.status, "state {k}: G {} vs PPT {}", g.statistic, p.statistic);
        if k % 2 == 0 {
            assert!(g.statistic < 1e-12, "product state {k}: {}", g.statistic);
        }
        agree += 1;
    }
    assert_eq!(agree, 1000);
}

#[test]
fn named_state_diagonal_sums() {
    let cases = [
        (NamedState::Singlet, -3.0, -2.0),
        (NamedState::Scalar, 1.0, 2.0),
        (NamedState::Pseudoscalar, -3.0, -2.0),
    ];
    for (kind, spin, photon) in cases {
        let rho = sepavg::states::named_two_qubit(kind);
        assert!((diagonal_sum_spin(&rho).unwrap().statistic - spin).abs() < 1e-12, "{kind}");
        assert!((diagonal_sum_photon(&rho).unwrap().statistic - photon).abs() < 1e-12, "{kind}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chsh_optimum_matches_closed_form(v in common::pure_vector(), t in 0.0f64..=1.0) {
        let pure = DensityMatrix::from_pure(&v).unwrap();
        let mixed = DensityMatrix::new(
            &pure.matrix().scale_real(t) + &DensityMatrix::maximally_mixed().matrix().scale_real(1.0 - t),
        )
        .unwrap();
        let best = chsh_optimize(&mixed, 16, 3);
        let oracle = common::chsh_max_oracle(mixed.matrix());
        prop_assert!((best.s - oracle).abs() < 1e-7, "{} vs {}", best.s, oracle);
        prop_assert!(best.s <= TSIRELSON_BOUND + 1e-9);
    }

    #[test]
    fn separable_ensembles_never_flagged(e in common::ensemble(50)) {
        let rho = ensemble_density(&e).unwrap();
        let r = check_all(&rho, 100, 1).unwrap();
        for v in [Some(&r.ppt), Some(&r.diagonal_sum_spin), Some(&r.diagonal_sum_photon), r.pure_state.as_ref()].into_iter().flatten() {
            prop_assert_eq!(v.status, Status::ConsistentWithSeparable, "{}", v);
        }
        let m = match e.mode() { sepavg::EnsembleMode::Spin => vec![AveragingMode::Spin], _ => vec![AveragingMode::PhotonGeometric, AveragingMode::PhotonHilbert] };
        for mode in m {
            let curve = ensemble_analytic_curve(&e, mode, &mode_grid(mode, 32)).unwrap();
            prop_assert_eq!(band_check(&curve, mode).unwrap().verdict.status, Status::ConsistentWithSeparable);
        }
        prop_assert!(!chsh_optimize(&rho, 4, 2).violates_local_bound());
    }
}

#[test]
fn werner_chsh_is_linear_in_beta() {
    for beta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let rho = werner_state(WernerParams::singlet(beta).unwrap()).unwrap();
        let s = chsh_optimize(&rho, 16, 9).s;
        assert!((s - TSIRELSON_BOUND * beta).abs() < 1e-9, "beta {beta}: {s}");
    }
}

#[test]
fn mixed_mode_products_are_rejected() {
    let e = EnsembleSpec::product(
        QubitParams::Spin(UnitVector3::normalized(0.3, -0.2, 0.9).unwrap()),
        QubitParams::Photon { theta: 0.7, phi: 2.1 },
    );
    assert!(e.is_err());
}
