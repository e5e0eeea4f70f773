mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use approx::assert_abs_diff_eq;
use common::{b_substituted, incomplete_f, k_trapezoid};
use hypersq::special_fn::b_integral_with;
use hypersq::{
    agm, b_integral, elliptic_k, jacobi_sn_cn_dn, lambda_for_aspect, rect_constant, Modulus,
    Tolerances, LAMBDA_0,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn m(k: f64) -> Modulus {
    Modulus::new(k).unwrap()
}

fn aspect(l: Modulus) -> f64 {
    2.0 * elliptic_k(l).unwrap() / elliptic_k(l.complement()).unwrap()
}

#[test]
fn agm_examples() {
    assert_eq!(agm(1.0, 1.0).unwrap(), 1.0);
    assert_eq!(agm(1.0, 0.5).unwrap(), agm(0.5, 1.0).unwrap());
    assert_abs_diff_eq!(agm(1.0, 0.5).unwrap(), agm(0.75, 0.5f64.sqrt()).unwrap(), epsilon = 1e-15);
    assert_abs_diff_eq!(agm(1.0, 0.5).unwrap(), 0.728_395_515_523_453, epsilon = 1e-15);
    let kp = (1.0f64 - 0.25).sqrt();
    assert_abs_diff_eq!(agm(1.0, kp).unwrap(), PI / (2.0 * k_trapezoid(0.5)), epsilon = 1e-14);
    assert!(agm(0.0, 1.0).is_err());
    assert!(agm(-1.0, 1.0).is_err());
}

#[test]
fn elliptic_k_examples() {
    assert_eq!(elliptic_k(m(0.0)).unwrap(), FRAC_PI_2);
    assert_abs_diff_eq!(elliptic_k(m(FRAC_1_SQRT_2)).unwrap(), 1.854_074_677_301_371_9, epsilon = 1e-14);
    assert_abs_diff_eq!(elliptic_k(m(0.9)).unwrap(), k_trapezoid(0.9), epsilon = 1e-12);
    assert_abs_diff_eq!(elliptic_k(m(0.9)).unwrap(), 2.280_549_138_422_77, epsilon = 1e-13);
    assert!(elliptic_k(m(1.0)).is_err());
    assert!(Modulus::new(1.5).is_err());
}

#[test]
fn elliptic_k_matches_quadrature_on_random_moduli() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut prev = (0.0, 0.0);
    let mut ks: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..0.999)).collect();
    ks.sort_by(f64::total_cmp);
    for k in ks {
        let v = elliptic_k(m(k)).unwrap();
        assert!((v - k_trapezoid(k)).abs() < 1e-11, "k = {k}");
        if k > prev.0 {
            assert!(v > prev.1, "K not increasing at k = {k}");
        }
        prev = (k, v);
    }
}

#[test]
fn jacobi_examples() {
    assert_eq!(jacobi_sn_cn_dn(0.0, m(0.8)).unwrap(), (0.0, 1.0, 1.0));
    let k = m(0.5);
    let (sn, cn, dn) = jacobi_sn_cn_dn(elliptic_k(k).unwrap(), k).unwrap();
    assert_abs_diff_eq!(sn, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(cn, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(dn, k.k_prime(), epsilon = 1e-12);

    let (sn, cn, dn) = jacobi_sn_cn_dn(0.7, m(0.3)).unwrap();
    let phi = sn.asin();
    assert_abs_diff_eq!(incomplete_f(phi, 0.3), 0.7, epsilon = 1e-12);
    assert_abs_diff_eq!(sn, 0.640_648_539_720_262, epsilon = 1e-14);
    assert_abs_diff_eq!(cn, 0.767_834_258_518_266, epsilon = 1e-14);
    assert_abs_diff_eq!(dn, 0.981_356_841_505_620, epsilon = 1e-14);
}

#[test]
fn jacobi_identities_on_random_arguments() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let (u, k) = (rng.random_range(-8.0..8.0), rng.random_range(0.0..0.999));
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, m(k)).unwrap();
        assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12, "u={u} k={k}");
        assert!((dn * dn + k * k * sn * sn - 1.0).abs() < 1e-12, "u={u} k={k}");
        // d sn/du = cn·dn.
        let h = 1e-5;
        let d = (jacobi_sn_cn_dn(u + h, m(k)).unwrap().0 - jacobi_sn_cn_dn(u - h, m(k)).unwrap().0) / (2.0 * h);
        assert!((d - cn * dn).abs() < 1e-8, "u={u} k={k}");
    }
}

#[test]
fn lambda_for_aspect_examples() {
    let tol = Tolerances::default();
    assert_abs_diff_eq!(lambda_for_aspect(1.0, &tol).unwrap().k(), LAMBDA_0, epsilon = 1e-10);
    assert_abs_diff_eq!(lambda_for_aspect(2.0, &tol).unwrap().k(), FRAC_1_SQRT_2, epsilon = 1e-10);
    let l3 = lambda_for_aspect(3.0, &tol).unwrap();
    assert!((aspect(l3) - 3.0).abs() < 1e-10);
    assert_abs_diff_eq!(l3.k(), 0.930_648_092_854_789, epsilon = 1e-9);
    assert!(lambda_for_aspect(0.5, &tol).is_err());
}

#[test]
fn lambda_round_trips() {
    let tol = Tolerances::default();
    for kappa in [1.0, 1.2, 1.7, 2.5, 4.0, 7.5] {
        let l = lambda_for_aspect(kappa, &tol).unwrap();
        assert!((aspect(l) - kappa).abs() < 1e-10, "kappa = {kappa}");
    }
}

#[test]
fn rect_constant_examples() {
    let c0 = rect_constant(m(LAMBDA_0)).unwrap();
    assert_abs_diff_eq!(c0, 1.854_074_677_301_371_9, epsilon = 1e-12);
    assert_abs_diff_eq!(c0, 2.0 * common::c_simpson(), epsilon = 1e-12);
    assert_abs_diff_eq!(rect_constant(m(0.5)).unwrap(), 3.923_911_305_261_54, epsilon = 1e-12);
    assert!(rect_constant(m(0.0)).is_err());
    assert!(rect_constant(m(1.0)).is_err());
}

#[test]
fn rect_constant_is_continuous_away_from_its_pole() {
    // cn(K(λ), λ') vanishes at λ = √2/2.
    let c = |l: f64| rect_constant(m(l)).unwrap();
    for (lo, hi) in [(0.05f64, 0.65f64), (0.76, 0.95)] {
        let n = ((hi - lo) / 1e-3).round() as usize + 1;
        let vals: Vec<f64> = (0..n).map(|i| c(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect();
        for w in vals.windows(2) {
            assert!((w[1] - w[0]).abs() < 0.05 * w[0], "jump {w:?} on [{lo}, {hi}]");
        }
    }
    assert!(c(FRAC_1_SQRT_2 - 1e-6) > 1e5 && c(FRAC_1_SQRT_2 + 1e-6) > 1e5);
    assert!(rect_constant(m(FRAC_1_SQRT_2)).is_err());
}

#[test]
fn rect_constant_stable_under_tolerance_refinement() {
    // The kernel runs to machine precision; the oracle is a refined
    // evaluation through quadrature and the unreduced formula.
    let l = 0.5;
    let (kk, kkp) = (k_trapezoid(l), k_trapezoid((1.0f64 - l * l).sqrt()));
    let lp = m((1.0f64 - l * l).sqrt());
    let (sn, cn, dn) = jacobi_sn_cn_dn(kk, lp).unwrap();
    assert!(kk < kkp);
    assert_abs_diff_eq!(rect_constant(m(l)).unwrap(), kk * dn / (sn * cn), epsilon = 1e-10);
}

#[test]
fn b_integral_examples() {
    assert_eq!(b_integral(0.0).unwrap(), 0.0);
    assert_abs_diff_eq!(b_integral(0.625623).unwrap(), b_substituted(0.625623), epsilon = 1e-12);
    assert_abs_diff_eq!(b_integral(0.625623).unwrap(), 0.635_879_476_745_65, epsilon = 1e-12);
    assert_abs_diff_eq!(b_integral(1.0).unwrap(), b_substituted(1.0), epsilon = 1e-12);
    assert_abs_diff_eq!(b_integral(1.0).unwrap(), SQRT_2_C, epsilon = 1e-12);
    assert!(b_integral(1.01).is_err());
    assert!(b_integral(-0.1).is_err());
    let loose = Tolerances::default().with_tol(1e-6);
    assert_abs_diff_eq!(b_integral_with(0.9, &loose).unwrap(), b_substituted(0.9), epsilon = 1e-6);
}

const SQRT_2_C: f64 = 1.311_028_777_146_06;

#[test]
fn b_integral_strictly_increasing() {
    let vals: Vec<f64> = (0..=1000).map(|i| b_integral(i as f64 / 1000.0).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}
