use covertctl_core::analytics::{
    bound_report, covert_gain_bound_gain_change, kl_gain_change, kl_gaussian_zero_mean, kl_reset,
    origin_reset_covariance, reset_covariance, steady_covariance, steady_det_closed_form,
    steady_precision, transient_covariance, CovMatrix,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn assert_psd(c: &CovMatrix) {
    let m = c.matrix();
    assert!((m - m.transpose()).amax() == 0.0 || (m - m.transpose()).amax() < 1e-12);
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let radius = eig.iter().fold(0.0f64, |r, v| r.max(v.abs()));
    assert!(eig.min() >= -1e-9 * radius);
}

proptest! {
    #[test]
    fn builders_are_symmetric_psd(a in -0.98f64..0.98, sigma in 0.1f64..5.0, n in 2usize..25, tau_frac in 0.0f64..1.0) {
        let tau = 1 + ((n - 2) as f64 * tau_frac).round() as usize;
        for c in [
            transient_covariance(a, sigma, n).unwrap(),
            steady_covariance(a, sigma, n).unwrap(),
            steady_precision(a, sigma, n).unwrap(),
            reset_covariance(a, sigma, n, tau).unwrap(),
            origin_reset_covariance(a, sigma, n, tau).unwrap(),
        ] {
            assert_psd(&c);
        }
    }

    #[test]
    fn kl_is_nonnegative(a in -0.95f64..0.95, b in -0.95f64..0.95, n in 1usize..20, tau_frac in 0.0f64..1.0) {
        let s0 = steady_covariance(a, 1.0, n).unwrap();
        prop_assert!(kl_gaussian_zero_mean(&s0, &steady_covariance(b, 1.0, n).unwrap()).unwrap() >= -1e-10);
        prop_assert_eq!(kl_gaussian_zero_mean(&s0, &s0).unwrap(), 0.0);
        if n >= 2 {
            let tau = 1 + ((n - 2) as f64 * tau_frac).round() as usize;
            let r = reset_covariance(a, 1.0, n, tau).unwrap();
            let kl = kl_gaussian_zero_mean(&s0, &r).unwrap();
            prop_assert!((kl - kl_reset(a).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn covert_gain_change_meets_target(a in 0.02f64..0.95, eps in 0.02f64..1.0, frac in 0.0f64..1.0, neg: bool) {
        let bmax = covert_gain_bound_gain_change(a, eps).unwrap();
        let b = a + frac * (bmax - a);
        prop_assume!(b > a && b < bmax);
        let (a, b) = if neg { (-a, -b) } else { (a, b) };
        let limit = 2.0 * b / (b - a);
        for n in 1..=40usize {
            if (n as f64) >= limit {
                break;
            }
            let kl = kl_gain_change(a, b, n).unwrap();
            let r = bound_report(kl).unwrap();
            prop_assert!(1.0 - (kl / 2.0).sqrt() >= 1.0 - eps - 1e-12, "n={} kl={}", n, kl);
            prop_assert!(r.error_sum_lower >= 1.0 - eps - 1e-12);
        }
    }

    #[test]
    fn bound_report_in_unit_interval(kl in 0.0f64..1e6) {
        let r = bound_report(kl).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.tv_upper));
        prop_assert!((0.0..=1.0).contains(&r.error_sum_lower));
    }
}

#[test]
fn determinant_matches_lu_at_eight() {
    let (a, n) = (0.7f64, 8);
    let dense = DMatrix::from_fn(n, n, |i, j| a.powi((i as i32 - j as i32).abs()) / (1.0 - a * a));
    let det = dense.lu().determinant();
    let closed = steady_det_closed_form(a, 1.0, n).unwrap();
    assert!((closed - det).abs() <= 1e-9 * det);
}

#[test]
fn gain_change_kl_matches_numeric_example() {
    let numeric = kl_gaussian_zero_mean(
        &steady_covariance(0.3, 1.0, 4).unwrap(),
        &steady_covariance(0.5, 1.0, 4).unwrap(),
    )
    .unwrap();
    assert!((numeric - kl_gain_change(0.3, 0.5, 4).unwrap()).abs() <= 1e-9);
}
