use std::f64::consts::{E, FRAC_1_SQRT_2};

use proptest::prelude::*;
use qsvt::poly_approx::*;
use qsvt::qsp_core::linspace;
use qsvt::QsvtError;

fn grid() -> Vec<f64> {
    linspace(-1.0, 1.0, CERT_GRID)
}

fn assert_parity(p: &ChebyshevPoly) {
    let odd = match p.parity() {
        Parity::Even => 1,
        Parity::Odd => 0,
        Parity::None => return,
    };
    assert!(p.coeffs().iter().skip(odd).step_by(2).all(|c| c.abs() < 1e-14));
    let s = if odd == 1 { 1.0 } else { -1.0 };
    for x in linspace(0.0, 1.0, 101) {
        assert!((p.eval(-x) - s * p.eval(x)).abs() < 1e-12);
    }
}

/// Power series for integer-order Bessel functions.
fn bessel_series(n: u32, t: f64) -> f64 {
    let mut term = (t / 2.0).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..80 {
        term *= -(t / 2.0).powi(2) / (m as f64 * (m + n) as f64);
        sum += term;
    }
    sum
}

#[test]
fn chebyshev_poly_validation() {
    assert!(ChebyshevPoly::new(vec![0.0, 1.0, 0.5], Parity::Odd).is_err());
    let p = ChebyshevPoly::new(vec![0.0, 1.0, 0.0, 0.0], Parity::Odd).unwrap();
    assert_eq!(p.degree(), 1);
    let back = ChebyshevPoly::from_json(&p.to_json()).unwrap();
    assert_eq!(back, p);
    assert!(ChebyshevPoly::from_json(r#"{"parity": "odd", "coeffs": [1.0]}"#).is_err());
}

#[test]
fn sign_examples() {
    let p = sign_poly(&ApproxSpec::new(0.1, 0.4), DEFAULT_DEGREE_CAP).unwrap();
    assert_eq!(p.parity(), Parity::Odd);
    assert_eq!(p.eval(0.0), 0.0);
    for x in [0.3, 0.5, 0.9] {
        assert!((p.eval(x) - 1.0).abs() <= 0.1 && (p.eval(-x) + 1.0).abs() <= 0.1);
    }
    for x in grid() {
        assert!(p.eval(x).abs() <= 1.0);
        if x.abs() >= 0.2 {
            assert!((p.eval(x) - x.signum()).abs() <= 0.1);
        }
    }
    assert_parity(&p);
}

#[test]
fn sign_degree_trend() {
    let d: Vec<usize> = [0.4, 0.2, 0.1]
        .iter()
        .map(|&gap| sign_poly(&ApproxSpec::new(0.1, gap), DEFAULT_DEGREE_CAP).unwrap().degree())
        .collect();
    assert!(d[0] < d[1] && d[1] < d[2], "{d:?}");
    assert!(d[1] <= 2 * d[0] + 4 && d[2] <= 2 * d[1] + 4, "{d:?}");
}

#[test]
fn sign_rejects_large_epsilon_and_small_cap() {
    assert!(sign_poly(&ApproxSpec::new(0.6, 0.2), DEFAULT_DEGREE_CAP).is_err());
    assert!(matches!(
        sign_poly(&ApproxSpec::new(1e-6, 0.01), 31),
        Err(QsvtError::DegreeCapExceeded { .. })
    ));
}

#[test]
fn threshold_examples() {
    let spec = ApproxSpec::new(0.2, 0.2).with_shift(0.5);
    let p = eigenvalue_threshold_poly(&spec, DEFAULT_DEGREE_CAP).unwrap();
    assert_eq!(p.parity(), Parity::Even);
    assert!(p.eval(0.2) >= 0.8 && p.eval(0.8) <= -0.8);
    assert!(p.eval(0.5).abs() <= 1.0);
    for x in grid() {
        assert!(p.eval(x).abs() <= 1.0);
        let ax = x.abs();
        if ax < 0.4 {
            assert!(p.eval(x) >= 0.8);
        } else if ax > 0.6 {
            assert!(p.eval(x) <= -0.8);
        }
    }
    assert_parity(&p);
    assert!(eigenvalue_threshold_poly(&ApproxSpec::new(0.2, 0.2).with_shift(1.2), 512).is_err());
}

#[test]
fn phase_estimation_examples() {
    let eps = 0.1;
    let p = phase_estimation_poly(&ApproxSpec::new(eps, 0.2), DEFAULT_DEGREE_CAP).unwrap();
    assert!(p.eval(0.0) >= 1.0 - eps);
    assert!(p.eval(1.0) <= -1.0 + eps);
    assert_parity(&p);
    for x in grid() {
        let ax = x.abs();
        if (ax - FRAC_1_SQRT_2).abs() > 0.1 {
            assert!((p.eval(x) - (FRAC_1_SQRT_2 - ax).signum()).abs() <= eps);
        }
    }
    assert!(phase_estimation_poly(&ApproxSpec::new(0.5, 0.2), 512).is_err());
}

#[test]
fn truncation_examples() {
    let spec = solve_truncation(5.0, 0.1).unwrap();
    assert!((spec.t_arg - E / 2.0 * 5.0).abs() < 1e-15);
    assert!((spec.eps_arg - 0.125).abs() < 1e-15);
    let resid = (spec.t_arg / spec.r_value).powf(spec.r_value) / spec.eps_arg - 1.0;
    assert!(resid.abs() <= 1e-10);
    assert!(spec.r_value > spec.t_arg);
    assert_eq!(spec.k_prime, (spec.r_value / 2.0).floor() as usize);
    assert!(solve_truncation(2.0, 0.1).unwrap().r_value < solve_truncation(8.0, 0.1).unwrap().r_value);
    assert!(solve_truncation(5.0, 0.5).is_err());
    assert!(solve_truncation(-1.0, 0.1).is_err());
}

#[test]
fn bessel_matches_power_series() {
    for n in 0..=20u32 {
        for &t in &[0.0, 0.5, 1.0, 2.5, 5.0, 8.0] {
            let want = bessel_series(n, t);
            assert!((bessel_j(n as i64, t) - want).abs() < 1e-12, "J_{n}({t})");
        }
    }
    assert!((bessel_j(-3, 2.0) + bessel_series(3, 2.0)).abs() < 1e-14);
}

#[test]
fn jacobi_anger_examples() {
    let (t, eps) = (5.0, 0.1);
    let c = jacobi_anger_cos(t, eps).unwrap();
    let s = jacobi_anger_sin(t, eps).unwrap();
    let kp = solve_truncation(t, eps).unwrap().k_prime;
    assert_eq!(c.degree(), 2 * kp);
    assert_eq!(s.degree(), 2 * kp + 1);
    assert!((c.eval(0.0) * (1.0 + eps) - 1.0).abs() <= eps);
    assert_eq!(s.eval(0.0), 0.0);
    for x in linspace(-1.0, 1.0, 1001) {
        assert!((c.eval(x) - (t * x).cos() / (1.0 + eps)).abs() <= 2.0 * eps);
        assert!((s.eval(x) - (t * x).sin() / (1.0 + eps)).abs() <= 2.0 * eps);
        assert!(c.eval(x).abs() <= 1.0 && s.eval(x).abs() <= 1.0);
    }
    assert_parity(&c);
    assert_parity(&s);
}

#[test]
fn inverse_examples() {
    assert_eq!(inverse_b(0.1, 2.0), 12);
    let p = inverse_poly(0.1, 2.0).unwrap();
    assert!((p.eval(0.75) - 4.0 / 3.0).abs() <= 0.2);
    assert_parity(&p);
    let d = inverse_d(0.1, 2.0) as f64;
    for x in grid() {
        assert!(p.eval(x).abs() <= 4.0 * d);
        if x.abs() >= 0.5 {
            assert!((p.eval(x) - 1.0 / x).abs() <= 0.2);
        }
    }
    assert!(inverse_poly(0.6, 2.0).is_err());
}

fn binomial(n: u64, k: u64) -> f64 {
    let mut r: u128 = 1;
    for i in 0..k as u128 {
        r = r * (n as u128 - i) / (i + 1);
    }
    r as f64
}

/// Chebyshev coefficients of `(1 - (1 - x^2)^b) / x`, summed exactly.
fn inverse_coeffs_exact(b: u64, terms: u64) -> Vec<f64> {
    let norm = 4f64.powi(-(b as i32));
    (0..terms)
        .map(|j| {
            let tail: f64 = (j + 1..=b).map(|i| binomial(2 * b, b + i)).sum();
            4.0 * if j % 2 == 0 { 1.0 } else { -1.0 } * norm * tail
        })
        .collect()
}

#[test]
fn inverse_series_identity() {
    for b in [1u64, 3, 7, 12, 20, 30] {
        let c = inverse_coeffs_exact(b, b);
        for x in linspace(0.1, 1.0, 91) {
            let series: f64 = c.iter().enumerate().map(|(j, cj)| cj * ((2 * j + 1) as f64 * x.acos()).cos()).sum();
            let g = (1.0 - (1.0 - x * x).powi(b as i32)) / x;
            assert!((series - g).abs() <= 1e-8, "b={b} x={x}");
            assert!((-series - (-g)).abs() <= 1e-8);
        }
    }
}

#[test]
fn inverse_coefficients_match_exact_sum() {
    for (eps, kappa) in [(0.1, 2.0), (0.3, 3.0), (0.1, 1.0), (0.3, 1.5)] {
        let p = inverse_poly(eps, kappa).unwrap();
        let b = inverse_b(eps, kappa) as u64;
        let d = inverse_d(eps, kappa) as u64;
        let want = inverse_coeffs_exact(b, d + 1);
        for (j, w) in want.iter().enumerate() {
            let got = p.coeffs().get(2 * j + 1).copied().unwrap_or(0.0);
            assert!((got - w).abs() <= 1e-10 * w.abs().max(1.0), "eps={eps} kappa={kappa} j={j}");
        }
        if d + 1 >= b {
            for x in linspace(0.1, 1.0, 31) {
                assert!((p.eval(x) - (1.0 - (1.0 - x * x).powi(b as i32)) / x).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn rect_examples() {
    let (eps, kappa) = (0.1, 2.0);
    let p = rect_poly(eps, kappa, DEFAULT_DEGREE_CAP).unwrap();
    assert_eq!(p.parity(), Parity::Even);
    assert!(p.eval(0.0) <= eps && p.eval(0.0) >= 0.0);
    assert!(p.eval(1.0) >= 1.0 - eps);
    assert_parity(&p);
    for x in grid() {
        let v = p.eval(x);
        assert!(v.abs() <= 1.0);
        if x.abs() >= 0.5 {
            assert!((1.0 - eps..=1.0).contains(&v));
        }
        if x.abs() <= 0.25 {
            assert!((0.0..=eps).contains(&v));
        }
    }
}

#[test]
fn matrix_inversion_examples() {
    for (eps, kappa) in [(0.05, 2.0), (0.1, 4.0)] {
        let p = matrix_inversion_poly(eps, kappa, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(p.parity(), Parity::Odd);
        let v1 = 2.0 * kappa * p.eval(1.0);
        assert!((1.0 - eps..=1.0 + eps).contains(&v1), "{v1}");
        for x in grid() {
            assert!(p.eval(x).abs() <= 1.0);
            if x.abs() >= 1.0 / kappa {
                assert!((p.eval(x) - 0.5 / (kappa * x)).abs() <= eps / (2.0 * kappa));
            }
        }
        let inv = inverse_poly(eps / 4.0, 2.0 * kappa).unwrap();
        let rect = rect_poly(matrix_inversion_rect_epsilon(eps, kappa), kappa, DEFAULT_DEGREE_CAP).unwrap();
        assert!(p.degree() <= inv.degree() + rect.degree());
        assert_parity(&p);
    }
}

#[test]
fn eigenstate_filter_examples() {
    let f = eigenstate_filter_poly(15, 0.3).unwrap();
    assert_eq!(f.degree(), 30);
    assert!((f.eval(0.0) - 1.0).abs() < 1e-10);
    for x in grid() {
        assert!(f.eval(x).abs() <= 1.0 + 1e-12);
    }
    let f5 = eigenstate_filter_poly(5, 0.3).unwrap();
    assert!(f.eval(0.3).abs() < 1.0 && f.eval(0.3).abs() < f5.eval(0.3).abs());
    assert_parity(&f);
    assert!(eigenstate_filter_poly(0, 0.3).is_err());
}

#[test]
fn gibbs_and_relu_fits() {
    let g = gibbs_poly(3.5, 20).unwrap();
    assert!((g.poly.eval(0.0) - 1.0).abs() <= g.residual + 1e-12);
    assert_parity(&g.poly);
    let r = relu_poly(0.6, 15.0, 20).unwrap();
    let soft = (1.0 + (-9.0f64).exp()).ln() / 15.0;
    assert!((r.poly.eval(0.0) - soft).abs() <= r.residual + 1e-4, "{} vs {soft}, residual {}", r.poly.eval(0.0), r.residual);
    assert_parity(&r.poly);
    assert!(gibbs_poly(3.5, 21).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sign_certificate_holds(eps in 0.01f64..0.4, gap in 0.05f64..0.5) {
        let p = sign_poly(&ApproxSpec::new(eps, gap), DEFAULT_DEGREE_CAP).unwrap();
        for x in grid() {
            prop_assert!(p.eval(x).abs() <= 1.0);
            if x.abs() >= gap / 2.0 {
                prop_assert!((p.eval(x) - x.signum()).abs() <= eps);
            }
        }
    }

    #[test]
    fn jacobi_anger_error_bound(t in 0.1f64..12.0, eps in 0.001f64..0.3) {
        let c = jacobi_anger_cos(t, eps).unwrap();
        let s = jacobi_anger_sin(t, eps).unwrap();
        for x in linspace(-1.0, 1.0, 501) {
            prop_assert!((c.eval(x) * (1.0 + eps) - (t * x).cos()).abs() <= eps);
            prop_assert!((s.eval(x) * (1.0 + eps) - (t * x).sin()).abs() <= eps);
        }
    }

    #[test]
    fn truncation_residual(t in 0.01f64..50.0, eps in 0.001f64..0.36) {
        let spec = solve_truncation(t, eps).unwrap();
        let lhs = spec.r_value * (spec.t_arg / spec.r_value).ln();
        prop_assert!((lhs - spec.eps_arg.ln()).abs() <= 1e-10 * spec.eps_arg.ln().abs());
    }
}
