//! Randomized invariants over the library surface.

use num_complex::Complex64;
use proptest::prelude::*;

use qbilliard::kernel::kernel_closed;
use qbilliard::model::{normalize, GaussianPacket, KernelParams};
use qbilliard::nls::{self, CoefficientField, WaveField};
use qbilliard::selfcons::{alpha_roots, width_equation, RootSign};
use qbilliard::specfun;
use qbilliard::stability::{classify, Classification};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_is_symmetric(x in 0.05f64..5.0, y in 0.05f64..5.0) {
        let b1 = specfun::beta(x, y).unwrap();
        let b2 = specfun::beta(y, x).unwrap();
        prop_assert!((b1 - b2).abs() <= 1e-12 * b1.abs());
    }

    #[test]
    fn gamma_recurrence(x in 0.1f64..30.0) {
        let g1 = specfun::gamma(x + 1.0).unwrap();
        let g2 = x * specfun::gamma(x).unwrap();
        prop_assert!((g1 - g2).abs() <= 1e-12 * g1.abs());
    }

    #[test]
    fn bessel_i0_bounded_below_and_monotone(x in 0.0f64..80.0, dx in 0.01f64..5.0) {
        let lo = specfun::bessel_i0(x).unwrap();
        let hi = specfun::bessel_i0(x + dx).unwrap();
        prop_assert!(lo >= 1.0);
        prop_assert!(hi > lo);
    }

    #[test]
    fn legendre_bounded_on_unit_interval(n in 0u32..24, x in -1.0f64..1.0) {
        let p = specfun::legendre_p(n, x);
        prop_assert!(p.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn binomial_pascal_identity(n in 1u64..40, k in 0i64..40) {
        prop_assume!(k <= n as i64);
        let lhs = specfun::binomial(n, k);
        let rhs = specfun::binomial(n - 1, k) + specfun::binomial(n - 1, k - 1);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
    }

    #[test]
    fn normalize_is_idempotent_and_normalized(
        a in 0.05f64..20.0,
        c_re in -3.0f64..3.0,
        c_im in -3.0f64..3.0,
    ) {
        let packet = GaussianPacket::new(a, [0.0, 0.0], Complex64::new(c_re, c_im)).unwrap();
        let n1 = normalize(&packet);
        let n2 = normalize(&n1);
        prop_assert!(n1.is_normalized());
        prop_assert_eq!(n1.c, n2.c);
        prop_assert_eq!(n1.c.im, packet.c.im);
    }

    #[test]
    fn scattered_width_roots_satisfy_vieta(a in 0.01f64..80.0) {
        let (plus, minus) = alpha_roots(a).unwrap();
        prop_assert!((plus + minus - a).abs() <= 1e-10 * a.max(1.0));
        let product = std::f64::consts::SQRT_2 / 2.0 * a;
        prop_assert!((plus * minus + product).abs() <= 1e-10 * product);
        prop_assert!(plus > 0.0 && minus < 0.0);
    }

    #[test]
    fn width_equation_plus_branch_monotone(a in 0.01f64..40.0, da in 0.001f64..5.0) {
        prop_assert!(width_equation(RootSign::Plus, a + da) > width_equation(RootSign::Plus, a));
        prop_assert!(width_equation(RootSign::Minus, a) <= 0.0);
    }

    #[test]
    fn kernel_symmetric_for_drift_free_packets(
        a in 0.2f64..3.0,
        px in -1.0f64..1.0, py in -1.0f64..1.0,
        qx in -1.0f64..1.0, qy in -1.0f64..1.0,
        k in 0.0f64..2.0,
        eps in 0.02f64..0.9,
    ) {
        let packet = GaussianPacket::isotropic(a, 0.0).unwrap();
        let params = KernelParams::coulomb(1.0, eps).unwrap();
        let v1 = kernel_closed(k, [px, py], [qx, qy], &packet, &params).unwrap();
        let v2 = kernel_closed(k, [qx, qy], [px, py], &packet, &params).unwrap();
        prop_assert!((v1 - v2).norm() <= 1e-12 * v1.norm().max(1e-300));
    }

    #[test]
    fn kernel_linear_in_coupling(
        coupling in 0.1f64..5.0,
        k in 0.0f64..2.0,
        eps in 0.05f64..0.9,
    ) {
        let packet = GaussianPacket::isotropic(1.0, 0.0).unwrap();
        let base = KernelParams::coulomb(coupling, eps).unwrap();
        let doubled = KernelParams::coulomb(2.0 * coupling, eps).unwrap();
        let p = [0.3, -0.1];
        let q = [-0.2, 0.4];
        let v1 = kernel_closed(k, p, q, &packet, &base).unwrap();
        let v2 = kernel_closed(k, p, q, &packet, &doubled).unwrap();
        prop_assert!((v2 - v1 * 2.0).norm() <= 1e-12 * v2.norm().max(1e-300));
    }

    #[test]
    fn classify_depends_only_on_threshold_side(lambda in -10.0f64..10.0) {
        prop_assume!((lambda - 2.0).abs() > 1e-9);
        let expected = if lambda < 2.0 {
            Classification::Stable
        } else {
            Classification::Unstable
        };
        prop_assert_eq!(classify(lambda).unwrap(), expected);
    }

    #[test]
    fn nls_step_preserves_norm(
        amp in 0.1f64..1.5,
        width in 0.5f64..3.0,
        w in -2.0f64..2.0,
        dt in 0.001f64..0.01,
    ) {
        let field = WaveField::from_fn(vec![32], vec![20.0], 0.0, |x| {
            Complex64::new(amp * (-0.5 * (x[0] / width).powi(2)).exp(), 0.0)
        })
        .unwrap();
        let coeff = CoefficientField::constant(w);
        let stepped = nls::step(&field, &coeff, dt).unwrap();
        let n0 = nls::norm(&field);
        let n1 = nls::norm(&stepped);
        prop_assert!((n1 - n0).abs() <= 1e-12 * n0);
    }

    #[test]
    fn nls_snapshot_round_trips(
        amp in -2.0f64..2.0,
        t in -5.0f64..5.0,
    ) {
        let field = WaveField::from_fn(vec![16], vec![7.5], t, |x| {
            Complex64::new(amp * x[0], -amp + x[0])
        })
        .unwrap();
        let mut buf = Vec::new();
        nls::write_snapshot(&field, &mut buf).unwrap();
        let back = nls::read_snapshot(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(back.values, field.values);
        prop_assert_eq!(back.time, field.time);
    }
}
