use std::f64::consts::PI;
use std::sync::Arc;

use fracwave::spectral::{
    apply_fractional_laplacian, build_basis, semigroup_multiplier, sobolev_norm, to_grid,
    to_spectral, zm_norm, DomainSpec, EigenBasis, FractionalOrder, GridField, QuadratureConfig,
    SpectralField, TimeGrid, TimeSeriesField,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn basis_1d(n: usize) -> Arc<EigenBasis<f64>> {
    Arc::new(build_basis(&DomainSpec::interval(PI, n).unwrap()).unwrap())
}

fn basis_2d() -> Arc<EigenBasis<f64>> {
    Arc::new(build_basis(&DomainSpec::rectangle([1.0, 1.5], [6, 5]).unwrap()).unwrap())
}

proptest! {
    #[test]
    fn parseval_and_round_trip(values in prop::collection::vec(-5.0f64..5.0, 30), two_d in any::<bool>()) {
        let b = if two_d { basis_2d() } else { basis_1d(30) };
        let g = GridField::new(b.domain().clone(), Array1::from(values)).unwrap();
        let c = to_spectral(&g, &b).unwrap();
        let norm = g.l2_norm();
        prop_assert!((c.l2_norm() - norm).abs() <= 1e-12 * norm.max(1e-300));
        let back = to_grid(&c);
        let err = (&back.values - &g.values).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(err <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn poincare_inequality(coeffs in prop::collection::vec(-3.0f64..3.0, 16), s in 0.05f64..0.95) {
        let b = basis_1d(16);
        let c = SpectralField::new(b.clone(), Array1::from(coeffs)).unwrap();
        let s = FractionalOrder::new(s).unwrap();
        let lhs = sobolev_norm(&apply_fractional_laplacian(&c, s.half()), 0.0).unwrap().powi(2);
        let rhs = b.lambda_min().powf(s.value()) * sobolev_norm(&c, 0.0).unwrap().powi(2);
        prop_assert!(lhs >= rhs * (1.0 - 1e-14));
    }

    #[test]
    fn time_derivative_lowers_zm_order(seed in 0u64..1000, m in 1usize..4) {
        let b = basis_1d(8);
        let tg = TimeGrid::new(1.5, 40).unwrap();
        let coeffs = Array2::from_shape_fn((tg.n_times(), 8), |(n, k)| {
            let t = tg.time(n);
            ((seed as f64 + 1.0) * 0.37 * (k as f64 + 1.0) + 2.0 * t).sin() / (k as f64 + 1.0)
        });
        let u = TimeSeriesField::new(b, tg, coeffs).unwrap();
        let d = fracwave::spectral::TimeStencil::first_derivative(tg).unwrap();
        let du = TimeSeriesField { coeffs: d.apply(&u.coeffs), ..u.clone() };
        prop_assert!(zm_norm(&du, m - 1).unwrap() <= zm_norm(&u, m).unwrap() * (1.0 + 1e-14));
    }
}

/// `sum lambda_k c_k^2` against `int |u'|^2` of the continuous expansion,
/// integrated with composite Gauss-Legendre independent of the basis code.
#[test]
fn h1_norm_matches_gradient_quadrature() {
    let b = basis_1d(12);
    let coeffs: Vec<f64> = (0..12)
        .map(|k| ((k * 7 + 3) as f64).sin() / (1.0 + k as f64))
        .collect();
    let c = SpectralField::new(b.clone(), Array1::from(coeffs.clone())).unwrap();
    let amp = (2.0 / PI).sqrt();
    let du = |x: f64| -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, ck)| {
                let k = (i + 1) as f64;
                ck * amp * k * (k * x).cos()
            })
            .sum()
    };
    let rule = fracwave::spectral::quadrature::GaussLegendre::<f64>::new(32).unwrap();
    let panels = 64;
    let h = PI / panels as f64;
    let grad_sq: f64 = (0..panels)
        .map(|p| rule.integrate(p as f64 * h, (p + 1) as f64 * h, &|x| du(x).powi(2)))
        .sum();
    let spectral = sobolev_norm(&c, 1.0).unwrap().powi(2);
    assert!((grad_sq - spectral).abs() < 1e-11 * spectral);
}

#[test]
fn semigroup_oracle_matches_closed_form_over_wide_range() {
    let q = QuadratureConfig::default();
    for s in [0.25, 0.5, 0.75] {
        let order = FractionalOrder::new(s).unwrap();
        for lambda in [1.0, 2.0, 9.0, 37.5, 400.0, 4096.0, 1e4] {
            let got = semigroup_multiplier(lambda, order, &q).unwrap();
            let want = f64::powf(lambda, s);
            assert!(
                ((got - want) / want).abs() <= 1e-6,
                "s={s} lambda={lambda}: {got} vs {want}"
            );
        }
    }
}
