use std::f64::consts::PI;
use std::sync::Arc;

use fracwave::forward::{solve_linear, solve_nonlinear, SolveConfig};
use fracwave::inversion::{
    kappa_forward_map, reconstruct_kappa, synthetic_pair_data, uniqueness_experiment,
    KappaForwardMap, PairDatum,
};
use fracwave::kappa::{KappaBasis, KappaField};
use fracwave::lsq::{CgConfig, LinearMap};
use fracwave::runge::{
    adjoint_restriction, design_source, forward_restriction, RestrictionOperator, RungeProblem,
};
use fracwave::spectral::{build_basis, DomainSpec, FractionalOrder, TimeGrid};
use fracwave::sts::{
    cross_linearization, first_linearization, source_bump, source_to_solution, BumpSpec,
    CrossStencil, MeasurementWindow, RestrictedSeries,
};
use fracwave::vector::{Stack, Vector};
use fracwave::{Basis64, Error, Series64};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    basis: Arc<Basis64>,
    window: MeasurementWindow,
    cfg: SolveConfig<f64>,
    s: FractionalOrder<f64>,
}

fn setup(steps: usize) -> Setup {
    let basis = Arc::new(build_basis(&DomainSpec::interval(PI, 32).unwrap()).unwrap());
    let window = MeasurementWindow::left_fraction(basis.domain(), 1.0 / 6.0).unwrap();
    let mut cfg = SolveConfig::new(TimeGrid::new(4.0, steps).unwrap());
    cfg.picard_tol = 1e-13;
    cfg.picard_max_iter = 100;
    Setup {
        basis,
        window,
        cfg,
        s: FractionalOrder::new(0.5).unwrap(),
    }
}

impl Setup {
    fn bump(&self, t_center: f64, shift: f64, amplitude: f64) -> Series64 {
        let (lo, hi) = self.window.node_span(self.basis.domain(), 0);
        let spec = BumpSpec {
            center: [(lo + hi) / 2.0 + shift, 0.0],
            t_center,
            radius: [0.3 * (hi - lo), 1.0],
            t_radius: 0.7,
            amplitude,
        };
        source_bump(&spec, &self.window, &self.basis, self.cfg.time).unwrap()
    }

    fn pairs(&self, n: usize, amplitude: f64) -> Vec<(Series64, Series64)> {
        (0..n)
            .map(|i| {
                let tc = 0.8 + 0.2 * i as f64;
                (
                    self.bump(tc, 0.0, amplitude),
                    self.bump(tc + 0.3, 0.01, amplitude),
                )
            })
            .collect()
    }
}

fn kappa() -> KappaField<f64> {
    KappaField::SinMode {
        amplitude: 0.3,
        mode: [1, 1],
    }
}

fn random_like(template: &RestrictedSeries<f64>, rng: &mut ChaCha8Rng) -> RestrictedSeries<f64> {
    let mut r = template.clone();
    r.values = Array2::from_shape_fn(r.values.raw_dim(), |_| rng.gen_range(-1.0..1.0));
    r
}

fn rel(a: &Series64, b: &Series64) -> f64 {
    a.lin_comb(1.0, b, -1.0).norm() / b.norm().max(f64::MIN_POSITIVE)
}

#[test]
fn window_map_is_deterministic() {
    let p = setup(128);
    let f = p.bump(1.0, 0.0, 5.0);
    let a = source_to_solution(&kappa(), &f, &p.window, p.s, &p.cfg).unwrap();
    let b = source_to_solution(&kappa(), &f, &p.window, p.s, &p.cfg).unwrap();
    assert_eq!(a.values, b.values);
}

#[test]
fn window_map_with_zero_kappa_is_linear_restriction() {
    let p = setup(128);
    let f = p.bump(1.0, 0.0, 5.0);
    let a = source_to_solution(&KappaField::Constant(0.0), &f, &p.window, p.s, &p.cfg).unwrap();
    let b = p
        .window
        .restrict(&solve_linear(&f, p.s, &p.cfg).unwrap())
        .unwrap();
    assert_eq!(a.values, b.values);
}

#[test]
fn source_off_window_is_rejected() {
    let p = setup(128);
    let f = p.bump(1.0, 0.0, 5.0);
    let outside = fracwave::spectral::TimeSeriesField::separable(
        &fracwave::spectral::SpectralField::unit(p.basis.clone(), 0),
        p.cfg.time,
        |t| t,
    );
    let bad = f.lin_comb(1.0, &outside, 1.0);
    assert!(matches!(
        source_to_solution(&kappa(), &bad, &p.window, p.s, &p.cfg),
        Err(Error::Support(_))
    ));
}

#[test]
fn first_linearization_exact_for_zero_kappa() {
    let p = setup(128);
    let f = p.bump(1.0, 0.0, 5.0);
    let w = solve_linear(&f, p.s, &p.cfg).unwrap();
    let r = first_linearization(
        &KappaField::Constant(0.0),
        &f,
        &[1e-2, 5e-3, 2.5e-3],
        p.s,
        &p.cfg,
    )
    .unwrap();
    for e in &r.estimates {
        assert!(rel(e, &w) <= 1e-12);
    }
    assert!(rel(&r.field, &w) <= 1e-12);
}

#[test]
fn first_linearization_is_central_difference() {
    let p = setup(128);
    let f = p.bump(1.0, 0.0, 5.0);
    let eps = 1e-2;
    let r = first_linearization(&kappa(), &f, &[eps, eps / 2.0], p.s, &p.cfg).unwrap();
    let up = solve_nonlinear(&kappa(), &f.scaled(eps), p.s, &p.cfg)
        .unwrap()
        .u;
    let down = solve_nonlinear(&kappa(), &f.scaled(-eps), p.s, &p.cfg)
        .unwrap()
        .u;
    let manual = up.lin_comb(0.5 / eps, &down, -0.5 / eps);
    assert!(rel(&r.estimates[0], &manual) <= 1e-10);
    // swapping the sign of the source negates the estimate
    let neg =
        first_linearization(&kappa(), &f.scaled(-1.0), &[eps, eps / 2.0], p.s, &p.cfg).unwrap();
    assert!(rel(&neg.estimates[0], &manual.scaled(-1.0)) <= 1e-10);
}

#[test]
fn cross_linearization_zero_kappa_vanishes() {
    let p = setup(128);
    let (f1, f2) = p.pairs(1, 5.0).remove(0);
    for stencil in [CrossStencil::Plain, CrossStencil::Symmetric] {
        let c = cross_linearization(
            &KappaField::Constant(0.0),
            &f1,
            &f2,
            5e-3,
            5e-3,
            stencil,
            p.s,
            &p.cfg,
        )
        .unwrap();
        assert!(
            c.field.max_abs() <= 1e-12,
            "{stencil:?}: {}",
            c.field.max_abs()
        );
        assert!(c.richardson_error >= 0.0);
    }
}

#[test]
fn cross_linearization_symmetric_in_sources() {
    let p = setup(128);
    let (f1, f2) = p.pairs(1, 5.0).remove(0);
    for stencil in [CrossStencil::Plain, CrossStencil::Symmetric] {
        let a = cross_linearization(&kappa(), &f1, &f2, 5e-3, 5e-3, stencil, p.s, &p.cfg).unwrap();
        let b = cross_linearization(&kappa(), &f2, &f1, 5e-3, 5e-3, stencil, p.s, &p.cfg).unwrap();
        assert!(
            rel(&a.field, &b.field) <= 1e-10,
            "{stencil:?}: {:.2e}",
            rel(&a.field, &b.field)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn restriction_adjoint_identity(seed in any::<u64>()) {
        let p = setup(96);
        let op = RestrictionOperator::new(&p.basis, &p.window, p.s, &p.cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = random_like(&op.zero_source(), &mut rng);
        f.mask_time_interior();
        let g = random_like(&op.zero_target(), &mut rng);
        let gap = (op.apply(&f).unwrap().inner(&g) - f.inner(&op.adjoint(&g).unwrap())).abs();
        prop_assert!(gap <= 1e-8 * f.norm() * g.norm());
    }

    #[test]
    fn restriction_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let p = setup(96);
        let op = RestrictionOperator::new(&p.basis, &p.window, p.s, &p.cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_like(&op.zero_source(), &mut rng);
        let g = random_like(&op.zero_source(), &mut rng);
        let lhs = op.apply(&f.lin_comb(a, &g, b)).unwrap();
        let rhs = op.apply(&f).unwrap().lin_comb(a, &op.apply(&g).unwrap(), b);
        prop_assert!(lhs.lin_comb(1.0, &rhs, -1.0).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn mask_is_idempotent(seed in any::<u64>()) {
        let p = setup(96);
        let op = RestrictionOperator::new(&p.basis, &p.window, p.s, &p.cfg).unwrap();
        let mut f = random_like(&op.zero_source(), &mut ChaCha8Rng::seed_from_u64(seed));
        f.mask_time_interior();
        let once = f.clone();
        f.mask_time_interior();
        prop_assert_eq!(once.values, f.values);
    }
}

#[test]
fn restriction_of_zero_is_zero() {
    let p = setup(96);
    let op = RestrictionOperator::new(&p.basis, &p.window, p.s, &p.cfg).unwrap();
    assert_eq!(op.apply(&op.zero_source()).unwrap().max_abs(), 0.0);
    let back = adjoint_restriction(&op.zero_target(), &p.basis, &p.window, p.s, &p.cfg).unwrap();
    assert_eq!(back.max_abs(), 0.0);
}

#[test]
fn bump_reaches_complement_after_travel_time() {
    let p = setup(128);
    let g = forward_restriction(&p.bump(1.0, 0.0, 1.0), &p.window, p.s, &p.cfg).unwrap();
    let late = g
        .values
        .slice(ndarray::s![100.., ..])
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(late > 1e-3, "{late}");
}

#[test]
fn design_zero_target_gives_zero_source() {
    let p = setup(96);
    let op = RestrictionOperator::new(&p.basis, &p.window, p.s, &p.cfg).unwrap();
    let sol = design_source(
        &RungeProblem {
            target: op.zero_target(),
            window: p.window.clone(),
            alpha: 1e-4,
            cg: CgConfig::new(50, 1e-10).unwrap(),
        },
        &p.basis,
        p.s,
        &p.cfg,
    )
    .unwrap();
    assert_eq!(sol.f_window.max_abs(), 0.0);
    assert_eq!(sol.f.max_abs(), 0.0);
}

#[test]
fn design_satisfies_normal_equation_and_is_masked() {
    let p = setup(96);
    let op = RestrictionOperator::new(&p.basis, &p.window, p.s, &p.cfg).unwrap();
    let g = random_like(&op.zero_target(), &mut ChaCha8Rng::seed_from_u64(5));
    let (alpha, tol) = (1e-3, 1e-9);
    let sol = design_source(
        &RungeProblem {
            target: g.clone(),
            window: p.window.clone(),
            alpha,
            cg: CgConfig::new(2000, tol).unwrap(),
        },
        &p.basis,
        p.s,
        &p.cfg,
    )
    .unwrap();
    assert!(sol.converged);
    let f = &sol.f_window;
    let atg = op.adjoint(&g).unwrap();
    let normal = op
        .adjoint(&op.apply(f).unwrap())
        .unwrap()
        .lin_comb(1.0, f, alpha)
        .lin_comb(1.0, &atg, -1.0);
    assert!(
        normal.norm() <= 1.01 * tol * atg.norm(),
        "{:.2e}",
        normal.norm() / atg.norm()
    );
    let mut remasked = f.clone();
    remasked.mask_time_interior();
    assert_eq!(&remasked.values, &f.values);
    // the spectral source lives on W only
    let grid = sol.f.to_grid_series();
    let off = RestrictedSeries::from_grid(&grid, Arc::new(p.window.complement()));
    assert!(off.max_abs() <= 1e-12 * sol.f.max_abs().max(1.0));
}

fn datum(p: &Setup, f1: &Series64, f2: &Series64) -> PairDatum<f64> {
    synthetic_pair_data(
        &KappaField::Constant(0.0),
        &[(f1.clone(), f2.clone())],
        &p.window,
        p.s,
        &p.cfg,
    )
    .unwrap()
    .remove(0)
}

#[test]
fn kappa_map_zero_coefficients_give_zero() {
    let p = setup(96);
    let kb = KappaBasis::new(&p.basis, 4, 0).unwrap();
    let (f1, f2) = p.pairs(1, 5.0).remove(0);
    let v =
        kappa_forward_map(&[0.0; 4], &kb, &datum(&p, &f1, &f2), &p.window, p.s, &p.cfg).unwrap();
    assert_eq!(v.max_abs(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn kappa_map_superposition(c1 in prop::collection::vec(-1.0f64..1.0, 4), c2 in prop::collection::vec(-1.0f64..1.0, 4), a in -2.0f64..2.0) {
        let p = setup(96);
        let kb = KappaBasis::new(&p.basis, 4, 0).unwrap();
        let (f1, f2) = p.pairs(1, 5.0).remove(0);
        let d = datum(&p, &f1, &f2);
        let map = |c: &[f64]| kappa_forward_map(c, &kb, &d, &p.window, p.s, &p.cfg).unwrap();
        let mix: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| a * x + y).collect();
        let lhs = map(&mix);
        let rhs = map(&c1).lin_comb(a, &map(&c2), 1.0);
        prop_assert!(lhs.lin_comb(1.0, &rhs, -1.0).norm() <= 1e-10 * rhs.norm().max(1e-300));
        let doubled: Vec<f64> = c1.iter().map(|x| 2.0 * x).collect();
        let twice = map(&c1).scaled(2.0);
        prop_assert!(map(&doubled).lin_comb(1.0, &twice, -1.0).norm() <= 1e-10 * twice.norm().max(1e-300));
    }

    #[test]
    fn kappa_map_adjoint_identity(seed in any::<u64>()) {
        let p = setup(96);
        let kb = KappaBasis::new(&p.basis, 4, 1).unwrap();
        let data: Vec<_> = p.pairs(2, 5.0).iter().map(|(a, b)| datum(&p, a, b)).collect();
        let map = KappaForwardMap::new(&data, &kb, &p.window, p.s, &p.cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..kb.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = Stack(data.iter().map(|d| random_like(&d.v_measured, &mut rng)).collect::<Vec<_>>());
        let lhs = map.apply(&c).unwrap().inner(&r);
        let rhs = c.inner(&map.adjoint(&r).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1e-300));
    }
}

#[test]
fn constant_kappa_single_mode_matches_hand_assembly() {
    // w1 = w2 = t phi_1 and kappa = c: source 2 d_t^2(c t^2 phi_1^2) = 4 c phi_1^2
    let p = setup(96);
    let phi = fracwave::spectral::SpectralField::unit(p.basis.clone(), 0);
    let w = fracwave::spectral::TimeSeriesField::separable(&phi, p.cfg.time, |t| t);
    let d = PairDatum {
        f1: w.clone(),
        f2: w.clone(),
        w1: w.clone(),
        w2: w.clone(),
        v_measured: p.window.restrict(&w).unwrap(),
        richardson_error: 0.0,
        converged: true,
    };
    let kb = KappaBasis::new(&p.basis, 1, 0).unwrap();
    let c = 0.7;
    // the first basis function is phi_1 itself, sampled on the grid
    let kappa_grid = KappaField::Coefficients {
        basis: kb.clone(),
        coeffs: vec![c],
    }
    .sample(p.basis.domain(), &p.cfg.time)
    .unwrap();
    let phi_grid = fracwave::spectral::to_grid(&phi).values;
    let mut src = fracwave::spectral::GridSeries::zeros(p.basis.domain().clone(), p.cfg.time);
    for n in 0..p.cfg.time.n_times() {
        for j in 0..phi_grid.len() {
            src.values[[n, j]] = 4.0 * kappa_grid.value[[n, j]] * phi_grid[j] * phi_grid[j];
        }
    }
    let expect = p
        .window
        .restrict(&solve_linear(&src.to_spectral(&p.basis).unwrap(), p.s, &p.cfg).unwrap())
        .unwrap();
    let got = kappa_forward_map(&[c], &kb, &d, &p.window, p.s, &p.cfg).unwrap();
    let err = got.lin_comb(1.0, &expect, -1.0).norm() / expect.norm();
    assert!(err <= 1e-10, "{err:.2e}");
}

#[test]
fn reconstruction_of_zero_data_is_zero() {
    let p = setup(96);
    let kb = KappaBasis::new(&p.basis, 4, 0).unwrap();
    let mut data: Vec<_> = p
        .pairs(2, 5.0)
        .iter()
        .map(|(a, b)| datum(&p, a, b))
        .collect();
    for d in &mut data {
        d.v_measured.values.fill(0.0);
    }
    let r = reconstruct_kappa(
        &data,
        &kb,
        &p.window,
        1e-8,
        &CgConfig::new(100, 1e-10).unwrap(),
        p.s,
        &p.cfg,
    )
    .unwrap();
    assert!(r.coeffs.iter().all(|c| *c == 0.0));
}

#[test]
fn synthetic_data_start_at_zero_and_vanish_for_zero_kappa() {
    let p = setup(96);
    let sources = p.pairs(2, 5.0);
    for d in synthetic_pair_data(&kappa(), &sources, &p.window, p.s, &p.cfg).unwrap() {
        assert!(d.v_measured.values.row(0).iter().all(|v| *v == 0.0));
        assert!(d.v_measured.max_abs() > 0.0);
    }
    for d in
        synthetic_pair_data(&KappaField::Constant(0.0), &sources, &p.window, p.s, &p.cfg).unwrap()
    {
        assert_eq!(d.v_measured.max_abs(), 0.0);
    }
}

#[test]
fn reconstruction_stationary_and_misfit_monotone_in_pairs() {
    let p = setup(128);
    let kb = KappaBasis::new(&p.basis, 4, 0).unwrap();
    let truth = KappaField::Coefficients {
        basis: kb.clone(),
        coeffs: vec![0.1, -0.05, 0.02, 0.01],
    };
    let sources = p.pairs(6, 50.0);
    let data = synthetic_pair_data(&truth, &sources, &p.window, p.s, &p.cfg).unwrap();
    let cg = CgConfig::new(400, 1e-10).unwrap();
    let mut previous = f64::INFINITY;
    for n in [2, 4, 6] {
        let r = reconstruct_kappa(&data[..n], &kb, &p.window, 1e-8, &cg, p.s, &p.cfg).unwrap();
        if r.converged {
            assert!(r.gradient_norm <= cg.tol);
        }
        let avg = r.data_misfit.iter().sum::<f64>() / n as f64;
        let scale = data[..n].iter().map(|d| d.v_measured.norm()).sum::<f64>() / n as f64;
        assert!(
            avg / scale <= previous * (1.0 + 1e-6) + 1e-12,
            "{n} pairs: {:.3e} after {previous:.3e}",
            avg / scale
        );
        previous = avg / scale;
    }
}

#[test]
fn uniqueness_rejects_kappas_that_differ_on_window() {
    let p = setup(96);
    let f = p.bump(1.0, 0.0, 1.0);
    let r = uniqueness_experiment(
        &KappaField::Constant(0.1),
        &KappaField::Constant(0.2),
        &[f],
        &p.window,
        p.s,
        &p.cfg,
        None,
        &p.basis,
    );
    assert!(matches!(r, Err(Error::Hypothesis(_))));
}
