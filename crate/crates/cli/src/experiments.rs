//! The experiment kinds: parsing and precondition checks (`prepare`), then
//! the numerical work and artifact output (`execute`).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use fracwave::forward::{energy_report, solve_linear, solve_nonlinear};
use fracwave::inversion::{
    collect_pair_data, reconstruct_kappa, relative_l2_error, synthetic_pair_data,
    uniqueness_experiment, PairingDesign,
};
use fracwave::kappa::{KappaBasis, KappaField};
use fracwave::lsq::CgConfig;
use fracwave::runge::{design_source, forward_restriction, RungeProblem};
use fracwave::spectral::{semigroup_multiplier, GridSeries, QuadratureConfig};
use fracwave::sts::{
    cross_linearization, first_linearization, second_order_source, source_to_solution,
    CrossStencil, MeasurementWindow, RestrictedSeries,
};
use fracwave::vector::Vector;
use fracwave::Series64;
use serde_json::json;

use crate::config::RawConfig;
use crate::error::{Result, Stage};
use crate::manifest::{Artifacts, RunManifest};
use crate::setup::{self, Common};

pub const KINDS: [&str; 8] = [
    "oracle-check",
    "solve-linear",
    "solve-nonlinear",
    "sts-map",
    "linearize",
    "runge-design",
    "invert",
    "uniqueness",
];

pub enum Task {
    Oracle {
        orders: Vec<f64>,
        quad: QuadratureConfig,
    },
    Linear {
        f: Series64,
    },
    Nonlinear {
        kappa: KappaField<f64>,
        f: Series64,
    },
    StsMap {
        kappa: KappaField<f64>,
        f: Series64,
        window: MeasurementWindow,
    },
    Linearize {
        kappa: KappaField<f64>,
        f1: Series64,
        f2: Series64,
        eps: Vec<f64>,
        cross_eps: f64,
        stencil: CrossStencil,
    },
    Runge {
        window: MeasurementWindow,
        target: RestrictedSeries<f64>,
        alphas: Vec<f64>,
        cg: CgConfig<f64>,
    },
    Invert {
        kappa: KappaField<f64>,
        window: MeasurementWindow,
        sources: Vec<(Series64, Series64)>,
        kappa_basis: KappaBasis,
        alpha: f64,
        eps: f64,
        stencil: CrossStencil,
        synthetic: bool,
        cg: CgConfig<f64>,
    },
    Uniqueness {
        kappa1: KappaField<f64>,
        kappa2: KappaField<f64>,
        window: MeasurementWindow,
        sources: Vec<Series64>,
        design: Option<PairingDesign<f64>>,
    },
}

pub struct Plan {
    pub kind: &'static str,
    pub common: Common,
    pub task: Task,
    pub output_dir: PathBuf,
    pub echo: BTreeMap<String, String>,
}

fn require_kappa(c: &RawConfig, cm: &Common) -> Result<KappaField<f64>> {
    let k = setup::kappa(c, "kappa", cm)?.ok_or_else(|| c.missing("kappa.kind"))?;
    setup::kappa_bounded(c, "kappa", &k, cm)?;
    Ok(k)
}

/// Parses the config and checks every precondition that does not need a solve.
pub fn prepare(c: &RawConfig, output_override: Option<PathBuf>) -> Result<Plan> {
    let kind = c.choice("experiment", &KINDS, None)?;
    let common = setup::common(c, kind != "oracle-check")?;
    let cm = &common;
    let task = match kind {
        "oracle-check" => {
            let orders = c
                .opt_f64_list("oracle.orders")?
                .unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
            for s in &orders {
                fracwave::spectral::FractionalOrder::new(*s)
                    .map_err(|e| c.field_error("oracle.orders", e.to_string()))?;
            }
            let mut quad = QuadratureConfig::default();
            quad.rel_tol = c.f64_or("oracle.rel_tol", quad.rel_tol)?;
            Task::Oracle { orders, quad }
        }
        "solve-linear" => {
            let w = if setup::has_window(c) {
                Some(setup::window(c, cm.domain())?)
            } else {
                None
            };
            Task::Linear {
                f: setup::source(c, "source", cm, w.as_ref())?,
            }
        }
        "solve-nonlinear" => {
            let w = if setup::has_window(c) {
                Some(setup::window(c, cm.domain())?)
            } else {
                None
            };
            Task::Nonlinear {
                kappa: require_kappa(c, cm)?,
                f: setup::source(c, "source", cm, w.as_ref())?,
            }
        }
        "sts-map" => {
            let window = setup::window(c, cm.domain())?;
            let f = setup::source(c, "source", cm, Some(&window))?;
            fracwave::sts::check_window_support(&f, &window).stage("source support")?;
            Task::StsMap {
                kappa: require_kappa(c, cm)?,
                f,
                window,
            }
        }
        "linearize" => {
            let w = if setup::has_window(c) {
                Some(setup::window(c, cm.domain())?)
            } else {
                None
            };
            let eps = c
                .opt_f64_list("linearize.eps")?
                .unwrap_or_else(|| vec![1e-2, 5e-3, 2.5e-3]);
            if eps.len() < 2 || eps.iter().any(|e| *e <= 0.0) {
                return Err(c.field_error("linearize.eps", "need at least two positive amplitudes"));
            }
            let cross_eps = c.f64_or("linearize.cross_eps", 5e-3)?;
            if cross_eps <= 0.0 {
                return Err(c.field_error("linearize.cross_eps", "must be positive"));
            }
            Task::Linearize {
                kappa: require_kappa(c, cm)?,
                f1: setup::source(c, "source", cm, w.as_ref())?,
                f2: setup::source(c, "source2", cm, w.as_ref())?,
                eps,
                cross_eps,
                stencil: setup::stencil(c, "linearize.stencil", "plain")?,
            }
        }
        "runge-design" => {
            let window = setup::window(c, cm.domain())?;
            let nodes = Arc::new(window.complement());
            let domain = cm.domain().clone();
            let target = match c.choice(
                "runge.target",
                &["ones", "smooth", "bump", "zero"],
                Some("smooth"),
            )? {
                "ones" => RestrictedSeries::from_grid(
                    &GridSeries::from_fn(domain, cm.time(), |_, _| 1.0),
                    nodes,
                ),
                "zero" => RestrictedSeries::zeros(cm.time(), nodes, domain.cell_volume()),
                "smooth" => {
                    let (lengths, tf) = (domain.lengths().to_vec(), cm.time().t_final());
                    let g = GridSeries::from_fn(domain, cm.time(), |x, t| {
                        let mut v = (std::f64::consts::PI * t / tf).sin();
                        for (xa, l) in x.iter().zip(&lengths) {
                            v *= (std::f64::consts::PI * xa / l).sin();
                        }
                        v
                    });
                    RestrictedSeries::from_grid(&g, nodes)
                }
                _ => {
                    // inverse crime: the image of a bump in the window
                    let f = setup::source(c, "source", cm, Some(&window))?;
                    forward_restriction(&f, &window, cm.s, &cm.cfg).stage("runge target")?
                }
            };
            let alphas = c
                .opt_f64_list("runge.alpha")?
                .unwrap_or_else(|| vec![1e-2, 1e-4, 1e-6]);
            if alphas.is_empty() || alphas.iter().any(|a| *a <= 0.0) {
                return Err(c.field_error("runge.alpha", "regularization must be positive"));
            }
            Task::Runge {
                window,
                target,
                alphas,
                cg: setup::cg(c, 2000, 1e-8)?,
            }
        }
        "invert" => {
            let window = setup::window(c, cm.domain())?;
            let tr = setup::train(c, "pairs", 10, 300.0, 0.12)?;
            let gap = c.f64_or("pairs.gap", 0.25)?;
            let gap_step = c.f64_or("pairs.gap_step", 0.03)?;
            let shift = c.f64_or("pairs.shift", 0.01)?;
            let sources = (0..tr.count)
                .map(|i| {
                    let i = i as f64;
                    let tc = tr.t_start + tr.t_step * i;
                    let mid = 0.5 * (tr.count as f64 - 1.0);
                    Ok((
                        tr.bump(&window, cm, tc, 0.0)?,
                        tr.bump(&window, cm, tc + gap + gap_step * i, shift * (i - mid))?,
                    ))
                })
                .collect::<fracwave::Result<Vec<_>>>()
                .stage("pair sources")?;
            let kappa_basis = KappaBasis::new(
                &cm.basis,
                c.usize_or("invert.modes", 8)?,
                c.usize_or("invert.time_degree", 0)?,
            )
            .map_err(|e| c.field_error("invert.modes", e.to_string()))?;
            Task::Invert {
                kappa: require_kappa(c, cm)?,
                window,
                sources,
                kappa_basis,
                alpha: c.f64_or("invert.alpha", 1e-8)?,
                eps: c.f64_or("invert.eps", 5e-3)?,
                stencil: setup::stencil(c, "invert.stencil", "symmetric")?,
                synthetic: c.choice(
                    "invert.data",
                    &["linearized", "synthetic"],
                    Some("linearized"),
                )? == "synthetic",
                cg: setup::cg(c, 500, 1e-10)?,
            }
        }
        _ => {
            let window = setup::window(c, cm.domain())?;
            let kappa1 = require_kappa(c, cm)?;
            let kappa2 = match setup::kappa(c, "perturbation", cm)? {
                Some(p) => KappaField::Sum(vec![kappa1.clone(), p]),
                None => kappa1.clone(),
            };
            setup::kappa_bounded(c, "kappa", &kappa2, cm)?;
            let tr = setup::train(c, "sources", 3, 3.0, 0.3)?;
            let sources = (0..tr.count)
                .map(|i| tr.bump(&window, cm, tr.t_start + tr.t_step * i as f64, 0.0))
                .collect::<fracwave::Result<Vec<_>>>()
                .stage("sources")?;
            let design = if c.bool_or("uniqueness.pairing", false)? {
                Some(PairingDesign {
                    alpha: c.f64_or("uniqueness.alpha", 1e-4)?,
                    cg: setup::cg(c, 2000, 1e-8)?,
                })
            } else {
                None
            };
            Task::Uniqueness {
                kappa1,
                kappa2,
                window,
                sources,
                design,
            }
        }
    };
    let configured = c
        .opt_str("output.dir")
        .map(|d| c.base_dir().join(d))
        .unwrap_or_else(|| c.base_dir().join("fracwave-out"));
    c.check_all_used()?;
    let output_dir = output_override.unwrap_or(configured);
    let mut echo = c.echo();
    echo.insert("output.dir".into(), output_dir.display().to_string());
    Ok(Plan {
        kind,
        common,
        task,
        output_dir,
        echo,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Extends a window or complement series by zero to the whole grid.
fn extended(r: &RestrictedSeries<f64>, cm: &Common) -> GridSeries<f64> {
    r.extend(cm.domain())
}

fn residual_rows(history: &[f64]) -> impl Iterator<Item = Vec<f64>> + '_ {
    history.iter().enumerate().map(|(i, r)| vec![i as f64, *r])
}

pub fn execute(plan: Plan) -> Result<RunManifest> {
    let Plan {
        kind,
        common: cm,
        task,
        output_dir,
        echo,
    } = plan;
    let mut out = Artifacts::create(&output_dir, kind, echo)?;
    let (s, cfg) = (cm.s, &cm.cfg);
    match task {
        Task::Oracle { orders, quad } => {
            let mut rows = Vec::new();
            let mut per_mode = vec![0.0f64; cm.basis.n_modes()];
            for s in &orders {
                let order = fracwave::spectral::FractionalOrder::new(*s).stage("oracle")?;
                for (k, &lambda) in cm.basis.eigenvalues().iter().enumerate() {
                    let q = semigroup_multiplier(lambda, order, &quad).stage("oracle")?;
                    let exact = lambda.powf(*s);
                    let rel = (q - exact).abs() / exact;
                    per_mode[k] = per_mode[k].max(rel);
                    rows.push(vec![(k + 1) as f64, lambda, *s, q, exact, rel]);
                }
            }
            out.lap("oracle");
            out.table(
                "oracle.csv",
                &["mode", "lambda", "s", "quadrature", "exact", "rel_error"],
                rows,
            )?;
            out.diag("orders", &orders);
            out.diag("max_rel_error", max_abs(&per_mode));
            out.diag("per_mode_max_rel_error", &per_mode);
        }
        Task::Linear { f } => {
            let u = solve_linear(&f, s, cfg).stage("solve")?;
            let e = energy_report(&u, &f, s).stage("energy")?;
            out.lap("solve");
            out.field("source.field", &f.to_grid_series())?;
            out.field("u.field", &u.to_grid_series())?;
            write_energy(&mut out, &e)?;
            out.series("snapshot", "u.field");
            out.diag("max_abs_u", u.max_abs());
            out.diag("energy_ratio", e.ratio);
        }
        Task::Nonlinear { kappa, f } => {
            let r = solve_nonlinear(&kappa, &f, s, cfg).stage("picard")?;
            out.lap("picard");
            out.field("source.field", &f.to_grid_series())?;
            out.field("u.field", &r.u.to_grid_series())?;
            out.table(
                "picard.csv",
                &["iter", "residual"],
                residual_rows(&r.residual_history),
            )?;
            out.series("residuals", "picard.csv");
            out.series("snapshot", "u.field");
            out.diag("outer_iterations", r.outer_iterations);
            out.diag("contraction_ratios", r.contraction_ratios());
            out.diag("coefficient_min", r.coefficient_min);
            out.diag("max_abs_u", r.u.max_abs());
        }
        Task::StsMap { kappa, f, window } => {
            let lw = source_to_solution(&kappa, &f, &window, s, cfg).stage("window map")?;
            let lin = window
                .restrict(&solve_linear(&f, s, cfg).stage("linear solve")?)
                .stage("restrict")?;
            out.lap("window map");
            out.field("source.field", &f.to_grid_series())?;
            out.field("lw.field", &extended(&lw, &cm))?;
            out.series("snapshot", "lw.field");
            out.diag("window_nodes", window.nodes().len());
            out.diag("max_abs", lw.max_abs());
            out.diag(
                "nonlinear_part_max_abs",
                lw.lin_comb(1.0, &lin, -1.0).max_abs(),
            );
        }
        Task::Linearize {
            kappa,
            f1,
            f2,
            eps,
            cross_eps,
            stencil,
        } => {
            let w1 = solve_linear(&f1, s, cfg).stage("linear solve")?;
            let w2 = solve_linear(&f2, s, cfg).stage("linear solve")?;
            let first =
                first_linearization(&kappa, &f1, &eps, s, cfg).stage("first linearization")?;
            out.lap("first linearization");
            let cross =
                cross_linearization(&kappa, &f1, &f2, cross_eps, cross_eps, stencil, s, cfg)
                    .stage("cross linearization")?;
            let direct = solve_linear(
                &second_order_source(&kappa, &w1, &w2).stage("second-order source")?,
                s,
                cfg,
            )
            .stage("direct solve")?;
            out.lap("cross linearization");
            let errors: Vec<f64> = first
                .estimates
                .iter()
                .map(|e| e.lin_comb(1.0, &w1, -1.0).norm())
                .collect();
            out.field("w1.field", &first.field.to_grid_series())?;
            out.field("v.field", &cross.field.to_grid_series())?;
            out.field("v_direct.field", &direct.to_grid_series())?;
            out.table(
                "first.csv",
                &["eps", "error"],
                eps.iter().zip(&errors).map(|(e, r)| vec![*e, *r]),
            )?;
            out.series("snapshot", "v.field");
            out.diag(
                "first",
                json!({
                    "eps": eps,
                    "error_vs_linear": errors,
                    "richardson_error": first.richardson_error,
                    "converged": first.converged,
                }),
            );
            out.diag(
                "cross",
                json!({
                    "eps": cross_eps,
                    "stencil": format!("{stencil:?}").to_lowercase(),
                    "distance_to_direct": cross.field.lin_comb(1.0, &direct, -1.0).norm(),
                    "direct_norm": direct.norm(),
                    "richardson_error": cross.richardson_error,
                    "converged": cross.converged,
                }),
            );
        }
        Task::Runge {
            window,
            target,
            alphas,
            cg,
        } => {
            let mut rows = Vec::new();
            let mut last = None;
            for &alpha in &alphas {
                let p = RungeProblem {
                    target: target.clone(),
                    window: window.clone(),
                    alpha,
                    cg,
                };
                let sol = design_source(&p, &cm.basis, s, cfg).stage("runge design")?;
                rows.push(vec![
                    alpha,
                    sol.final_relative_residual,
                    sol.iterations as f64,
                ]);
                last = Some(sol);
            }
            out.lap("runge design");
            let sol = last.expect("at least one alpha");
            out.field("f.field", &sol.f.to_grid_series())?;
            out.field("target.field", &extended(&target, &cm))?;
            out.table(
                "runge.csv",
                &["alpha", "relative_residual", "iterations"],
                rows.clone(),
            )?;
            out.table(
                "cg.csv",
                &["iter", "residual"],
                residual_rows(&sol.residual_history),
            )?;
            out.series("residuals", "cg.csv");
            out.series("snapshot", "f.field");
            let res: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            out.diag("alphas", &alphas);
            out.diag("relative_residuals", &res);
            out.diag("non_increasing", res.windows(2).all(|p| p[1] <= p[0]));
            out.diag("final_converged", sol.converged);
            out.diag("final_normal_residual", sol.normal_residual);
        }
        Task::Invert {
            kappa,
            window,
            sources,
            kappa_basis,
            alpha,
            eps,
            stencil,
            synthetic,
            cg,
        } => {
            let data = if synthetic {
                synthetic_pair_data(&kappa, &sources, &window, s, cfg).stage("data")?
            } else {
                collect_pair_data(&kappa, &sources, eps, stencil, &window, s, cfg).stage("data")?
            };
            out.lap("data");
            let rec = reconstruct_kappa(&data, &kappa_basis, &window, alpha, &cg, s, cfg)
                .stage("reconstruction")?;
            out.lap("reconstruction");
            let off = window.complement();
            let err_off = relative_l2_error(&rec.kappa_est, &kappa, &cm.basis, cfg, Some(&off))
                .stage("error")?;
            let err_all =
                relative_l2_error(&rec.kappa_est, &kappa, &cm.basis, cfg, None).stage("error")?;
            let sample = |k: &KappaField<f64>| -> Result<GridSeries<f64>> {
                Ok(k.sample(cm.domain(), &cm.time())
                    .stage("kappa samples")?
                    .value_series(cm.domain(), &cm.time()))
            };
            out.field("kappa_true.field", &sample(&kappa)?)?;
            out.field("kappa_est.field", &sample(&rec.kappa_est)?)?;
            out.table(
                "coefficients.csv",
                &["index", "value"],
                rec.coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| vec![i as f64, *c]),
            )?;
            out.table(
                "cg.csv",
                &["iter", "residual"],
                residual_rows(&rec.cg_residual_history),
            )?;
            out.series("residuals", "cg.csv");
            out.series("snapshot", "kappa_est.field");
            out.diag("pairs", data.len());
            out.diag("relative_l2_error_off_window", err_off);
            out.diag("relative_l2_error", err_all);
            out.diag("iterations", rec.iterations);
            out.diag("converged", rec.converged);
            out.diag("gradient_norm", rec.gradient_norm);
            out.diag("data_misfit", &rec.data_misfit);
            out.diag(
                "richardson_error",
                data.iter().map(|d| d.richardson_error).collect::<Vec<_>>(),
            );
        }
        Task::Uniqueness {
            kappa1,
            kappa2,
            window,
            sources,
            design,
        } => {
            let r = uniqueness_experiment(
                &kappa1, &kappa2, &sources, &window, s, cfg, design, &cm.basis,
            )
            .stage("uniqueness")?;
            out.lap("uniqueness");
            out.table(
                "uniqueness.csv",
                &["source", "map_difference", "window_identity_residual"],
                r.map_difference
                    .iter()
                    .zip(&r.window_identity_residual)
                    .enumerate()
                    .map(|(i, (a, b))| vec![i as f64, *a, *b]),
            )?;
            let tol = 10.0 * cfg.picard_tol;
            out.diag("map_difference", &r.map_difference);
            out.diag("window_identity_residual", &r.window_identity_residual);
            out.diag("threshold", tol);
            out.diag("detected", r.map_difference.iter().any(|d| *d > tol));
            if let Some(p) = &r.pairing {
                out.diag(
                    "pairing",
                    json!({
                        "pairing": p.pairing,
                        "pairing_by_parts": p.pairing_by_parts,
                        "target": p.target,
                        "residual_one": p.residual_one,
                        "residual_difference": p.residual_difference,
                    }),
                );
            }
        }
    }
    out.finish()
}

fn write_energy(out: &mut Artifacts, e: &fracwave::forward::EnergyReport<f64>) -> Result<()> {
    let rows = (0..e.time.len()).map(|n| {
        vec![
            e.time[n],
            e.kinetic[n],
            e.potential[n],
            e.damping_integral[n],
            e.source_integral[n],
        ]
    });
    out.table(
        "energy.csv",
        &[
            "t",
            "kinetic",
            "potential",
            "damping_integral",
            "source_integral",
        ],
        rows,
    )?;
    out.series("energy", "energy.csv");
    Ok(())
}
