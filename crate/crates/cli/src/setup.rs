//! Building domains, windows, coefficients and sources from a config.

use std::sync::Arc;

use fracwave::forward::SolveConfig;
use fracwave::kappa::{KappaField, TimeProfile};
use fracwave::lsq::CgConfig;
use fracwave::spectral::{
    build_basis, DomainSpec, FractionalOrder, GridSeries, SpectralField, TimeGrid, TimeSeriesField,
};
use fracwave::sts::{source_bump, BumpSpec, CrossStencil, MeasurementWindow};
use fracwave::{Basis64, Series64};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RawConfig;
use crate::error::{Result, Stage};
use crate::fieldio::read_field;

pub struct Common {
    pub basis: Arc<Basis64>,
    pub cfg: SolveConfig<f64>,
    pub s: FractionalOrder<f64>,
    pub seed: u64,
}

impl Common {
    pub fn domain(&self) -> &DomainSpec<f64> {
        self.basis.domain()
    }

    pub fn time(&self) -> TimeGrid<f64> {
        self.cfg.time
    }
}

pub fn common(c: &RawConfig, check_cfl: bool) -> Result<Common> {
    let nodes = c
        .opt_usize_list("domain.nodes")?
        .unwrap_or_else(|| vec![64]);
    let lengths = c
        .opt_f64_list("domain.length")?
        .unwrap_or_else(|| vec![std::f64::consts::PI; nodes.len()]);
    let domain = DomainSpec::new(lengths, nodes)
        .map_err(|e| c.field_error("domain.nodes", e.to_string()))?;
    let basis = Arc::new(build_basis(&domain).stage("basis")?);
    let time = TimeGrid::new(c.f64_or("time.final", 4.0)?, c.usize_or("time.steps", 256)?)
        .map_err(|e| c.field_error("time.steps", e.to_string()))?;
    let s = FractionalOrder::new(c.f64_or("order.s", 0.5)?)
        .map_err(|e| c.field_error("order.s", e.to_string()))?;
    let mut cfg = SolveConfig::new(time);
    cfg.cfl_safety = c.f64_or("solve.cfl_safety", cfg.cfl_safety)?;
    cfg.picard_tol = c.f64_or("solve.picard_tol", cfg.picard_tol)?;
    cfg.picard_max_iter = c.usize_or("solve.picard_max_iter", cfg.picard_max_iter)?;
    cfg.coefficient_floor = c.f64_or("solve.coefficient_floor", cfg.coefficient_floor)?;
    cfg.inner_tol = c.f64_or("solve.inner_tol", cfg.inner_tol)?;
    cfg.inner_max_iter = c.usize_or("solve.inner_max_iter", cfg.inner_max_iter)?;
    cfg.validate().stage("solver settings")?;
    if check_cfl {
        cfg.check_cfl(&basis, 1.0).stage("time grid")?;
    }
    let seed = c.opt_parse("seed", "an unsigned integer")?.unwrap_or(0);
    Ok(Common {
        basis,
        cfg,
        s,
        seed,
    })
}

pub fn window(c: &RawConfig, domain: &DomainSpec<f64>) -> Result<MeasurementWindow> {
    if let Some(frac) = c.opt_f64("window.fraction")? {
        return MeasurementWindow::left_fraction(domain, frac)
            .map_err(|e| c.field_error("window.fraction", e.to_string()));
    }
    match (
        c.opt_f64_list("window.lower")?,
        c.opt_f64_list("window.upper")?,
    ) {
        (Some(lo), Some(hi)) => MeasurementWindow::from_box(domain, &lo, &hi)
            .map_err(|e| c.field_error("window.lower", e.to_string())),
        _ => Err(c.field_error(
            "window.fraction",
            "give window.fraction or window.lower and window.upper",
        )),
    }
}

pub fn has_window(c: &RawConfig) -> bool {
    c.has("window.fraction") || c.has("window.lower") || c.has("window.upper")
}

fn point(c: &RawConfig, key: &str, dim: usize, default: Option<[f64; 2]>) -> Result<[f64; 2]> {
    match c.opt_f64_list(key)? {
        None => default.ok_or_else(|| c.missing(key)),
        Some(v) if v.len() == dim => Ok([v[0], v.get(1).copied().unwrap_or(0.0)]),
        Some(v) => Err(c.field_error(key, format!("expected {dim} coordinates, got {}", v.len()))),
    }
}

fn spatial_kappa(c: &RawConfig, p: &str, kind: &str, dim: usize) -> Result<KappaField<f64>> {
    let key = |k: &str| format!("{p}.{k}");
    let amplitude = c.f64_or(&key("amplitude"), 0.1)?;
    Ok(match kind {
        "sin" => {
            let m = c
                .opt_usize_list(&key("mode"))?
                .unwrap_or_else(|| vec![1; dim]);
            if m.len() != dim || m.contains(&0) {
                return Err(c.field_error(
                    &key("mode"),
                    format!("expected {dim} positive mode indices"),
                ));
            }
            KappaField::SinMode {
                amplitude,
                mode: [m[0], m.get(1).copied().unwrap_or(1)],
            }
        }
        "gaussian" => KappaField::GaussianBump {
            amplitude,
            center: point(c, &key("center"), dim, None)?,
            width: c.req_f64(&key("width"))?,
        },
        "smooth-bump" => KappaField::SmoothBump {
            amplitude,
            center: point(c, &key("center"), dim, None)?,
            radius: c.req_f64(&key("radius"))?,
        },
        _ => unreachable!("kind checked by caller"),
    })
}

/// A coefficient from the `<prefix>.*` keys, or `None` without `<prefix>.kind`.
pub fn kappa(c: &RawConfig, p: &str, cm: &Common) -> Result<Option<KappaField<f64>>> {
    let kinds = [
        "zero",
        "constant",
        "sin",
        "gaussian",
        "smooth-bump",
        "separable",
        "file",
    ];
    let kind_key = format!("{p}.kind");
    if !c.has(&kind_key) {
        return Ok(None);
    }
    let key = |k: &str| format!("{p}.{k}");
    let dim = cm.domain().dim();
    let mut field = match c.choice(&kind_key, &kinds, None)? {
        "zero" => KappaField::Constant(0.0),
        "constant" => KappaField::Constant(c.req_f64(&key("value"))?),
        k @ ("sin" | "gaussian" | "smooth-bump") => spatial_kappa(c, p, k, dim)?,
        "separable" => {
            let spatial = c.choice(&key("spatial"), &["sin", "gaussian", "smooth-bump"], None)?;
            KappaField::Separable {
                spatial: Box::new(spatial_kappa(c, p, spatial, dim)?),
                profile: TimeProfile {
                    offset: c.f64_or(&key("time.offset"), 1.0)?,
                    slope: c.f64_or(&key("time.slope"), 0.0)?,
                    amplitude: c.f64_or(&key("time.amplitude"), 0.0)?,
                    omega: c.f64_or(&key("time.omega"), 0.0)?,
                },
            }
        }
        _ => {
            let rel = c
                .opt_str(&key("file"))
                .ok_or_else(|| c.missing(&key("file")))?;
            let g = read_field(&c.base_dir().join(rel))?;
            if g.domain != *cm.domain() || g.time != cm.time() {
                return Err(c.field_error(
                    &key("file"),
                    "field grid does not match domain and time settings",
                ));
            }
            KappaField::Grid(g)
        }
    };
    if let Some(size) = c.opt_f64(&key("l2_size"))? {
        let g = field.sample(cm.domain(), &cm.time()).stage("kappa")?.value;
        let row = g.row(0);
        let norm = (row.dot(&row) * cm.domain().cell_volume()).sqrt();
        if norm == 0.0 {
            return Err(c.field_error(
                &key("l2_size"),
                "cannot rescale a coefficient that vanishes at t = 0",
            ));
        }
        field = rescale(c, p, cm, size / norm)?;
    }
    Ok(Some(field))
}

/// Re-reads the spatial preset with its amplitude multiplied by `factor`.
fn rescale(c: &RawConfig, p: &str, cm: &Common, factor: f64) -> Result<KappaField<f64>> {
    let key = |k: &str| format!("{p}.{k}");
    let dim = cm.domain().dim();
    let kind = c.raw(&key("kind")).unwrap_or_default().to_string();
    let base = match kind.as_str() {
        "sin" | "gaussian" | "smooth-bump" => spatial_kappa(c, p, &kind, dim)?,
        _ => {
            return Err(c.field_error(
                &key("l2_size"),
                "only sin, gaussian and smooth-bump can be rescaled",
            ))
        }
    };
    Ok(match base {
        KappaField::SinMode { amplitude, mode } => KappaField::SinMode {
            amplitude: amplitude * factor,
            mode,
        },
        KappaField::GaussianBump {
            amplitude,
            center,
            width,
        } => KappaField::GaussianBump {
            amplitude: amplitude * factor,
            center,
            width,
        },
        KappaField::SmoothBump {
            amplitude,
            center,
            radius,
        } => KappaField::SmoothBump {
            amplitude: amplitude * factor,
            center,
            radius,
        },
        other => other,
    })
}

pub fn kappa_bounded(c: &RawConfig, p: &str, k: &KappaField<f64>, cm: &Common) -> Result<()> {
    let bound = c.f64_or(&format!("{p}.max"), 0.5)?;
    k.check_bounded(cm.domain(), &cm.time(), bound)
        .stage("kappa")
}

/// Bump geometry in the window, defaulting to its span.
pub struct BumpLayout {
    pub center: [f64; 2],
    pub radius: [f64; 2],
}

pub fn window_layout(w: &MeasurementWindow, cm: &Common, radius_fraction: f64) -> BumpLayout {
    let d = cm.domain();
    let mut center = [0.0; 2];
    let mut radius = [1.0; 2];
    for axis in 0..d.dim() {
        let (lo, hi) = w.node_span(d, axis);
        center[axis] = 0.5 * (lo + hi);
        radius[axis] = radius_fraction * 0.5 * (hi - lo);
    }
    BumpLayout { center, radius }
}

pub fn bump_in_window(
    spec: &BumpSpec<f64>,
    w: &MeasurementWindow,
    cm: &Common,
) -> fracwave::Result<Series64> {
    source_bump(spec, w, &cm.basis, cm.time())
}

/// A source from `<prefix>.*`. Bumps are checked against the window when one
/// is given.
pub fn source(
    c: &RawConfig,
    p: &str,
    cm: &Common,
    w: Option<&MeasurementWindow>,
) -> Result<Series64> {
    let key = |k: &str| format!("{p}.{k}");
    let dim = cm.domain().dim();
    let time = cm.time();
    let amplitude = c.f64_or(&key("amplitude"), 1.0)?;
    match c.choice(&key("kind"), &["zero", "bump", "mode", "random"], None)? {
        "zero" => Ok(TimeSeriesField::zeros(cm.basis.clone(), time)),
        "bump" => {
            let layout = w.map(|w| window_layout(w, cm, 0.7));
            let radius = match c.opt_f64_list(&key("radius"))? {
                Some(r) if r.len() == 1 => [r[0], r[0]],
                Some(r) if r.len() == dim => [r[0], r[1]],
                Some(_) => {
                    return Err(c.field_error(&key("radius"), format!("expected 1 or {dim} radii")))
                }
                None => layout
                    .as_ref()
                    .map(|l| l.radius)
                    .ok_or_else(|| c.missing(&key("radius")))?,
            };
            let spec = BumpSpec {
                center: point(c, &key("center"), dim, layout.as_ref().map(|l| l.center))?,
                t_center: c.f64_or(&key("t_center"), 1.0)?,
                radius,
                t_radius: c.f64_or(&key("t_radius"), 0.7)?,
                amplitude,
            };
            match w {
                Some(w) => bump_in_window(&spec, w, cm).stage(&format!("{p} support")),
                None => {
                    GridSeries::from_fn(cm.domain().clone(), time, |x, t| spec.value(x, t, dim))
                        .to_spectral(&cm.basis)
                        .stage(p)
                }
            }
        }
        "mode" => {
            let m = c.usize_or(&key("mode"), 1)?;
            if m == 0 || m > cm.basis.n_modes() {
                return Err(c.field_error(
                    &key("mode"),
                    format!("mode must lie in 1..={}", cm.basis.n_modes()),
                ));
            }
            let omega = c.f64_or(&key("omega"), 1.0)?;
            let phi = SpectralField::unit(cm.basis.clone(), m - 1);
            Ok(TimeSeriesField::separable(&phi, time, |t| {
                amplitude * (omega * t).sin()
            }))
        }
        _ => {
            // sum_{k, p} a_kp phi_k t^p (T - t), a_kp uniform in (-1, 1)
            let modes = c.usize_or(&key("modes"), 4)?.clamp(1, cm.basis.n_modes());
            let mut rng = ChaCha8Rng::seed_from_u64(cm.seed);
            let a: Vec<[f64; 3]> = (0..modes)
                .map(|_| {
                    [
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ]
                })
                .collect();
            let tf = time.t_final();
            let coeffs = Array2::from_shape_fn((time.n_times(), cm.basis.n_modes()), |(n, k)| {
                let t = time.time(n);
                a.get(k)
                    .map(|r| amplitude * (r[0] + r[1] * t + r[2] * t * t) * (tf - t))
                    .unwrap_or(0.0)
            });
            TimeSeriesField::new(cm.basis.clone(), time, coeffs).stage(p)
        }
    }
}

pub fn stencil(c: &RawConfig, key: &str, default: &'static str) -> Result<CrossStencil> {
    Ok(
        match c.choice(key, &["plain", "symmetric"], Some(default))? {
            "plain" => CrossStencil::Plain,
            _ => CrossStencil::Symmetric,
        },
    )
}

pub fn cg(c: &RawConfig, max_iter: usize, tol: f64) -> Result<CgConfig<f64>> {
    CgConfig::new(
        c.usize_or("cg.max_iter", max_iter)?,
        c.f64_or("cg.tol", tol)?,
    )
    .map_err(|e| c.field_error("cg.tol", e.to_string()))
}

/// Bump sources at `t_start + i t_step` in the window, from `<prefix>.*`.
pub struct Train {
    pub count: usize,
    pub amplitude: f64,
    pub radius_fraction: f64,
    pub t_radius: f64,
    pub t_start: f64,
    pub t_step: f64,
}

pub fn train(c: &RawConfig, p: &str, count: usize, amplitude: f64, t_step: f64) -> Result<Train> {
    let key = |k: &str| format!("{p}.{k}");
    let count = c.usize_or(&key("count"), count)?;
    if count == 0 {
        return Err(c.field_error(&key("count"), "need at least one source"));
    }
    Ok(Train {
        count,
        amplitude: c.f64_or(&key("amplitude"), amplitude)?,
        radius_fraction: c.f64_or(&key("radius_fraction"), 0.7)?,
        t_radius: c.f64_or(&key("t_radius"), 0.7)?,
        t_start: c.f64_or(&key("t_start"), 0.8)?,
        t_step: c.f64_or(&key("t_step"), t_step)?,
    })
}

impl Train {
    pub fn bump(
        &self,
        w: &MeasurementWindow,
        cm: &Common,
        t_center: f64,
        shift: f64,
    ) -> fracwave::Result<Series64> {
        let layout = window_layout(w, cm, self.radius_fraction);
        let mut center = layout.center;
        center[0] += shift;
        let spec = BumpSpec {
            center,
            t_center,
            radius: layout.radius,
            t_radius: self.t_radius,
            amplitude: self.amplitude,
        };
        bump_in_window(&spec, w, cm)
    }
}
